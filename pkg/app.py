from core.logger import setup_logging
from exex import cli


def main():
    setup_logging()
    cli(prog_name="exex")


# Run the command-line front end
if __name__ == "__main__":
    main()
