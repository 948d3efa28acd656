"""
Exception hierarchy shared by the library and the command-line front end.

Every error carries the process exit code the CLI should use: 2 for invalid
input (bad parameters, malformed files, violated preconditions) and 1 for
failures that happen while computing.
"""


class ExexError(Exception):
    exit_code: int = 1


class InputError(ExexError, ValueError):
    exit_code = 2


class AlphabetError(InputError):
    pass


class ChannelError(InputError):
    pass


class CodebookError(InputError):
    pass


class PreconditionError(InputError):
    pass


class ExponentError(ExexError):
    pass


class DecodingError(ExexError):
    pass


class BudgetExceededError(DecodingError):
    # enumeration refused; rerun with Monte Carlo
    exit_code = 2


class ConstructionError(PreconditionError):
    pass


class VerificationError(ExexError):
    pass
