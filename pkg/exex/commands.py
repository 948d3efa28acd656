import functools
import math
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from core.config import CONFIG
from core.errors import BudgetExceededError, ExexError, InputError
from core.logger import get_logger, setup_logging
from modules.appendix_opt import bruteforce_minimizer, bsc_rate_zero_mmi_exponent, optimal_symmetric_params
from modules.channels import Channel, make_bsc, make_w_eps, product_prob
from modules.construction import build_y_tilde, pair_mutual_informations, partner_index
from modules.decoding import (
    Codebook,
    DecoderSpec,
    empirical_exponent,
    exact_error,
    exponent_ceiling,
    extract_constant_composition,
    mmi_floor_bound,
    monte_carlo_error,
)
from modules.exponents import (
    converse_exponent,
    critical_epsilon,
    curve_fig1,
    curve_fig2,
    expurgated_exponent,
    expurgated_exponent_family,
    nats_to,
    rate_threshold,
    rate_zero_expurgated,
    rate_zero_expurgated_general,
    rate_zero_random_coding,
    to_nats,
)

from .files import load_channel_spec, read_codebook, write_dat
from .schemas import (
    AppendixReport,
    ChannelSpec,
    CounterexampleMessage,
    CounterexampleReport,
    ExponentsReport,
    FiguresReport,
    Report,
    RunConfig,
    SimulationReport,
    ThresholdReport,
)

logger = get_logger(__name__)

UNIT = click.Choice(["nats", "bits"])


class CommandError(click.ClickException):
    def __init__(self, message: str, exit_code: int = 1):
        super().__init__(message)
        self.exit_code = exit_code


def handle_errors(fn):
    """Turn library errors into click exits carrying the error's exit code."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ExexError as e:
            raise CommandError(str(e), e.exit_code) from e
        except ValidationError as e:
            raise CommandError(f"invalid input: {e.errors()[0]['msg']}", 2) from e

    return wrapper


def _emit(report: Report) -> None:
    click.echo(report.model_dump_json(indent=2))


def _run_config(subcommand: str, **flags) -> RunConfig:
    run = RunConfig(
        subcommand=subcommand,
        unit=flags.get("unit") or "nats",
        seed=flags.get("seed"),
        output_path=flags.get("out_dir"),
        flags=flags,
    )
    logger.debug("running %s", run.model_dump_json())
    return run


def channel_options(fn):
    fn = click.option("--channel", "channel_file", type=click.Path(dir_okay=False), help="JSON channel spec.")(fn)
    fn = click.option("--eps", type=float, help="Crossover probability of the channel family.")(fn)
    fn = click.option(
        "--family", type=click.Choice(["w_eps", "w_hat_eps", "bsc"]), default="w_eps", show_default=True
    )(fn)
    return fn


def _channel(family: str, eps: Optional[float], channel_file: Optional[str]) -> ChannelSpec:
    if channel_file:
        return load_channel_spec(channel_file)
    if eps is None:
        raise InputError("give --eps with --family, or a --channel spec file")
    return ChannelSpec(family=family, eps=eps)


def _load_codebook(codebook_file: Optional[str], demo: Optional[int], ch: Channel) -> Codebook:
    if codebook_file and demo:
        raise InputError("give either --codebook or --demo, not both")
    if demo:
        return Codebook.demo(demo)
    if not codebook_file:
        raise InputError("give a --codebook file or --demo N")
    return read_codebook(codebook_file, ch.input_alphabet)


@click.group()
@click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose: bool):
    """Error exponents, counterexamples and decoder simulations for the W_ε channel family."""
    setup_logging("DEBUG" if verbose else None)


@cli.command()
@channel_options
@click.option("--rate", type=float, default=0.0, show_default=True, help="Rate, in the chosen unit per use.")
@click.option("--unit", type=UNIT, default="nats", show_default=True)
@handle_errors
def exponents(family, eps, channel_file, rate, unit):
    """Expurgated, converse and random-coding exponents of a channel."""
    _run_config("exponents", family=family, eps=eps, channel=channel_file, rate=rate, unit=unit)
    spec = _channel(family, eps, channel_file)
    ch = spec.to_channel()
    rate_nats = to_nats(rate, unit)
    if spec.family is not None:
        expurgated = expurgated_exponent_family(spec.eps, rate_nats)
        rate_zero = rate_zero_expurgated(spec.eps)
        random_coding = rate_zero_random_coding(spec.eps)
        converse = converse_exponent(spec.eps) if spec.family != "bsc" and spec.eps < 1 else None
    else:
        expurgated = expurgated_exponent(ch, rate_nats)
        rate_zero = rate_zero_expurgated_general(ch)
        random_coding = converse = None
    _emit(
        ExponentsReport(
            channel=ch.name,
            unit=unit,
            rate=rate,
            expurgated=nats_to(expurgated, unit),
            rate_zero_expurgated=nats_to(rate_zero, unit),
            converse=None if converse is None else nats_to(converse, unit),
            rate_zero_random_coding=None if random_coding is None else nats_to(random_coding, unit),
        )
    )


@cli.command()
@click.option("--eps", type=float, default=lambda: CONFIG.FIGURES.FIG2_EPS, show_default="0.001")
@click.option("--unit", type=UNIT, default="bits", show_default=True)
@handle_errors
def threshold(eps, unit):
    """Critical crossover probability and the rate below which MMI provably loses."""
    _run_config("threshold", eps=eps, unit=unit)
    _emit(
        ThresholdReport(
            eps=eps,
            unit=unit,
            critical_epsilon=critical_epsilon(),
            rate_threshold=nats_to(rate_threshold(eps), unit),
            converse=nats_to(converse_exponent(eps), unit),
            rate_zero_expurgated=nats_to(rate_zero_expurgated(eps), unit),
        )
    )


@cli.command()
@click.argument("which", type=click.Choice(["fig1", "fig2"]))
@click.option("--eps", type=float, default=lambda: CONFIG.FIGURES.FIG2_EPS, show_default="0.001", help="fig2 only.")
@click.option("--eps-max", type=float, default=None, help="fig1 only; defaults to the critical value.")
@click.option("--rate-max", type=float, default=None, help="fig2 only, in the chosen unit.")
@click.option("--points", type=int, default=None)
@click.option("--out-dir", type=click.Path(file_okay=False), default=lambda: CONFIG.FIGURES.OUTPUT_DIR)
@click.option("--unit", type=UNIT, default=None, help="Defaults to nats for fig1 and bits for fig2.")
@handle_errors
def figures(which, eps, eps_max, rate_max, points, out_dir, unit):
    """Write the plotted curves as two-column .dat files."""
    unit = unit or ("nats" if which == "fig1" else "bits")
    run = _run_config("figures", which=which, eps=eps, points=points, out_dir=Path(out_dir), unit=unit)
    crossing = None
    if which == "fig1":
        curves = curve_fig1(0.0, eps_max, points)
    else:
        if rate_max is None:
            rate_max_nats = to_nats(CONFIG.FIGURES.FIG2_RATE_MAX_BITS, "bits")
        else:
            rate_max_nats = to_nats(rate_max, unit)
        curves = curve_fig2(eps, rate_max_nats, points)
    curves = [c.to_unit(unit) for c in curves]
    if which == "fig2":
        crossing = curves[0].crossing(curves[1])
    files = [str(write_dat(run.output_path / f"{c.label}.dat", c)) for c in curves]
    _emit(FiguresReport(which=which, unit=unit, files=files, crossing=crossing))


@cli.command()
@click.option("--eps", type=float, default=lambda: CONFIG.FIGURES.FIG2_EPS, show_default="0.001")
@click.option("--codebook", "codebook_file", type=click.Path(dir_okay=False), help="One codeword per line.")
@click.option("--demo", type=int, default=None, help="Use the three-word demo codebook of this blocklength.")
@click.option("--unit", type=UNIT, default="nats", show_default=True)
@handle_errors
def counterexample(eps, codebook_file, demo, unit):
    """Construct ỹ for every codeword and bound the MMI error probability from below."""
    _run_config("counterexample", eps=eps, codebook=codebook_file, demo=demo, unit=unit)
    ch = make_w_eps(eps)
    cb = _load_codebook(codebook_file, demo, ch)
    separation = eps < critical_epsilon()
    if not separation:
        logger.warning(
            "eps=%g is not below the critical value %.6g; the separation argument does not apply",
            eps,
            critical_epsilon(),
        )
    extracted = not cb.constant_composition
    if extracted:
        sub = extract_constant_composition(cb)
        logger.warning("codebook is not constant-composition; using a %d-word subcode of %d", sub.M, cb.M)
        cb = sub

    try:
        errors = exact_error(DecoderSpec(kind="mmi"), cb, ch).per_message
    except BudgetExceededError:
        logger.warning("output space too large to enumerate; exact MMI error probabilities omitted")
        errors = [None] * cb.M

    messages = []
    for m in range(cb.M):
        partner = partner_index(cb.codewords, m)
        pair = build_y_tilde(cb[m], cb[partner])
        mi_message, mi_partner = pair_mutual_informations(pair)
        messages.append(
            CounterexampleMessage(
                message=m + 1,
                codeword=cb[m],
                partner=partner + 1,
                y_kappa=pair.y_kappa,
                y_tilde=pair.y_tilde,
                modified_index=pair.modified_index + 1,
                mi_message=nats_to(mi_message, unit),
                mi_partner=nats_to(mi_partner, unit),
                y_tilde_prob=product_prob(ch, cb[m], pair.y_tilde),
                error_prob=errors[m],
            )
        )

    ceiling = exponent_ceiling(eps, cb.n)
    expurgated = expurgated_exponent_family(eps, cb.rate)
    _emit(
        CounterexampleReport(
            eps=eps,
            n=cb.n,
            M=cb.M,
            rate=nats_to(cb.rate, unit),
            unit=unit,
            separation_applies=separation,
            extracted_subcode=extracted,
            probability_bound=mmi_floor_bound(eps, cb.n),
            exponent_ceiling=nats_to(ceiling, unit),
            expurgated_at_rate=nats_to(expurgated, unit),
            gap_to_expurgated=nats_to(ceiling - expurgated, unit),
            converse=nats_to(converse_exponent(eps), unit),
            rate_zero_separation=nats_to(rate_zero_expurgated(eps) - converse_exponent(eps), unit),
            messages=messages,
        )
    )


@cli.command()
@channel_options
@click.option("--codebook", "codebook_file", type=click.Path(dir_okay=False), help="One codeword per line.")
@click.option("--demo", type=int, default=None, help="Use the three-word demo codebook of this blocklength.")
@click.option(
    "--decoder", type=click.Choice(["ml", "mmi", "max_metric", "stochastic_metric"]), default="mmi", show_default=True
)
@click.option("--metric", type=click.Choice(["likelihood", "mmi"]), default=None, help="For metric decoders.")
@click.option("--tie-policy", type=click.Choice(["lowest_index", "error", "random"]), default="lowest_index")
@click.option("--monte-carlo", is_flag=True, help="Estimate by sampling instead of enumerating outputs.")
@click.option("--samples", type=int, default=lambda: CONFIG.DECODING.MC_SAMPLES, show_default="100000")
@click.option("--seed", type=int, default=lambda: CONFIG.DECODING.SEED, show_default="0")
@handle_errors
def simulate(family, eps, channel_file, codebook_file, demo, decoder, metric, tie_policy, monte_carlo, samples, seed):
    """Block error probabilities of a codebook under a decoder."""
    _run_config("simulate", decoder=decoder, metric=metric, tie_policy=tie_policy, samples=samples, seed=seed)
    ch = _channel(family, eps, channel_file).to_channel()
    cb = _load_codebook(codebook_file, demo, ch)
    spec = DecoderSpec(kind=decoder, metric=metric, tie_policy=tie_policy, channel=ch)
    if monte_carlo:
        report = monte_carlo_error(spec, cb, ch, samples, seed)
    else:
        try:
            report = exact_error(spec, cb, ch)
        except BudgetExceededError as e:
            raise BudgetExceededError(f"{e}; rerun with --monte-carlo") from e

    def finite(value: float) -> Optional[float]:
        return value if math.isfinite(value) else None

    _emit(
        SimulationReport(
            channel=ch.name,
            decoder=decoder,
            tie_policy=tie_policy,
            M=cb.M,
            n=cb.n,
            rate=cb.rate,
            report=report,
            empirical_exponent_average=finite(empirical_exponent(report, cb.n, "average")),
            empirical_exponent_maximal=finite(empirical_exponent(report, cb.n, "maximal")),
        )
    )


@cli.command("appendix-verify")
@click.option("--eps", type=float, default=0.1, show_default=True)
@click.option("--grid", type=int, default=lambda: CONFIG.APPENDIX.GRID_DENSITY, show_default="30")
@click.option("--sweep-q", is_flag=True, help="Grid the input distribution instead of fixing it uniform.")
@handle_errors
def appendix_verify(eps, grid, sweep_q):
    """Compare the brute-force rate-zero MMI exponent of BSC(ε) with its closed form."""
    _run_config("appendix-verify", eps=eps, grid=grid, sweep_q=sweep_q)
    if not 0.0 < eps < 1.0:
        raise InputError(f"eps out of range: {eps} is not in (0, 1)")
    result = bruteforce_minimizer(make_bsc(eps), grid_density=grid, q_fixed=None if sweep_q else 0.5)
    closed = bsc_rate_zero_mmi_exponent(eps)
    expurgated = rate_zero_expurgated(eps)
    gammas = optimal_symmetric_params(eps)
    _emit(
        AppendixReport(
            eps=eps,
            grid_density=result.grid_density,
            bruteforce=result.value,
            bruteforce_alpha=result.alpha.alpha,
            closed_form=closed,
            rate_zero_expurgated=expurgated,
            gaps={
                "bruteforce-closed_form": result.value - closed,
                "closed_form-expurgated": closed - expurgated,
                "bruteforce-expurgated": result.value - expurgated,
            },
            optimal_gammas=(gammas.gamma1, gammas.gamma2),
        )
    )
