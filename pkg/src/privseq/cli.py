"""Command-line interface.

Subcommands cover the full pipeline: privatize raw values, compute
fixed-sample intervals or confidence sequences from record files, run
sequential tests, analyze arm-based records, tune the discrete mechanism,
and drive Monte Carlo simulations from a declarative TOML config. Every
subcommand accepts the shared flags --seed, --alpha, --epsilon,
--format {csv,json}, and --output; results stream to stdout unless --output
names a file, and file writes are atomic, so no failure leaves a partial
output behind.

Exit codes: 0 on success, 1 for input problems (bad flags, malformed files,
domain errors), 2 for unexpected internal failures.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile

import click

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .abtest import (
    ABConfig,
    ab_cs_two_sided,
    ab_lower_cs,
    privatize_pseudo_outcomes,
    weak_null_eprocess,
)
from .confseq import (
    MixtureConfig,
    gridkelly_cs,
    hoeffding_ci,
    hoeffding_cs,
    laplace_hoeffding_ci,
    laplace_hoeffding_cs,
    mixture_cs_lower,
    mixture_cs_two_sided,
    pmkelly_ci,
    sirr_lr_cs,
)
from .eprocess import NullHypothesis, eprocess_hoeffding, eprocess_mixture, test_via_cs
from .experiments import ExperimentConfig, run_experiment
from .mechanisms import (
    PrivacyParams,
    RandomSource,
    RecordBatch,
    laplace_privatize_batch,
    nprr_privatize_batch,
    r_of,
    sirr_privatize_batch,
    tune_rg,
)
from .recordio import (
    FORMATS,
    _atomic_write,
    write_ab_records,
    write_bounds,
    write_decision,
    write_interval,
    write_records,
    write_table,
    read_ab_records,
    read_records,
    read_values,
)

_CS_METHODS = {
    "nprr-hoeffding": "nprr-hoeffding",
    "nprr-hoeffding-cs": "nprr-hoeffding",
    "nprr-mixture-two-sided": "nprr-mixture-two-sided",
    "nprr-mixture-lower": "nprr-mixture-lower",
    "nprr-gridkelly": "nprr-gridkelly",
    "nprr-gridkelly-cs": "nprr-gridkelly",
    "sirr-lr": "sirr-lr",
    "sirr-lr-cs": "sirr-lr",
    "laplace-hoeffding": "laplace-hoeffding",
    "laplace-hoeffding-cs": "laplace-hoeffding",
}
_CI_METHODS = {
    "nprr-hoeffding": "nprr-hoeffding",
    "nprr-hoeffding-ci": "nprr-hoeffding",
    "nprr-pmkelly": "nprr-pmkelly",
    "nprr-pmkelly-ci": "nprr-pmkelly",
    "laplace-hoeffding": "laplace-hoeffding",
    "laplace-hoeffding-ci": "laplace-hoeffding",
}
_EPROCESS_METHODS = ("hoeffding-eprocess", "mixture-eprocess")
_AB_METHODS = {
    "lower-cs": "lower-cs",
    "ab-lower-cs": "lower-cs",
    "two-sided-cs": "two-sided-cs",
    "ab-two-sided-cs": "two-sided-cs",
    "weak-null": "weak-null",
    "ab-weak-null-eprocess": "weak-null",
}


def _shared_options(f):
    f = click.option(
        "--output", type=click.Path(dir_okay=False), default=None,
        help="Write the result to this file instead of stdout.",
    )(f)
    f = click.option(
        "--format", "fmt", type=click.Choice(FORMATS), default="csv",
        show_default=True, help="Serialization format for inputs and outputs.",
    )(f)
    f = click.option(
        "--epsilon", type=float, default=2.0, show_default=True,
        help="Privacy budget.",
    )(f)
    f = click.option(
        "--alpha", type=float, default=0.05, show_default=True,
        help="Error level for bounds and tests.",
    )(f)
    f = click.option(
        "--seed", type=int, default=0, show_default=True,
        help="Root seed for every random draw.",
    )(f)
    return f


def _deliver(output: str | None, write_fn) -> None:
    """Run write_fn(path); with no output path, stream the file to stdout."""
    if output is not None:
        write_fn(output)
        return
    with tempfile.TemporaryDirectory() as tmpdir:
        path = os.path.join(tmpdir, "out")
        write_fn(path)
        with open(path, "r") as handle:
            click.echo(handle.read(), nl=False)


def _resolve(method: str, table, what: str) -> str:
    if method not in table:
        options = sorted(set(table if isinstance(table, tuple) else table.values()))
        raise click.UsageError(f"unknown {what} method {method!r}; choose from {options}")
    return method if isinstance(table, tuple) else table[method]


def _parse_null(text: str) -> NullHypothesis:
    kind, sep, value = text.partition("=")
    syntax = "null must look like le=0.5, ge=0.5, point=0.5, or interval=0.2:0.4"
    if not sep or not value:
        raise click.UsageError(syntax)
    try:
        if kind == "interval":
            lo_text, colon, hi_text = value.partition(":")
            if not colon:
                raise click.UsageError(syntax)
            return NullHypothesis.interval(float(lo_text), float(hi_text))
        if kind in ("le", "ge", "point"):
            return getattr(NullHypothesis, kind)(float(value))
    except ValueError as exc:
        raise click.UsageError(f"bad null {text!r}: {exc}") from exc
    raise click.UsageError(syntax)


@click.group()
def cli() -> None:
    """Locally private confidence sequences, tests, and experiments."""


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--mechanism", type=click.Choice(["nprr", "sirr", "laplace"]), default="nprr",
    show_default=True, help="Privacy channel.",
)
@click.option(
    "--grid", "G", type=int, default=1, show_default=True,
    help="Output grid size G for the discrete mechanism.",
)
@click.option(
    "--pi", type=float, default=0.5, show_default=True,
    help="Assignment probability, used when the input carries an arm column.",
)
@_shared_options
def privatize(input_path, mechanism, G, pi, seed, alpha, epsilon, fmt, output) -> None:
    """Privatize raw values from INPUT_PATH into a record file.

    A plain input (column x) yields discrete or noise records per
    --mechanism. An input with an arm column (columns x, a) is transformed
    to pseudo-outcomes and privatized with the binary mechanism.
    """
    x, arms = read_values(input_path, fmt)
    rng = RandomSource(seed).generator(0)
    if arms is not None:
        config = ABConfig(pi=pi, mechanism=PrivacyParams(r=r_of(epsilon, 1), G=1), alpha=alpha)
        records = privatize_pseudo_outcomes(x, arms, config, rng)
        _deliver(output, lambda p: write_ab_records(p, records, fmt))
        return
    if mechanism == "nprr":
        records = nprr_privatize_batch(x, PrivacyParams(r=r_of(epsilon, G), G=G), rng)
    elif mechanism == "sirr":
        records = sirr_privatize_batch(x, r_of(epsilon, 1), rng)
    else:
        records = laplace_privatize_batch(x, epsilon, rng)
    _deliver(output, lambda p: write_records(p, records, fmt))


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", default="nprr-hoeffding", show_default=True)
@click.option("--n", type=int, default=None, help="Sample size (default: records read).")
@_shared_options
def ci(input_path, method, n, seed, alpha, epsilon, fmt, output) -> None:
    """Fixed-sample interval from a record file."""
    method = _resolve(method, _CI_METHODS, "interval")
    records = read_records(input_path, fmt)
    count = n if n is not None else len(records)
    if method == "nprr-hoeffding":
        interval = hoeffding_ci(records, n=count, alpha=alpha)
    elif method == "nprr-pmkelly":
        interval = pmkelly_ci(records, n=count, alpha=alpha)
    else:
        interval = laplace_hoeffding_ci(records, n=count, alpha=alpha)
    _deliver(output, lambda p: write_interval(p, interval, n=count, fmt=fmt))


def _cs_series(method, records, alpha, beta, t0):
    if method == "nprr-hoeffding":
        return hoeffding_cs(records, alpha=alpha)
    if method == "nprr-mixture-two-sided":
        return mixture_cs_two_sided(records, MixtureConfig(alpha=alpha, beta=beta, t0=t0))
    if method == "nprr-mixture-lower":
        return mixture_cs_lower(records, MixtureConfig(alpha=alpha, beta=beta, t0=t0))
    if method == "nprr-gridkelly":
        return gridkelly_cs(records, alpha=alpha)
    if method == "sirr-lr":
        return sirr_lr_cs(records, alpha=alpha)
    return laplace_hoeffding_cs(records, alpha=alpha)


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", default="nprr-hoeffding", show_default=True)
@click.option("--beta", type=float, default=None, help="Mixture scale (default: tuned).")
@click.option("--t0", type=int, default=100, show_default=True, help="Mixture tuning time.")
@_shared_options
def cs(input_path, method, beta, t0, seed, alpha, epsilon, fmt, output) -> None:
    """Confidence sequence from a record file, one row of bounds per step."""
    method = _resolve(method, _CS_METHODS, "sequence")
    records = read_records(input_path, fmt)
    series = _cs_series(method, records, alpha, beta, t0)
    _deliver(output, lambda p: write_bounds(p, series, fmt))


@cli.command("test")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", default="mixture-eprocess", show_default=True)
@click.option("--null", "null_text", default="le=0.5", show_default=True,
              help="Null set: le=V, ge=V, point=V, or interval=LO:HI.")
@click.option("--beta", type=float, default=None, help="Mixture scale (default: tuned).")
@click.option("--t0", type=int, default=100, show_default=True, help="Mixture tuning time.")
@_shared_options
def run_test(input_path, method, null_text, beta, t0, seed, alpha, epsilon, fmt, output) -> None:
    """Sequential test on a record file; reports the first rejection step.

    E-process methods need a one-sided null; confidence-sequence methods
    accept any null and reject when the bounds exclude it.
    """
    null = _parse_null(null_text)
    records = read_records(input_path, fmt)
    if method in _EPROCESS_METHODS:
        if method == "hoeffding-eprocess":
            boundary = null.one_sided_boundary
            if null.lo == boundary:
                batch = records if isinstance(records, RecordBatch) else RecordBatch.from_records(list(records))
                records = RecordBatch(z=1.0 - batch.z, r=batch.r, G=batch.G)
                boundary = 1.0 - boundary
            state = eprocess_hoeffding(records, mu0=boundary, alpha=alpha)
        else:
            state = eprocess_mixture(records, MixtureConfig(alpha=alpha, beta=beta, t0=t0), null)
        decision = state.decision(alpha)
    elif method in _CS_METHODS:
        series = _cs_series(_CS_METHODS[method], records, alpha, beta, t0)
        decision = test_via_cs(series, null, alpha)
    else:
        options = sorted(set(_CS_METHODS.values())) + list(_EPROCESS_METHODS)
        raise click.UsageError(f"unknown test method {method!r}; choose from {options}")
    _deliver(output, lambda p: write_decision(p, decision, fmt))


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", default="lower-cs", show_default=True)
@click.option("--pi", type=float, default=0.5, show_default=True, help="Assignment probability.")
@click.option("--beta", type=float, default=None, help="Mixture scale (default: tuned).")
@click.option("--t0", type=int, default=100, show_default=True, help="Mixture tuning time.")
@_shared_options
def abtest(input_path, method, pi, beta, t0, seed, alpha, epsilon, fmt, output) -> None:
    """Analyze an arm-record file: effect bounds or the weak-null test."""
    method = _resolve(method, _AB_METHODS, "arm-based")
    records = read_ab_records(input_path, fmt)
    config = ABConfig(
        pi=pi, mechanism=PrivacyParams(r=r_of(epsilon, 1), G=1), alpha=alpha, beta=beta, t0=t0
    )
    if method == "lower-cs":
        _deliver(output, lambda p: write_bounds(p, ab_lower_cs(records, config), fmt))
    elif method == "two-sided-cs":
        _deliver(output, lambda p: write_bounds(p, ab_cs_two_sided(records, config), fmt))
    else:
        decision = weak_null_eprocess(records, config).decision(alpha)
        _deliver(output, lambda p: write_decision(p, decision, fmt))


@cli.command()
@click.option(
    "--objective", type=click.Choice(["entropy", "surrogate"]), default="entropy",
    show_default=True, help="Score minimized over admissible (r, G) pairs.",
)
@_shared_options
def tune(objective, seed, alpha, epsilon, fmt, output) -> None:
    """Pick (r, G) for the discrete mechanism at the requested budget."""
    r, G = tune_rg(epsilon, objective=objective)
    achieved = PrivacyParams(r=r, G=G).epsilon

    def write_fn(path: str) -> None:
        if fmt == "csv":
            text = "r,G,epsilon\n" + f"{r!r},{G},{achieved!r}\n"
        else:
            text = json.dumps({"r": r, "G": G, "epsilon": achieved}, indent=2) + "\n"
        _atomic_write(path, text)

    _deliver(output, write_fn)


@cli.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@_shared_options
def simulate(config_path, seed, alpha, epsilon, fmt, output) -> None:
    """Run the Monte Carlo experiment described by a TOML config file.

    The file holds one [experiment] table whose keys mirror the experiment
    config fields; the shared flags fill in seed, alpha, and epsilon when
    the file leaves them out.
    """
    with open(config_path, "rb") as handle:
        try:
            payload = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise click.UsageError(f"{config_path}: invalid TOML ({exc})") from exc
    if "experiment" not in payload or not isinstance(payload["experiment"], dict):
        raise click.UsageError(f"{config_path}: expected an [experiment] table")
    table = payload["experiment"]
    valid = {field.name for field in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(table) - valid)
    if unknown:
        raise click.UsageError(
            f"{config_path}: unknown keys {unknown}; valid keys are {sorted(valid)}"
        )
    merged = {"seed": seed, "alpha": alpha, "epsilon": epsilon}
    merged.update(table)
    config = ExperimentConfig(**merged)
    result = run_experiment(config)
    _deliver(output, lambda p: write_table(p, result, fmt))


def main(argv=None) -> int:
    """Entry point mapping outcomes to exit codes 0 / 1 / 2."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ValueError, TypeError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except Exception as exc:
        click.echo(f"internal error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
