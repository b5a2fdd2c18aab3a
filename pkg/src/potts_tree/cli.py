"""Command-line front end: threshold queries, tables, simulation runs.

Every subcommand is a thin adapter over the library; no numerics live
here.  Output is machine readable (JSON objects or CSV rows) with a
configurable number of significant digits.  The environment variable
POTTS_TREE_THREADS caps the worker count of the Monte-Carlo engine; it
affects speed only, never output.
"""

from __future__ import annotations

import csv
import dataclasses
import functools
import io
import json
import math
import sys
from dataclasses import dataclass

import click

from .broadcast import entropy_mc, root_deviation_probe
from .core import PottsChannel, beta_of_epsilon, lambda_of_epsilon
from .thresholds import (
    DEFAULT_SETTINGS,
    SWEEP_SETTINGS,
    OptimizerSettings,
    SolverError,
    cbar,
    chat,
    ferro_threshold,
    kesten_stigum,
    reproduce_table2,
    threshold_report,
)
from .tree import (
    OffspringDistribution,
    TreeBudgetError,
    galton_watson_tree,
    regular_tree,
    tree_to_text,
)

# Published simulation estimates of the exact-reconstruction noise threshold
# for q = 5 (total flip probability per edge).  Quoted third-party data,
# shipped as-is and never recomputed; the derived columns come from it.
TABLE1_EPSILON_R = (
    (2, 0.2348),
    (3, 0.33881),
    (4, 0.4008),
    (7, 0.4986),
    (15, 0.5955),
)
_TABLE1_Q = 5

_TABLE2_D_LIST = (2, 3, 4, 7, 15)


@dataclass(frozen=True)
class RunConfig:
    """Validated flag bundle for one subcommand invocation."""

    subcommand: str
    q: int | None = None
    beta: float | None = None
    d: float | None = None
    offspring: OffspringDistribution | None = None
    depth: int | None = None
    trials: int | None = None
    seed: int | None = None
    eps: float | None = None
    fmt: str = "json"
    precision: int = 6
    settings: OptimizerSettings = DEFAULT_SETTINGS
    sweep_settings: OptimizerSettings = SWEEP_SETTINGS
    quenched: bool = False


def _sig(value, precision: int):
    """Round a float to the given number of significant digits."""
    if isinstance(value, float):
        if value == 0.0 or not math.isfinite(value):
            return value
        return round(value, precision - 1 - math.floor(math.log10(abs(value))))
    return value


def _rounded(obj, precision: int):
    if isinstance(obj, dict):
        return {k: _rounded(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v, precision) for v in obj]
    return _sig(obj, precision)


def _echo_json(obj: dict, precision: int) -> None:
    click.echo(json.dumps(_rounded(obj, precision)))


def _echo_csv(rows: list[dict], precision: int) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(rows[0].keys())
    for row in rows:
        writer.writerow(
            "" if v is None else _sig(v, precision) for v in row.values()
        )
    click.echo(buf.getvalue().rstrip("\n"))


def _emit(rows: list[dict], fmt: str, precision: int) -> None:
    if fmt == "json":
        if len(rows) == 1:
            _echo_json(rows[0], precision)
        else:
            click.echo(json.dumps([_rounded(r, precision) for r in rows]))
    else:
        _echo_csv(rows, precision)


def _numeric_errors(fn):
    """Map library failures to the documented exit codes (1 numeric, 2 usage)."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SolverError as exc:
            click.echo(f"solver failure: {exc}", err=True)
            if exc.diagnostics:
                click.echo(json.dumps(exc.diagnostics, default=str), err=True)
            sys.exit(1)
        except TreeBudgetError as exc:
            click.echo(f"budget exceeded: {exc}", err=True)
            sys.exit(1)
        except ValueError as exc:
            raise click.UsageError(str(exc))

    return wrapper


def _settings_from(grid, restarts, base: OptimizerSettings) -> OptimizerSettings:
    overrides = {}
    if grid is not None:
        overrides["grid_points"] = grid
    if restarts is not None:
        overrides["random_restarts"] = restarts
    return dataclasses.replace(base, **overrides) if overrides else base


def _parse_offspring(text: str) -> OffspringDistribution:
    """Parse 'c1:p1,c2:p2,...' into an offspring law."""
    pairs = []
    for part in text.split(","):
        count, sep, prob = part.partition(":")
        if not sep:
            raise ValueError(f"offspring term {part!r} is not of the form c:p")
        pairs.append((int(count), float(prob)))
    return OffspringDistribution(tuple(pairs))


_q_option = click.option("--q", type=click.IntRange(min=2), required=True, help="number of symbols")
_format_option = click.option(
    "--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
    show_default=True, help="output format",
)
_precision_option = click.option(
    "--precision", type=click.IntRange(1, 12), default=6, show_default=True,
    help="significant digits of numeric output",
)
_grid_option = click.option(
    "--grid", type=click.IntRange(min=16), default=None,
    help="optimizer grid points (default per operation)",
)
_restarts_option = click.option(
    "--restarts", type=click.IntRange(min=0), default=None,
    help="random restarts of the simplex search",
)


@click.group()
def main() -> None:
    """Thresholds and Monte-Carlo simulation for Potts broadcasting on trees.

    Exit codes: 0 success, 1 numeric failure, 2 usage error.  Set
    POTTS_TREE_THREADS to cap Monte-Carlo worker threads (speed only).
    """


@main.command("thresholds")
@_q_option
@click.option("--d", type=click.IntRange(min=1), required=True, help="offspring number")
@_grid_option
@_restarts_option
@_format_option
@_precision_option
@_numeric_errors
def cmd_thresholds(q, d, grid, restarts, fmt, precision) -> None:
    """All thresholds for a q-state channel on the d-ary tree."""
    cfg = RunConfig(
        subcommand="thresholds", q=q, d=d, fmt=fmt, precision=precision,
        settings=_settings_from(grid, restarts, DEFAULT_SETTINGS),
        sweep_settings=_settings_from(grid, restarts, SWEEP_SETTINGS),
    )
    report = threshold_report(
        cfg.q, float(cfg.d), settings=cfg.settings, sweep_settings=cfg.sweep_settings
    )
    row = {
        "q": report.q,
        "d": cfg.d,
        "beta_ferro": report.beta_ferro,
        "beta_c": report.beta_c,
        "beta_ks": report.beta_ks,
        "cbar_at_beta_c": report.cbar_at_beta_c,
        "epsilon_excess": report.epsilon_excess,
    }
    _emit([row], cfg.fmt, cfg.precision)


@main.command("cbar")
@_q_option
@click.option("--beta", type=float, required=True, help="inverse temperature")
@_grid_option
@_restarts_option
@_format_option
@_precision_option
@_numeric_errors
def cmd_cbar(q, beta, grid, restarts, fmt, precision) -> None:
    """Optimized constant cbar and its symmetric-slice value chat."""
    cfg = RunConfig(
        subcommand="cbar", q=q, beta=beta, fmt=fmt, precision=precision,
        settings=_settings_from(grid, restarts, DEFAULT_SETTINGS),
    )
    ch = PottsChannel(cfg.q, cfg.beta)
    cbar_val = cbar(ch, cfg.settings)
    row = {
        "q": cfg.q,
        "beta": cfg.beta,
        "lambda2": ch.lambda2,
        "chat": chat(ch, cfg.settings),
        "cbar": cbar_val,
        "excess": cbar_val / ch.lambda2 - 1.0,
    }
    _emit([row], cfg.fmt, cfg.precision)


@main.command("ferro")
@_q_option
@click.option("--d", type=click.IntRange(min=2), required=True, help="offspring number")
@_format_option
@_precision_option
@_numeric_errors
def cmd_ferro(q, d, fmt, precision) -> None:
    """Ferromagnetic ordering threshold on the d-ary tree."""
    row = {"q": q, "d": d, "beta_ferro": ferro_threshold(d, q)}
    _emit([row], fmt, precision)


@main.command("ks")
@_q_option
@click.option("--d", type=float, required=True, help="mean offspring number")
@_format_option
@_precision_option
@_numeric_errors
def cmd_ks(q, d, fmt, precision) -> None:
    """Kesten-Stigum point d * lambda2^2 = 1."""
    point = kesten_stigum(d, q)
    row = {"q": q, "d": d, "beta_ks": point.beta, "lambda": point.lam}
    _emit([row], fmt, precision)


@main.command("tables")
@click.option("--which", type=click.IntRange(1, 2), required=True, help="table number")
@click.option("--q", type=click.IntRange(min=2), default=5, show_default=True,
              help="number of symbols (table 2 only)")
@_grid_option
@_restarts_option
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv",
              show_default=True, help="output format")
@_precision_option
@_numeric_errors
def cmd_tables(which, q, grid, restarts, fmt, precision) -> None:
    """Reference tables: quoted reconstruction data (1) or computed bounds (2)."""
    if which == 1:
        if q != _TABLE1_Q:
            raise ValueError(f"table 1 data is for q = {_TABLE1_Q} only")
        rows = [
            {
                "d": d,
                "eps_r": eps_r,
                "beta_r": beta_of_epsilon(eps_r, _TABLE1_Q),
                "lambda_r": lambda_of_epsilon(eps_r, _TABLE1_Q),
            }
            for d, eps_r in TABLE1_EPSILON_R
        ]
    else:
        settings = _settings_from(grid, restarts, DEFAULT_SETTINGS)
        rows = [
            {"d": row.d, "beta_c": row.beta_c, "lambda_c": row.lambda_c}
            for row in reproduce_table2(q, _TABLE2_D_LIST, settings)
        ]
    _emit(rows, fmt, precision)


@main.command("simulate")
@_q_option
@click.option("--beta", type=click.FloatRange(min=0.0), required=True,
              help="inverse temperature")
@click.option("--d", type=click.IntRange(min=1), default=None,
              help="regular tree offspring number")
@click.option("--offspring", type=str, default=None,
              help="offspring pmf 'c1:p1,c2:p2,...' for Galton-Watson trees")
@click.option("--depth", type=click.IntRange(min=0), required=True, help="boundary depth N")
@click.option("--trials", type=click.IntRange(min=1), default=10000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--eps", type=float, default=None,
              help="also probe P(|p_1 - 1/q| >= eps) at the same depth")
@click.option("--quenched", is_flag=True, default=False,
              help="fix one Galton-Watson tree for all trials")
@_precision_option
@_numeric_errors
def cmd_simulate(q, beta, d, offspring, depth, trials, seed, eps, quenched, precision) -> None:
    """Boundary-entropy estimate (JSON), optional deviation probe (CSV)."""
    if (d is None) == (offspring is None):
        raise ValueError("exactly one of --d and --offspring is required")
    tree_spec = int(d) if d is not None else _parse_offspring(offspring)
    ch = PottsChannel(q, beta)
    estimate = entropy_mc(tree_spec, ch, depth, trials, seed, quenched=quenched)
    _echo_json(estimate.to_json_dict(), precision)
    if eps is not None:
        points = root_deviation_probe(
            tree_spec, ch, [depth], trials, seed, eps, quenched=quenched
        )
        rows = [
            {
                "depth": p.depth,
                "fraction": p.fraction,
                "std_error": p.std_error,
                "fraction_max": p.fraction_max,
                "trials": p.trials,
                "eps": p.eps,
            }
            for p in points
        ]
        _echo_csv(rows, precision)


@main.command("tree-dump")
@click.option("--d", type=click.IntRange(min=1), default=None,
              help="regular tree offspring number")
@click.option("--offspring", type=str, default=None,
              help="offspring pmf 'c1:p1,c2:p2,...' for Galton-Watson trees")
@click.option("--depth", type=click.IntRange(min=0), required=True, help="tree depth N")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@_numeric_errors
def cmd_tree_dump(d, offspring, depth, seed) -> None:
    """Serialize a tree as 'N <depth>' plus one '<index> <parent> <depth>' per node."""
    if (d is None) == (offspring is None):
        raise ValueError("exactly one of --d and --offspring is required")
    if d is not None:
        tree = regular_tree(d, depth)
    else:
        tree = galton_watson_tree(_parse_offspring(offspring), depth, seed)
    click.echo(tree_to_text(tree), nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()
