"""``cohlab`` command line interface.

Exit codes: 0 ok, 1 a hard check failed, 2 usage or input error,
3 an iterative solver did not converge.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import io as cio
from .channels import (
    lp_counterexample,
    monotonicity_report,
    monotonicity_scan,
    random_channel_shape,
    random_incoherent_channel,
    tensor_monotonicity_violation,
    threshold_for,
)
from .exceptions import CoherenceError, NoConvergenceError
from .experiments import REGISTRY, ExperimentConfig, jsonable, rows_to_csv, run_experiment
from .measures import MeasureId, bounds_report, evaluate, schatten_distance
from .sdpa import export_sdpa
from .states import maximally_coherent, pure_to_density, qutrit_from_xy, validate_density
from .tracedist import SolverOptions, c_tr, is_x_shaped

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_NOCONV = 0, 1, 2, 3
THEOREM_MEASURES = {"L1", "RELENT"}


class Settings:
    def __init__(self, seed=0, tol=1e-7, out=None, fmt=None):
        self.seed, self.tol, self.out, self.fmt = seed, tol, out, fmt

    @property
    def opts(self) -> SolverOptions:
        return SolverOptions(tol=self.tol, seed=self.seed)


def _global_options(f):
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
                     help="Output format (default json).")(f)
    f = click.option("--out", type=click.Path(dir_okay=True), default=None,
                     help="Write output here instead of stdout.")(f)
    f = click.option("--tol", type=float, default=None, help="Solver tolerance.")(f)
    f = click.option("--seed", type=int, default=None, help="Random seed.")(f)
    return f


def _settings(ctx, seed, tol, out, fmt) -> Settings:
    base = ctx.find_object(Settings) or Settings()
    s = Settings(base.seed, base.tol, base.out, base.fmt)
    if seed is not None:
        s.seed = seed
    if tol is not None:
        if not tol > 0:
            raise click.BadParameter("must be positive", param_hint="--tol")
        s.tol = tol
    if out is not None:
        s.out = out
    if fmt is not None:
        s.fmt = fmt
    return s


def _state_options(f):
    f = click.option("--xstate", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="Matrix JSON of an X-shaped state.")(f)
    f = click.option("--qutrit-xy", nargs=2, type=float, default=None,
                     help="Pure qutrit with parameters x y.")(f)
    f = click.option("--maximally-coherent", "mc_dim", type=int, default=None,
                     help="Maximally coherent state of dimension d.")(f)
    f = click.option("--state", "state_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="State JSON file.")(f)
    return f


def _build_state(state_path, maximally_coherent_d, qutrit_xy, xstate, required=True):
    given = [v is not None for v in (state_path, maximally_coherent_d, qutrit_xy, xstate)]
    if sum(given) > 1:
        raise click.UsageError("give exactly one of --state, --maximally-coherent, --qutrit-xy, --xstate")
    if state_path is not None:
        return cio.load_state(state_path)
    if maximally_coherent_d is not None:
        return pure_to_density(maximally_coherent(maximally_coherent_d))
    if qutrit_xy is not None:
        return pure_to_density(qutrit_from_xy(*qutrit_xy))
    if xstate is not None:
        rho = validate_density(cio.load_matrix(xstate))
        if not is_x_shaped(rho):
            raise click.UsageError(f"{xstate} is not X-shaped")
        return rho
    if required:
        raise click.UsageError("a state is required (--state, --maximally-coherent, --qutrit-xy or --xstate)")
    return None


def _emit(s: Settings, records, columns=None):
    """Write a dict or a list of row dicts as JSON or CSV."""
    if s.fmt == "csv":
        rows = records if isinstance(records, list) else [records]
        columns = columns or list(rows[0].keys())
        text = rows_to_csv(columns, rows)
    else:
        if isinstance(records, list):
            payload = [{k: jsonable(v) for k, v in r.items()} for r in records]
        else:
            payload = {k: jsonable(v) for k, v in records.items()}
        text = json.dumps(payload, indent=1) + "\n"
    if s.out:
        Path(s.out).write_text(text)
    else:
        click.echo(text, nl=False)


def _parse_measure(text) -> MeasureId:
    try:
        return MeasureId.parse(text)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--measure") from exc


def _parse_dims(text: str) -> tuple:
    try:
        lo, _, hi = text.partition("..")
        dims = (int(lo), int(hi or lo))
    except ValueError:
        raise click.BadParameter(f"expected LO..HI, got {text!r}", param_hint="--dims") from None
    if not 1 <= dims[0] <= dims[1]:
        raise click.BadParameter(f"bad range {text!r}", param_hint="--dims")
    return dims


def _flatten(report) -> dict:
    out = {}
    for side in ("lp", "schatten"):
        for k, v in getattr(report, side).to_dict().items():
            out[f"{side}_{k}"] = v
    out["violation"] = report.violation
    return out


@click.group()
@_global_options
@click.pass_context
def main(ctx, seed, tol, out, fmt):
    """Coherence quantifiers and monotonicity checks."""
    ctx.obj = _settings(ctx, seed, tol, out, fmt)


@main.command()
@click.option("--measure", default="trace", show_default=True,
              help="l1, relent, trace, lp:P or schatten:P.")
@click.option("--backend", type=click.Choice(["auto", "general", "pure", "qubit", "blocksum", "xstate"]),
              default="auto", show_default=True, help="Trace-distance backend.")
@_state_options
@_global_options
@click.pass_context
def compute(ctx, measure, backend, state_path, mc_dim, qutrit_xy, xstate, seed, tol, out, fmt):
    """Evaluate one coherence measure on a state."""
    s = _settings(ctx, seed, tol, out, fmt)
    m = _parse_measure(measure)
    rho = _build_state(state_path, mc_dim, qutrit_xy, xstate)
    if m.tag == "TRACE":
        res = c_tr(rho, s.opts, backend=backend)
        record = {"measure": str(m), "value": res.value, "backend": res.backend.value,
                  "iterations": res.iterations, "certificate": res.certificate}
    elif m.tag == "SCHATTEN":
        res = schatten_distance(rho, m.p, s.opts)
        record = {"measure": str(m), "value": res.value, "iterations": res.iterations,
                  "certificate": res.certificate}
    else:
        record = {"measure": str(m), "value": evaluate(m, rho)}
    _emit(s, record)


@main.command()
@_state_options
@_global_options
@click.pass_context
def bounds(ctx, state_path, mc_dim, qutrit_xy, xstate, seed, tol, out, fmt):
    """C_l1, C_r and the bounds between them."""
    s = _settings(ctx, seed, tol, out, fmt)
    rho = _build_state(state_path, mc_dim, qutrit_xy, xstate)
    _emit(s, bounds_report(rho).to_dict())


@main.command()
@click.option("--measure", required=True, help="l1, relent, trace, lp:P or schatten:P.")
@click.option("--channel", "channel_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Channel JSON file.")
@click.option("--random", "n_random", type=int, default=None,
              help="Use a random incoherent channel with this many Kraus operators.")
@_state_options
@_global_options
@click.pass_context
def monotonicity(ctx, measure, channel_path, n_random, state_path, mc_dim, qutrit_xy,
                 xstate, seed, tol, out, fmt):
    """Monotonicity and strong monotonicity of one (state, channel) pair."""
    s = _settings(ctx, seed, tol, out, fmt)
    m = _parse_measure(measure)
    rho = _build_state(state_path, mc_dim, qutrit_xy, xstate)
    if (channel_path is None) == (n_random is None):
        raise click.UsageError("give exactly one of --channel or --random")
    if channel_path is not None:
        ch = cio.load_channel(channel_path)
    else:
        rng = np.random.default_rng(s.seed)
        _, d_outs = random_channel_shape(rho.shape[0], rng, n_ops=n_random)
        ch = random_incoherent_channel(rho.shape[0], n_random, d_outs, rng)
    rep = monotonicity_report(m, rho, ch, s.opts)
    record = rep.to_dict()
    record["violation"] = rep.violation(threshold_for(m))
    _emit(s, record)
    if m.tag in THEOREM_MEASURES and record["violation"]:
        ctx.exit(EXIT_ASSERT)


@main.group()
def counterexample():
    """Counterexamples for the l_p and Schatten-p measures."""


@counterexample.command("lp")
@click.option("--a", "a", type=float, default=1.0, show_default=True)
@click.option("--b", "b", type=float, default=1.0, show_default=True)
@click.option("--p", "p", type=float, default=2.0, show_default=True)
@_global_options
@click.pass_context
def counterexample_lp(ctx, a, b, p, seed, tol, out, fmt):
    """Strong monotonicity on the two-pair state and its splitting channel."""
    s = _settings(ctx, seed, tol, out, fmt)
    _emit(s, {"a": a, "b": b, "p": p, **_flatten(lp_counterexample(a, b, p, s.opts))})


@counterexample.command("tensor")
@click.option("--d", "d", type=int, default=2, show_default=True, help="Ancilla dimension.")
@click.option("--p", "p", type=float, default=2.0, show_default=True)
@_state_options
@_global_options
@click.pass_context
def counterexample_tensor(ctx, d, p, state_path, mc_dim, qutrit_xy, xstate, seed, tol, out, fmt):
    """Monotonicity under erasure of a maximally mixed ancilla (default state: maximally coherent qutrit)."""
    s = _settings(ctx, seed, tol, out, fmt)
    rho = _build_state(state_path, mc_dim, qutrit_xy, xstate, required=False)
    if rho is None:
        rho = pure_to_density(maximally_coherent(3))
    _emit(s, {"d_anc": d, "p": p, **_flatten(tensor_monotonicity_violation(rho, d, p, s.opts))})


@main.command()
@click.option("--measure", required=True)
@click.option("--dims", default="2..4", show_default=True, help="Dimension range LO..HI.")
@click.option("--samples", type=click.IntRange(min=1), default=100, show_default=True)
@_global_options
@click.pass_context
def scan(ctx, measure, dims, samples, seed, tol, out, fmt):
    """Strong-monotonicity scan over random (state, channel) pairs."""
    s = _settings(ctx, seed, tol, out, fmt)
    m = _parse_measure(measure)
    rows = monotonicity_scan(m, _parse_dims(dims), samples, s.seed, s.opts)
    if s.fmt is None and s.out and str(s.out).endswith(".csv"):
        s.fmt = "csv"
    _emit(s, rows)
    bad = [r for r in rows if r["violation"]]
    if bad:
        click.echo(f"{len(bad)} violation(s) of strong monotonicity for {m}", err=True)
        if m.tag in THEOREM_MEASURES:
            ctx.exit(EXIT_ASSERT)


@main.command("export-sdpa")
@_state_options
@_global_options
@click.pass_context
def export_sdpa_cmd(ctx, state_path, mc_dim, qutrit_xy, xstate, seed, tol, out, fmt):
    """Write the trace-distance SDP of a state in SDPA sparse format."""
    s = _settings(ctx, seed, tol, out, fmt)
    if not s.out:
        raise click.UsageError("--out is required")
    rho = _build_state(state_path, mc_dim, qutrit_xy, xstate)
    path = export_sdpa(rho, s.out)
    click.echo(str(path))


@main.command()
@click.argument("name", type=click.Choice(sorted(REGISTRY)))
@click.option("--samples", type=click.IntRange(min=1), default=None)
@click.option("--dims", default=None, help="Dimension range LO..HI.")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@_global_options
@click.pass_context
def experiment(ctx, name, samples, dims, workers, seed, tol, out, fmt):
    """Run a named reproduction experiment; files go to --out (a directory)."""
    s = _settings(ctx, seed, tol, out, fmt)
    cfg = ExperimentConfig(name=name, seed=s.seed, samples=samples,
                           dims=_parse_dims(dims) if dims else None, tolerance=s.tol,
                           output_path=s.out or ".", workers=workers)
    report, code = run_experiment(cfg)
    for c in report.checks:
        tag = "PASS" if c.passed else ("FAIL" if c.hard else "NOTE")
        click.echo(f"[{tag}] {c.name}" + (f" ({c.detail})" if c.detail else ""))
    if report.violations:
        click.echo(f"{len(report.violations)} violation row(s) written to "
                   f"{Path(cfg.output_path) / (report.name + '_violations.csv')}", err=True)
    ctx.exit(code)


def run(argv=None) -> int:
    """Entry point mapping library errors onto exit codes."""
    try:
        rc = main.main(args=argv, prog_name="cohlab", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except NoConvergenceError as exc:
        click.echo(f"error: no convergence: {exc}", err=True)
        return EXIT_NOCONV
    except (CoherenceError, ValueError, OSError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    return rc if isinstance(rc, int) else EXIT_OK


def entry():
    sys.exit(run())


if __name__ == "__main__":
    entry()
