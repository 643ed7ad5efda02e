"""Command-line surface: bound computation, isotropic sweeps, property suite.

Exit codes: 0 ok, 1 input error, 2 solver error, 3 property violation.
All commands are deterministic functions of their arguments, input files,
and seed; CSV output is byte-identical across reruns of the same config.
"""

from __future__ import annotations

import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import click
import numpy as np

from . import entropic, measures, properties, states
from .entropic import FWConfig
from .errors import DistrandError, SolverFailureError
from .measures import _fingerprint
from .operators import partial_trace

VALID_METHODS = ("upsilonA", "upsilonB", "holevo", "betaDiag")
CSV_COLUMNS = ("p", "holevo_lower", "upsilonA", "upsilonB", "upper_min", "fw_gap_A", "fw_gap_B", "status")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.9g}" if isinstance(x, float) else str(x)


def _p_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid; the final point is clamped to stop when step overshoots."""
    if start > stop or step <= 0:
        raise click.UsageError("need p-start <= p-stop and p-step > 0")
    grid = []
    k = 0
    while True:
        p = start + k * step
        if p >= stop - 1e-12:
            grid.append(stop)
            break
        grid.append(p)
        k += 1
    return grid


def _sweep_point(args) -> dict:
    d, p, methods, fw_kwargs, emit_beta = args
    row = {"p": p, "status": "ok"}
    rho = states.isotropic(d, p)
    cfg = FWConfig(**fw_kwargs)
    try:
        if "holevo" in methods:
            row["holevo_lower"] = entropic.isotropic_holevo_closed_form(d, p)
        ups = {}
        if "upsilonA" in methods:
            res = entropic.upsilon_a(rho, cfg)
            row["upsilonA"], row["fw_gap_A"] = res.value_bits, res.fw_gap_bits
            ups["A"] = res.value_bits
        if "upsilonB" in methods:
            res = entropic.upsilon_b(rho, cfg)
            row["upsilonB"], row["fw_gap_B"] = res.value_bits, res.fw_gap_bits
            ups["B"] = res.value_bits
        if ups:
            row["upper_min"] = min(ups.values())
        if emit_beta:
            rho_a = partial_trace(rho.bip, "B").mat
            row["beta_diag"] = measures.beta_a(rho, rho_a).raw_value
    except SolverFailureError as exc:
        row["status"] = f"solver_error:{exc}"
    return row


@click.group()
def main():
    """Bounds on the distillable randomness of bipartite quantum states."""


@main.command("sweep-isotropic")
@click.option("--d", type=int, default=2, show_default=True, help="Local dimension (>= 2).")
@click.option("--p-start", type=float, default=0.0, show_default=True)
@click.option("--p-stop", type=float, default=1.0, show_default=True)
@click.option("--p-step", type=float, default=0.05, show_default=True)
@click.option("--methods", default="upsilonA,upsilonB,holevo", show_default=True,
              help="Comma-separated subset of " + ",".join(VALID_METHODS))
@click.option("--out", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel grid workers.")
@click.option("--gap-tol", type=float, default=1e-4, show_default=True, help="FW gap tolerance in bits.")
@click.option("--max-iters", type=int, default=500, show_default=True)
@click.option("--emit-plot-script", is_flag=True, help="Also write a gnuplot script next to the CSV.")
def sweep_isotropic(d, p_start, p_stop, p_step, methods, out, fmt, jobs, gap_tol, max_iters, emit_plot_script):
    """Sweep the isotropic family over a p grid, one output row per point."""
    method_list = [m.strip() for m in methods.split(",") if m.strip()]
    bad = [m for m in method_list if m not in VALID_METHODS]
    if bad:
        click.echo(f"error: unknown methods {bad}; valid: {VALID_METHODS}", err=True)
        sys.exit(1)
    if d < 2 or not (0 <= p_start <= 1 and 0 <= p_stop <= 1):
        click.echo("error: need d >= 2 and p values in [0, 1]", err=True)
        sys.exit(1)
    grid = _p_grid(p_start, p_stop, p_step)
    fw_kwargs = {"gap_tol_bits": gap_tol, "max_iters": max_iters}
    emit_beta = "betaDiag" in method_list
    tasks = [(d, p, method_list, fw_kwargs, emit_beta) for p in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]

    columns = list(CSV_COLUMNS) + (["beta_diag"] if emit_beta else [])
    try:
        if fmt == "csv":
            lines = [",".join(columns)]
            for row in rows:
                lines.append(",".join(_fmt(row.get(c)) for c in columns))
            text = "\n".join(lines) + "\n"
            with open(out, "w") as fh:
                fh.write(text)
        else:
            with open(out, "w") as fh:
                json.dump({"d": d, "methods": method_list, "rows": rows}, fh, indent=2)
        if emit_plot_script:
            _write_plot_script(out)
    except OSError as exc:
        click.echo(f"error: cannot write output: {exc}", err=True)
        sys.exit(1)
    failures = [r for r in rows if r["status"] != "ok"]
    if failures:
        click.echo(f"{len(failures)} grid point(s) failed; rows marked in output", err=True)
        sys.exit(2)
    click.echo(f"wrote {len(rows)} rows to {out}")


def _write_plot_script(csv_path: str) -> None:
    script = csv_path + ".gp"
    with open(script, "w") as fh:
        fh.write(
            "set datafile separator ','\n"
            "set key outside\n"
            "set xlabel 'p'\n"
            "set ylabel 'bits'\n"
            f"plot '{csv_path}' using 1:2 with lines title 'Holevo lower', \\\n"
            f"     '{csv_path}' using 1:5 with lines title 'upper bound'\n"
        )


@main.command("bound")
@click.option("--state", "state_path", type=click.Path(exists=False), required=True)
@click.option("--method", type=click.Choice(["upsilonA", "upsilonB", "min", "betaA", "betaB", "gamma", "oneshot"]),
              required=True)
@click.option("--eps", type=float, default=0.0, show_default=True, help="Error parameter for oneshot.")
@click.option("--alpha", type=float, default=2.0, show_default=True, help="Renyi order for oneshot.")
@click.option("--gap-tol", type=float, default=1e-4, show_default=True)
@click.option("--max-iters", type=int, default=500, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Output JSON path (default: stdout).")
def bound(state_path, method, eps, alpha, gap_tol, max_iters, out):
    """Compute one bound for a state loaded from a JSON file."""
    import time

    try:
        rho_bip = states.load_state(state_path)
    except FileNotFoundError:
        click.echo(f"error: state file not found: {state_path}", err=True)
        sys.exit(1)
    except (DistrandError, ValueError, KeyError, json.JSONDecodeError) as exc:
        click.echo(f"error: invalid state file {state_path}: {exc}", err=True)
        sys.exit(1)

    cfg = FWConfig(gap_tol_bits=gap_tol, max_iters=max_iters)
    t0 = time.monotonic()
    try:
        if method in ("upsilonA", "upsilonB"):
            fn = entropic.upsilon_a if method == "upsilonA" else entropic.upsilon_b
            res = fn(_as_density(rho_bip), cfg)
            payload = {
                "method": method,
                "value_bits": res.value_bits,
                "fw_gap_bits": res.fw_gap_bits,
                "beta_of_sigma": res.beta_of_sigma,
                "iterations": res.iterations,
                "sigma_fingerprint": _fingerprint(res.sigma_star),
            }
        elif method == "min":
            res = entropic.upper_bound_min(_as_density(rho_bip), cfg)
            payload = res.to_jsonable()
            payload["solver_stats"].pop("results", None)
        elif method == "oneshot":
            res = entropic.one_shot_upper_bound(_as_density(rho_bip), eps, alpha, cfg)
            payload = res.to_jsonable()
        elif method in ("betaA", "betaB"):
            marg = partial_trace(rho_bip, "B" if method == "betaA" else "A").mat
            fn = measures.beta_a if method == "betaA" else measures.beta_b
            res = fn(rho_bip, marg)
            payload = res.to_jsonable()
        else:  # gamma
            res = measures.gamma_heuristic(rho_bip)
            payload = res.to_jsonable()
    except SolverFailureError as exc:
        click.echo(f"error: solver failure: {exc}", err=True)
        sys.exit(2)
    except DistrandError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    payload["elapsed_seconds"] = time.monotonic() - t0
    text = json.dumps(payload, indent=2, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _as_density(bip):
    from .operators import DensityMatrix

    return DensityMatrix(bip)


@main.command("check-properties")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--trials", type=int, default=20, show_default=True)
@click.option("--corrupt", is_flag=True,
              help="Negative control: inject a corrupted certificate and expect detection.")
def check_properties(seed, trials, corrupt):
    """Run the deterministic property suite; nonzero exit on any violation."""
    if trials < 1:
        click.echo("error: trials must be >= 1", err=True)
        sys.exit(1)
    results = properties.run_suite(seed, trials, corrupt=corrupt)
    any_fail = False
    for res in results:
        flag = "ok  " if res.ok else "FAIL"
        click.echo(f"[{flag}] {res.name}: max residual {res.max_residual:.3e} (tol {res.tolerance:g})"
                   + (f" -- {res.detail}" if res.detail else ""))
        any_fail = any_fail or not res.ok
    if any_fail:
        click.echo("property violation detected", err=True)
        sys.exit(3)
    click.echo(f"all {len(results)} properties hold (seed={seed}, trials={trials})")


if __name__ == "__main__":
    main()
