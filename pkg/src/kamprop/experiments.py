"""Figure and study runners behind the CLI subcommands.

Each ``cmd_*`` writes its CSV (and optionally SVG) into the output directory
and returns a dict with the written paths and the computed rows, so the
acceptance tests can inspect results without re-reading files.

CSV columns:

* ``fig1.csv``: t1, log10_delta_dyson1, log10_delta_magnus1, log10_delta_kam1, lambda2, status
* ``fig2.csv``: t2, log10_delta_dyson2, log10_delta_magnus2, log10_delta_kam2, lambda3, status
* ``optimize.csv``: kind, parameter, value, lambda  (kind is grid, best or refined)
* ``scaling.csv``: method, epsilon, delta, log10_delta
* ``scaling_slopes.csv``: method, slope
* ``sweep.csv``: <parameter>, delta_<method>..., lambda_<kam method>..., status

Empty cells mark values that are undefined (log of an exactly zero error) or
failed to compute; the ``status`` column then carries the error message.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from .baselines import BaselineKind, baseline_propagator
from .config import ExperimentConfig
from .errors import KamPropError
from .kam import build_chain
from .linalg import spectral_norm
from .metrics import fit_slope, method_propagator
from .optimize import parse_selector, scan_lambda, with_parameter
from .propagator import closed_form_u0, reference_for
from .svg import line_plot

log = logging.getLogger(__name__)


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return format(float(x), ".12g")


def log10_or_blank(delta) -> str:
    if delta is None or delta <= 0.0:
        return ""
    return fmt(math.log10(delta))


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def exact_end_propagator(problem, config: ExperimentConfig):
    """``U(t_end, t_start)`` of the full problem; closed form when eps = 0."""
    if problem.epsilon == 0.0:
        return closed_form_u0(problem)(problem.t_end, problem.t_start)
    return reference_for(problem, config.ode_tol)(problem.t_end, problem.t_start)


def resolve_params(config: ExperimentConfig, problem, n: int, optimize_t1_default: bool = False):
    """KAM parameters for ``n`` iterations with every ``optimize`` entry replaced by
    the greedy minimizer of the eigenvalue objective."""
    params = config.kam_params(n)
    lo, hi = config.scan_range()
    for k in range(1, n + 1):
        choice = getattr(config, f"t{k}")
        if choice == "optimize" or (choice is None and k == 1 and optimize_t1_default):
            if problem.epsilon == 0.0:
                continue
            result = scan_lambda(problem, params, f"t{k}", lo, hi, config.scan_points)
            params = with_parameter(params, f"t{k}", result.refined[0])
            log.info("optimized t%d = %.6f (lambda %.4e)", k, result.refined[0], result.refined[1])
    return [p.resolved(problem) for p in params]


def _delta(approx, exact, problem):
    return float(spectral_norm(approx(problem.t_end, problem.t_start) - exact))


def _figure(config, out_dir, svg, n):
    problem = config.problem()
    exact = exact_end_propagator(problem, config)
    dyson = BaselineKind(f"DYSON{n}")
    magnus = BaselineKind(f"MAGNUS{n}")
    d_dyson = _delta(baseline_propagator(problem, dyson, config.quad_panels, config.quad_order), exact, problem)
    d_magnus = _delta(baseline_propagator(problem, magnus, config.quad_panels, config.quad_order), exact, problem)
    params = resolve_params(config, problem, n, optimize_t1_default=(n == 2))
    lo, hi = config.scan_range()
    xs = np.linspace(lo, hi, config.scan_points)
    rows, data = [], []
    for x in xs:
        p = with_parameter(params, f"t{n}", float(x))
        try:
            chain = build_chain(problem, p)
            d_kam = _delta(chain, exact, problem)
            lam = chain.lambda_next if problem.epsilon > 0 else 0.0
            status = "ok"
        except KamPropError as exc:
            d_kam, lam, status = None, None, f"error: {exc}"
            log.warning("t%d=%g: %s", n, x, exc)
        data.append({f"t{n}": float(x), "delta_kam": d_kam, f"lambda{n + 1}": lam, "status": status})
        rows.append([fmt(x), log10_or_blank(d_dyson), log10_or_blank(d_magnus), log10_or_blank(d_kam), fmt(lam), status])
    header = [f"t{n}", f"log10_delta_dyson{n}", f"log10_delta_magnus{n}", f"log10_delta_kam{n}", f"lambda{n + 1}", "status"]
    out_dir = Path(out_dir)
    csv_path = out_dir / f"fig{n}.csv"
    _write_csv(csv_path, header, rows)
    paths = [csv_path]
    if svg:
        svg_path = out_dir / f"fig{n}.svg"

        def col(i):
            return [float(r[i]) if r[i] else None for r in rows]

        panels = [(f"log10 error after order/iteration {n}", "log10 Delta", [(f"Dyson{n}", col(1)), (f"Magnus{n}", col(2)), (f"KAM{n}", col(3))])]
        if n == 1:
            lam = [math.log10(v) if v else None for v in (d[f"lambda{n + 1}"] for d in data)]
            panels.append(("largest |eigenvalue| of eps^2 G(t_end)", "log10 lambda2", [("lambda2", lam)]))
        line_plot(svg_path, xs, panels, f"t{n}")
        paths.append(svg_path)
    return {
        "paths": paths,
        "rows": data,
        "params": params,
        "delta_dyson": d_dyson,
        "delta_magnus": d_magnus,
        "problem": problem,
    }


def cmd_fig1(config: ExperimentConfig, out_dir=None, svg=None):
    """Scan ``t1``: first-order Dyson, Magnus and one KAM iteration, plus ``lambda2``."""
    return _figure(config, out_dir or config.output_dir, config.svg if svg is None else svg, 1)


def cmd_fig2(config: ExperimentConfig, out_dir=None, svg=None):
    """Scan ``t2`` with ``t1`` fixed (optimized unless set): second-order baselines and two KAM iterations."""
    return _figure(config, out_dir or config.output_dir, config.svg if svg is None else svg, 2)


def cmd_optimize(config: ExperimentConfig, out_dir=None, svg=None):
    """Minimize the eigenvalue objective over ``scan_parameter``. Never evaluates the exact propagator."""
    problem = config.problem()
    k, _ = parse_selector(config.scan_parameter)
    params = resolve_params(config, problem, k - 1) if k > 1 else []
    params = params + config.kam_params(k)[len(params):]
    lo, hi = config.scan_range()
    result = scan_lambda(problem, params, config.scan_parameter, lo, hi, config.scan_points)
    rows = [["grid", config.scan_parameter, fmt(x), fmt(v)] for x, v in result.grid]
    rows.append(["best", config.scan_parameter, fmt(result.best[0]), fmt(result.best[1])])
    rows.append(["refined", config.scan_parameter, fmt(result.refined[0]), fmt(result.refined[1])])
    out_dir = Path(out_dir or config.output_dir)
    path = out_dir / "optimize.csv"
    _write_csv(path, ["kind", "parameter", "value", "lambda"], rows)
    summary = f"{config.scan_parameter}* = {result.refined[0]:.6f}  lambda* = {result.refined[1]:.6e}  evaluations = {result.evaluations}"
    warning = "degenerate objective: lambda is constant over the scan" if result.degenerate else None
    paths = [path]
    if svg if svg is not None else config.svg:
        svg_path = out_dir / "optimize.svg"
        xs = [x for x, _ in result.grid]
        ys = [math.log10(v) if v > 0 else None for _, v in result.grid]
        line_plot(svg_path, xs, [("eigenvalue objective", "log10 lambda", [("lambda", ys)])], config.scan_parameter)
        paths.append(svg_path)
    return {"paths": paths, "result": result, "summary": summary, "warning": warning}


def cmd_scaling(config: ExperimentConfig, out_dir=None, svg=None):
    """Error versus epsilon for every configured method, with fitted log-log slopes."""
    base = config.problem()
    n_kam = max([int(m[3:]) for m in config.methods if m.startswith("KAM")] or [0])
    params = resolve_params(config, base, n_kam) if n_kam else None
    deltas = {m: [] for m in config.methods}
    for eps in config.epsilons:
        problem = base.with_epsilon(eps)
        exact = exact_end_propagator(problem, config)
        for m in config.methods:
            deltas[m].append(_delta(method_propagator(problem, m, params), exact, problem))
    rows, slopes = [], {}
    for m in config.methods:
        for eps, d in zip(config.epsilons, deltas[m]):
            rows.append([m, fmt(eps), fmt(d), log10_or_blank(d)])
        slopes[m] = fit_slope(config.epsilons, deltas[m]) if all(d > 0 for d in deltas[m]) else math.nan
    out_dir = Path(out_dir or config.output_dir)
    path = out_dir / "scaling.csv"
    slope_path = out_dir / "scaling_slopes.csv"
    _write_csv(path, ["method", "epsilon", "delta", "log10_delta"], rows)
    _write_csv(slope_path, ["method", "slope"], [[m, fmt(s)] for m, s in slopes.items()])
    paths = [path, slope_path]
    if svg if svg is not None else config.svg:
        svg_path = out_dir / "scaling.svg"
        logx = [math.log10(e) for e in config.epsilons]
        series = [(m, [math.log10(d) if d > 0 else None for d in deltas[m]]) for m in config.methods]
        line_plot(svg_path, logx, [("error scaling", "log10 Delta", series)], "log10 epsilon")
        paths.append(svg_path)
    return {"paths": paths, "deltas": deltas, "slopes": slopes, "params": params}


def cmd_sweep(config: ExperimentConfig, out_dir=None, svg=None):
    """Sweep one problem or free-time parameter and record every method's error."""
    name = config.sweep_parameter
    xs = np.linspace(config.sweep_lo, config.sweep_hi, config.sweep_points)
    kam_methods = [m for m in config.methods if m.startswith("KAM")]
    n_kam = max([int(m[3:]) for m in kam_methods] or [1])
    header = [name] + [f"delta_{m.lower()}" for m in config.methods] + [f"lambda_{m.lower()}" for m in kam_methods] + ["status"]
    rows, table = [], []
    for x in xs:
        x = float(x)
        try:
            if name in ("epsilon", "area"):
                problem = config.problem(**{name: x})
                params = resolve_params(config, problem, n_kam)
            else:
                problem = config.problem()
                params = with_parameter(resolve_params(config, problem, n_kam), name, x)
            exact = exact_end_propagator(problem, config)
            deltas = [_delta(method_propagator(problem, m, params), exact, problem) for m in config.methods]
            lams = []
            for m in kam_methods:
                n = int(m[3:])
                lams.append(build_chain(problem, params[:n]).lambda_next if problem.epsilon > 0 else 0.0)
            status = "ok"
        except KamPropError as exc:
            deltas = [None] * len(config.methods)
            lams = [None] * len(kam_methods)
            status = f"error: {exc}"
        table.append((x, deltas, lams, status))
        rows.append([fmt(x)] + [fmt(d) for d in deltas] + [fmt(v) for v in lams] + [status])
    out_dir = Path(out_dir or config.output_dir)
    path = out_dir / "sweep.csv"
    _write_csv(path, header, rows)
    paths = [path]
    if svg if svg is not None else config.svg:
        svg_path = out_dir / "sweep.svg"
        series = [(m, [math.log10(r[1][i]) if r[1][i] else None for r in table]) for i, m in enumerate(config.methods)]
        line_plot(svg_path, xs, [(f"error versus {name}", "log10 Delta", series)], name)
        paths.append(svg_path)
    return {"paths": paths, "rows": table}


COMMANDS = {
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "optimize": cmd_optimize,
    "scaling": cmd_scaling,
    "sweep": cmd_sweep,
}


def with_points(config: ExperimentConfig, points: int) -> ExperimentConfig:
    return replace(config, scan_points=points, sweep_points=points).validate()
