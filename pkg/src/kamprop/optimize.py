"""Choice of the free times by minimizing the eigenvalue objective.

Only ``lambda`` (built from the approximate construction) is ever evaluated;
this module has no access to a reference propagator.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import KamPropError
from .kam import MAX_ITERATIONS, KamParams, lambda_objective
from .model import SuddenProblem

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
MAX_FAILURE_FRACTION = 0.2
_SELECTOR = re.compile(r"^t([1-9])(_lower)?$")


@dataclass
class ScanResult:
    grid: list[tuple[float, float]]
    best: tuple[float, float]
    refined: tuple[float, float]
    evaluations: int
    failures: list[tuple[float, str]] = field(default_factory=list)
    degenerate: bool = False
    unimodal: bool = True


def golden_section(fn: Callable[[float], float], a: float, b: float, tol: float = 1e-4):
    """Minimize ``fn`` on ``[a, b]`` down to a bracket of width ``tol``.

    Returns ``(x, f(x), evaluations, rose)``; ``rose`` flags an interior probe
    above both bracket ends, i.e. evidence that ``fn`` is not unimodal there.
    """
    fa, fb = fn(a), fn(b)
    top = max(fa, fb)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    evals = 4
    rose = fc > top or fd > top
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
            rose |= fc > top
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
            rose |= fd > top
        evals += 1
    candidates = [(fa, a), (fb, b), (fc, c), (fd, d)]
    fx, x = min(candidates)
    return x, fx, evals, rose


def scan_objective(fn: Callable[[float], float], lo: float, hi: float, points: int = 101, tol: float = 1e-4) -> ScanResult:
    """Uniform grid scan followed by golden-section refinement of the best bracket."""
    if points < 3:
        raise ValueError("points must be >= 3")
    if not lo < hi:
        raise ValueError("need lo < hi")
    xs = np.linspace(lo, hi, points)
    grid, failures = [], []
    for x in xs:
        try:
            grid.append((float(x), float(fn(float(x)))))
        except KamPropError as exc:
            failures.append((float(x), str(exc)))
            grid.append((float(x), math.nan))
    if len(failures) > MAX_FAILURE_FRACTION * points:
        raise KamPropError(f"{len(failures)} of {points} objective evaluations failed; first: {failures[0][1]}")
    values = np.array([v for _, v in grid])
    finite = np.isfinite(values)
    i = int(np.nanargmin(values))
    best = grid[i]
    if np.all(values[finite] == values[finite][0]):
        j = 1 if i == 0 else i - 1
        mid = 0.5 * (xs[i] + xs[j])
        return ScanResult(grid, best, (float(mid), best[1]), points, failures, degenerate=True)
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, points - 1)]
    try:
        x, fx, evals, rose = golden_section(fn, float(a), float(b), tol)
    except KamPropError as exc:
        failures.append((best[0], f"refinement: {exc}"))
        return ScanResult(grid, best, best, points, failures, unimodal=False)
    if rose or not fx <= best[1]:
        return ScanResult(grid, best, best, points + evals, failures, unimodal=not rose)
    return ScanResult(grid, best, (float(x), float(fx)), points + evals, failures)


def parse_selector(which) -> tuple[int, str]:
    """``"t2"`` -> ``(2, "t_free")``, ``"t1_lower"`` -> ``(1, "t_lower")``; tuples pass through."""
    if isinstance(which, tuple):
        k, name = which
    else:
        m = _SELECTOR.match(str(which))
        if not m:
            raise ValueError(f"unknown parameter selector {which!r}")
        k, name = int(m.group(1)), "t_lower" if m.group(2) else "t_free"
    if not 1 <= k <= MAX_ITERATIONS or name not in ("t_free", "t_lower"):
        raise ValueError(f"unknown parameter selector {which!r}")
    return k, name


def with_parameter(params: Sequence[KamParams], which, value: float) -> list[KamParams]:
    k, name = parse_selector(which)
    params = list(params)
    while len(params) < k:
        params.append(replace(params[-1], t_free=None, t_lower=None) if params else KamParams())
    params[k - 1] = replace(params[k - 1], **{name: float(value)})
    return params


def scan_lambda(problem: SuddenProblem, params_template: Sequence[KamParams], which="t1", lo=None, hi=None, points: int = 101) -> ScanResult:
    """Scan ``lambda`` of iteration ``k`` over one free time of that iteration.

    Iterations before ``k`` keep their template values.
    """
    k, _ = parse_selector(which)
    lo = problem.t_start if lo is None else lo
    hi = problem.t_end if hi is None else hi

    def objective(x):
        return lambda_objective(problem, with_parameter(params_template, which, x)[:k])

    result = scan_objective(objective, lo, hi, points)
    if result.degenerate:
        log.warning("degenerate objective: lambda is constant (%g) over the scan", result.best[1])
    return result


def optimize_iteration_sequence(problem: SuddenProblem, n: int, points: int = 101, template: KamParams | None = None, lo=None, hi=None) -> list[KamParams]:
    """Greedy choice of ``t_1, ..., t_n``: each is frozen before the next is scanned."""
    if not 1 <= n <= MAX_ITERATIONS:
        raise ValueError(f"n must be in [1, {MAX_ITERATIONS}]")
    template = template or KamParams()
    params = [template] * n
    if problem.epsilon == 0.0:
        return [p.resolved(problem) for p in params]
    for k in range(1, n + 1):
        result = scan_lambda(problem, params, f"t{k}", lo, hi, points)
        params = with_parameter(params, f"t{k}", result.refined[0])
    return [p.resolved(problem) for p in params]


def joint_scan(problem: SuddenProblem, params_template: Sequence[KamParams], first="t1", second="t2", lo=None, hi=None, points: int = 21):
    """Exhaustive 2-D grid over two free times; returns ``(x, y, lambda)`` of the best point and the table."""
    lo = problem.t_start if lo is None else lo
    hi = problem.t_end if hi is None else hi
    k = max(parse_selector(first)[0], parse_selector(second)[0])
    xs = np.linspace(lo, hi, points)
    table = np.empty((points, points))
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            p = with_parameter(with_parameter(params_template, first, x), second, y)
            table[i, j] = lambda_objective(problem, p[:k])
    i, j = np.unravel_index(np.argmin(table), table.shape)
    return (float(xs[i]), float(xs[j]), float(table[i, j])), table
