"""Error of approximate propagators against the reference, and epsilon-scaling fits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .baselines import BaselineKind, baseline_propagator
from .kam import KamParams, kam_approximant
from .linalg import spectral_norm, unitarity_defect
from .model import SuddenProblem
from .propagator import PropagatorHandle, reference_for

METHODS = ("DYSON1", "DYSON2", "MAGNUS1", "MAGNUS2", "KAM1", "KAM2", "KAM3")


@dataclass
class ErrorReport:
    delta: float
    unitarity_defect: float
    method_label: str = ""
    params_echo: dict[str, Any] = field(default_factory=dict)


def delta_error(approx: PropagatorHandle, reference: PropagatorHandle, t0: float, t: float, method_label: str = "", params=None) -> ErrorReport:
    """Spectral-norm distance ``||approx(t, t0) - reference(t, t0)||``."""
    if approx.dim != reference.dim:
        raise ValueError(f"dimension mismatch: {approx.dim} vs {reference.dim}")
    a = approx(t, t0)
    r = reference(t, t0)
    echo = {"t0": t0, "t": t}
    if params is not None:
        echo["params"] = params
    return ErrorReport(float(spectral_norm(a - r)), float(unitarity_defect(a)), method_label, echo)


def method_propagator(problem: SuddenProblem, method: str, params: Sequence[KamParams] | None = None) -> PropagatorHandle:
    """Approximant for a method label: ``DYSON1``..``MAGNUS2`` or ``KAM1``..``KAM3``."""
    method = method.upper()
    if method.startswith("KAM"):
        n = int(method[3:])
        params = list(params or [])
        params += [KamParams()] * (n - len(params))
        return kam_approximant(problem, params[:n], n)
    return baseline_propagator(problem, BaselineKind(method))


def fit_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive values")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass
class ScalingResult:
    method: str
    epsilons: list[float]
    deltas: list[float]
    slope: float

    @property
    def pairs(self):
        return list(zip(self.epsilons, self.deltas))


def scaling_study(problem: SuddenProblem, epsilons: Sequence[float], method: str, params=None, reference_tol: float = 1e-12) -> ScalingResult:
    """``Delta`` at the end of the pulse for each epsilon, with the fitted log-log slope."""
    epsilons = [float(e) for e in epsilons]
    if len(epsilons) < 3:
        raise ValueError("a scaling study needs at least 3 epsilon values")
    if any(e <= 0 for e in epsilons):
        raise ValueError("epsilon values must be positive")
    deltas = []
    for eps in epsilons:
        p = problem.with_epsilon(eps)
        ref = reference_for(p, reference_tol)
        approx = method_propagator(p, method, params)
        deltas.append(delta_error(approx, ref, p.t_start, p.t_end, method).delta)
    return ScalingResult(method.upper(), epsilons, deltas, fit_slope(epsilons, deltas))
