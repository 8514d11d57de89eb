"""Pulses and the nondimensionalized short-pulse problem.

In the sudden regime the time-dependent pulse term is the *reference*
Hamiltonian ``H0(t) = Omega(t) * coupling`` and the static system Hamiltonian
is the *perturbation*, weighted by the sudden parameter ``eps = omega * tau``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import HERMITIAN_TOL, SIGMA_X, SIGMA_Z, as_matrix, hermiticity_defect


class PulseShape(enum.Enum):
    SIN2 = "sin2"
    CONSTANT = "constant"


@dataclass(frozen=True)
class Pulse:
    """Envelope with support ``[t_start, t_end]`` and time integral ``area``."""

    area: float = 1.0
    t_start: float = 0.0
    t_end: float = 1.0
    shape: PulseShape = PulseShape.SIN2

    def __post_init__(self):
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_end)):
            raise ValueError("pulse support must be finite")
        if not self.t_start < self.t_end:
            raise ValueError(f"need t_start < t_end, got [{self.t_start}, {self.t_end}]")
        if not math.isfinite(self.area):
            raise ValueError("pulse area must be finite")
        object.__setattr__(self, "shape", PulseShape(self.shape))

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def value(self, t):
        return pulse_value(self, t)

    def phase(self, t0, t):
        return pulse_phase(self, t0, t)


def pulse_value(p: Pulse, t):
    """Envelope ``Omega(t)``; exactly zero outside the support.

    SIN2 is ``2 A / T * sin^2(pi (t - t_start) / T)``, which on ``[0, 1]``
    reduces to ``2 A sin^2(pi t)``.
    """
    t = np.asarray(t, dtype=float)
    u = (t - p.t_start) / p.duration
    inside = (u >= 0.0) & (u <= 1.0)
    if p.shape is PulseShape.SIN2:
        val = 2.0 * p.area / p.duration * np.sin(np.pi * u) ** 2
    else:
        val = np.full_like(u, p.area / p.duration)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _cumulative(p: Pulse, t):
    u = np.clip((np.asarray(t, dtype=float) - p.t_start) / p.duration, 0.0, 1.0)
    if p.shape is PulseShape.SIN2:
        return p.area * (u - np.sin(2.0 * np.pi * u) / (2.0 * np.pi))
    return p.area * u


def pulse_phase(p: Pulse, t0, t):
    """``theta(t, t0) = integral of Omega from t0 to t`` (closed form)."""
    out = _cumulative(p, t) - _cumulative(p, t0)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SuddenProblem:
    """``i dU/dt = (Omega(t) * coupling + eps * static) U`` in dimensionless time."""

    pulse: Pulse = field(default_factory=Pulse)
    coupling_operator: np.ndarray = field(default_factory=lambda: SIGMA_X.copy())
    static_operator: np.ndarray = field(default_factory=lambda: SIGMA_Z.copy())
    epsilon: float = 0.5

    def __post_init__(self):
        c = as_matrix(self.coupling_operator)
        s = as_matrix(self.static_operator)
        if c.ndim != 2 or s.ndim != 2 or c.shape != s.shape:
            raise ValueError("coupling and static operators must be single matrices of equal size")
        for name, op in (("coupling", c), ("static", s)):
            if hermiticity_defect(op) > HERMITIAN_TOL:
                raise ValueError(f"{name} operator is not Hermitian")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError(f"epsilon must be finite and non-negative, got {self.epsilon}")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "coupling_operator", c)
        object.__setattr__(self, "static_operator", s)

    @property
    def dim(self) -> int:
        return self.coupling_operator.shape[0]

    @property
    def t_start(self) -> float:
        return self.pulse.t_start

    @property
    def t_end(self) -> float:
        return self.pulse.t_end

    def with_epsilon(self, epsilon: float) -> "SuddenProblem":
        return SuddenProblem(self.pulse, self.coupling_operator, self.static_operator, epsilon)

    def reference_hamiltonian(self, t):
        """The pulse term ``H0(t)``, broadcasting over an array of times."""
        omega = np.asarray(pulse_value(self.pulse, t))
        return omega[..., None, None] * self.coupling_operator

    def perturbation(self, t):
        """``V1(t)``: the static operator broadcast to the shape of ``t``."""
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.static_operator, t.shape + self.static_operator.shape).copy()

    def hamiltonian(self, t):
        return hamiltonian(self, t)


def hamiltonian(problem: SuddenProblem, t):
    """Full generator ``Omega(t) * coupling + eps * static``."""
    return problem.reference_hamiltonian(t) + problem.epsilon * problem.perturbation(t)


def two_level_problem(area=1.0, epsilon=0.5, t_start=0.0, t_end=1.0, shape=PulseShape.SIN2):
    """``H0 = Omega(t) sigma_x``, ``V1 = sigma_z``."""
    return SuddenProblem(Pulse(area, t_start, t_end, PulseShape(shape)), SIGMA_X, SIGMA_Z, epsilon)


def sudden_parameter(omega: float, tau: float) -> float:
    """``eps = omega * tau`` from a system frequency and a pulse duration."""
    return omega * tau
