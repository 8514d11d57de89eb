"""Dyson and Magnus expansions in the interaction picture of the pulse term.

With ``Ht(s) = U0(t0, s) eps V U0(s, t0)``:

* DYSON1  ``U0(t, t0) [I - i int Ht]``
* DYSON2  adds ``(-i)^2 int int_{s2 < s1} Ht(s1) Ht(s2)``
* MAGNUS1 ``U0(t, t0) exp(-i int Ht)``
* MAGNUS2 exponent ``-i int Ht - 1/2 int int_{s2 < s1} [Ht(s1), Ht(s2)]``

The triangle integrals are ``int Ht(s1) F(s1) ds1`` with ``F`` the running
integral of ``Ht``, taken from the panelwise antiderivative.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import QuadratureError
from .linalg import commutator, dagger, identity, matexp, spectral_norm
from .model import SuddenProblem
from .propagator import PropagatorHandle, PropagatorKind, closed_form_u0
from .quadrature import CompositeGrid

REFINE_TOL = 1e-10
MAX_DOUBLINGS = 4


class BaselineKind(enum.Enum):
    DYSON1 = "DYSON1"
    DYSON2 = "DYSON2"
    MAGNUS1 = "MAGNUS1"
    MAGNUS2 = "MAGNUS2"

    @property
    def order(self) -> int:
        return int(self.value[-1])


def _interaction_integrals(problem, u0, t0, t, grid):
    nodes = grid.nodes
    u = u0(t0, nodes)
    ht = problem.epsilon * (u @ problem.perturbation(nodes) @ dagger(u))
    first = grid.integral(ht)
    running = grid.antiderivative(ht).at_nodes()
    ordered = grid.integral(ht @ running)
    comm = grid.integral(commutator(ht, running))
    return first, ordered, comm


def _generator(kind, first, ordered, comm, dim):
    eye = identity(dim)
    if kind is BaselineKind.DYSON1:
        return eye - 1j * first
    if kind is BaselineKind.DYSON2:
        return eye - 1j * first - ordered
    if kind is BaselineKind.MAGNUS1:
        return matexp(-1j * first)
    return matexp(-1j * first - 0.5 * comm)


def baseline_propagator(problem: SuddenProblem, kind, panels: int = 64, order: int = 8) -> PropagatorHandle:
    """Comparison propagator for ``kind``; for ``t < t0`` the adjoint of ``(t0, t)`` is returned."""
    kind = BaselineKind(kind)
    u0 = closed_form_u0(problem)
    dim = problem.dim
    breaks = (problem.t_start, problem.t_end)

    def evaluate(t, t0):
        t, t0 = float(t), float(t0)
        if t == t0:
            return identity(dim)
        if t < t0:
            return dagger(evaluate(t0, t))
        grid = CompositeGrid(t0, t, panels, order, breaks, scale=problem.pulse.duration)
        prev = _generator(kind, *_interaction_integrals(problem, u0, t0, t, grid), dim)
        change = math.inf
        for _ in range(MAX_DOUBLINGS):
            grid = grid.refined()
            cur = _generator(kind, *_interaction_integrals(problem, u0, t0, t, grid), dim)
            change = spectral_norm(cur - prev)
            prev = cur
            if change < REFINE_TOL:
                return u0(t, t0) @ cur
        raise QuadratureError(f"{kind.value} quadrature did not converge (last change {change:.3e})", estimate=change)

    return PropagatorHandle(evaluate, PropagatorKind.COMPOSED, REFINE_TOL, dim, vectorized=False)
