"""Two-time unitary propagators ``U(t, t0)``.

Three kinds are provided: the closed form of the pulse term (a scalar
envelope times a fixed operator, so the family commutes with itself), an
adaptive Runge-Kutta reference for arbitrary Hamiltonians, and composed
handles built from other handles.
"""

from __future__ import annotations

import bisect
import enum
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError
from .linalg import as_matrix, dagger, identity, matexp, unitarity_defect, unitary_from_hermitian
from .model import SuddenProblem, pulse_phase

_KEY_DIGITS = 14


class PropagatorKind(enum.Enum):
    CLOSED_FORM = "closed_form"
    ODE_REFERENCE = "ode_reference"
    COMPOSED = "composed"


@dataclass(frozen=True)
class PropagatorHandle:
    """``U(t, t0)`` as a callable.

    ``vectorized`` handles accept arrays of ``t`` and ``t0`` (broadcast
    together) and return stacked matrices; the others take scalars only.
    """

    evaluator: Callable
    kind: PropagatorKind
    quality: float
    dim: int
    vectorized: bool = True

    def __call__(self, t, t0):
        if not self.vectorized and (np.ndim(t) or np.ndim(t0)):
            tt, ss = np.broadcast_arrays(np.asarray(t, float), np.asarray(t0, float))
            out = [self.evaluator(float(a), float(b)) for a, b in zip(tt.ravel(), ss.ravel())]
            return np.reshape(out, tt.shape + (self.dim, self.dim))
        return self.evaluator(t, t0)

    def unitarity_defect(self, t, t0) -> float:
        return float(np.max(unitarity_defect(self(t, t0))))


def closed_form_u0(problem: SuddenProblem) -> PropagatorHandle:
    """``U0(t, t0) = exp(-i theta(t, t0) C)`` for ``H0(t) = Omega(t) C``."""
    coupling = problem.coupling_operator
    pulse = problem.pulse

    def evaluate(t, t0):
        theta = pulse_phase(pulse, t0, t)
        return unitary_from_hermitian(coupling, theta)

    return PropagatorHandle(evaluate, PropagatorKind.CLOSED_FORM, 1e-14, problem.dim)


class _ReferenceIntegrator:
    """Memoized column-wise integration of ``i dU/dt = H(t) U``.

    Results are cached per base time; a new query restarts from the cached
    time closest to the target on the segment between base and target.
    """

    def __init__(self, hamiltonian, dim, tol, method):
        self.hamiltonian = hamiltonian
        self.dim = dim
        self.tol = tol
        self.method = method
        self._cache: dict[float, tuple[list[float], list[np.ndarray]]] = {}
        self._lock = threading.Lock()

    def _rhs(self, t, y):
        u = y.reshape(self.dim, self.dim)
        return (-1j * (np.asarray(self.hamiltonian(t)) @ u)).ravel()

    def _start_point(self, t0, t):
        times, values = self._cache.get(t0, ([], []))
        best_t, best_u = t0, identity(self.dim)
        lo, hi = min(t0, t), max(t0, t)
        i = bisect.bisect_left(times, t)
        for j in (i - 1, i):
            if 0 <= j < len(times) and lo <= times[j] <= hi and abs(times[j] - t) < abs(best_t - t):
                best_t, best_u = times[j], values[j]
        return best_t, best_u

    def __call__(self, t, t0):
        t, t0 = round(float(t), _KEY_DIGITS), round(float(t0), _KEY_DIGITS)
        if t == t0:
            return identity(self.dim)
        with self._lock:
            start, u_start = self._start_point(t0, t)
        if start == t:
            return u_start.copy()
        sol = solve_ivp(
            self._rhs,
            (start, t),
            u_start.astype(complex).ravel(),
            method=self.method,
            rtol=self.tol,
            atol=self.tol,
        )
        if sol.status != 0:
            raise IntegrationError(f"reference integration failed at t={sol.t[-1]:.6g}: {sol.message}", time=float(sol.t[-1]))
        u = sol.y[:, -1].reshape(self.dim, self.dim)
        with self._lock:
            times, values = self._cache.setdefault(t0, ([], []))
            k = bisect.bisect_left(times, t)
            if k == len(times) or times[k] != t:
                times.insert(k, t)
                values.insert(k, u)
        return u.copy()


def ode_reference(hamiltonian: Callable, tol: float = 1e-12, dim: int | None = None, method: str = "DOP853") -> PropagatorHandle:
    """High-accuracy reference propagator from an adaptive embedded RK pair.

    No unitarity projection is applied; callers inspect
    :meth:`PropagatorHandle.unitarity_defect` to separate integrator error from
    method error.
    """
    if not 1e-14 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-14, 1e-6], got {tol}")
    if dim is None:
        dim = as_matrix(hamiltonian(0.0)).shape[-1]
    integrator = _ReferenceIntegrator(hamiltonian, dim, tol, method)
    return PropagatorHandle(integrator, PropagatorKind.ODE_REFERENCE, tol, dim, vectorized=False)


def reference_for(problem: SuddenProblem, tol: float = 1e-12) -> PropagatorHandle:
    """Reference propagator of the full problem ``Omega(t) C + eps V``."""
    return ode_reference(problem.hamiltonian, tol=tol, dim=problem.dim)


def effective_propagator(u0: PropagatorHandle, d_at_ref, eps_k: float, t_ref: float) -> PropagatorHandle:
    """Propagator of ``H0(t) + eps_k D(t)`` where ``D`` is co-moving with ``u0``.

    ``D(t) = u0(t, t_ref) d_at_ref u0(t_ref, t)`` is the compatible part, so the
    propagator factorizes as ``u0(t, t0) exp(-i (t - t0) eps_k D(t0))``.
    """
    d_ref = as_matrix(d_at_ref)
    if d_ref.shape[-1] != u0.dim:
        raise ValueError(f"dimension mismatch: {d_ref.shape[-1]} vs {u0.dim}")

    def evaluate(t, t0):
        t = np.asarray(t, dtype=float)
        t0 = np.asarray(t0, dtype=float)
        v = u0(t0, t_ref)
        d0 = v @ d_ref @ dagger(v)
        step = -1j * ((t - t0) * eps_k)[..., None, None]
        return u0(t, t0) @ matexp(step * d0)

    return PropagatorHandle(evaluate, PropagatorKind.COMPOSED, u0.quality, u0.dim, u0.vectorized)
