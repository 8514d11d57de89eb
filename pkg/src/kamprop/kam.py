"""Superconvergent KAM iterations for a pulse-driven propagator.

Iteration ``k`` starts from a reference propagator ``U_ref`` (the pulse term
for ``k = 1``, the previous effective propagator afterwards) and a
perturbation ``eps_k V_k(t)`` with ``eps_k = eps ** 2 ** (k - 1)``. It builds

* the compatible part ``D_k(t) = U_ref(t, t_k) V_k(t_k) U_ref(t_k, t)``,
* the generator ``W_k(t) = int_{t'_k}^{t} U_ref(t, s) (V_k - D_k)(s) U_ref(s, t) ds``,
* the effective propagator ``U_ref(t, t0) exp(-i (t - t0) eps_k D_k(t0))``,
* the remainder ``V_{k+1}`` as a nested-commutator series in ``W_k``,
* ``eps_k^2 G(t) = eps_k^2 int_{t0}^{t} U_eff(t0, u) V_{k+1}(u) U_eff(u, t0) du``
  and its largest absolute eigenvalue ``lambda``.

The free times ``t_k`` (``t_free``) and ``t'_k`` (``t_lower``) are the
tunable parameters. Everything time-dependent is sampled on one composite
Gauss-Legendre grid; ``W_k`` is obtained from the panelwise antiderivative, so
it can be evaluated at any time without a separate quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError, SeriesDivergenceError
from .linalg import (
    HERMITIAN_TOL,
    commutator,
    dagger,
    identity,
    matexp,
    spectral_norm,
    spectral_radius_hermitian,
)
from .model import SuddenProblem
from .propagator import PropagatorHandle, PropagatorKind, closed_form_u0, effective_propagator
from .quadrature import ALLOWED_ORDERS, CompositeGrid, integrate

MAX_ITERATIONS = 3
REFINE_TOL = 1e-10
MAX_DOUBLINGS = 4


@dataclass(frozen=True)
class KamParams:
    """Free parameters and numerical settings of one iteration.

    ``None`` for ``t_free`` or ``t_lower`` means the pulse onset. With
    ``zero_compatible`` the compatible part is dropped (``D_k = 0``), which
    turns the first iteration into the first-order Magnus propagator when
    ``t_lower`` is the initial time.
    """

    t_free: float | None = None
    t_lower: float | None = None
    series_tol: float = 1e-15
    series_max_terms: int = 60
    quad_panels: int = 64
    quad_order: int = 8
    zero_compatible: bool = False

    def __post_init__(self):
        if self.series_max_terms < 1:
            raise ValueError("series_max_terms must be >= 1")
        if self.quad_panels < 4:
            raise ValueError("quad_panels must be >= 4")
        if self.quad_order not in ALLOWED_ORDERS:
            raise ValueError(f"quad_order must be one of {ALLOWED_ORDERS}")
        for name in ("t_free", "t_lower"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{name} must be finite")

    def resolved(self, problem: SuddenProblem) -> "KamParams":
        return replace(
            self,
            t_free=problem.t_start if self.t_free is None else float(self.t_free),
            t_lower=problem.t_start if self.t_lower is None else float(self.t_lower),
        )

    def outside_pulse(self, problem: SuddenProblem) -> list[str]:
        """Names of free times lying outside the pulse window (legal, but unusual)."""
        p = self.resolved(problem)
        return [n for n in ("t_free", "t_lower") if not problem.t_start <= getattr(p, n) <= problem.t_end]


def order_parameter(epsilon: float, k: int) -> float:
    """Superconvergent schedule ``eps_k = eps ** 2 ** (k - 1)``."""
    return epsilon ** (2 ** (k - 1))


# ---------------------------------------------------------------------------
# Single operations on arbitrary callables. These integrate directly and are
# slower than the tabulated chain below, which they are used to cross-check.
# ---------------------------------------------------------------------------


def d_k(u_ref: PropagatorHandle, perturbation: Callable, t_free: float, t):
    """Compatible part: the perturbation frozen at ``t_free``, carried along by ``u_ref``."""
    v = np.asarray(perturbation(np.atleast_1d(float(t_free))))[0]
    u = u_ref(t, t_free)
    return u @ v @ dagger(u)


def w_k(u_ref, perturbation, d_fn, t_lower, t, panels=64, order=8, breaks=(), tol=REFINE_TOL):
    """Generator ``int_{t_lower}^{t} U(t, s) (V(s) - D(s)) U(s, t) ds`` (homogeneous term set to 0)."""
    t = float(t)

    def integrand(s):
        u = u_ref(t, s)
        return u @ (perturbation(s) - d_fn(s)) @ dagger(u)

    return integrate(integrand, float(t_lower), t, panels, order, breaks, tol)


def nested_commutator_series(w, v, d, eps_k, series_tol=1e-15, max_terms=60):
    """Remainder ``V_next`` with the ``eps_k**2`` prefactor removed.

    Sums ``i^j eps_k^(j-1) / (j+1)! ad_W^j (j V + D)`` for ``j >= 1``, stopping once a
    term's norm is at most ``series_tol`` times the running sum's norm.
    Broadcasts over leading axes.
    """
    w = np.asarray(w, dtype=complex)
    adv = np.asarray(v, dtype=complex)
    add = np.asarray(d, dtype=complex)
    total = np.zeros(np.broadcast_shapes(w.shape, adv.shape, add.shape), dtype=complex)
    term_norm = np.inf
    for j in range(1, max_terms + 1):
        adv = commutator(w, adv)
        add = commutator(w, add)
        coef = (1j**j) * (eps_k ** (j - 1)) / math.factorial(j + 1)
        term = coef * (j * adv + add)
        total = total + term
        term_norm = np.asarray(spectral_norm(term))
        if np.all(term_norm <= series_tol * np.asarray(spectral_norm(total))):
            return total
    raise SeriesDivergenceError(
        f"commutator series not converged after {max_terms} terms",
        last_term_norm=float(np.max(term_norm)),
    )


def remainder_v(w_fn, perturbation, d_fn, eps_k, t, series_tol=1e-15, series_max_terms=60):
    """``V_{k+1}(t)`` from callables for ``W_k``, ``V_k`` and ``D_k``."""
    t = np.asarray(t, dtype=float)
    return nested_commutator_series(w_fn(t), perturbation(t), d_fn(t), eps_k, series_tol, series_max_terms)


def g2_second_order(effective, v2_fn, eps_k, t0, t, panels=64, order=8, breaks=(), tol=REFINE_TOL):
    """``eps_k^2 int_{t0}^{t} U_eff(t0, u) V(u) U_eff(u, t0) du``."""
    if t < t0:
        raise ValueError("g2_second_order needs t >= t0")

    def integrand(u):
        x = effective(t0, u)
        return x @ v2_fn(u) @ dagger(x)

    return eps_k**2 * integrate(integrand, float(t0), float(t), panels, order, breaks, tol)


def largest_abs_eigenvalue(g) -> float:
    return float(spectral_radius_hermitian(g, tol=HERMITIAN_TOL))


# ---------------------------------------------------------------------------
# Tabulated chain
# ---------------------------------------------------------------------------


class KamIteration:
    """Artifacts of iteration ``k`` on a fixed grid."""

    def __init__(self, k, problem, params, grid, reference, perturbation, perturbation_nodes=None):
        self.k = k
        self.problem = problem
        self.params = params.resolved(problem)
        self.grid = grid
        self.reference = reference
        self.perturbation = perturbation
        self.order_parameter = order_parameter(problem.epsilon, k)
        self._base = problem.t_start

        p = self.params
        nodes = grid.nodes
        v_nodes = perturbation(nodes) if perturbation_nodes is None else perturbation_nodes
        if p.zero_compatible:
            self.d_at_free = np.zeros((problem.dim, problem.dim), dtype=complex)
        else:
            self.d_at_free = np.asarray(perturbation(np.array([p.t_free])))[0]
        self.d_at_base = self.d(np.asarray(self._base))

        # W in the frame of the base time: W(t) = U(t, b) Wt(t) U(b, t)
        ub = reference(self._base, nodes)
        integrand = ub @ (v_nodes - self.d(nodes)) @ dagger(ub)
        self._w_anti = grid.antiderivative(integrand)
        self._w_shift = self._w_anti(p.t_lower)
        self.effective = effective_propagator(reference, self.d_at_free, self.order_parameter, p.t_free)

        w_nodes = self.w(nodes)
        self.w_nodes = w_nodes
        self.remainder_nodes = nested_commutator_series(
            w_nodes, v_nodes, self.d(nodes), self.order_parameter, p.series_tol, p.series_max_terms
        )

    def d(self, t):
        """``D_k(t)``."""
        t = np.asarray(t, dtype=float)
        u = self.reference(t, self.params.t_free)
        return u @ self.d_at_free @ dagger(u)

    def w(self, t):
        """``W_k(t)``; zero at ``t_lower``."""
        t = np.asarray(t, dtype=float)
        wt = self._w_anti(t) - self._w_shift
        u = self.reference(t, self._base)
        return u @ wt @ dagger(u)

    def remainder(self, t):
        """``V_{k+1}(t)``, the next perturbation without its ``eps_k**2`` weight."""
        t = np.asarray(t, dtype=float)
        p = self.params
        return nested_commutator_series(
            self.w(t), self.perturbation(t), self.d(t), self.order_parameter, p.series_tol, p.series_max_terms
        )

    def transformation(self, t):
        """``T_k(t) = exp(-i eps_k W_k(t))``."""
        return matexp(-1j * self.order_parameter * self.w(t))

    def secular_factor(self, t, t0):
        """``S_k(t, t0) = exp(-i (t - t0) eps_k D_k(t0))``."""
        t = np.asarray(t, dtype=float)
        t0 = np.asarray(t0, dtype=float)
        return matexp(-1j * ((t - t0) * self.order_parameter)[..., None, None] * self.d(t0))

    def g(self, t0=None, t=None):
        """``eps_k^2 G^(2)(t)``, the lowest-order generator of the rest, based at ``t0``."""
        t0 = self.problem.t_start if t0 is None else float(t0)
        t = self.problem.t_end if t is None else float(t)
        if t < t0:
            raise ValueError("need t >= t0")
        x = self.effective(t0, self.grid.nodes)
        integrand = x @ self.remainder_nodes @ dagger(x)
        anti = self.grid.antiderivative(integrand)
        return self.order_parameter**2 * (anti(t) - anti(t0))

    @property
    def lambda_next(self) -> float:
        """Largest absolute eigenvalue of ``eps_k^2 G^(2)(t_end)`` based at the pulse onset."""
        return largest_abs_eigenvalue(self.g())


def _grid_for(problem: SuddenProblem, params_list, panels, order, extra_times=()):
    times = [problem.t_start, problem.t_end, *extra_times]
    for p in params_list:
        r = p.resolved(problem)
        times += [r.t_free, r.t_lower]
    lo, hi = min(times), max(times)
    return CompositeGrid(lo, hi, panels, order, breaks=(problem.t_start, problem.t_end), scale=problem.pulse.duration)


class KamChain:
    """``n`` chained iterations sharing one grid."""

    def __init__(self, problem: SuddenProblem, params_list: Sequence[KamParams], n: int, grid: CompositeGrid):
        if not 1 <= n <= min(MAX_ITERATIONS, len(params_list)):
            raise ValueError(f"need 1 <= n <= min({MAX_ITERATIONS}, len(params_list)), got n={n}")
        self.problem = problem
        self.grid = grid
        self.u0 = closed_form_u0(problem)
        self.iterations: list[KamIteration] = []
        reference = self.u0
        perturbation = problem.perturbation
        v_nodes = None
        for k in range(1, n + 1):
            it = KamIteration(k, problem, params_list[k - 1], grid, reference, perturbation, v_nodes)
            self.iterations.append(it)
            reference = it.effective
            perturbation = it.remainder
            v_nodes = it.remainder_nodes

    @property
    def n(self) -> int:
        return len(self.iterations)

    def __call__(self, t, t0):
        """``T_1(t)...T_n(t) U_eff,n(t, t0) T_n(t0)^dagger...T_1(t0)^dagger``."""
        t = np.asarray(t, dtype=float)
        t0 = np.asarray(t0, dtype=float)
        left = identity(self.problem.dim)
        right = identity(self.problem.dim)
        for it in self.iterations:
            left = left @ it.transformation(t)
            right = right @ it.transformation(t0)
        return left @ self.iterations[-1].effective(t, t0) @ dagger(right)

    def handle(self) -> PropagatorHandle:
        return PropagatorHandle(self, PropagatorKind.COMPOSED, REFINE_TOL, self.problem.dim)

    @property
    def lambda_next(self) -> float:
        return self.iterations[-1].lambda_next

    def fingerprint(self):
        """Quantities compared between grid refinements."""
        t0, t1 = self.problem.t_start, self.problem.t_end
        return self(t1, t0), self.iterations[-1].g()


def build_chain(problem: SuddenProblem, params_list: Sequence[KamParams], n: int | None = None, refine: bool = True, extra_times=()) -> KamChain:
    """Build ``n`` iterations, doubling panels until the end-of-pulse propagator
    and ``eps_n^2 G`` change by less than ``REFINE_TOL`` (at most four doublings)."""
    params_list = list(params_list)
    n = len(params_list) if n is None else n
    first = params_list[0]
    grid = _grid_for(problem, params_list[:n], first.quad_panels, first.quad_order, extra_times)
    chain = KamChain(problem, params_list, n, grid)
    if not refine:
        return chain
    prev = chain.fingerprint()
    change = math.inf
    for _ in range(MAX_DOUBLINGS):
        grid = grid.refined()
        chain = KamChain(problem, params_list, n, grid)
        cur = chain.fingerprint()
        change = max(spectral_norm(cur[0] - prev[0]), spectral_norm(cur[1] - prev[1]))
        if change < REFINE_TOL:
            return chain
        prev = cur
    raise QuadratureError(f"KAM grid refinement did not converge (last change {change:.3e})", estimate=change)


def _as_list(params, n=None):
    if isinstance(params, KamParams):
        return [params]
    return list(params)


def lambda_objective(problem: SuddenProblem, params) -> float:
    """Largest absolute eigenvalue of ``eps_n^2 G^(2)(t_end)`` after the last iteration in ``params``.

    Only the approximate construction is used; the exact propagator is never evaluated.
    """
    if problem.epsilon == 0.0:
        return 0.0
    return build_chain(problem, _as_list(params)).lambda_next


def kam_approximant(problem: SuddenProblem, params_list, n: int | None = None) -> PropagatorHandle:
    """Unitary ``n``-iteration approximation of the full propagator (rest set to identity)."""
    params_list = _as_list(params_list)
    n = len(params_list) if n is None else n
    return build_chain(problem, params_list, n).handle()


def default_params(n: int, **overrides) -> list[KamParams]:
    return [KamParams(**overrides) for _ in range(n)]
