"""Composite Gauss-Legendre quadrature for operator-valued integrands.

:class:`CompositeGrid` holds the nodes of a composite rule. Values sampled at
those nodes define, panel by panel, the degree ``order - 1`` Legendre
interpolant, which can be integrated to *any* point (not only to panel
edges). This is what makes cumulative integrals such as
``W(t) = int_{t'}^{t} ...`` available on the whole grid at the accuracy of the
underlying rule.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import legendre as L

from .errors import QuadratureError
from .linalg import spectral_norm

ALLOWED_ORDERS = (4, 8, 16)
_EDGE_SLACK = 1e-12


def _reference_rule(order):
    x, w = L.leggauss(order)
    vinv = np.linalg.inv(L.legvander(x, order - 1))
    return x, w, vinv


class CompositeGrid:
    """Gauss-Legendre nodes on panels covering ``[lo, hi]``.

    ``breaks`` are interior points (pulse edges) that must coincide with panel
    edges; the integrands are smooth between them but not across them.
    ``panels`` is the number of panels per unit of ``scale`` (the pulse
    duration), so every segment gets a comparable panel width.
    """

    def __init__(self, lo, hi, panels=64, order=8, breaks=(), scale=None):
        if order < 1:
            raise ValueError("order must be positive")
        if not hi > lo:
            raise ValueError(f"empty grid [{lo}, {hi}]")
        self.lo, self.hi, self.order = float(lo), float(hi), int(order)
        cuts = sorted({self.lo, self.hi, *(float(b) for b in breaks if lo < b < hi)})
        scale = float(scale) if scale else self.hi - self.lo
        width = scale / panels
        edges = [cuts[0]]
        for a, b in zip(cuts[:-1], cuts[1:]):
            n = max(1, int(math.ceil((b - a) / width - 1e-9)))
            edges.extend(np.linspace(a, b, n + 1)[1:])
        self._set_edges(np.asarray(edges))

    def _set_edges(self, edges):
        self.edges = edges
        self.panels = len(edges) - 1
        x, w, self._vinv = _reference_rule(self.order)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        self._half = half
        self.nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        self.weights = (half[:, None] * w[None, :]).ravel()

    @property
    def size(self) -> int:
        return self.nodes.size

    def refined(self) -> "CompositeGrid":
        """Same breakpoints, every panel split in two."""
        grid = object.__new__(CompositeGrid)
        grid.lo, grid.hi, grid.order = self.lo, self.hi, self.order
        mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        edges = np.empty(2 * self.panels + 1)
        edges[0::2] = self.edges
        edges[1::2] = mids
        grid._set_edges(edges)
        return grid

    def integral(self, values) -> np.ndarray:
        """Integral over the whole grid of node samples ``values[n, ...]``."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def _coefficients(self, values):
        values = np.asarray(values)
        per_panel = values.reshape((self.panels, self.order) + values.shape[1:])
        return np.einsum("km,pm...->pk...", self._vinv, per_panel)

    def _locate(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < self.lo - _EDGE_SLACK) or np.any(t > self.hi + _EDGE_SLACK):
            raise ValueError(f"time outside grid [{self.lo}, {self.hi}]")
        p = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, self.panels - 1)
        x = np.clip((t - self.edges[p]) / self._half[p] - 1.0, -1.0, 1.0)
        return p, x

    def interpolant(self, values) -> "Interpolant":
        return Interpolant(self, values)

    def antiderivative(self, values) -> "Antiderivative":
        return Antiderivative(self, values)


class Interpolant:
    """Panelwise Legendre interpolant of node samples."""

    def __init__(self, grid: CompositeGrid, values):
        self.grid = grid
        self._coef = grid._coefficients(values)

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        p, x = self.grid._locate(t)
        v = L.legvander(x, self.grid.order - 1)
        out = np.einsum("nk,nk...->n...", v, self._coef[p])
        return out[0] if scalar else out.reshape(np.shape(t) + out.shape[1:])


class Antiderivative:
    """``F(t) = int_{grid.lo}^{t} f`` with ``f`` the panelwise interpolant."""

    def __init__(self, grid: CompositeGrid, values):
        self.grid = grid
        coef = grid._coefficients(values)
        anti = L.legint(coef, m=1, lbnd=-1, axis=1)
        shape = (grid.panels,) + (1,) * (anti.ndim - 1)
        anti = anti * grid._half.reshape(shape)
        self._coef = anti
        totals = anti.sum(axis=1)  # P_k(1) = 1
        self._offsets = np.concatenate([np.zeros((1,) + totals.shape[1:], totals.dtype), np.cumsum(totals, axis=0)])

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        p, x = self.grid._locate(t)
        v = L.legvander(x, self.grid.order)
        out = np.einsum("nk,nk...->n...", v, self._coef[p]) + self._offsets[p]
        return out[0] if scalar else out.reshape(np.shape(t) + out.shape[1:])

    def at_nodes(self):
        return self(self.grid.nodes)


def _diff_norm(a, b):
    d = np.asarray(a) - np.asarray(b)
    if d.ndim >= 2 and d.shape[-1] == d.shape[-2]:
        return float(np.max(spectral_norm(d)))
    return float(np.max(np.abs(d), initial=0.0))


def integrate(fn, a, b, panels=64, order=8, breaks=(), tol=1e-10, max_doublings=4, scale=None):
    """``int_a^b fn(s) ds`` with panel doubling until successive estimates agree.

    ``fn`` takes a 1-D array of times and returns values stacked on axis 0.
    """
    if order not in ALLOWED_ORDERS:
        raise ValueError(f"order must be one of {ALLOWED_ORDERS}")
    if a == b:
        return np.zeros_like(np.asarray(fn(np.array([a], dtype=float)))[0])
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    grid = CompositeGrid(a, b, panels, order, breaks, scale=scale)
    prev = grid.integral(fn(grid.nodes))
    err = math.inf
    for _ in range(max_doublings):
        grid = grid.refined()
        cur = grid.integral(fn(grid.nodes))
        err = _diff_norm(cur, prev)
        prev = cur
        if err < tol:
            return sign * cur
    raise QuadratureError(f"quadrature did not converge: last change {err:.3e} >= {tol:.1e}", estimate=sign * prev)
