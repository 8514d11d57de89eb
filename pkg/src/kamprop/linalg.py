"""Small dense complex matrix algebra.

Matrices are plain ``numpy`` complex arrays of shape ``(..., d, d)``; every
routine broadcasts over leading axes so that a whole time grid of operators
can be processed at once. The two-level case (``d == 2``) takes closed-form
paths throughout.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericError

HERMITIAN_TOL = 1e-10

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

_TAYLOR_TERMS = 20


def as_matrix(a) -> np.ndarray:
    """Coerce to a complex array whose last two axes are square."""
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] < 1:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    return a


def _check_finite(a):
    if not np.all(np.isfinite(a)):
        raise NumericError("non-finite matrix entries")


def dagger(a) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def commutator(a, b) -> np.ndarray:
    """Return ``a @ b - b @ a``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return a @ b - b @ a


def hermiticity_defect(a) -> float:
    a = as_matrix(a)
    return float(np.max(np.abs(a - dagger(a)), initial=0.0))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(a) <= tol


def hermitian_part(a) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def _expm2(a):
    # a = c0*I + B with B traceless, B @ B = q2*I
    c0 = 0.5 * (a[..., 0, 0] + a[..., 1, 1])
    b00 = 0.5 * (a[..., 0, 0] - a[..., 1, 1])
    q2 = b00 * b00 + a[..., 0, 1] * a[..., 1, 0]
    q = np.sqrt(q2)
    small = np.abs(q2) < 1e-6
    safe_q = np.where(small, 1.0, q)
    ch = np.where(small, 1 + q2 / 2 + q2 * q2 / 24, np.cosh(safe_q))
    shc = np.where(small, 1 + q2 / 6 + q2 * q2 / 120 + q2**3 / 5040, np.sinh(safe_q) / safe_q)
    scale = np.exp(c0)
    out = np.empty_like(a)
    out[..., 0, 0] = scale * (ch + shc * b00)
    out[..., 1, 1] = scale * (ch - shc * b00)
    out[..., 0, 1] = scale * shc * a[..., 0, 1]
    out[..., 1, 0] = scale * shc * a[..., 1, 0]
    return out


def _expm_taylor(a):
    norm = float(np.max(np.sum(np.abs(a), axis=-1), initial=0.0))
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    x = a / (2.0**squarings)
    eye = np.broadcast_to(np.eye(a.shape[-1], dtype=complex), a.shape)
    out = eye.copy()
    term = eye.copy()
    for k in range(1, _TAYLOR_TERMS + 1):
        term = term @ x / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def matexp(a) -> np.ndarray:
    """Matrix exponential, broadcasting over leading axes.

    Two-level input uses ``exp(c0 I + B) = e^c0 (cosh q I + sinh(q)/q B)``
    with ``B`` traceless and ``q**2 = -det B``; larger matrices use a
    20-term Taylor series after scaling, followed by repeated squaring.
    """
    a = as_matrix(a)
    _check_finite(a)
    if a.shape[-1] == 1:
        return np.exp(a)
    if a.shape[-1] == 2:
        return _expm2(a)
    return _expm_taylor(a)


def unitary_from_hermitian(h, theta=1.0) -> np.ndarray:
    """``exp(-i theta h)`` with ``theta`` broadcast against the leading axes of ``h``."""
    theta = np.asarray(theta, dtype=float)[..., None, None]
    return matexp(-1j * theta * as_matrix(h))


def hermitian_eigenvalues(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Real eigenvalues in ascending order along the last axis."""
    a = as_matrix(a)
    _check_finite(a)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e} > {tol:.1e})")
    if a.shape[-1] == 2:
        mean = 0.5 * (a[..., 0, 0].real + a[..., 1, 1].real)
        half = 0.5 * (a[..., 0, 0].real - a[..., 1, 1].real)
        off = 0.5 * (a[..., 0, 1] + np.conj(a[..., 1, 0]))
        r = np.hypot(half, np.abs(off))
        return np.stack([mean - r, mean + r], axis=-1)
    return np.linalg.eigvalsh(hermitian_part(a))


def spectral_radius_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    return np.max(np.abs(hermitian_eigenvalues(a, tol)), axis=-1)


def spectral_norm(a):
    """Largest singular value, as the square root of the top eigenvalue of ``a^dagger a``."""
    a = as_matrix(a)
    _check_finite(a)
    gram = hermitian_part(dagger(a) @ a)
    top = hermitian_eigenvalues(gram, tol=np.inf)[..., -1]
    out = np.sqrt(np.clip(top, 0.0, None))
    return float(out) if np.ndim(out) == 0 else out


def frobenius_norm(a):
    a = as_matrix(a)
    out = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))
    return float(out) if np.ndim(out) == 0 else out


def unitarity_defect(u):
    """``|| u^dagger u - I ||`` in the spectral norm."""
    u = as_matrix(u)
    return spectral_norm(dagger(u) @ u - identity(u.shape[-1]))


def conjugate(u, a) -> np.ndarray:
    """``u @ a @ u^dagger``."""
    return u @ a @ dagger(u)
