"""Dense complex Hermitian linear algebra.

Matrix-vector products, vector norms, and extreme-eigenvalue estimation by
shifted power iteration. Matrices are plain complex128 ndarrays; Hermitian
symmetry is the caller's contract, with `hermitianize` available to canonize
arbitrary input from its upper triangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._rng import complex_normal, generator, stream_seed

_WARMUP_SWEEPS = 40


class PowerIterationError(RuntimeError):
    """The eigen-iteration exhausted max_iter above its residual target."""

    def __init__(self, message: str, value: float, residual: float, iterations: int):
        super().__init__(message)
        self.value = value
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class EigResult:
    value: float
    vector: np.ndarray
    iterations: int
    residual: float


def hermitianize(a) -> np.ndarray:
    """Canonical Hermitian matrix from the upper triangle of `a`.

    The strict upper triangle is mirrored conjugate onto the lower one and
    the diagonal keeps only its real part, so the result is Hermitian
    bit-exactly.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    upper = np.triu(a, 1)
    out = upper + upper.conj().T
    np.fill_diagonal(out, np.real(np.diagonal(a)))
    return out


def is_hermitian(a) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.array_equal(a, a.conj().T)


def matvec(m, v) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("square matrix required")
    if v.shape != (m.shape[0],):
        raise ValueError("dimension mismatch")
    return m @ v


def norms(v) -> tuple[float, float, float]:
    """(l1, l2, linf) of a complex vector, with linf <= l2 <= l1 guaranteed.

    Float rounding alone could break the chain by an ulp, so the values are
    clamped to keep it exact.
    """
    mods = np.abs(np.asarray(v, dtype=np.complex128))
    l1 = float(mods.sum())
    l2 = float(np.linalg.norm(mods))
    linf = float(mods.max()) if mods.size else 0.0
    l2 = max(l2, linf)
    l1 = max(l1, l2)
    return l1, l2, linf


def _resolve_max_iter(n: int, max_iter) -> int:
    if max_iter is None:
        return 50 * n + 1000
    return int(max_iter)


def dominant_eigpair(m, tol: float = 1e-10, max_iter: int | None = None, seed: int = 0) -> EigResult:
    """Algebraically largest eigenpair of a Hermitian matrix.

    Power iteration on M + beta I with an adaptive nonnegative shift beta
    chosen from a short warmup, so the iteration tracks the algebraically
    largest (not largest-modulus) eigenvalue. Converges when
    ||M v - value v||_2 <= tol (1 + |value|). Starts from a seeded random
    complex vector; the all-zero matrix returns value 0 with that start
    vector, which is the documented degenerate case.
    """
    m = np.ascontiguousarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError("square matrix of order >= 1 required")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = m.shape[0]
    v0 = complex_normal(n, generator(seed))
    fro = float(np.linalg.norm(m))
    value, vector, iterations, residual, converged = _kernels.power_iterate(
        m, v0, float(tol), _resolve_max_iter(n, max_iter), _WARMUP_SWEEPS, fro
    )
    if not converged:
        raise PowerIterationError(
            f"no convergence after {iterations} sweeps: last value {value:.12g}, "
            f"residual {residual:.3e} above target {tol:g}",
            value,
            residual,
            iterations,
        )
    return EigResult(float(value), vector, int(iterations), float(residual))


def lambda_min(m, tol: float = 1e-10, max_iter: int | None = None, seed: int = 0) -> float:
    """Smallest eigenvalue, via the dominant pair of the negated matrix."""
    m = np.asarray(m, dtype=np.complex128)
    return -dominant_eigpair(-m, tol=tol, max_iter=max_iter, seed=seed).value


def operator_norm(m, tol: float = 1e-10, seed: int = 0, max_iter: int | None = None) -> float:
    """max(lambda_max, -lambda_min); the largest singular value for Hermitian input."""
    top = dominant_eigpair(m, tol=tol, max_iter=max_iter, seed=stream_seed(seed, "opnorm-max")).value
    bot = lambda_min(m, tol=tol, max_iter=max_iter, seed=stream_seed(seed, "opnorm-min"))
    return max(top, -bot, 0.0)
