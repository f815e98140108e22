"""Problem instances: planted phases, Hermitian Gaussian noise, distances.

An instance is C = z z* + sigma W with z a vector of unit-modulus entries
and W Hermitian with independent unit-variance complex Gaussian entries off
the diagonal and exact zeros on it. Both factors regenerate bit-exactly
from (n, sigma, seed).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._rng import complex_normal, generator, stream_seed, uniform_phases
from .linalg import hermitianize


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    sigma: float
    signal: np.ndarray
    noise: np.ndarray
    data: np.ndarray
    seed: int


def generate_signal(n: int, seed: int) -> np.ndarray:
    """n independent uniform phases e^{i theta}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return uniform_phases(n, generator(seed))


def generate_wigner(n: int, seed: int) -> np.ndarray:
    """Hermitian noise with unit-variance complex Gaussian off-diagonal entries.

    E|W_ij|^2 = 1 for i != j (real and imaginary parts independent
    N(0, 1/2)); the diagonal is exactly zero. The scale is applied by the
    caller so one realization serves every noise level.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = generator(seed)
    w = np.zeros((n, n), dtype=np.complex128)
    if n > 1:
        rows, cols = np.triu_indices(n, 1)
        w[rows, cols] = complex_normal(rows.shape[0], rng)
        w = w + w.conj().T
    return w


def assemble_instance(n: int, sigma: float, seed: int) -> ProblemInstance:
    """C = z z* + sigma W with independent child streams for z and W.

    The sum is canonized from its upper triangle: complex multiplies leave
    ~1e-17 dust on the diagonal imaginary parts, and downstream contracts
    (file serialization, certificate assembly) want exact Hermitian input.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    z = generate_signal(n, stream_seed(seed, "signal"))
    w = generate_wigner(n, stream_seed(seed, "noise"))
    data = hermitianize(np.outer(z, np.conj(z)) + sigma * w)
    return ProblemInstance(n=n, sigma=float(sigma), signal=z, noise=w, data=data, seed=int(seed))


def distance(z, x) -> float:
    """Quotient distance min over global phases theta of ||x e^{i theta} - z||_2.

    Equals sqrt(||x||^2 + n - 2 |z* x|); on unit-modulus x this reduces to
    the familiar sqrt(2 (n - |z* x|)). Evaluated by rotating x onto z and
    taking the norm of the difference: the closed form cancels n against
    |z* x| and floors near sqrt(n eps) at small distances, while the
    rotated difference is computed termwise without cancellation.
    """
    z = np.asarray(z, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    if z.shape != x.shape or z.ndim != 1:
        raise ValueError("length mismatch")
    n = z.shape[0]
    ip = np.vdot(z, x)
    mod = abs(ip)
    if mod == 0.0:
        return float(np.sqrt(float(np.vdot(x, x).real) + n))
    return float(np.linalg.norm(x * (np.conj(ip) / mod) - z))


def align_phase(x, z) -> np.ndarray:
    """Rotate x by the global phase making z* x real nonnegative.

    When z* x ~ 0 the minimizer is undefined; the input is returned
    unchanged with a warning.
    """
    x = np.asarray(x, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != x.shape or z.ndim != 1:
        raise ValueError("length mismatch")
    ip = np.vdot(z, x)
    if abs(ip) <= 1e-12 * x.shape[0]:
        warnings.warn("global-phase alignment is degenerate (z* x ~ 0); returning x unchanged")
        return np.array(x)
    return x * np.exp(-1j * np.angle(ip))
