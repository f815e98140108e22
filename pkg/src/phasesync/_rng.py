"""Deterministic stream derivation and complex sampling.

All randomness in the package flows through counter-based Philox generators
keyed by `stream_seed`, so any (seed, label) pair names the same stream on
every machine and under any execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_seed(*tokens) -> int:
    """Derive a 64-bit child seed from a sequence of ints and strings.

    Tokens are type-tagged before hashing so ("1",) and (1,) differ.
    """
    h = hashlib.sha256()
    for tok in tokens:
        if isinstance(tok, bool):
            raise TypeError("bool tokens are ambiguous; use int or str")
        if isinstance(tok, (int, np.integer)):
            h.update(b"I" + str(int(tok)).encode("ascii") + b"\x00")
        elif isinstance(tok, str):
            h.update(b"S" + tok.encode("utf-8") + b"\x00")
        else:
            raise TypeError(f"unsupported seed token type: {type(tok)!r}")
    return int.from_bytes(h.digest()[:8], "big")


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def uniform_phases(n: int, rng: np.random.Generator) -> np.ndarray:
    """n unit-modulus entries e^{i theta}, theta uniform on [0, 2 pi)."""
    theta = 2.0 * np.pi * rng.random(n)
    return np.exp(1j * theta)


def complex_normal(shape, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric complex Gaussians with E|w|^2 = 1.

    Box-Muller in polar form: |w|^2 is Exp(1) and the phase is uniform, so
    the real and imaginary parts are independent N(0, 1/2).
    """
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    radius = np.sqrt(-np.log1p(-u1))
    return radius * np.exp(2j * np.pi * u2)
