"""Pure numpy kernels: shifted power iteration and the fixed-point loop.

Semantics are shared with the compiled backend; results agree to roundoff
(not bit-for-bit: BLAS and numpy reductions may round differently).
"""

from __future__ import annotations

import numpy as np

BACKEND = "reference"


def power_iterate(m, v0, tol, max_iter, warmup, fro):
    """Algebraically largest eigenpair of a Hermitian matrix.

    Runs `warmup` plain iterations to estimate the spectral radius from
    below (rho = max ||Mv||_2 over unit v), then iterates on M + beta I with
    beta = 1 + min(1.1 rho, fro). The main loop restarts from the original
    start vector: warmup drags the iterate toward the largest-magnitude
    eigenvalue, which is the wrong end when that eigenvalue is negative,
    and a converged wrong-end iterate would pass the residual test. A
    negative Rayleigh quotient of the shifted operator proves the shift too
    small; beta is then enlarged geometrically and the iterate reset.

    Returns (value, vector, iterations, residual, converged); `iterations`
    counts every matvec sweep, `residual` is ||Mv - value*v||_2 which is
    invariant under the shift.
    """
    n = m.shape[0]
    v = np.array(v0, dtype=np.complex128)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0:
        v = np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128)
    else:
        v = v / nrm
    start = np.array(v)

    iterations = 0
    rho = 0.0
    for _ in range(warmup):
        w = m @ v
        iterations += 1
        nw = float(np.linalg.norm(w))
        if nw > rho:
            rho = nw
        if nw <= 1e-300:
            break
        v = w / nw

    beta = 1.0 + min(1.1 * rho, fro)
    v = np.array(start)
    value = 0.0
    residual = np.inf
    converged = False
    k = 0
    while k < max_iter:
        w = m @ v + beta * v
        iterations += 1
        k += 1
        lam_a = float(np.vdot(v, w).real)
        while lam_a < -1e-10 * (1.0 + beta):
            beta = 2.2 * beta + 1.0
            v = np.array(start)
            w = m @ v + beta * v
            iterations += 1
            lam_a = float(np.vdot(v, w).real)
        value = lam_a - beta
        residual = float(np.linalg.norm(w - lam_a * v))
        if residual <= tol * (1.0 + abs(value)):
            converged = True
            break
        nw = float(np.linalg.norm(w))
        if nw <= 1e-300:
            # v is annihilated by the shifted operator: enlarge the shift and
            # nudge the iterate off the bottom eigenspace, deterministically
            v = v + (1.0 / np.sqrt(n))
            v = v / np.linalg.norm(v)
            beta = 2.2 * beta + 1.0
            continue
        v = w / nw
    return value, v, iterations, residual, converged


def gpm_iterate(ct, x0, stop_gap, max_iter, record_trace):
    """Entrywise-normalized power iterations on a PSD-shifted matrix.

    Stops when the cost ratio x* Ct x / ||Ct x||_1 reaches 1 - stop_gap,
    when the l1 norm vanishes (flagged), or after max_iter steps.

    Returns (x, iterations, cost_trace, l1_trace, final_ratio, converged,
    zero_stop). When recording, traces have length iterations + 1 and hold
    the cost/l1 at every visited iterate including the last.
    """
    x = np.array(x0, dtype=np.complex128)
    costs = []
    l1s = []
    final_ratio = float("nan")
    converged = False
    zero_stop = False
    k = 0
    while True:
        w = ct @ x
        f = float(np.vdot(x, w).real)
        l1 = float(np.abs(w).sum())
        if record_trace:
            costs.append(f)
            l1s.append(l1)
        if l1 <= 0.0:
            zero_stop = True
            break
        final_ratio = f / l1
        if final_ratio >= 1.0 - stop_gap:
            converged = True
            break
        if k >= max_iter:
            break
        mods = np.abs(w)
        safe = np.where(mods > 0.0, mods, 1.0)
        x = np.where(mods > 0.0, w / safe, x)
        k += 1
    return (
        x,
        k,
        np.asarray(costs, dtype=float),
        np.asarray(l1s, dtype=float),
        final_ratio,
        converged,
        zero_stop,
    )
