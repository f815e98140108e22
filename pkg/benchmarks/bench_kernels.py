"""Timing comparison of the compiled and reference kernel backends.

Runs the two hot loops (shifted power iteration, entrywise-normalized
quadratic ascent) on identical inputs through both backends and reports the
best-of-repeats wall time per call. Usage:

    python3 benchmarks/bench_kernels.py [--sizes 50 200 800] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from phasesync._kernels import reference
from phasesync._rng import complex_normal, generator, stream_seed, uniform_phases
from phasesync.estimators import GpmConfig, choose_alpha
from phasesync.model import assemble_instance

try:
    from phasesync._kernels import _compiled as compiled
except ImportError:
    compiled = None


def best_of(repeats: int, fn, *args):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_size(n: int, repeats: int, seed: int):
    inst = assemble_instance(n, 0.5, stream_seed(seed, "bench", n))
    v0 = complex_normal(n, generator(stream_seed(seed, "start", n)))
    v0 /= np.linalg.norm(v0)
    fro = float(np.linalg.norm(inst.data))
    alpha = choose_alpha(inst.data, GpmConfig())
    ct = inst.data + alpha * np.eye(n)
    x0 = uniform_phases(n, generator(stream_seed(seed, "x0", n)))

    rows = []
    backends = [("reference", reference)]
    if compiled is not None:
        backends.append(("compiled", compiled))
    for name, mod in backends:
        t_pow, pow_out = best_of(
            repeats, mod.power_iterate, inst.data, v0, 1e-10, 50 * n + 1000, 40, fro
        )
        t_gpm, gpm_out = best_of(repeats, mod.gpm_iterate, ct, x0, 1e-7, 10 * n + 5000, False)
        rows.append((name, t_pow, int(pow_out[2]), t_gpm, int(gpm_out[1])))
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 800])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if compiled is None:
        print("compiled backend not importable; timing reference only")
    header = f"{'n':>5}  {'backend':>9}  {'power_iterate':>14}  {'iters':>5}  {'gpm_iterate':>12}  {'iters':>5}"
    print(header)
    print("-" * len(header))
    for n in args.sizes:
        rows = bench_size(n, args.repeats, args.seed)
        base = {kernel: None for kernel in ("pow", "gpm")}
        for name, t_pow, it_pow, t_gpm, it_gpm in rows:
            print(
                f"{n:>5}  {name:>9}  {t_pow * 1e3:>11.2f} ms  {it_pow:>5}"
                f"  {t_gpm * 1e3:>9.2f} ms  {it_gpm:>5}"
            )
            if name == "reference":
                base["pow"], base["gpm"] = t_pow, t_gpm
            else:
                print(
                    f"{'':>5}  {'speedup':>9}  {base['pow'] / t_pow:>13.2f}x"
                    f"  {'':>5}  {base['gpm'] / t_gpm:>11.2f}x"
                )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
