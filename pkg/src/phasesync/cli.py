"""Command-line front end: solve / simulate / certify / sweep.

Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 solver
non-convergence, 4 certificate failure (certify only). Every command is
deterministic given its flags; all randomness flows from --seed.

File formats (plain text, UTF-8, 17-significant-digit floats so parse
after serialize reproduces the bits):

  HERM <n>          one line per stored upper-triangle entry: `i j re im`
  <i> <j> <re> <im>   with 1 <= i <= j <= n, 1-based; missing entries are
                      zero; diagonal lines must have im = 0.

  PHASES <n>        followed by exactly n lines `re im`; entries are
  <re> <im>           renormalized to unit modulus on read (bits kept when
                      already within 1e-12; a warning is emitted beyond
                      1e-6; zero modulus is a parse error).
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from ._rng import generator, stream_seed, uniform_phases
from .estimators import GpmConfig, certify, cost, eigenvector_estimator, gpm_run
from .harness import (
    DESK_N_VALUES,
    DESK_SIGMA_RELATIVE,
    METHODS,
    SweepPlan,
    format_float,
    run_sweep,
)
from .linalg import PowerIterationError
from .manifold import riemannian_ascent
from .model import assemble_instance

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_UNCONVERGED = 3
EXIT_CERT_FAIL = 4


class ParseFailure(Exception):
    """Input file violates a format contract; message carries path:line."""


def _fail(path: str, lineno: int, msg: str):
    raise ParseFailure(f"{path}:{lineno}: {msg}")


def _parse_float(path: str, lineno: int, token: str, what: str) -> float:
    try:
        val = float(token)
    except ValueError:
        _fail(path, lineno, f"invalid {what}: {token!r}")
    if not math.isfinite(val):
        _fail(path, lineno, f"non-finite {what}: {token!r}")
    return val


def read_matrix(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        _fail(path, 1, "empty file, expected 'HERM <n>' header")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "HERM":
        _fail(path, 1, f"expected 'HERM <n>' header, got {lines[0]!r}")
    try:
        n = int(head[1])
    except ValueError:
        _fail(path, 1, f"invalid dimension {head[1]!r}")
    if n < 1:
        _fail(path, 1, f"dimension must be positive, got {n}")
    c = np.zeros((n, n), dtype=np.complex128)
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            _fail(path, lineno, f"expected 'i j re im', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            _fail(path, lineno, f"invalid indices in {line!r}")
        if not (1 <= i <= j <= n):
            _fail(path, lineno, f"indices must satisfy 1 <= i <= j <= {n}, got ({i}, {j})")
        if (i, j) in seen:
            _fail(path, lineno, f"duplicate entry ({i}, {j})")
        seen.add((i, j))
        re = _parse_float(path, lineno, parts[2], "real part")
        im = _parse_float(path, lineno, parts[3], "imaginary part")
        if i == j and im != 0.0:
            _fail(path, lineno, f"diagonal entry ({i}, {i}) must have zero imaginary part")
        c[i - 1, j - 1] = complex(re, im)
        if i != j:
            c[j - 1, i - 1] = complex(re, -im)
    return c


def write_matrix(path: str, c: np.ndarray) -> None:
    c = np.asarray(c, dtype=np.complex128)
    n = c.shape[0]
    if c.shape != (n, n):
        raise ValueError("matrix must be square")
    if np.any(c.diagonal().imag != 0.0):
        raise ValueError("diagonal entries must be real")
    out = [f"HERM {n}"]
    for i in range(n):
        for j in range(i, n):
            re, im = c[i, j].real, c[i, j].imag
            # skip only exact +0.0 pairs; signed zeros are information
            if re == 0.0 and im == 0.0 and math.copysign(1.0, re) > 0 and math.copysign(1.0, im) > 0:
                continue
            out.append(f"{i + 1} {j + 1} {format_float(re)} {format_float(im)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def read_phases(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        _fail(path, 1, "empty file, expected 'PHASES <n>' header")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "PHASES":
        _fail(path, 1, f"expected 'PHASES <n>' header, got {lines[0]!r}")
    try:
        n = int(head[1])
    except ValueError:
        _fail(path, 1, f"invalid dimension {head[1]!r}")
    if n < 1:
        _fail(path, 1, f"dimension must be positive, got {n}")
    body = [(k + 2, ln) for k, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != n:
        _fail(path, len(lines), f"expected {n} entry lines, found {len(body)}")
    x = np.empty(n, dtype=np.complex128)
    for k, (lineno, line) in enumerate(body):
        parts = line.split()
        if len(parts) != 2:
            _fail(path, lineno, f"expected 're im', got {line!r}")
        re = _parse_float(path, lineno, parts[0], "real part")
        im = _parse_float(path, lineno, parts[1], "imaginary part")
        mod = math.hypot(re, im)
        if mod == 0.0:
            _fail(path, lineno, "zero-modulus entry cannot be normalized")
        if abs(mod - 1.0) <= 1e-12:
            x[k] = complex(re, im)
        else:
            if abs(mod - 1.0) > 1e-6:
                print(f"{path}:{lineno}: warning: modulus {mod:.6g} renormalized to 1",
                      file=sys.stderr)
            x[k] = complex(re / mod, im / mod)
    return x


def write_phases(path: str, x: np.ndarray) -> None:
    x = np.asarray(x, dtype=np.complex128)
    out = [f"PHASES {x.shape[0]}"]
    for v in x:
        out.append(f"{format_float(v.real)} {format_float(v.imag)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def cmd_solve(args) -> int:
    c = read_matrix(args.matrix)
    n = c.shape[0]
    seed = args.seed
    if args.method == "eig":
        estimate, info = eigenvector_estimator(
            c, seed=stream_seed(seed, "eig"), max_iter=args.max_iter, with_info=True
        )
        iterations, converged = info.iterations, True
    elif args.method == "gpm":
        vhat = eigenvector_estimator(c, seed=stream_seed(seed, "eig"))
        config = GpmConfig(alpha_margin=args.alpha_margin, stop_ratio_gap=args.stop_gap,
                           max_iter=args.max_iter, record_trace=False)
        res = gpm_run(c, vhat, config)
        estimate, iterations, converged = res.estimate, res.iterations, res.converged
    else:
        x0 = uniform_phases(n, generator(stream_seed(seed, "ascent-init")))
        res = riemannian_ascent(c, x0, grad_tol=args.grad_tol, max_iter=args.max_iter)
        estimate, iterations, converged = res.estimate, res.iterations, res.converged
    cert = certify(c, estimate, tolerance=args.tol, seed=stream_seed(seed, "certify"),
                   eig_tol=1e-9)
    write_phases(args.out, estimate)
    print(f"f_value={format_float(cost(c, estimate))}")
    print(f"cert_ratio={format_float(cert.ratio)}")
    print(f"cert_pass={int(cert.passed)}")
    print(f"iterations={iterations}")
    return EXIT_OK if converged else EXIT_UNCONVERGED


def cmd_simulate(args) -> int:
    if args.n < 1:
        raise ParseFailure(f"--n must be positive, got {args.n}")
    if not (args.sigma >= 0):
        raise ParseFailure(f"--sigma must be nonnegative, got {args.sigma}")
    inst = assemble_instance(args.n, args.sigma, args.seed)
    c_path = args.out_prefix + ".C.txt"
    z_path = args.out_prefix + ".z.txt"
    write_matrix(c_path, inst.data)
    write_phases(z_path, inst.signal)
    print(f"wrote {c_path}")
    print(f"wrote {z_path}")
    return EXIT_OK


def cmd_certify(args) -> int:
    c = read_matrix(args.matrix)
    x = read_phases(args.phases)
    if x.shape[0] != c.shape[0]:
        raise ParseFailure(
            f"{args.phases}:1: dimension {x.shape[0]} does not match matrix dimension {c.shape[0]}"
        )
    cert = certify(c, x, tolerance=args.tol, seed=stream_seed(args.seed, "certify"),
                   eig_tol=1e-9)
    print(f"lambda_min_S={format_float(cert.lambda_min_s)}")
    print(f"lambda_max_S={format_float(cert.lambda_max_s)}")
    print(f"ratio={format_float(cert.ratio)}")
    print(f"gap_bound={format_float(cert.gap_bound)}")
    return EXIT_OK if cert.passed else EXIT_CERT_FAIL


def cmd_sweep(args) -> int:
    if args.sigma_abs is not None:
        sigma_values, sigma_mode = args.sigma_abs, "absolute"
    elif args.sigma_rel is not None:
        sigma_values, sigma_mode = args.sigma_rel, "relative"
    else:
        sigma_values, sigma_mode = DESK_SIGMA_RELATIVE, "relative"
    try:
        plan = SweepPlan(
            n_values=args.n, sigma_values=sigma_values, sigma_mode=sigma_mode,
            trials=args.trials, methods=tuple(args.methods), master_seed=args.seed,
        )
    except ValueError as exc:
        raise ParseFailure(str(exc)) from None
    records, stats = run_sweep(plan, args.out, jobs=args.jobs)
    print(f"wrote {len(records)} records to {args.out}")
    print("n sigma method rows errors cert_pass_rate mean_iterations "
          "rtr_beats_eig_rate eig_beats_signal_rate")
    for (n, sigma, method), s in sorted(stats.items()):
        print(f"{n} {sigma:.6g} {method} {s.rows} {s.errors} {s.cert_pass_rate:.4f} "
              f"{s.mean_iterations:.2f} {s.rtr_beats_eig_rate:.4f} "
              f"{s.eig_beats_signal_rate:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasesync",
        description="Phase synchronization: solve, simulate, certify, sweep.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("solve", formatter_class=fmt,
                       help="estimate phases from a HERM matrix file")
    p.add_argument("matrix", help="input matrix path (HERM format)")
    p.add_argument("--method", choices=("gpm", "ascent", "eig"), default="gpm",
                   help="estimator (gpm and eig start from the power-iteration "
                        "eigenvector; ascent starts from seeded random phases)")
    p.add_argument("--out", required=True, help="output phases path (PHASES format)")
    p.add_argument("--seed", type=int, default=0, help="seed for all derived randomness")
    p.add_argument("--tol", type=float, default=1e-5, help="certificate tolerance")
    p.add_argument("--alpha-margin", type=float, default=0.0,
                   help="extra diagonal shift on top of the automatic one (gpm)")
    p.add_argument("--max-iter", type=int, default=None, help="iteration cap (method default)")
    p.add_argument("--stop-gap", type=float, default=1e-7, help="gpm stopping-ratio gap")
    p.add_argument("--grad-tol", type=float, default=1e-6,
                   help="ascent gradient-statistic threshold")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", formatter_class=fmt,
                       help="generate a planted instance as matrix + signal files")
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--sigma", type=float, required=True, help="noise level")
    p.add_argument("--seed", type=int, default=0, help="instance seed")
    p.add_argument("--out-prefix", required=True,
                   help="writes <prefix>.C.txt and <prefix>.z.txt")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", formatter_class=fmt,
                       help="check global optimality of phases for a matrix")
    p.add_argument("matrix", help="matrix path (HERM format)")
    p.add_argument("phases", help="phases path (PHASES format)")
    p.add_argument("--tol", type=float, default=1e-5, help="certificate tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for the eigensolves")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", formatter_class=fmt,
                       help="Monte Carlo grid sweep to CSV")
    p.add_argument("--n", type=int, nargs="+", default=list(DESK_N_VALUES),
                   help="dimensions")
    p.add_argument("--sigma-rel", type=float, nargs="+", default=None,
                   help="noise grid as multiples of sqrt(n) "
                        f"(default {' '.join(str(s) for s in DESK_SIGMA_RELATIVE)})")
    p.add_argument("--sigma-abs", type=float, nargs="+", default=None,
                   help="absolute noise grid (overrides --sigma-rel)")
    p.add_argument("--trials", type=int, default=50, help="trials per cell")
    p.add_argument("--methods", nargs="+", choices=list(METHODS), default=["GPM"],
                   help="methods to run on each instance")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PowerIterationError as exc:
        print(f"error: eigensolve did not converge: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
