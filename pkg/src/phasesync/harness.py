"""Monte Carlo sweeps over (n, sigma) grids.

Every record is a pure function of (plan, n, sigma, trial): the per-trial
seed is derived by hashing (master_seed, n, sigma-index, trial), so cells
can run in any order or in parallel without changing the output. Records
are sorted by (n, sigma, trial, method) before aggregation and writing,
which makes aggregates recomputed from the CSV bit-identical to the
in-memory ones (17-significant-digit floats round-trip float64, and the
reductions run in the same order). runtime_ms is wall-clock and is the one
column excluded from determinism guarantees.
"""

from __future__ import annotations

import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from ._rng import generator, stream_seed, uniform_phases
from ._version import __version__
from .estimators import GpmConfig, certify, cost, eigenvector_estimator, gpm_run
from .manifold import riemannian_ascent
from .model import assemble_instance, distance

METHODS = ("EIG", "GPM", "ASCENT", "ASCENT_EIG_INIT")

DEFAULT_TOLERANCES = {"EIG": 1e-5, "GPM": 1e-5, "ASCENT": 1e-9, "ASCENT_EIG_INIT": 1e-9}

CSV_HEADER = (
    "n,sigma,trial,seed,method,status,iterations,f_value,cert_ratio,cert_pass,"
    "dist_to_signal,eig_dist_to_signal,rtr_beats_eig,eig_beats_signal,runtime_ms"
)

DESK_N_VALUES = (25, 50, 100, 200, 400)
DESK_SIGMA_RELATIVE = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2)

# cert_pass rows should satisfy dist <= 4 ||noise|| / sqrt(n) <= 12 sigma + slack
# under the high-probability norm bound; misses are counted, not fatal
_DIST_BOUND_SLACK = 0.01


@dataclass(frozen=True)
class SweepPlan:
    n_values: tuple
    sigma_values: tuple
    sigma_mode: str = "relative"  # sigma_values as multiples of sqrt(n), or "absolute"
    trials: int = 100
    methods: tuple = ("GPM",)
    master_seed: int = 0
    tolerances: dict = field(default_factory=dict)  # per-method overrides of DEFAULT_TOLERANCES
    gpm: GpmConfig = field(default_factory=lambda: GpmConfig(record_trace=False))
    ascent_grad_tol: float = 1e-6
    ascent_max_iter: int | None = None
    eig_tol: float = 1e-10
    cert_eig_tol: float = 1e-9
    debug_checks: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "sigma_values", tuple(float(s) for s in self.sigma_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ValueError("n_values must be nonempty positive counts")
        if not self.sigma_values or any(not math.isfinite(s) or s < 0 for s in self.sigma_values):
            raise ValueError("sigma_values must be nonempty nonnegative finite reals")
        if self.sigma_mode not in ("relative", "absolute"):
            raise ValueError("sigma_mode must be 'relative' or 'absolute'")
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "trials", int(self.trials))
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate method")
        for key, val in self.tolerances.items():
            if key not in METHODS:
                raise ValueError(f"unknown method in tolerances: {key!r}")
            if not (float(val) > 0):
                raise ValueError("certificate tolerances must be positive")

    def resolve_sigmas(self, n: int) -> tuple:
        if self.sigma_mode == "relative":
            return tuple(s * math.sqrt(n) for s in self.sigma_values)
        return self.sigma_values

    def method_tolerance(self, method: str) -> float:
        return float(self.tolerances.get(method, DEFAULT_TOLERANCES[method]))


@dataclass(frozen=True)
class SweepRecord:
    n: int
    sigma: float
    trial: int
    seed: int
    method: str
    status: str  # "ok" | "unconverged" | "error:<ExceptionName>"
    iterations: int
    f_value: float
    cert_ratio: float
    cert_pass: bool
    dist_to_signal: float
    eig_dist_to_signal: float
    rtr_beats_eig: bool
    eig_beats_signal: bool
    runtime_ms: float


@dataclass(frozen=True)
class CellStats:
    rows: int
    errors: int
    cert_pass_rate: float
    mean_iterations: float
    rtr_beats_eig_rate: float
    eig_beats_signal_rate: float
    dist_bound_misses: int


def _record_sort_key(r: SweepRecord):
    return (r.n, r.sigma, r.trial, r.method)


def _error_record(n, sigma, trial, seed, method, exc, runtime_ms) -> SweepRecord:
    return SweepRecord(
        n=n, sigma=sigma, trial=trial, seed=seed, method=method,
        status=f"error:{type(exc).__name__}", iterations=0,
        f_value=float("nan"), cert_ratio=float("nan"), cert_pass=False,
        dist_to_signal=float("nan"), eig_dist_to_signal=float("nan"),
        rtr_beats_eig=False, eig_beats_signal=False, runtime_ms=runtime_ms,
    )


def run_cell(n: int, sigma: float, trial: int, plan: SweepPlan, keep_details: bool = False):
    """All requested methods on one simulated instance; one record per method.

    sigma must be one of plan.resolve_sigmas(n) (its index feeds the seed
    derivation). Solver exceptions become error rows with NaN metrics
    rather than aborting. runtime_ms covers the method's own iteration
    loop; the spectral initialization shared by EIG / GPM /
    ASCENT_EIG_INIT is billed to the EIG row only. With keep_details the
    per-method result objects and the instance are returned alongside.
    """
    sigmas = plan.resolve_sigmas(n)
    try:
        sigma_index = sigmas.index(sigma)
    except ValueError:
        raise ValueError(f"sigma {sigma!r} is not on the plan grid for n={n}") from None
    seed = stream_seed(plan.master_seed, "cell", n, sigma_index, trial)
    inst = assemble_instance(n, float(sigma), seed)
    details: dict = {"instance": inst, "results": {}}

    t0 = time.perf_counter()
    try:
        vhat, eig_info = eigenvector_estimator(
            inst.data, seed=stream_seed(seed, "eig"), tol=plan.eig_tol, with_info=True
        )
    except Exception as exc:
        # every column of every row leans on the spectral baseline; fail the cell
        ms = (time.perf_counter() - t0) * 1e3
        records = [_error_record(n, float(sigma), trial, seed, m, exc, ms) for m in plan.methods]
        return (records, details) if keep_details else records
    eig_ms = (time.perf_counter() - t0) * 1e3
    eig_dist = distance(inst.signal, vhat)
    f_signal = cost(inst.data, inst.signal)
    eig_beats_signal = bool(cost(inst.data, vhat) > f_signal)
    details["eig_estimate"] = vhat

    records = []
    for method in plan.methods:
        t0 = time.perf_counter()
        try:
            if method == "EIG":
                estimate, iterations, solver_ok, runtime_ms = vhat, eig_info.iterations, True, eig_ms
            elif method == "GPM":
                res = gpm_run(inst.data, vhat, plan.gpm)
                details["results"][method] = res
                estimate, iterations, solver_ok = res.estimate, res.iterations, res.converged
                runtime_ms = (time.perf_counter() - t0) * 1e3
                if plan.debug_checks and res.converged:
                    _debug_check_alignment(inst, estimate, res.alpha_used, seed)
            else:
                if method == "ASCENT":
                    x0 = uniform_phases(n, generator(stream_seed(seed, "ascent-init")))
                else:
                    x0 = vhat
                res = riemannian_ascent(
                    inst.data, x0, grad_tol=plan.ascent_grad_tol, max_iter=plan.ascent_max_iter
                )
                details["results"][method] = res
                estimate, iterations, solver_ok = res.estimate, res.iterations, res.converged
                runtime_ms = (time.perf_counter() - t0) * 1e3
            cert = certify(
                inst.data, estimate,
                tolerance=plan.method_tolerance(method),
                seed=stream_seed(seed, "certify", method),
                eig_tol=plan.cert_eig_tol,
            )
            dist = distance(inst.signal, estimate)
            rtr_beats = bool(dist < eig_dist) if method in ("ASCENT", "ASCENT_EIG_INIT") else False
            records.append(SweepRecord(
                n=n, sigma=float(sigma), trial=trial, seed=seed, method=method,
                status="ok" if solver_ok else "unconverged",
                iterations=int(iterations),
                f_value=cost(inst.data, estimate),
                cert_ratio=cert.ratio, cert_pass=cert.passed,
                dist_to_signal=dist, eig_dist_to_signal=eig_dist,
                rtr_beats_eig=rtr_beats, eig_beats_signal=eig_beats_signal,
                runtime_ms=runtime_ms,
            ))
        except Exception as exc:
            ms = (time.perf_counter() - t0) * 1e3
            records.append(_error_record(n, float(sigma), trial, seed, method, exc, ms))
    return (records, details) if keep_details else records


def _debug_check_alignment(inst, x, alpha: float, seed: int) -> None:
    """Converged iterates split into near-aligned and near-orthogonal bands
    when the perturbation is small; sanity assertion, debug plans only."""
    if inst.sigma == 0.0:
        bound = alpha
    else:
        wnorm = linalg.operator_norm(inst.noise, tol=1e-6, seed=stream_seed(seed, "debug"))
        bound = inst.sigma * wnorm + alpha
    n = inst.n
    if bound < n / 8.0:
        corr = abs(np.vdot(inst.signal, x))
        assert corr >= n - 4.0 * bound - 1e-6 or corr <= 4.0 * bound + 1e-6


def _cell_task(args):
    plan, n, sigma, trial = args
    return run_cell(n, sigma, trial, plan)


def aggregate(records) -> dict:
    """Per-(n, sigma, method) statistics, computed in the records' order.

    Error rows count toward `errors` and are excluded from the rates and
    means. dist_bound_misses counts certified rows whose distance exceeds
    12 sigma + 0.01, the high-probability bound; a miss is reported, not
    an error.
    """
    cells: dict = {}
    for r in records:
        cells.setdefault((r.n, r.sigma, r.method), []).append(r)
    out = {}
    for key, rows in cells.items():
        good = [r for r in rows if not r.status.startswith("error:")]
        misses = sum(
            1 for r in good
            if r.cert_pass and r.dist_to_signal > 12.0 * r.sigma + _DIST_BOUND_SLACK
        )
        if good:
            k = float(len(good))
            stats = CellStats(
                rows=len(rows), errors=len(rows) - len(good),
                cert_pass_rate=sum(int(r.cert_pass) for r in good) / k,
                mean_iterations=sum(r.iterations for r in good) / k,
                rtr_beats_eig_rate=sum(int(r.rtr_beats_eig) for r in good) / k,
                eig_beats_signal_rate=sum(int(r.eig_beats_signal) for r in good) / k,
                dist_bound_misses=misses,
            )
        else:
            nan = float("nan")
            stats = CellStats(rows=len(rows), errors=len(rows), cert_pass_rate=nan,
                              mean_iterations=nan, rtr_beats_eig_rate=nan,
                              eig_beats_signal_rate=nan, dist_bound_misses=0)
        out[key] = stats
    return out


def format_float(x: float) -> str:
    return "%.17g" % float(x)


def format_record(r: SweepRecord) -> str:
    return ",".join((
        str(r.n), format_float(r.sigma), str(r.trial), str(r.seed), r.method, r.status,
        str(r.iterations), format_float(r.f_value), format_float(r.cert_ratio),
        str(int(r.cert_pass)), format_float(r.dist_to_signal),
        format_float(r.eig_dist_to_signal), str(int(r.rtr_beats_eig)),
        str(int(r.eig_beats_signal)), format_float(r.runtime_ms),
    ))


def write_csv(records, fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in records:
        fh.write(format_record(r) + "\n")


def read_records(source) -> list:
    """Parse a sweep CSV back into records. source: path or readable text."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
        name = getattr(source, "name", "<stream>")
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        name = os.fspath(source)
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{name}:1: missing or mismatched sweep CSV header")
    records = []
    for i, line in enumerate(lines[1:], start=2):
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 15:
            raise ValueError(f"{name}:{i}: expected 15 fields, got {len(parts)}")
        records.append(SweepRecord(
            n=int(parts[0]), sigma=float(parts[1]), trial=int(parts[2]), seed=int(parts[3]),
            method=parts[4], status=parts[5], iterations=int(parts[6]),
            f_value=float(parts[7]), cert_ratio=float(parts[8]), cert_pass=bool(int(parts[9])),
            dist_to_signal=float(parts[10]), eig_dist_to_signal=float(parts[11]),
            rtr_beats_eig=bool(int(parts[12])), eig_beats_signal=bool(int(parts[13])),
            runtime_ms=float(parts[14]),
        ))
    return records


def _meta_payload(plan: SweepPlan) -> dict:
    from dataclasses import asdict

    gpm = asdict(plan.gpm)
    return {
        "artifact_version": __version__,
        "format_version": 1,
        "kernel_backend": _backend_name(),
        "signal_resampled_per_trial": True,
        "plan": {
            "n_values": list(plan.n_values),
            "sigma_values": list(plan.sigma_values),
            "sigma_mode": plan.sigma_mode,
            "trials": plan.trials,
            "methods": list(plan.methods),
            "master_seed": plan.master_seed,
            "tolerances": {m: plan.method_tolerance(m) for m in plan.methods},
            "gpm": gpm,
            "ascent_grad_tol": plan.ascent_grad_tol,
            "ascent_max_iter": plan.ascent_max_iter,
            "eig_tol": plan.eig_tol,
            "cert_eig_tol": plan.cert_eig_tol,
        },
    }


def _backend_name() -> str:
    from . import _kernels

    return _kernels.BACKEND


def meta_path_for(csv_path) -> str:
    base = os.fspath(csv_path)
    stem, ext = os.path.splitext(base)
    return (stem if ext else base) + ".meta.json"


def run_sweep(plan: SweepPlan, sink, jobs: int = 1):
    """Run the full grid, write the CSV (plus a .meta.json sidecar for path
    sinks), and return (sorted records, per-cell aggregates).

    sink is a filesystem path or a writable text stream. With jobs > 1
    trials run in a process pool; records are sorted by
    (n, sigma, trial, method) before aggregation and writing, so the
    output is independent of scheduling. On a write failure a best-effort
    `#PARTIAL` marker line is appended before the error propagates.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    tasks = [
        (plan, n, sigma, trial)
        for n in plan.n_values
        for sigma in plan.resolve_sigmas(n)
        for trial in range(plan.trials)
    ]
    if jobs > 1:
        with multiprocessing.Pool(processes=jobs) as pool:
            per_cell = pool.map(_cell_task, tasks, chunksize=1)
    else:
        per_cell = [_cell_task(t) for t in tasks]
    records = sorted((r for cell in per_cell for r in cell), key=_record_sort_key)
    stats = aggregate(records)

    if hasattr(sink, "write"):
        try:
            write_csv(records, sink)
        except OSError:
            _try_mark_partial(sink)
            raise
    else:
        path = os.fspath(sink)
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                write_csv(records, fh)
        except OSError:
            _try_mark_partial(path)
            raise
        _write_meta(meta_path_for(path), plan)
    return records, stats


def _try_mark_partial(sink) -> None:
    try:
        if hasattr(sink, "write"):
            sink.write("\n#PARTIAL\n")
        else:
            with open(sink, "a", encoding="utf-8") as fh:
                fh.write("\n#PARTIAL\n")
    except OSError:
        pass


def _write_meta(path: str, plan: SweepPlan) -> None:
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_meta_payload(plan), fh, indent=2, sort_keys=True)
        fh.write("\n")
