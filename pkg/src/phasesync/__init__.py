"""Phase synchronization: estimation of n unit-modulus phases from a noisy
rank-one Hermitian measurement matrix, with global-optimality certification,
Riemannian second-order diagnostics, and a Monte Carlo sweep harness.
"""

from ._version import __version__
from . import _kernels
from .linalg import (
    EigResult,
    PowerIterationError,
    dominant_eigpair,
    hermitianize,
    is_hermitian,
    lambda_min,
    matvec,
    norms,
    operator_norm,
)
from .model import (
    ProblemInstance,
    align_phase,
    assemble_instance,
    distance,
    generate_signal,
    generate_wigner,
)
from .estimators import (
    Certificate,
    GpmConfig,
    GpmResult,
    certificate_matrix,
    certify,
    choose_alpha,
    cost,
    eigenvector_estimator,
    fixed_point_residual,
    gpm_run,
    gpm_step,
    project_to_torus,
)
from .manifold import (
    AscentResult,
    HessianForm,
    hessian_form,
    retract,
    riemannian_ascent,
    riemannian_gradient,
    second_order_check,
    sign_flip_audit,
    tangent_project,
)
from .harness import (
    CSV_HEADER,
    DEFAULT_TOLERANCES,
    METHODS,
    CellStats,
    SweepPlan,
    SweepRecord,
    aggregate,
    read_records,
    run_cell,
    run_sweep,
)


def kernel_backend() -> str:
    """Which inner-loop implementation is active: "compiled" or "reference"."""
    return _kernels.BACKEND


__all__ = [
    "__version__",
    "kernel_backend",
    "EigResult",
    "PowerIterationError",
    "dominant_eigpair",
    "hermitianize",
    "is_hermitian",
    "lambda_min",
    "matvec",
    "norms",
    "operator_norm",
    "ProblemInstance",
    "align_phase",
    "assemble_instance",
    "distance",
    "generate_signal",
    "generate_wigner",
    "Certificate",
    "GpmConfig",
    "GpmResult",
    "certificate_matrix",
    "certify",
    "choose_alpha",
    "cost",
    "eigenvector_estimator",
    "fixed_point_residual",
    "gpm_run",
    "gpm_step",
    "project_to_torus",
    "AscentResult",
    "HessianForm",
    "hessian_form",
    "retract",
    "riemannian_ascent",
    "riemannian_gradient",
    "second_order_check",
    "sign_flip_audit",
    "tangent_project",
    "CSV_HEADER",
    "DEFAULT_TOLERANCES",
    "METHODS",
    "CellStats",
    "SweepPlan",
    "SweepRecord",
    "aggregate",
    "read_records",
    "run_cell",
    "run_sweep",
]
