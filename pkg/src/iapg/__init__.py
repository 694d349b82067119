"""Matrix-free solver for f(x) + omega(Ax) with a dual-certified inner loop."""

from .inner import (
    InnerConfig,
    InnerReport,
    dual_pgd,
    dual_value,
    line_search_pass,
    primal_value,
)
from .linops import (
    LinearOperator,
    box_blur,
    dense,
    forward_difference,
    identity,
    op_norm_sq,
    op_sum,
    random_sparse,
    scaled,
    sparse_triplet,
)
from .outer import (
    OuterConfig,
    OuterState,
    OuterTrace,
    Smooth,
    TheoryLedger,
    TraceRecord,
    armijo_check,
    backtrack_L,
    eps_abs_schedule,
    extrapolate,
    iapg_solve,
    momentum_point,
    update_alpha,
)
from .problems import (
    RobustTVL2,
    build_sparse_l1_instance,
    build_tv_problem,
    fidelity_gradient,
    fidelity_value,
    ground_truth,
    observe,
)
from .prox import (
    RegularizerSpec,
    UnsupportedSpecError,
    conj_prox,
    gap_certificate,
    lipschitz_constant,
    max_affine,
    min_norm_point,
    moreau_grad_dist_box,
    omega_eval,
    scaled_l1,
    soft_threshold,
    zero_spec,
)
from .stats import fit_affine, fit_log_decay, five_number_summary

__all__ = [
    "InnerConfig",
    "InnerReport",
    "LinearOperator",
    "OuterConfig",
    "OuterState",
    "OuterTrace",
    "RegularizerSpec",
    "RobustTVL2",
    "Smooth",
    "TheoryLedger",
    "TraceRecord",
    "UnsupportedSpecError",
    "armijo_check",
    "backtrack_L",
    "box_blur",
    "build_sparse_l1_instance",
    "build_tv_problem",
    "conj_prox",
    "dense",
    "dual_pgd",
    "dual_value",
    "eps_abs_schedule",
    "extrapolate",
    "fidelity_gradient",
    "fidelity_value",
    "fit_affine",
    "fit_log_decay",
    "five_number_summary",
    "forward_difference",
    "gap_certificate",
    "ground_truth",
    "iapg_solve",
    "identity",
    "lipschitz_constant",
    "line_search_pass",
    "max_affine",
    "min_norm_point",
    "momentum_point",
    "moreau_grad_dist_box",
    "observe",
    "omega_eval",
    "op_norm_sq",
    "op_sum",
    "primal_value",
    "random_sparse",
    "scaled",
    "scaled_l1",
    "soft_threshold",
    "sparse_triplet",
    "update_alpha",
    "zero_spec",
]

__version__ = "0.1.0"
