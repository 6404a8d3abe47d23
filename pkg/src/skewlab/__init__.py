"""skewlab: spurious-correlation toy tasks, least-norm margin QPs, and
gradient-descent dynamics, with built-in verification of the geometric-
and statistical-skew bounds at desk scale."""

from .core import (
    ConstraintReport,
    Dataset,
    GroupSplit,
    LabeledPoint,
    LinearModel,
    read_dataset_csv,
    split_groups,
    validate_easy_task,
    write_dataset_csv,
)
from .dynamics import DynSpec, Trajectory, closed_form_2dim_exp, fixed_point_exp, simulate
from .maxmargin import (
    KERNEL_BACKEND,
    MarginProblem,
    NotSeparableError,
    QpSolution,
    balanced_max_margin,
    full_max_margin,
    oracle_active_set,
    solve_least_norm,
    v_norm,
    v_tilde_norm,
)
from .skews import SkewReport, compute_skew_report, norm_growth_curve, verify_highdim_proposition
from .taskgen import GenSpec, attach_spurious, duplicate_majority, gen_2dim, gen_geometric_2d

__version__ = "0.1.0"

__all__ = [
    "ConstraintReport", "Dataset", "GroupSplit", "LabeledPoint", "LinearModel",
    "read_dataset_csv", "split_groups", "validate_easy_task", "write_dataset_csv",
    "DynSpec", "Trajectory", "closed_form_2dim_exp", "fixed_point_exp", "simulate",
    "KERNEL_BACKEND", "MarginProblem", "NotSeparableError", "QpSolution",
    "balanced_max_margin", "full_max_margin", "oracle_active_set",
    "solve_least_norm", "v_norm", "v_tilde_norm",
    "SkewReport", "compute_skew_report", "norm_growth_curve",
    "verify_highdim_proposition",
    "GenSpec", "attach_spurious", "duplicate_majority", "gen_2dim",
    "gen_geometric_2d",
    "__version__",
]
