"""Factored projected gradient descent for constrained low-rank PSD
recovery, with problem generators and convergence diagnostics."""

from .linalg import (
    EigPair,
    factor_from_psd,
    hermitian_eig_top_r,
    is_hermitian,
    procrustes_align,
    procrustes_dist,
    project_frobenius_ball,
    project_l1_ball,
    psd_project,
    spectral_norm,
    trace_inner,
)
from .objective import MeasurementEnsemble, Objective, empirical_rip
from .problems import (
    ConstraintSet,
    ProblemInstance,
    frobenius_ball,
    gen_phase_retrieval,
    gen_qst,
    gen_synthetic,
    l1_ball,
    pauli_operator,
    unconstrained,
)
from .solver import (
    SolveTrace,
    SolverConfig,
    fgd_solve,
    init_point,
    projfgd_solve,
    step_size,
    summary_dict,
    write_summary_json,
    write_trace_csv,
)
from .diagnostics import (
    LemmaReport,
    check_contraction,
    check_descent_lemma,
    check_init_bound,
    check_tu_inequality,
    check_xi_bound,
    contraction_alpha,
    fit_contraction,
    relative_error,
    run_suite,
    contraction_radius,
)

__version__ = "0.1.0"
