"""Hypocoercivity index and short-time decay analysis for x'(t) = -B x(t).

Quick tour::

    import hypoindex as hx

    sys = hx.hermitian_split(hx.get_example("b1"))
    report = hx.compute_index(sys)          # report.m_hc == 1
    law = hx.theoretical_coefficient(sys)   # norm ~ 1 - law.c * t**law.a
    curve = hx.decay_curve(sys, hx.linear_grid(10.0))
"""

from .errors import (
    BorderlineSpectrumError,
    ConvergenceError,
    DimensionError,
    EmptyKernelError,
    FailedOrderError,
    HypoError,
    InconsistencyError,
    InsufficientDataError,
    MonotonicityError,
    NoExpansionError,
    NotInKernelError,
    NotPsdError,
    NotSemiDissipativeError,
    NumericalQualityError,
    SymmetryError,
    ValidationError,
    VariantDisagreementError,
)
from .extrap import richardson_leading_coefficient, solution_norm_deficit
from .index import (
    INFINITE,
    BorderCriterion,
    IndexReport,
    IndexVariant,
    commutator_chain,
    compute_index,
    definiteness_index,
    index_of_matrix,
    kalman_block,
    kalman_rank_index,
    stable_index,
    t_chain,
    verify_border_criterion,
)
from .linalg import (
    DEFAULT_TOL_PSD,
    DEFAULT_TOL_RANK,
    HermitianEigen,
    SemiDissipativeSystem,
    as_complex_matrix,
    general_eigenvalues,
    hermitian_eigensystem,
    hermitian_split,
    hermitian_sqrt,
    is_anti_hermitian,
    is_hermitian,
    is_semi_dissipative,
    kernel_basis,
    matrix_exponential,
    rank_with_tolerance,
    require_semi_dissipative,
    singular_values,
    spectral_norm,
)
from .propagator import (
    DecayCurve,
    TailFit,
    TimeGrid,
    WaitingTimeResult,
    decay_curve,
    linear_grid,
    log_grid,
    propagator_norm_at,
    tail_fit,
    waiting_time,
)
from .series import (
    SandwichReport,
    TauFamily,
    build_tau_family,
    delta_coefficient,
    g_function,
    sum_of_squares_residual,
    tau_coefficients,
    tau_vector,
    u_coefficient,
    u_coefficient_factored,
    u_norm_bound,
    verify_family_order,
    verify_sandwich,
)
from .shorttime import (
    EmpiricalFit,
    EpsilonSweep,
    ShortTimeLaw,
    ShortTimeResult,
    analyze_short_time,
    auto_fit_window,
    constrained_min,
    empirical_fit,
    epsilon_sweep,
    kernel_minimizer,
    predicted_trajectory_coefficient,
    solution_norm_expansion_check,
    theoretical_coefficient,
)
from .systems import (
    crisp_random_split_pair,
    crisp_random_system,
    example_ek,
    example_envelope,
    get_example,
    get_example_pair,
    random_semi_dissipative,
    random_split_pair,
    random_unitary,
)

__version__ = "0.1.0"
