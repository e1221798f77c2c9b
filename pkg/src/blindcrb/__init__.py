"""Cramer-Rao bounds and subspace estimation for blind channel
identification in redundant block transmission systems.

The package splits into the system model (model), generic complex-parameter
CRB machinery (crb_core), the blind-estimation bound with its direct and
fast routes (crb_blind), a noise-subspace channel estimator (estimator),
and a reproducible Monte Carlo harness with CSV output (harness). The cli
module provides the command-line front end.
"""

from .errors import (
    ExclusionBudgetExceeded,
    IllConditioned,
    InsufficientData,
    NumericalError,
    RankDeficient,
    SolverDegenerate,
    ZeroAnchorTap,
)
from .model import (
    Channel,
    Observation,
    Precoder,
    SymbolFrame,
    SystemConfig,
    build_channel_toeplitz,
    build_inner_precoder,
    build_K,
    build_redundancy,
    build_selection_matrices,
    block_diag_precoder,
    composite_channel_matrix,
    generate_symbols,
    loglik_gradients,
    make_precoder,
    synthesize_observation,
)
from .crb_core import (
    crb_constrained,
    crb_unconstrained,
    fix_column_phases,
    orthonormal_nullspace,
    schur_cov_bound,
)
from .crb_blind import (
    CrbResult,
    FimBlocks,
    NullSpaceBasis,
    crb_direct,
    crb_fast,
    crb_zp_per_block,
    default_anchor,
    fim_blocks,
    hankel_rearrange,
    left_null_basis,
)
from .estimator import (
    ChannelEstimate,
    EstimatorSettings,
    channel_from_noise_subspace,
    resolve_ambiguity,
    subspace_estimate,
)
from .harness import (
    CSV_HEADER,
    ExperimentPlan,
    ResultRecord,
    draw_channel,
    format_csv,
    run_cell,
    run_experiment,
    sigma2_from_snr_db,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "Channel",
    "ChannelEstimate",
    "CrbResult",
    "EstimatorSettings",
    "ExclusionBudgetExceeded",
    "ExperimentPlan",
    "FimBlocks",
    "IllConditioned",
    "InsufficientData",
    "NullSpaceBasis",
    "NumericalError",
    "Observation",
    "Precoder",
    "RankDeficient",
    "ResultRecord",
    "SolverDegenerate",
    "SymbolFrame",
    "SystemConfig",
    "ZeroAnchorTap",
    "block_diag_precoder",
    "build_K",
    "build_channel_toeplitz",
    "build_inner_precoder",
    "build_redundancy",
    "build_selection_matrices",
    "channel_from_noise_subspace",
    "composite_channel_matrix",
    "crb_constrained",
    "crb_direct",
    "crb_fast",
    "crb_unconstrained",
    "crb_zp_per_block",
    "default_anchor",
    "draw_channel",
    "fim_blocks",
    "fix_column_phases",
    "format_csv",
    "generate_symbols",
    "hankel_rearrange",
    "left_null_basis",
    "loglik_gradients",
    "make_precoder",
    "orthonormal_nullspace",
    "resolve_ambiguity",
    "run_cell",
    "run_experiment",
    "schur_cov_bound",
    "sigma2_from_snr_db",
    "subspace_estimate",
    "synthesize_observation",
    "write_csv",
]
