"""Gibbs samplers for Bayesian shrinkage regression models.

Two-block and three-block Gibbs kernels for the Bayesian group lasso,
sparse group lasso, and fused lasso, plus mixing diagnostics, synthetic
data generators, and a benchmarking CLI.
"""
from ._kernels import BACKEND as kernel_backend
from ._linalg import factorization_count, reset_factorization_count
from .diagnostics import (
    DiagnosticsReport,
    Summary,
    autocorr,
    diagnose,
    ess_per_second,
    ess_univariate,
    summarize,
)
from .errors import (
    BlockGibbsError,
    DimensionMismatchError,
    FactorizationError,
    SamplerError,
)
from .model_core import (
    BetaConditional,
    ChainState,
    Dataset,
    GroupStructure,
    LatentScales,
    ModelKind,
    ModelSpec,
    SymmetricTridiagonal,
    assemble_posterior_precision,
    beta_conditional_params,
    build_fused_precision,
    build_group_cov,
    build_sparse_group_cov,
    conditional_sigma2_params,
    marginal_sigma2_params,
)
from .rng_dist import (
    RngStream,
    sample_gamma,
    sample_inverse_gamma,
    sample_inverse_gaussian,
    sample_inverse_gaussian_vector,
    sample_mvn_precision,
    sample_std_normal,
    sample_student_t,
)
from .samplers import (
    ChainOutput,
    KernelKind,
    RunConfig,
    initial_chain_state,
    map_jobs,
    run_chain,
    step_2bg_fused,
    step_2bg_group,
    step_2bg_sparse_group,
    step_3bg_fused,
    step_3bg_group,
    step_3bg_sparse_group,
)
from .simgen import (
    Scenario,
    ScenarioSpec,
    SimulatedDataset,
    gen_extra_tall,
    gen_extra_wide,
    gen_scenario1,
    gen_scenario2,
    standardize_columns,
)

__version__ = "0.1.0"
