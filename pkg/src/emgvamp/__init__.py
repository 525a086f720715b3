"""Approximate-MMSE inference for generalized linear measurements with
expectation-consistent message passing, plus an outer loop that learns
unknown prior/channel parameters; specialized denoisers and parameter
updates for phase retrieval with unknown noise variance."""

__version__ = "0.1.0"

from .em import (
    EmConfig,
    EmResult,
    EmStatus,
    em_gvamp,
    m_step_awgn_variance,
    m_step_phaseless_variance_exact,
    m_step_phaseless_variance_highsnr,
    m_step_prior_gaussian,
)
from .engine import (
    GvampConfig,
    GvampResult,
    GvampState,
    GvampStatus,
    gvamp_init,
    gvamp_iterate,
    gvamp_run,
    moment_gaps,
)
from .harness import (
    ExperimentConfig,
    RunRecord,
    emit_results,
    run_experiment,
)
from .lmmse import LmmseResult, lmmse_solve
from .metrics import phase_corrected_nmse
from .model import (
    AwgnChannel,
    BernoulliGaussianPrior,
    CircularGaussianPrior,
    DenoiserResult,
    GaussianPrior,
    GlmModel,
    LinearOperator,
    PhaselessAwgnChannel,
    ThetaEstimate,
    sample_model,
)
from .special import (
    bessel_i0_scaled,
    bessel_i1_scaled,
    bessel_ratio_r0,
    laguerre_half,
    rician_moments,
    von_mises_pdf,
)

__all__ = [
    "__version__",
    "AwgnChannel",
    "BernoulliGaussianPrior",
    "CircularGaussianPrior",
    "DenoiserResult",
    "EmConfig",
    "EmResult",
    "EmStatus",
    "ExperimentConfig",
    "GaussianPrior",
    "GlmModel",
    "GvampConfig",
    "GvampResult",
    "GvampState",
    "GvampStatus",
    "LinearOperator",
    "LmmseResult",
    "PhaselessAwgnChannel",
    "RunRecord",
    "ThetaEstimate",
    "bessel_i0_scaled",
    "bessel_i1_scaled",
    "bessel_ratio_r0",
    "em_gvamp",
    "emit_results",
    "gvamp_init",
    "gvamp_iterate",
    "gvamp_run",
    "laguerre_half",
    "lmmse_solve",
    "m_step_awgn_variance",
    "m_step_phaseless_variance_exact",
    "m_step_phaseless_variance_highsnr",
    "m_step_prior_gaussian",
    "moment_gaps",
    "phase_corrected_nmse",
    "rician_moments",
    "run_experiment",
    "sample_model",
    "von_mises_pdf",
]
