"""Autoregressive models for time series of compositions.

Dirichlet and logistic-normal conditional laws with finite-lag or
observation-driven latent recursions, their estimators, Monte Carlo
forecasts and perturbation-based interpretation.
"""

__version__ = "0.1.0"

from .distributions import (
    DirichletParams,
    LogisticNormalParams,
    dirichlet_logpdf,
    dirichlet_logpdf_grad_alpha,
    dirichlet_sample,
    logistic_normal_logpdf,
    logistic_normal_sample,
)
from .estimation import (
    DataQualityError,
    EstimationError,
    FitResult,
    Method,
    bootstrap_se,
    fit_convex,
    fit_dirichlet_mle,
    fit_ln_ls,
    fit_ln_qmle,
    sandwich_variance,
)
from .forecast import ForecastResult, forecast
from .models import (
    DirichletFiniteSpec,
    DirichletODSpec,
    LatentPath,
    LogisticNormalFiniteSpec,
    LogisticNormalODSpec,
    StationarityError,
    check_stationarity,
    filter_path,
    simulate,
    spec_from_dict,
    spec_to_dict,
)
from .perturbation import (
    PerturbationReport,
    delta_lr,
    emr,
    equilibrium_c,
    multistep_perturbation_ratio,
    perturbation_line,
    perturbation_report,
)
from .simplex import (
    Composition,
    InvalidCompositionError,
    PerturbationVector,
    alr,
    alr_inv,
    build_perturbation,
    h1,
    shannon_entropy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
