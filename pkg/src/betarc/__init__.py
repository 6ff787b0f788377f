"""betarc: beta autoregressive chaotic time series models.

Time series on (0,1) whose conditional beta mean is driven by iterates of a
parametric interval map, optionally combined with covariates and
autoregressive terms.  The package covers simulation, partial maximum
likelihood estimation, forecasting, residual diagnostics and a Monte Carlo
replication harness, plus a CLI (``betarc --help``).
"""

__version__ = "0.1.0"

from betarc.backend import BACKEND, backend_info
from betarc.betadist import BetaMP, conditional_variance, log_density, sample
from betarc.diagnostics import (AccuracyReport, LjungBoxResult, ModelCandidate,
                                accuracy, forecast, ljung_box, model_select)
from betarc.dynamics import (BOUNDARY_EPS, Histogram, MapFamily, MapSpec, Orbit,
                             apply_map, birkhoff_average, empirical_density,
                             invariant_density, iterate)
from betarc.errors import BetarcError, DataError, NumericalError
from betarc.estimation import (Bounds, FitOptions, FitResult, fit, fit_u0_grid,
                               information_criteria, loglik, wald_inference)
from betarc.model import (CLOGLOG, IDENTITY, LOGIT, Link, LinkKind, ModelSpec,
                          ParamVector, SeriesSample, conditional_means, simulate,
                          unconditional_density, unconditional_moments)
from betarc.montecarlo import (MCConfig, MCSummary, normality_probe, run_mc,
                               table1_preset)

__all__ = [
    "BACKEND", "BOUNDARY_EPS", "__version__",
    "AccuracyReport", "BetaMP", "BetarcError", "Bounds", "CLOGLOG", "DataError",
    "FitOptions", "FitResult", "Histogram", "IDENTITY", "LOGIT", "Link",
    "LinkKind", "LjungBoxResult", "MCConfig", "MCSummary", "MapFamily",
    "MapSpec", "ModelCandidate", "ModelSpec", "NumericalError", "Orbit",
    "ParamVector", "SeriesSample",
    "accuracy", "apply_map", "backend_info", "birkhoff_average",
    "conditional_means", "conditional_variance", "empirical_density", "fit",
    "fit_u0_grid", "forecast", "information_criteria", "invariant_density",
    "iterate", "ljung_box", "log_density", "loglik", "model_select",
    "normality_probe", "run_mc", "sample", "simulate", "table1_preset",
    "unconditional_density", "unconditional_moments", "wald_inference",
]
