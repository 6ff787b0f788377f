"""Residual diagnostics, forecasting, accuracy measures, model selection.

Residuals are y_t - mu_t throughout.  The Ljung-Box statistic uses m lags
with m degrees of freedom (no AR-order correction), so its p-values are
reproducible from the residual vector alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from betarc.errors import DataError
from betarc.estimation import FitResult
from betarc.model import ModelSpec, ParamVector, SeriesSample, _clamp_unit, orbit_values


@dataclass(frozen=True)
class AccuracyReport:
    """The five forecast accuracy measures, in percent where applicable."""

    mape: float
    mpe: float
    me: float
    mae: float
    rmse: float
    horizon: str = "in-sample"


@dataclass(frozen=True)
class LjungBoxResult:
    statistic: float
    lags: int
    dof: int
    p_value: float


def ljung_box(residuals: np.ndarray, m: int = 20) -> LjungBoxResult:
    """Portmanteau test of the first m residual autocorrelations.

    Q = n(n+2) * sum_{k=1..m} acf_k^2 / (n-k), compared to chi-square(m).
    Requires n > m and non-degenerate residuals.
    """
    e = np.asarray(residuals, dtype=float)
    n = len(e)
    if n <= m:
        raise DataError(f"need more residuals than lags: n={n}, m={m}")
    centered = e - e.mean()
    denom = float(np.sum(centered ** 2))
    if denom == 0.0:
        raise DataError("residuals have zero variance; autocorrelations undefined")
    acf = np.array([float(np.sum(centered[k:] * centered[:-k])) / denom
                    for k in range(1, m + 1)])
    statistic = float(n * (n + 2.0) * np.sum(acf ** 2 / (n - np.arange(1, m + 1))))
    p_value = float(chi2.sf(statistic, m))
    return LjungBoxResult(statistic=statistic, lags=m, dof=m, p_value=p_value)


def accuracy(actual: np.ndarray, predicted: np.ndarray,
             horizon: str = "in-sample") -> AccuracyReport:
    """ME, MAE, RMSE plus the percentage errors MPE and MAPE.

    Errors are e_t = actual_t - predicted_t; percentage measures divide by
    the actuals, which must be nonzero.
    """
    a = np.asarray(actual, dtype=float)
    f = np.asarray(predicted, dtype=float)
    if a.shape != f.shape or a.ndim != 1 or len(a) == 0:
        raise DataError("actual and predicted must be equal-length 1-d arrays")
    if np.any(a == 0.0):
        raise DataError("percentage errors undefined: actual contains zeros")
    e = a - f
    return AccuracyReport(
        mape=float(100.0 * np.mean(np.abs(e) / np.abs(a))),
        mpe=float(100.0 * np.mean(e / a)),
        me=float(np.mean(e)),
        mae=float(np.mean(np.abs(e))),
        rmse=float(np.sqrt(np.mean(e ** 2))),
        horizon=horizon,
    )


def forecast(spec: ModelSpec, fit: FitResult, sample: SeriesSample, h: int,
             X_future: np.ndarray | None = None) -> np.ndarray:
    """Predicted means for t = n+1 .. n+h.

    The chaotic term continues the fitted orbit deterministically.  AR terms
    use observed y while available and substitute earlier forecast means for
    unobserved values (for an un-clamped forecast mean this equals plugging
    eta-hat back in, since g(mu-hat) = eta-hat).
    """
    return forecast_gamma(spec, fit.gamma_hat, sample, h, X_future)


def forecast_gamma(spec: ModelSpec, gamma: ParamVector, sample: SeriesSample,
                   h: int, X_future: np.ndarray | None = None) -> np.ndarray:
    if h < 1:
        raise ValueError(f"forecast horizon must be >= 1, got {h}")
    gamma.validate(spec)
    n = len(sample)
    if spec.n_covariates > 0:
        if X_future is None:
            raise DataError(f"need {h} future covariate rows, got none")
        X_future = np.asarray(X_future, dtype=float)
        if X_future.ndim == 1:
            X_future = X_future[:, None]
        if X_future.shape != (h, spec.n_covariates):
            raise DataError(f"X_future must have shape ({h}, {spec.n_covariates}), "
                            f"got {X_future.shape}")
        X_all = np.vstack([sample.X, X_future])
        xb = X_all @ np.asarray(gamma.beta)
    else:
        xb = np.zeros(n + h)

    orbit = orbit_values(spec, gamma, n + h)
    horb = np.asarray(spec.h.apply(orbit))
    gy = np.empty(n + h)
    gy[:n] = np.asarray(spec.g.apply(sample.y))

    mu_future = np.empty(h)
    for step in range(h):
        t = n + step  # 0-based index of the forecast target
        eta = gamma.alpha + xb[t] + horb[t]
        for j, phi_j in enumerate(gamma.phi, start=1):
            if t - j >= 0:
                eta += phi_j * (gy[t - j] - xb[t - j])
        mu = float(_clamp_unit(spec.g.inverse(eta)))
        mu_future[step] = mu
        gy[t] = float(spec.g.apply(mu))
    return mu_future


@dataclass(frozen=True)
class ModelCandidate:
    """A fitted model bundled with the diagnostics model selection needs."""

    label: str
    fit: FitResult
    accuracy_in: AccuracyReport
    ljung_box: LjungBoxResult


def model_select(candidates: list[ModelCandidate],
                 significance: float = 0.05) -> tuple[ModelCandidate, ModelCandidate]:
    """Pick (best by in-sample MAPE, best by log-likelihood).

    Candidates are first filtered to those whose coefficients are all
    significant at ``significance`` and whose Ljung-Box p-value is at least
    0.05; ties on either criterion break toward smaller AIC.
    """
    admissible = [c for c in candidates
                  if c.ljung_box.p_value >= 0.05 and _all_significant(c.fit, significance)]
    if not admissible:
        raise DataError("no candidate passes the significance and Ljung-Box filters")
    by_mape = min(admissible, key=lambda c: (c.accuracy_in.mape, c.fit.aic))
    by_loglik = min(admissible, key=lambda c: (-c.fit.loglik, c.fit.aic))
    return by_mape, by_loglik


def _all_significant(fit: FitResult, significance: float) -> bool:
    # only the regression coefficients carry z-tests; nu and the map
    # parameter are scale/shape quantities with no natural zero null
    idx = [i for i, lbl in enumerate(fit.labels)
           if lbl == "alpha" or lbl.startswith(("beta", "phi"))]
    if not idx:
        return True
    p = fit.p_values[idx]
    return bool(np.all(np.isfinite(p) & (p < significance)))
