"""The betaARC process: conditional mean recursion, simulation, and
unconditional moments/density for the pure chaotic case.

The systematic component is

    g(mu_t) = alpha + x_t'beta
              + sum_{j=1..p} phi_j * (g(y_{t-j}) - x_{t-j}'beta)
              + h(T^(t-1)(u0)),

with conditional law  y_t | past ~ BetaMP(mu_t, nu).  Autoregressive terms
whose index t-j falls before the sample start contribute zero (the usual
GARMA-style initialization; the choice is documented because it affects
likelihood values near the start of the sample).

The pure chaotic special case has p = 0, no covariates, identity links and
alpha = 0, collapsing the recursion to mu_t = T^(t-1)(u0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import quad

from betarc import backend, betadist
from betarc.dynamics import (BOUNDARY_EPS, _FAMILY_CODE, MapSpec,
                             has_closed_form_density, invariant_density,
                             validate_theta)
from betarc.errors import DataError


class LinkKind(str, Enum):
    IDENTITY = "identity"
    LOGIT = "logit"
    CLOGLOG = "cloglog"


@dataclass(frozen=True)
class Link:
    """An invertible link between (0,1) and the real line.

    ``apply`` maps means to the linear-predictor scale, ``inverse`` maps
    back.  The cloglog link is g(x) = log(-log(1-x)) with inverse
    1 - exp(-exp(eta)).  Identity is included because the chaotic term is
    often used on the mean scale directly.
    """

    kind: LinkKind

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is LinkKind.IDENTITY:
            return x + 0.0
        if self.kind is LinkKind.LOGIT:
            return np.log(x / (1.0 - x))
        return np.log(-np.log1p(-x))

    def inverse(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.kind is LinkKind.IDENTITY:
            return eta + 0.0
        # exp overflow saturates to the correct limit (0 or 1); keep it quiet
        with np.errstate(over="ignore"):
            if self.kind is LinkKind.LOGIT:
                return 1.0 / (1.0 + np.exp(-eta))
            return -np.expm1(-np.exp(eta))


IDENTITY = Link(LinkKind.IDENTITY)
LOGIT = Link(LinkKind.LOGIT)
CLOGLOG = Link(LinkKind.CLOGLOG)

_LINKS = {k.value: Link(k) for k in LinkKind}


def parse_link(name: str | Link) -> Link:
    if isinstance(name, Link):
        return name
    try:
        return _LINKS[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown link {name!r}; expected one of {sorted(_LINKS)}") from None


@dataclass(frozen=True)
class ModelSpec:
    """Structure of a betaARC(p) model: links, map family, AR order,
    covariate dimension."""

    map: MapSpec
    g: Link = IDENTITY
    h: Link = IDENTITY
    p: int = 0
    n_covariates: int = 0

    def __post_init__(self):
        object.__setattr__(self, "g", parse_link(self.g))
        object.__setattr__(self, "h", parse_link(self.h))
        if self.p < 0:
            raise ValueError(f"AR order p must be >= 0, got {self.p}")
        if self.n_covariates < 0:
            raise ValueError(f"covariate dimension must be >= 0, got {self.n_covariates}")

    @property
    def pure_chaotic(self) -> bool:
        """True when the structure admits mu_t = T^(t-1)(u0) (identity links,
        no AR terms, no covariates); gamma.alpha must also be 0 for the
        reduction to hold."""
        return (self.p == 0 and self.n_covariates == 0
                and self.g.kind is LinkKind.IDENTITY
                and self.h.kind is LinkKind.IDENTITY)


@dataclass(frozen=True)
class ParamVector:
    """Full parameter vector (nu, alpha, beta, phi, theta) plus the starting
    point u0, which is carried alongside rather than treated as a regular
    coordinate (it is fixed or grid-searched, never Wald-tested)."""

    nu: float
    alpha: float = 0.0
    beta: tuple[float, ...] = ()
    phi: tuple[float, ...] = ()
    theta: tuple[float, ...] = ()
    u0: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "phi", tuple(float(f) for f in self.phi))
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))

    def validate(self, spec: ModelSpec) -> None:
        if not self.nu > 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not 0.0 < self.u0 < 1.0:
            raise ValueError(f"u0 must lie in (0, 1), got {self.u0}")
        if len(self.beta) != spec.n_covariates:
            raise ValueError(f"beta has length {len(self.beta)}, "
                             f"spec expects {spec.n_covariates}")
        if len(self.phi) != spec.p:
            raise ValueError(f"phi has length {len(self.phi)}, spec expects {spec.p}")
        theta = self.theta if self.theta else spec.map.theta
        validate_theta(spec.map.family, theta)

    def map_theta(self, spec: ModelSpec) -> tuple[float, ...]:
        """Map parameters to use: the vector's own theta, falling back to the
        values frozen in the spec's MapSpec."""
        return self.theta if self.theta else spec.map.theta


@dataclass(frozen=True)
class SeriesSample:
    """Observations y_t in (0,1) with optional covariate rows."""

    y: np.ndarray
    X: np.ndarray | None = None
    timestamps: tuple[str, ...] | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim != 1 or len(y) == 0:
            raise DataError("y must be a non-empty 1-d array")
        bad = np.flatnonzero((y <= 0.0) | (y >= 1.0) | ~np.isfinite(y))
        if len(bad):
            raise DataError(f"y must lie strictly in (0,1); row {bad[0] + 1} "
                            f"has y={y[bad[0]]!r}")
        object.__setattr__(self, "y", y)
        if self.X is not None:
            X = np.asarray(self.X, dtype=np.float64)
            if X.ndim == 1:
                X = X[:, None]
            if X.shape[0] != len(y):
                raise DataError(f"covariate matrix has {X.shape[0]} rows, y has {len(y)}")
            if not np.all(np.isfinite(X)):
                raise DataError("covariate matrix contains non-finite entries")
            object.__setattr__(self, "X", X)
        if self.timestamps is not None:
            ts = tuple(str(t) for t in self.timestamps)
            if len(ts) != len(y):
                raise DataError("timestamps length does not match y")
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return len(self.y)

    def head(self, n: int) -> "SeriesSample":
        return SeriesSample(self.y[:n],
                            None if self.X is None else self.X[:n],
                            None if self.timestamps is None else self.timestamps[:n])


@dataclass(frozen=True)
class UnconditionalMoments:
    """Orbit-estimated unconditional mean/variance of y_t and its
    autocovariance at lags 1..H (which equals the orbit autocovariance)."""

    mean: float
    variance: float
    autocov: np.ndarray = field(default_factory=lambda: np.empty(0))


def orbit_values(spec: ModelSpec, gamma: ParamVector, n: int) -> np.ndarray:
    """T^0(u0) .. T^(n-1)(u0) for the model's map at gamma's parameters."""
    theta = gamma.map_theta(spec)
    validate_theta(spec.map.family, theta)
    out = np.empty(int(n), dtype=np.float64)
    backend.orbit_into(_FAMILY_CODE[spec.map.family], theta[0], float(gamma.u0),
                       BOUNDARY_EPS, out)
    return out


def conditional_means(spec: ModelSpec, gamma: ParamVector,
                      sample: SeriesSample) -> np.ndarray:
    """mu_1..mu_n from the systematic-component recursion.

    The chaotic term h(T^(t-1)(u0)) comes from a single orbit of length n;
    AR terms with index before the sample start contribute zero; the result
    is clamped into [BOUNDARY_EPS, 1-BOUNDARY_EPS].
    """
    gamma.validate(spec)
    n = len(sample)
    if spec.n_covariates > 0 and (sample.X is None or sample.X.shape[1] != spec.n_covariates):
        raise DataError(f"spec expects {spec.n_covariates} covariates; sample has "
                        f"{0 if sample.X is None else sample.X.shape[1]}")
    orbit = orbit_values(spec, gamma, n)
    eta = _eta_from_parts(spec, gamma, sample.y, sample.X, orbit)
    return _clamp_unit(spec.g.inverse(eta))


def _eta_from_parts(spec: ModelSpec, gamma: ParamVector, y: np.ndarray,
                    X: np.ndarray | None, orbit: np.ndarray) -> np.ndarray:
    n = len(y)
    xb = X @ np.asarray(gamma.beta) if spec.n_covariates > 0 else np.zeros(n)
    eta = gamma.alpha + xb + spec.h.apply(orbit)
    if spec.p > 0:
        gy = spec.g.apply(y)
        deflated = gy - xb
        for j, phi_j in enumerate(gamma.phi, start=1):
            if j <= n:
                eta[j:] = eta[j:] + phi_j * deflated[:n - j]
    return eta


def _clamp_unit(mu: np.ndarray) -> np.ndarray:
    return np.clip(mu, BOUNDARY_EPS, 1.0 - BOUNDARY_EPS)


def simulate(spec: ModelSpec, gamma: ParamVector, n: int,
             rng: np.random.Generator, X: np.ndarray | None = None) -> SeriesSample:
    """Generate y_1..y_n from the model, deterministically given ``rng``.

    Each y_t is drawn from BetaMP(mu_t, nu) where mu_t uses the already
    generated y_{t-j}.  With p = 0 there is no feedback and the draws are
    vectorized; the gamma-variate stream layout is identical either way.
    """
    gamma.validate(spec)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if spec.n_covariates > 0:
        if X is None:
            raise DataError("spec expects covariates but X is None")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape != (n, spec.n_covariates):
            raise DataError(f"X must have shape ({n}, {spec.n_covariates}), got {X.shape}")
    orbit = orbit_values(spec, gamma, n)
    horb = spec.h.apply(orbit)
    xb = X @ np.asarray(gamma.beta) if spec.n_covariates > 0 else np.zeros(n)
    base = gamma.alpha + xb + horb

    if spec.p == 0:
        mu = _clamp_unit(spec.g.inverse(base))
        y = betadist.sample_sequence(mu, gamma.nu, rng)
        return SeriesSample(y=y, X=X)

    y = np.empty(n, dtype=np.float64)
    deflated = np.empty(n, dtype=np.float64)  # g(y_t) - x_t'beta, filled as we go
    for t in range(n):
        eta_t = base[t]
        for j, phi_j in enumerate(gamma.phi, start=1):
            if t - j >= 0:
                eta_t += phi_j * deflated[t - j]
        mu_t = float(_clamp_unit(spec.g.inverse(eta_t)))
        y[t] = betadist.sample(betadist.BetaMP(mu_t, gamma.nu), rng)
        deflated[t] = float(spec.g.apply(y[t])) - xb[t]
    return SeriesSample(y=y, X=X)


def _require_pure_chaotic(spec: ModelSpec, gamma: ParamVector) -> None:
    if not spec.pure_chaotic or gamma.alpha != 0.0:
        raise ValueError("operation requires the pure chaotic form "
                         "(p=0, no covariates, identity links, alpha=0)")


def unconditional_moments(spec: ModelSpec, gamma: ParamVector, n: int,
                          max_lag: int = 5) -> UnconditionalMoments:
    """Unconditional mean, variance and autocovariance of a pure chaotic
    model, estimated by Birkhoff averages over an orbit of length n.

    mean      = orbit mean of mu_t,
    variance  = orbit variance + orbit mean of mu(1-mu)/(1+nu),
    autocov_h = orbit autocovariance at lag h  (h = 1..max_lag).
    """
    _require_pure_chaotic(spec, gamma)
    gamma.validate(spec)
    if n < 10 * max_lag:
        raise ValueError(f"need n >= 10*max_lag = {10 * max_lag}, got {n}")
    mu = orbit_values(spec, gamma, n)
    mean = float(mu.mean())
    centered = mu - mean
    var_mu = float(np.mean(centered ** 2))
    noise = float(np.mean(mu * (1.0 - mu))) / (1.0 + gamma.nu)
    autocov = np.array([float(np.mean(centered[:-h] * centered[h:]))
                        for h in range(1, max_lag + 1)])
    return UnconditionalMoments(mean=mean, variance=var_mu + noise, autocov=autocov)


def unconditional_density(spec: ModelSpec, gamma: ParamVector, y,
                          method: str = "quadrature", n: int = 10 ** 6) -> np.ndarray:
    """Marginal density f(y) of a stationary pure chaotic model.

    ``method="quadrature"`` integrates the conditional beta density against
    the closed-form invariant density (available for bernoulli and
    logistic theta=4 maps only); ``method="orbit"`` takes the Birkhoff
    average of the conditional density along an orbit of length n.

    ``y`` may be a scalar or a grid; a matching ndarray is returned (0-d for
    scalar input).
    """
    _require_pure_chaotic(spec, gamma)
    gamma.validate(spec)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any((ys <= 0.0) | (ys >= 1.0)):
        raise ValueError("density arguments must lie in (0, 1)")
    method = method.strip().lower()
    if method == "quadrature":
        m = MapSpec(spec.map.family, gamma.map_theta(spec))
        if not has_closed_form_density(m):
            raise ValueError(f"no closed-form invariant density for "
                             f"{m.family.value}; use method='orbit'")
        out = np.array([_density_quadrature(m, gamma.nu, float(yv)) for yv in ys])
    elif method in ("orbit", "orbitmc", "orbit-mc"):
        out = _density_orbit(spec, gamma, ys, n)
    else:
        raise ValueError(f"unknown density method {method!r}")
    return out.reshape(np.shape(y))


def _density_quadrature(m: MapSpec, nu: float, y: float) -> float:
    def integrand(z: float) -> float:
        return math.exp(betadist.log_density(betadist.BetaMP(z, nu), y)) \
            * invariant_density(m, z)

    # the conditional density concentrates around z = y for large nu; point
    # the subdivision there so the adaptive rule cannot step over the peak
    value, _ = quad(integrand, BOUNDARY_EPS, 1.0 - BOUNDARY_EPS, limit=200,
                    points=(y,))
    return value


def _density_orbit(spec: ModelSpec, gamma: ParamVector, ys: np.ndarray,
                   n: int) -> np.ndarray:
    from scipy.special import gammaln

    nu = gamma.nu
    mu = orbit_values(spec, gamma, n)
    a = nu * mu
    b = nu * (1.0 - mu)
    # z-dependent part of the log density, shared across all y values
    const = gammaln(nu) - gammaln(a) - gammaln(b)
    out = np.empty(len(ys))
    for i, yv in enumerate(ys):
        logf = const + (a - 1.0) * math.log(yv) + (b - 1.0) * math.log1p(-yv)
        out[i] = float(np.mean(np.exp(logf)))
    return out
