"""Beta distribution in the mean-precision parameterization.

A mean mu in (0,1) and precision nu > 0 correspond to classical shape
parameters a = nu*mu, b = nu*(1-mu).  The conditional variance is
mu*(1-mu)/(1+nu), so nu scales how tightly draws hug the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from betarc import backend
from betarc.dynamics import BOUNDARY_EPS


@dataclass(frozen=True)
class BetaMP:
    """Beta law with mean ``mu`` in (0,1) and precision ``nu`` > 0."""

    mu: float
    nu: float

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        if not self.nu > 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")

    @property
    def shapes(self) -> tuple[float, float]:
        """Classical shape parameters (a, b) = (nu*mu, nu*(1-mu))."""
        return self.nu * self.mu, self.nu * (1.0 - self.mu)


def log_density(d: BetaMP, y: float) -> float:
    """Log density at y in (0,1).

    lgamma(nu) - lgamma(nu*mu) - lgamma(nu*(1-mu))
    + (nu*mu - 1)*log(y) + (nu*(1-mu) - 1)*log(1-y)
    """
    if not 0.0 < y < 1.0:
        raise ValueError(f"y must lie in (0, 1), got {y}")
    a, b = d.shapes
    return (math.lgamma(d.nu) - math.lgamma(a) - math.lgamma(b)
            + (a - 1.0) * math.log(y) + (b - 1.0) * math.log1p(-y))


def log_density_sum(y: np.ndarray, mu: np.ndarray, nu: float) -> float:
    """Sum of log densities for observation vector y and mean vector mu.

    Thin wrapper over the active kernel backend; inputs must already lie
    strictly inside (0,1).
    """
    return backend.beta_loglik_sum(np.ascontiguousarray(y, dtype=np.float64),
                                   np.ascontiguousarray(mu, dtype=np.float64),
                                   float(nu))


def conditional_variance(d: BetaMP) -> float:
    """mu*(1-mu)/(1+nu); always bounded by 1/(4*nu)."""
    return d.mu * (1.0 - d.mu) / (1.0 + d.nu)


def sample(d: BetaMP, rng: np.random.Generator) -> float:
    """One draw via the two-gamma-ratio construction G_a/(G_a+G_b).

    Valid for all positive shapes, including a < 1 (which occurs whenever
    nu*mu < 1).  Draws are clamped into the open interval; if both gamma
    variates underflow to zero the pair is redrawn.
    """
    a, b = d.shapes
    while True:
        ga = rng.gamma(a)
        gb = rng.gamma(b)
        denom = ga + gb
        if denom > 0.0:
            return _clamp_open(ga / denom)


def sample_sequence(mu: np.ndarray, nu: float, rng: np.random.Generator) -> np.ndarray:
    """Independent draws y_t ~ BetaMP(mu_t, nu), one per entry of mu.

    Consumes the generator exactly like repeated scalar `sample` calls
    (gamma(a_t) then gamma(b_t), in t order), so sequential and vectorized
    simulation paths produce identical streams.  The only exception is the
    double-underflow redraw, which happens after the main block here.
    """
    mu = np.asarray(mu, dtype=np.float64)
    a = nu * mu
    b = nu * (1.0 - mu)
    g = rng.gamma(np.stack([a, b], axis=1))
    ga, gb = g[:, 0], g[:, 1]
    denom = ga + gb
    bad = np.flatnonzero(denom == 0.0)
    for i in bad:
        while denom[i] == 0.0:
            ga[i] = rng.gamma(a[i])
            gb[i] = rng.gamma(b[i])
            denom[i] = ga[i] + gb[i]
    y = ga / denom
    np.clip(y, BOUNDARY_EPS, 1.0 - BOUNDARY_EPS, out=y)
    return y


def _clamp_open(y: float) -> float:
    if y < BOUNDARY_EPS:
        return BOUNDARY_EPS
    if y > 1.0 - BOUNDARY_EPS:
        return 1.0 - BOUNDARY_EPS
    return y
