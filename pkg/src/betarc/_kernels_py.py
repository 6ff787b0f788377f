"""Pure-Python/numpy fallback for the compiled kernels.

Same signatures as ``betarc._kernels_c``.  The orbit loop evaluates the map
formulas in the same operation order as the compiled version (both go
through libm), so orbits are bit-identical across backends; the likelihood
sum may differ at the last few ulps because numpy sums pairwise.
"""

import math

import numpy as np
from scipy.special import gammaln

FAM_BERNOULLI = 0
FAM_LOGISTIC = 1
FAM_PIECEWISE_LINEAR = 2
FAM_MANNEVILLE_POMEAU = 3


def map_step(family: int, theta: float, x: float) -> float:
    """Single application of the map, no boundary clamping."""
    if family == FAM_BERNOULLI:
        v = theta * x
        return v - math.floor(v)
    if family == FAM_LOGISTIC:
        return theta * x * (1.0 - x)
    if family == FAM_PIECEWISE_LINEAR:
        if x < theta:
            return x / theta
        return theta * (x - theta) / (1.0 - theta)
    v = x + x ** (1.0 + theta)
    return v - math.floor(v)


def orbit_into(family: int, theta: float, u0: float, eps: float, out: np.ndarray) -> int:
    """Fill ``out`` with the clamped orbit; return the clamp count."""
    n = out.shape[0]
    if n == 0:
        return 0
    hi = 1.0 - eps
    clamped = 0
    x = u0
    if x < eps:
        x = eps
        clamped += 1
    elif x > hi:
        x = hi
        clamped += 1
    out[0] = x
    for t in range(1, n):
        x = map_step(family, theta, x)
        if x < eps:
            x = eps
            clamped += 1
        elif x > hi:
            x = hi
            clamped += 1
        out[t] = x
    return clamped


def beta_loglik_sum(y: np.ndarray, mu: np.ndarray, nu: float) -> float:
    """Sum of beta log-densities in mean-precision form (see compiled twin)."""
    a = nu * mu
    b = nu * (1.0 - mu)
    terms = (gammaln(nu) - gammaln(a) - gammaln(b)
             + (a - 1.0) * np.log(y) + (b - 1.0) * np.log1p(-y))
    return float(np.sum(terms))
