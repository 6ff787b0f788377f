# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: interval-map orbit iteration and the beta
log-likelihood sum.

Signatures mirror :mod:`betarc._kernels_py` exactly; :mod:`betarc.backend`
picks one of the two at import time.  Map formulas are evaluated in the same
operation order as the Python backend so orbits are bit-identical across
backends.
"""

from libc.math cimport floor, lgamma, log, log1p, pow

# Family codes shared with betarc.dynamics.
DEF FAM_BERNOULLI = 0
DEF FAM_LOGISTIC = 1
DEF FAM_PIECEWISE_LINEAR = 2
DEF FAM_MANNEVILLE_POMEAU = 3


cdef inline double _step(int family, double theta, double x) noexcept nogil:
    cdef double v
    if family == FAM_BERNOULLI:
        v = theta * x
        return v - floor(v)
    elif family == FAM_LOGISTIC:
        return theta * x * (1.0 - x)
    elif family == FAM_PIECEWISE_LINEAR:
        if x < theta:
            return x / theta
        return theta * (x - theta) / (1.0 - theta)
    else:
        v = x + pow(x, 1.0 + theta)
        return v - floor(v)


def map_step(int family, double theta, double x):
    """Single application of the map, no boundary clamping."""
    return _step(family, theta, x)


def orbit_into(int family, double theta, double u0, double eps, double[::1] out):
    """Fill ``out`` with the orbit u0, T(u0), T^2(u0), ...

    Every entry is clamped into [eps, 1-eps]; returns the number of
    clamps applied.
    """
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t t
    cdef int clamped = 0
    cdef double hi = 1.0 - eps
    cdef double x = u0

    if n == 0:
        return 0
    if x < eps:
        x = eps
        clamped += 1
    elif x > hi:
        x = hi
        clamped += 1
    out[0] = x
    for t in range(1, n):
        x = _step(family, theta, x)
        if x < eps:
            x = eps
            clamped += 1
        elif x > hi:
            x = hi
            clamped += 1
        out[t] = x
    return clamped


def beta_loglik_sum(double[::1] y, double[::1] mu, double nu):
    """Sum of beta log-densities in mean-precision form.

    Term t is  lgamma(nu) - lgamma(nu*mu_t) - lgamma(nu*(1-mu_t))
               + (nu*mu_t - 1)*log(y_t) + (nu*(1-mu_t) - 1)*log(1-y_t).
    Inputs are assumed pre-validated: y and mu strictly inside (0, 1), nu > 0.
    """
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t t
    cdef double lgnu = lgamma(nu)
    cdef double s = 0.0
    cdef double a, b
    for t in range(n):
        a = nu * mu[t]
        b = nu * (1.0 - mu[t])
        s += lgnu - lgamma(a) - lgamma(b) \
            + (a - 1.0) * log(y[t]) + (b - 1.0) * log1p(-y[t])
    return s
