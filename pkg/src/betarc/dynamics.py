"""Parametric interval maps on [0,1]: orbits, ergodic averages, densities.

Four one-parameter families are supported:

* ``bernoulli`` -- T(x) = (k*x) mod 1 for an integer k >= 2
* ``logistic`` -- T(x) = theta*x*(1-x) for theta in (0, 4]
* ``pwl`` (piecewise linear) -- T(x) = x/theta on [0, theta),
  theta*(x-theta)/(1-theta) on [theta, 1]
* ``mp`` (Manneville-Pomeau) -- T(x) = (x + x^(1+s)) mod 1 for s > 0

Orbits are clamped into [BOUNDARY_EPS, 1-BOUNDARY_EPS] because downstream
code needs conditional means strictly inside (0,1); the clamp count is
reported on the orbit so callers can see how often it fired.  In exact
arithmetic the maps send [0,1] into [0,1] and almost every orbit stays in
the open interval; in floating point the mod-1 maps can land exactly on 0.

Orbits of chaotic maps are sensitive to rounding, so results are
reproducible per build (fixed double precision, formulas evaluated in a
fixed order) but may diverge across platforms after roughly 50 iterates for
strongly expanding maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from betarc import backend

#: Half-width of the boundary guard: orbit values and conditional means are
#: kept inside [BOUNDARY_EPS, 1 - BOUNDARY_EPS].
BOUNDARY_EPS = 1e-12


class MapFamily(str, Enum):
    BERNOULLI = "bernoulli"
    LOGISTIC = "logistic"
    PIECEWISE_LINEAR = "pwl"
    MANNEVILLE_POMEAU = "mp"


_FAMILY_CODE = {
    MapFamily.BERNOULLI: 0,
    MapFamily.LOGISTIC: 1,
    MapFamily.PIECEWISE_LINEAR: 2,
    MapFamily.MANNEVILLE_POMEAU: 3,
}

_FAMILY_ALIASES = {
    "bernoulli": MapFamily.BERNOULLI,
    "logistic": MapFamily.LOGISTIC,
    "pwl": MapFamily.PIECEWISE_LINEAR,
    "piecewise": MapFamily.PIECEWISE_LINEAR,
    "piecewise-linear": MapFamily.PIECEWISE_LINEAR,
    "mp": MapFamily.MANNEVILLE_POMEAU,
    "manneville-pomeau": MapFamily.MANNEVILLE_POMEAU,
}


def parse_family(name: str | MapFamily) -> MapFamily:
    """Resolve a family name (CLI spelling or enum) to a MapFamily."""
    if isinstance(name, MapFamily):
        return name
    try:
        return _FAMILY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown map family {name!r}; expected one of "
                         f"{sorted(_FAMILY_ALIASES)}") from None


@dataclass(frozen=True)
class MapSpec:
    """A map family together with its parameter vector.

    All four families take a single scalar parameter; ``theta`` is kept as a
    tuple so the estimation layer can treat map parameters uniformly.
    """

    family: MapFamily
    theta: tuple[float, ...]

    def __post_init__(self):
        family = parse_family(self.family)
        theta = tuple(float(v) for v in np.atleast_1d(np.asarray(self.theta, dtype=float)))
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "theta", theta)
        validate_theta(family, theta)

    @property
    def theta0(self) -> float:
        return self.theta[0]


def validate_theta(family: MapFamily, theta: tuple[float, ...]) -> None:
    """Raise ValueError unless theta lies in the family's validity domain."""
    if len(theta) != 1:
        raise ValueError(f"{family.value} map takes exactly one parameter, got {theta}")
    t = theta[0]
    if not math.isfinite(t):
        raise ValueError(f"map parameter must be finite, got {t}")
    if family is MapFamily.BERNOULLI:
        if t != int(t) or t < 2:
            raise ValueError(f"bernoulli map needs an integer k >= 2, got {t}")
    elif family is MapFamily.LOGISTIC:
        if not 0.0 < t <= 4.0:
            raise ValueError(f"logistic map needs theta in (0, 4], got {t}")
    elif family is MapFamily.PIECEWISE_LINEAR:
        if not 0.0 < t < 1.0:
            raise ValueError(f"piecewise linear map needs theta in (0, 1), got {t}")
    else:
        if t <= 0.0:
            raise ValueError(f"Manneville-Pomeau map needs s > 0, got {t}")


def theta_domain(family: MapFamily) -> tuple[float, float]:
    """Open validity domain of the scalar map parameter.

    The Manneville-Pomeau parameter is unbounded above; the estimation layer
    imposes its own finite cap.
    """
    family = parse_family(family)
    if family is MapFamily.BERNOULLI:
        return (2.0, math.inf)
    if family is MapFamily.LOGISTIC:
        return (0.0, 4.0)
    if family is MapFamily.PIECEWISE_LINEAR:
        return (0.0, 1.0)
    return (0.0, math.inf)


@dataclass(frozen=True)
class Orbit:
    """A finite orbit u0, T(u0), ..., T^(n-1)(u0), boundary-clamped."""

    u0: float
    values: np.ndarray
    clamped_count: int

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Histogram:
    """Normalized histogram: ``masses[i]`` is the fraction of points in
    [edges[i], edges[i+1])."""

    edges: np.ndarray
    masses: np.ndarray


def apply_map(m: MapSpec, x: float) -> float:
    """One application of the map, exactly as the family formula reads.

    No boundary clamping here: mod-1 maps send 1.0 to 0.0 and may return 0.0.
    Raises ValueError if x is outside [0, 1].
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"map argument must lie in [0, 1], got {x}")
    return backend.map_step(_FAMILY_CODE[m.family], m.theta0, x)


def iterate(m: MapSpec, u0: float, n: int) -> Orbit:
    """Orbit of length n starting at u0 in (0,1).

    Iterates landing outside [BOUNDARY_EPS, 1-BOUNDARY_EPS] are clamped to
    the nearest endpoint of that interval and counted.
    """
    if not 0.0 < u0 < 1.0:
        raise ValueError(f"u0 must lie in (0, 1), got {u0}")
    if n < 1:
        raise ValueError(f"orbit length must be >= 1, got {n}")
    values = np.empty(int(n), dtype=np.float64)
    clamped = backend.orbit_into(_FAMILY_CODE[m.family], m.theta0, float(u0),
                                 BOUNDARY_EPS, values)
    return Orbit(u0=float(u0), values=values, clamped_count=int(clamped))


def birkhoff_average(m: MapSpec, u0: float, n: int, f) -> float:
    """Time average (1/n) * sum_{k<n} f(T^k(u0)).

    ``f`` may be a numpy-vectorized callable (applied to the whole orbit at
    once) or a plain scalar function.
    """
    orbit = iterate(m, u0, n)
    values = _apply_observable(f, orbit.values)
    return float(values.mean())


def _apply_observable(f, values: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(values), dtype=float)
        if out.shape == values.shape:
            return out
    except Exception:
        pass
    return np.fromiter((float(f(v)) for v in values), dtype=float, count=len(values))


def invariant_density(m: MapSpec, x: float) -> float | None:
    """Closed-form invariant (ACIM) density where one is known.

    Bernoulli maps preserve Lebesgue measure (density 1); the logistic map at
    theta=4 has the arcsine density 1/(pi*sqrt(x(1-x))).  For every other
    case the density has no implemented closed form and None is returned, in
    which case callers fall back to orbit-based estimation.
    """
    if not 0.0 < x < 1.0:
        raise ValueError(f"density argument must lie in (0, 1), got {x}")
    if m.family is MapFamily.BERNOULLI:
        return 1.0
    if m.family is MapFamily.LOGISTIC and m.theta0 == 4.0:
        return 1.0 / (math.pi * math.sqrt(x * (1.0 - x)))
    return None


def has_closed_form_density(m: MapSpec) -> bool:
    return m.family is MapFamily.BERNOULLI or (
        m.family is MapFamily.LOGISTIC and m.theta0 == 4.0)


def empirical_density(m: MapSpec, u0: float, n: int, bins: int) -> Histogram:
    """Normalized histogram of the first n orbit points on [0, 1]."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if n < bins:
        raise ValueError(f"need n >= bins, got n={n}, bins={bins}")
    orbit = iterate(m, u0, n)
    counts, edges = np.histogram(orbit.values, bins=bins, range=(0.0, 1.0))
    return Histogram(edges=edges, masses=counts / float(n))
