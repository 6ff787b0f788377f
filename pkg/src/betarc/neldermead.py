"""Derivative-free bounded minimization: Nelder-Mead on sin^2-transformed
coordinates.

Box constraints are enforced the fminsearchbnd way: each coordinate is
reparameterized as

    x = lo + (hi - lo) * sin(z)^2,   z unconstrained,

so the simplex moves freely in z-space while every evaluated point maps
strictly inside its box.  The simplex uses the classic coefficients
(reflection 1, expansion 2, contraction 0.5, shrink 0.5) and stops when the
spread of vertex function values drops below ``ftol`` or after ``max_iter``
iterations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class NMResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool
    spread: float
    best_trace: list[float] = field(default_factory=list)


def to_unbounded(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Inverse of the sin^2 transform; x must lie inside [lo, hi]."""
    ratio = np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0.0, 1.0)
    return np.arcsin(np.sqrt(ratio))


def to_bounded(z: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return lo + (hi - lo) * np.sin(np.asarray(z, dtype=float)) ** 2


def minimize_bounded(fn, x0, lower, upper, ftol: float = 1e-8,
                     max_iter: int = 5000, keep_trace: bool = False) -> NMResult:
    """Minimize ``fn`` over the box [lower, upper] starting from x0.

    ``fn`` receives points in the original (bounded) coordinates and may
    return +inf to reject a point.  Deterministic given the start.
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if np.any(lo >= hi):
        raise ValueError("each lower bound must be strictly below its upper bound")
    dim = len(x0)

    nfev = 0

    def eval_z(z: np.ndarray) -> float:
        nonlocal nfev
        nfev += 1
        v = fn(to_bounded(z, lo, hi))
        return float(v) if np.isfinite(v) else np.inf

    z0 = to_unbounded(np.clip(x0, lo, hi), lo, hi)
    simplex = [z0]
    # fminsearch-style initial simplex: 5% bump, absolute bump at zero
    for i in range(dim):
        zi = z0.copy()
        zi[i] = zi[i] * 1.05 if zi[i] != 0.0 else 0.00025
        simplex.append(zi)
    fvals = np.array([eval_z(z) for z in simplex])

    trace: list[float] = []
    nit = 0
    spread = np.inf
    while nit < max_iter:
        order = np.argsort(fvals, kind="stable")
        simplex = [simplex[i] for i in order]
        fvals = fvals[order]
        if keep_trace:
            trace.append(fvals[0])
        spread = _spread(fvals)
        if spread <= ftol:
            break
        nit += 1

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = eval_z(xr)
        if fvals[0] <= fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = eval_z(xe)
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + 0.5 * (xr - centroid)  # outside contraction
            fc = eval_z(xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid - 0.5 * (centroid - worst)  # inside contraction
            fc = eval_z(xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        # shrink toward the best vertex
        best = simplex[0]
        for i in range(1, dim + 1):
            simplex[i] = best + 0.5 * (simplex[i] - best)
            fvals[i] = eval_z(simplex[i])

    order = np.argsort(fvals, kind="stable")
    simplex = [simplex[i] for i in order]
    fvals = fvals[order]
    spread = _spread(fvals)
    return NMResult(x=to_bounded(simplex[0], lo, hi), fun=float(fvals[0]),
                    nit=nit, nfev=nfev, converged=bool(spread <= ftol),
                    spread=float(spread), best_trace=trace)


def _spread(fvals: np.ndarray) -> float:
    finite = fvals[np.isfinite(fvals)]
    if len(finite) == 0:
        return np.inf
    if len(finite) < len(fvals):
        return np.inf
    return float(np.max(fvals) - np.min(fvals))
