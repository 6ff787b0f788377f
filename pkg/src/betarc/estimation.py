"""Partial maximum likelihood estimation for betaARC models.

The log-likelihood is the sum over t of the conditional beta log-density at
the recursion's mu_t.  It is maximized by bounded Nelder-Mead (sin^2
reparameterization, see :mod:`betarc.neldermead`) with a multistart over the
precision starts nu in {5, 50, 100}; an optional quasi-Newton refinement
stage (L-BFGS-B with central finite differences) runs before Nelder-Mead
when ``two_stage`` is set.

The starting point u0 of the chaotic term is never a regular coordinate: it
is either fixed by the caller or grid-searched (``fit_u0_grid``), and it is
excluded from the parameter count k used for AIC/BIC and from Wald tests.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize as scipy_minimize
from scipy.stats import norm

from betarc import neldermead
from betarc.betadist import log_density_sum
from betarc.dynamics import MapFamily
from betarc.errors import DataError, NumericalError
from betarc.model import ModelSpec, ParamVector, SeriesSample, conditional_means

U0_GRID_LO = math.pi / 1000.0
U0_GRID_HI = 1.0 - math.pi / 1000.0

_THETA_BOUNDS = {
    MapFamily.LOGISTIC: (1e-6, 4.0 - 1e-6),
    MapFamily.PIECEWISE_LINEAR: (1e-6, 1.0 - 1e-6),
    # the MP exponent is unbounded above in principle; estimation caps it
    # at 2 (the interesting regime, and s >= 1 has no probability ACIM)
    MapFamily.MANNEVILLE_POMEAU: (1e-6, 2.0),
}


@dataclass(frozen=True)
class Bounds:
    """Box constraints for the optimized coordinates."""

    nu: tuple[float, float] = (1e-3, 1e4)
    coef: tuple[float, float] = (-50.0, 50.0)  # alpha, beta, phi
    theta: tuple[float, float] | None = None   # None -> family default
    u0: tuple[float, float] = (U0_GRID_LO, U0_GRID_HI)

    def theta_bounds(self, family: MapFamily) -> tuple[float, float]:
        if self.theta is not None:
            return self.theta
        try:
            return _THETA_BOUNDS[family]
        except KeyError:
            raise ValueError(f"{family.value} map parameter cannot be optimized; "
                             "fix it instead") from None


@dataclass(frozen=True)
class FitOptions:
    """Controls for `fit`.

    free: parameter groups to estimate, among "nu", "alpha", "beta", "phi",
        "theta"; None selects every group the spec supports (theta excluded
        for bernoulli maps, whose parameter is an integer).
    fixed: values for groups held fixed; groups absent here default to
        alpha=0, beta=0, phi=0, theta=spec.map.theta.
    u0: the (known or grid-supplied) orbit start; required by `fit`.
    """

    free: tuple[str, ...] | None = None
    fixed: dict = field(default_factory=dict)
    u0: float | None = None
    nu_starts: tuple[float, ...] = (5.0, 50.0, 100.0)
    start: dict = field(default_factory=dict)
    two_stage: bool = False
    max_iter: int = 5000
    ftol: float = 1e-8
    bounds: Bounds = field(default_factory=Bounds)
    compute_inference: bool = True


@dataclass(frozen=True)
class FitResult:
    gamma_hat: ParamVector
    loglik: float
    aic: float
    bic: float
    labels: tuple[str, ...]
    se: np.ndarray
    p_values: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    converged: bool
    n_obs: int
    k_params: int
    start_logliks: tuple[float, ...] = ()
    u0_grid_trace: tuple[tuple[float, float], ...] | None = None
    hessian_ok: bool = True

    def estimate(self, label: str) -> float:
        """Point estimate for a flat coordinate label such as "nu" or "phi1"."""
        return _flatten_gamma(self.gamma_hat, self.labels)[self.labels.index(label)]


def loglik(spec: ModelSpec, gamma: ParamVector, sample: SeriesSample) -> float:
    """Sum of conditional beta log-densities; -inf when non-finite."""
    mu = conditional_means(spec, gamma, sample)
    value = log_density_sum(sample.y, mu, gamma.nu)
    return value if math.isfinite(value) else -math.inf


def information_criteria(loglik_value: float, k: int, n: int) -> tuple[float, float]:
    """AIC = -2l + 2k and BIC = -2l + k log n.

    k counts the optimized parameters excluding u0 (the convention that
    reproduces the reference AIC/BIC arithmetic with k = 4 for a
    betaARC(1) fit of alpha, phi1, theta, nu).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n <= k:
        raise ValueError(f"need n > k, got n={n}, k={k}")
    aic = -2.0 * loglik_value + 2.0 * k
    bic = -2.0 * loglik_value + k * math.log(n)
    return aic, bic


# ---------------------------------------------------------------------------
# coordinate packing


class _Problem:
    """Maps between the flat free-coordinate vector and ParamVector."""

    def __init__(self, spec: ModelSpec, sample: SeriesSample, options: FitOptions):
        self.spec = spec
        self.options = options
        free = options.free
        if free is None:
            free = ["nu", "alpha"]
            if spec.n_covariates > 0:
                free.append("beta")
            if spec.p > 0:
                free.append("phi")
            if spec.map.family is not MapFamily.BERNOULLI:
                free.append("theta")
        self.free_groups = tuple(free)
        known = {"nu", "alpha", "beta", "phi", "theta"}
        bad = set(self.free_groups) - known
        if bad:
            raise ValueError(f"unknown parameter groups: {sorted(bad)}")
        if options.u0 is None:
            raise ValueError("FitOptions.u0 must be set (or use fit_u0_grid)")
        self.u0 = float(options.u0)

        fx = options.fixed
        self.fixed_alpha = float(fx.get("alpha", 0.0))
        self.fixed_beta = tuple(np.atleast_1d(fx.get("beta", np.zeros(spec.n_covariates))).astype(float))
        self.fixed_phi = tuple(np.atleast_1d(fx.get("phi", np.zeros(spec.p))).astype(float))
        self.fixed_theta = tuple(np.atleast_1d(fx.get("theta", spec.map.theta)).astype(float))
        self.fixed_nu = fx.get("nu")
        if "nu" not in self.free_groups and self.fixed_nu is None:
            raise ValueError("nu must be free or given in options.fixed")

        b = options.bounds
        labels: list[str] = []
        lo: list[float] = []
        hi: list[float] = []
        for group in ("nu", "alpha", "beta", "phi", "theta"):
            if group not in self.free_groups:
                continue
            if group == "nu":
                labels.append("nu")
                lo.append(b.nu[0])
                hi.append(b.nu[1])
            elif group == "alpha":
                labels.append("alpha")
                lo.append(b.coef[0])
                hi.append(b.coef[1])
            elif group == "beta":
                for i in range(spec.n_covariates):
                    labels.append(f"beta{i + 1}")
                    lo.append(b.coef[0])
                    hi.append(b.coef[1])
            elif group == "phi":
                for i in range(spec.p):
                    labels.append(f"phi{i + 1}")
                    lo.append(b.coef[0])
                    hi.append(b.coef[1])
            else:
                tb = b.theta_bounds(spec.map.family)
                labels.append("theta1")
                lo.append(tb[0])
                hi.append(tb[1])
        self.labels = tuple(labels)
        self.lo = np.asarray(lo)
        self.hi = np.asarray(hi)
        self.nu_only = self.labels == ("nu",)

        # data-driven default starts; nu is filled per multistart run
        g_ybar = float(np.clip(spec.g.apply(float(np.mean(sample.y))),
                               b.coef[0] + 1e-6, b.coef[1] - 1e-6))
        start_map = {"alpha": g_ybar}
        if "theta" in self.free_groups:
            tb = b.theta_bounds(spec.map.family)
            start_map["theta"] = 0.5 * (tb[0] + tb[1])
        start_map.update(options.start)
        self._start_map = start_map

    def start_vector(self, nu_start: float) -> np.ndarray:
        x = []
        sm = self._start_map
        for lbl in self.labels:
            if lbl == "nu":
                x.append(nu_start)
            elif lbl == "alpha":
                x.append(sm["alpha"])
            elif lbl.startswith("beta"):
                vec = np.atleast_1d(sm.get("beta", np.zeros(self.spec.n_covariates)))
                x.append(float(vec[int(lbl[4:]) - 1]))
            elif lbl.startswith("phi"):
                vec = np.atleast_1d(sm.get("phi", np.zeros(self.spec.p)))
                x.append(float(vec[int(lbl[3:]) - 1]))
            else:
                x.append(float(np.atleast_1d(sm["theta"])[0]))
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def gamma_at(self, x: np.ndarray) -> ParamVector:
        vals = dict(zip(self.labels, x))
        nu = vals.get("nu", self.fixed_nu)
        alpha = vals.get("alpha", self.fixed_alpha)
        if "beta" in self.free_groups:
            beta = tuple(vals[f"beta{i + 1}"] for i in range(self.spec.n_covariates))
        else:
            beta = self.fixed_beta
        if "phi" in self.free_groups:
            phi = tuple(vals[f"phi{i + 1}"] for i in range(self.spec.p))
        else:
            phi = self.fixed_phi
        theta = (vals["theta1"],) if "theta" in self.free_groups else self.fixed_theta
        return ParamVector(nu=float(nu), alpha=float(alpha), beta=beta, phi=phi,
                           theta=theta, u0=self.u0)


def _flatten_gamma(gamma: ParamVector, labels: tuple[str, ...]) -> np.ndarray:
    out = []
    for lbl in labels:
        if lbl == "nu":
            out.append(gamma.nu)
        elif lbl == "alpha":
            out.append(gamma.alpha)
        elif lbl.startswith("beta"):
            out.append(gamma.beta[int(lbl[4:]) - 1])
        elif lbl.startswith("phi"):
            out.append(gamma.phi[int(lbl[3:]) - 1])
        else:
            out.append(gamma.theta[int(lbl[5:]) - 1])
    return np.asarray(out)


def _make_nll(spec: ModelSpec, sample: SeriesSample, problem: _Problem):
    y = sample.y
    if problem.nu_only:
        mu0 = conditional_means(spec, problem.gamma_at(np.array([1.0])), sample)

        def nll(x: np.ndarray) -> float:
            value = log_density_sum(y, mu0, float(x[0]))
            return -value if math.isfinite(value) else math.inf

        return nll

    def nll(x: np.ndarray) -> float:
        gamma = problem.gamma_at(x)
        try:
            mu = conditional_means(spec, gamma, sample)
        except (ValueError, DataError):
            return math.inf
        value = log_density_sum(y, mu, gamma.nu)
        return -value if math.isfinite(value) else math.inf

    return nll


# ---------------------------------------------------------------------------
# fitting


def fit(spec: ModelSpec, sample: SeriesSample, options: FitOptions) -> FitResult:
    """Maximize the partial likelihood; returns the best multistart terminal.

    Each nu start in ``options.nu_starts`` seeds one optimization run
    (optionally L-BFGS-B-refined first, then bounded Nelder-Mead); the
    returned fit is the run with the highest terminal log-likelihood, so it
    dominates every individual start by construction.
    """
    n = len(sample)
    if n <= spec.p:
        raise DataError(f"need n > p, got n={n}, p={spec.p}")
    problem = _Problem(spec, sample, options)
    nll = _make_nll(spec, sample, problem)

    nu_starts = options.nu_starts if "nu" in problem.free_groups else (float("nan"),)
    if len(nu_starts) == 0:
        raise ValueError("options.nu_starts must not be empty")
    best: neldermead.NMResult | None = None
    start_logliks: list[float] = []
    for nu_start in nu_starts:
        x0 = problem.start_vector(nu_start if not math.isnan(nu_start) else 0.0)
        if options.two_stage:
            x0 = _quasi_newton_stage(nll, x0, problem.lo, problem.hi)
        result = neldermead.minimize_bounded(nll, x0, problem.lo, problem.hi,
                                             ftol=options.ftol,
                                             max_iter=options.max_iter)
        start_logliks.append(-result.fun)
        if best is None or result.fun < best.fun:
            best = result

    gamma_hat = problem.gamma_at(best.x)
    ll = -best.fun
    if not math.isfinite(ll):
        raise NumericalError("likelihood is non-finite at every optimizer terminal")
    k = len(problem.labels)
    aic, bic = information_criteria(ll, k, n)
    fitted = conditional_means(spec, gamma_hat, sample)
    residuals = sample.y - fitted

    if options.compute_inference:
        se, p_values = wald_inference(spec, gamma_hat, sample,
                                      free=problem.free_groups)
        hessian_ok = bool(np.all(np.isfinite(se)))
    else:
        se = np.full(k, np.nan)
        p_values = np.full(k, np.nan)
        hessian_ok = False

    return FitResult(gamma_hat=gamma_hat, loglik=ll, aic=aic, bic=bic,
                     labels=problem.labels, se=se, p_values=p_values,
                     fitted=fitted, residuals=residuals,
                     converged=best.converged, n_obs=n, k_params=k,
                     start_logliks=tuple(start_logliks))


def _quasi_newton_stage(nll, x0: np.ndarray, lo: np.ndarray,
                        hi: np.ndarray) -> np.ndarray:
    # L-BFGS-B chokes on inf, so cap rejected points at a large penalty
    def capped(x):
        v = nll(x)
        return v if v < 1e12 else 1e12

    try:
        res = scipy_minimize(capped, x0, method="L-BFGS-B",
                             bounds=list(zip(lo, hi)), jac="3-point")
        x1 = np.clip(res.x, lo, hi)
        return x1 if capped(x1) <= capped(x0) else x0
    except Exception:
        return x0


def fit_u0_grid(spec: ModelSpec, sample: SeriesSample, options: FitOptions,
                grid_size: int = 900) -> FitResult:
    """Profile the fit over a u0 grid; return the best fit plus the trace.

    The grid is ``grid_size`` equally spaced points spanning
    [pi/1000, 1 - pi/1000].  Ties in log-likelihood resolve to the smallest
    u0.  Grid points are independent, so they can be evaluated in parallel;
    set BETARC_THREADS > 1 to enable a process pool.
    """
    if grid_size < 1:
        raise ValueError(f"grid_size must be >= 1, got {grid_size}")
    grid = np.linspace(U0_GRID_LO, U0_GRID_HI, grid_size)
    scan_options = replace(options, compute_inference=False)
    jobs = [(spec, sample, scan_options, float(u)) for u in grid]

    threads = _thread_count()
    if threads > 1 and grid_size > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            logliks = list(pool.map(_grid_loglik, jobs, chunksize=max(1, grid_size // (4 * threads))))
    else:
        logliks = [_grid_loglik(job) for job in jobs]

    trace = tuple((float(u), float(ll)) for u, ll in zip(grid, logliks))
    best_idx = int(np.argmax(logliks))  # first max -> lowest u0 on ties
    if not math.isfinite(logliks[best_idx]):
        raise NumericalError("every u0 grid point produced a non-finite likelihood")
    best_options = replace(options, u0=float(grid[best_idx]))
    result = fit(spec, sample, best_options)
    return replace(result, u0_grid_trace=trace)


def _grid_loglik(job) -> float:
    spec, sample, options, u0 = job
    try:
        result = fit(spec, sample, replace(options, u0=u0))
        return result.loglik
    except (NumericalError, DataError):
        return -math.inf


def _thread_count() -> int:
    raw = os.environ.get("BETARC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Wald inference


def wald_inference(spec: ModelSpec, gamma_hat: ParamVector, sample: SeriesSample,
                   free: tuple[str, ...] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Standard errors and two-sided z-test p-values from the numerical
    Hessian of -loglik at gamma_hat.

    Central differences with per-coordinate step max(1e-4, 1e-4*|value|).
    u0 and fixed coordinates are excluded.  Coordinates whose variance comes
    out non-finite or non-positive (singular or indefinite Hessian, flat
    directions) get NaN entries.
    """
    options = FitOptions(free=free, u0=gamma_hat.u0,
                         fixed={"nu": gamma_hat.nu, "alpha": gamma_hat.alpha,
                                "beta": gamma_hat.beta, "phi": gamma_hat.phi,
                                "theta": gamma_hat.theta})
    problem = _Problem(spec, sample, options)
    nll = _make_nll(spec, sample, problem)
    x = _flatten_gamma(gamma_hat, problem.labels)
    hessian = _central_hessian(nll, x)
    k = len(x)
    se = np.full(k, np.nan)
    # drop flat or ill-defined directions (all-zero rows, non-finite
    # entries) and invert the remaining block; those coordinates stay NaN
    finite_rows = np.all(np.isfinite(hessian), axis=1)
    scale = np.max(np.abs(hessian[finite_rows])) if np.any(finite_rows) else 0.0
    usable = finite_rows & (np.max(np.abs(hessian), axis=1,
                                   initial=0.0,
                                   where=np.isfinite(hessian)) > 1e-10 * max(1.0, scale))
    keep = np.flatnonzero(usable)
    if len(keep):
        try:
            cov = np.linalg.inv(hessian[np.ix_(keep, keep)])
            diag = np.diag(cov)
            ok = np.isfinite(diag) & (diag > 0.0)
            se[keep[ok]] = np.sqrt(diag[ok])
        except np.linalg.LinAlgError:
            pass
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.abs(x) / se
    p_values = 2.0 * norm.sf(z)
    return se, p_values


def _central_hessian(fn, x: np.ndarray) -> np.ndarray:
    k = len(x)
    h = np.maximum(1e-4, 1e-4 * np.abs(x))
    hess = np.empty((k, k))
    f0 = fn(x)

    def at(*shifts) -> float:
        xs = x.copy()
        for i, s in shifts:
            xs[i] += s
        return fn(xs)

    for i in range(k):
        hess[i, i] = (at((i, h[i])) - 2.0 * f0 + at((i, -h[i]))) / h[i] ** 2
        for j in range(i + 1, k):
            mixed = (at((i, h[i]), (j, h[j])) - at((i, h[i]), (j, -h[j]))
                     - at((i, -h[i]), (j, h[j])) + at((i, -h[i]), (j, -h[j])))
            hess[i, j] = hess[j, i] = mixed / (4.0 * h[i] * h[j])
    return hess
