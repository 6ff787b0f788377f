"""Replicate-generate-fit-summarize harness for the precision parameter.

Each (theta, u0, n) cell simulates R pure chaotic samples and re-estimates
nu on each; the summary reports the mean estimate, its standard deviation
and the mean absolute percentage error, one row per cell.

Reproducibility: every replicate derives an independent stream from
(master seed, cell index, replicate index) through a hash-mixed seed
sequence feeding a counter-based generator, so results do not depend on
execution order and parallel runs match serial ones bit for bit.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import shapiro

from betarc import betadist
from betarc.dynamics import MapFamily, MapSpec, parse_family
from betarc.errors import DataError
from betarc.estimation import Bounds, FitOptions, fit
from betarc.model import ModelSpec, ParamVector, SeriesSample, orbit_values

#: offsets used by the published simulation design
TABLE1_U0S = (0.2 + math.pi / 100, 0.5 + math.pi / 100, 0.8 + math.pi / 100)


@dataclass(frozen=True)
class MCConfig:
    family: MapFamily
    thetas: tuple[tuple[float, ...], ...]
    u0s: tuple[float, ...]
    ns: tuple[int, ...]
    nu_true: float
    replicates: int
    master_seed: int = 0
    estimate: tuple[str, ...] = ("nu",)

    def __post_init__(self):
        object.__setattr__(self, "family", parse_family(self.family))
        object.__setattr__(self, "thetas", tuple(tuple(float(v) for v in th)
                                                 for th in self.thetas))
        object.__setattr__(self, "u0s", tuple(float(u) for u in self.u0s))
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(not 0.0 < u < 1.0 for u in self.u0s):
            raise ValueError("every u0 must lie in (0, 1)")
        if any(n < 10 for n in self.ns):
            raise ValueError("every sample size must be >= 10")
        if self.nu_true <= 0.0:
            raise ValueError("nu_true must be positive")

    @property
    def cells(self) -> list[tuple[tuple[float, ...], float, int]]:
        """(theta, u0, n) triples in row-major design order."""
        return [(th, u0, n) for th in self.thetas for u0 in self.u0s for n in self.ns]


def table1_preset(replicates: int = 200, master_seed: int = 0) -> MCConfig:
    """The published design: bernoulli k in {3,5,7}, three u0 offsets,
    n in {100, 500, 1000}, nu = 40."""
    return MCConfig(family=MapFamily.BERNOULLI,
                    thetas=((3.0,), (5.0,), (7.0,)),
                    u0s=TABLE1_U0S,
                    ns=(100, 500, 1000),
                    nu_true=40.0,
                    replicates=replicates,
                    master_seed=master_seed)


@dataclass(frozen=True)
class CellSummary:
    theta: tuple[float, ...]
    u0: float
    n: int
    estimates: np.ndarray
    failures: int
    mean: float
    sd: float
    mape: float
    failed: bool  # more than 2% of replicates excluded


@dataclass(frozen=True)
class MCSummary:
    config: MCConfig
    cells: tuple[CellSummary, ...] = field(default_factory=tuple)

    def cell(self, theta0: float, u0: float, n: int) -> CellSummary:
        for c in self.cells:
            if c.theta[0] == theta0 and c.u0 == u0 and c.n == n:
                return c
        raise KeyError(f"no cell ({theta0}, {u0}, {n})")


def replicate_rng(master_seed: int, cell_index: int, replicate: int) -> np.random.Generator:
    """Independent, order-insensitive stream for one replicate."""
    seq = np.random.SeedSequence((int(master_seed), int(cell_index), int(replicate)))
    return np.random.Generator(np.random.Philox(seq))


def run_replicate(cfg: MCConfig, cell_index: int, replicate: int,
                  mu: np.ndarray, spec: ModelSpec, u0: float) -> float:
    """Simulate one sample and re-estimate nu; NaN marks a failed fit."""
    rng = replicate_rng(cfg.master_seed, cell_index, replicate)
    y = betadist.sample_sequence(mu, cfg.nu_true, rng)
    sample = SeriesSample(y=y)
    options = FitOptions(free=cfg.estimate, fixed={"alpha": 0.0}, u0=u0,
                         compute_inference=False)
    try:
        result = fit(spec, sample, options)
    except Exception:
        return math.nan
    return result.gamma_hat.nu if result.converged else math.nan


def run_mc(cfg: MCConfig) -> MCSummary:
    """Run the full design; cells are summarized in design order."""
    cells = []
    jobs = []
    for cell_index, (theta, u0, n) in enumerate(cfg.cells):
        spec = ModelSpec(map=MapSpec(cfg.family, theta))
        gamma = ParamVector(nu=cfg.nu_true, theta=theta, u0=u0)
        mu = orbit_values(spec, gamma, n)
        for r in range(cfg.replicates):
            jobs.append((cfg, cell_index, r, mu, spec, u0))

    threads = _thread_count()
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            flat = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (8 * threads))))
    else:
        flat = [_run_job(job) for job in jobs]

    estimates = np.asarray(flat).reshape(len(cfg.cells), cfg.replicates)
    for cell_index, (theta, u0, n) in enumerate(cfg.cells):
        cells.append(_summarize_cell(cfg, theta, u0, n, estimates[cell_index]))
    return MCSummary(config=cfg, cells=tuple(cells))


def _run_job(job) -> float:
    cfg, cell_index, r, mu, spec, u0 = job
    return run_replicate(cfg, cell_index, r, mu, spec, u0)


def _summarize_cell(cfg: MCConfig, theta, u0: float, n: int,
                    raw: np.ndarray) -> CellSummary:
    ok = raw[np.isfinite(raw)]
    failures = int(len(raw) - len(ok))
    if len(ok) == 0:
        raise DataError(f"cell (theta={theta}, u0={u0}, n={n}): every replicate failed")
    sd = float(np.std(ok, ddof=1)) if len(ok) > 1 else 0.0
    return CellSummary(
        theta=tuple(theta), u0=float(u0), n=int(n), estimates=ok,
        failures=failures,
        mean=float(np.mean(ok)),
        sd=sd,
        mape=float(100.0 * np.mean(np.abs(ok - cfg.nu_true)) / cfg.nu_true),
        failed=failures > 0.02 * len(raw),
    )


def normality_probe(estimates: np.ndarray) -> tuple[float, float]:
    """Shapiro-Wilk statistic and p-value for a vector of estimates."""
    x = np.asarray(estimates, dtype=float)
    if not 3 <= len(x) <= 5000:
        raise ValueError(f"Shapiro-Wilk needs 3..5000 values, got {len(x)}")
    if np.ptp(x) == 0.0:
        raise DataError("estimates are constant; normality test undefined")
    w, p = shapiro(x)
    return float(w), float(p)


def _thread_count() -> int:
    raw = os.environ.get("BETARC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
