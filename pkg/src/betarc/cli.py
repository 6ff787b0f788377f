"""Command line interface.

Subcommands: ``simulate`` (generate a series), ``fit`` (estimate a model on
a CSV and emit a JSON run report), ``mc`` (replication study), ``density``
(unconditional density curve).

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
Every command takes ``--seed`` (default 0) and all randomness flows from it,
so identical invocations produce byte-identical outputs.  BETARC_THREADS
caps parallelism where a command supports it.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

import betarc
from betarc import backend, diagnostics, estimation, model, montecarlo, report
from betarc.dynamics import MapFamily, MapSpec, parse_family
from betarc.errors import BetarcError, DataError, NumericalError
from betarc.model import ModelSpec, ParamVector, SeriesSample, parse_link

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BetarcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betarc",
                                     description="betaARC time series models")
    parser.add_argument("--version", action="version", version=betarc.__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a betaARC series to CSV")
    _map_flags(sim)
    sim.add_argument("--nu", type=float, required=True)
    sim.add_argument("--u0", type=float, required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--p", type=int, default=0, help="AR order")
    sim.add_argument("--phi", type=float, nargs="*", default=[])
    sim.add_argument("--alpha", type=float, default=0.0)
    sim.add_argument("--link-g", default="identity")
    sim.add_argument("--link-h", default="identity")
    sim.add_argument("--covariates", help="CSV of covariate columns")
    sim.add_argument("--beta", type=float, nargs="*", default=[])
    sim.add_argument("--out", default="simulated.csv")
    sim.set_defaults(handler=cmd_simulate)

    fit_p = sub.add_parser("fit", help="fit a betaARC model to a CSV")
    fit_p.add_argument("--data", required=True)
    fit_p.add_argument("--map", dest="map_name", required=True)
    fit_p.add_argument("--theta", type=float, nargs="*", default=[],
                       help="map parameter: fixed value for bernoulli, "
                            "optimizer start otherwise")
    fit_p.add_argument("--p", type=int, default=0)
    fit_p.add_argument("--link-g", default="identity")
    fit_p.add_argument("--link-h", default="identity")
    group = fit_p.add_mutually_exclusive_group(required=True)
    group.add_argument("--u0", type=float)
    group.add_argument("--u0-grid", type=int, metavar="N")
    fit_p.add_argument("--holdout", type=int, default=0)
    fit_p.add_argument("--seed", type=int, default=0)
    fit_p.add_argument("--two-stage", action="store_true")
    fit_p.add_argument("--lb-lags", type=int, default=20)
    fit_p.add_argument("--out", default="report.json")
    fit_p.set_defaults(handler=cmd_fit)

    mc = sub.add_parser("mc", help="Monte Carlo replication study")
    src = mc.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="MCConfig as JSON")
    src.add_argument("--preset", choices=["table1"])
    mc.add_argument("--replicates", type=int)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--out-dir", default="mc_out")
    mc.set_defaults(handler=cmd_mc)

    den = sub.add_parser("density", help="unconditional density curve to CSV")
    _map_flags(den)
    den.add_argument("--nu", type=float, required=True)
    den.add_argument("--u0", type=float, required=True)
    den.add_argument("--method", choices=["quadrature", "orbit"], default="orbit")
    den.add_argument("--grid", type=int, default=101, help="number of y points")
    den.add_argument("--n", type=int, default=10 ** 6, help="orbit length for orbit method")
    den.add_argument("--sample-size", type=int, default=0,
                     help="also emit a histogram of a simulated sample this long")
    den.add_argument("--seed", type=int, default=0)
    den.add_argument("--out", default="density",
                     help="output prefix: <out>_density.csv, <out>_sample.csv")
    den.set_defaults(handler=cmd_density)
    return parser


def _map_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", dest="map_name", required=True,
                   help="bernoulli | logistic | pwl | mp")
    p.add_argument("--theta", type=float, nargs="+", required=True)


def _check(condition: bool, flag: str, message: str) -> None:
    if not condition:
        raise _UsageError(f"{flag}: {message}")


class _UsageError(Exception):
    pass


def _run_guarded(fn, args) -> int:
    try:
        return fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    return _run_guarded(_cmd_simulate, args)


def _cmd_simulate(args) -> int:
    _check(args.n >= 1, "--n", "must be >= 1")
    _check(args.nu > 0, "--nu", "must be positive")
    _check(0.0 < args.u0 < 1.0, "--u0", "must lie in (0, 1)")
    _check(args.p == len(args.phi), "--phi", f"expected {args.p} values for --p {args.p}")
    try:
        m = MapSpec(parse_family(args.map_name), tuple(args.theta))
        g = parse_link(args.link_g)
        h = parse_link(args.link_h)
    except ValueError as exc:
        raise _UsageError(f"--map/--theta/--link: {exc}") from None

    X = None
    if args.covariates:
        X, _ = _read_matrix_csv(args.covariates)
        if X.shape[0] != args.n:
            raise DataError(f"covariates file has {X.shape[0]} rows, --n is {args.n}")
    l = 0 if X is None else X.shape[1]
    _check(len(args.beta) == l, "--beta", f"expected {l} values")

    spec = ModelSpec(map=m, g=g, h=h, p=args.p, n_covariates=l)
    gamma = ParamVector(nu=args.nu, alpha=args.alpha, beta=tuple(args.beta),
                        phi=tuple(args.phi), theta=m.theta, u0=args.u0)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    sample = model.simulate(spec, gamma, args.n, rng, X=X)
    mu = model.conditional_means(spec, gamma, sample)

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = ["y", "mu"] + [f"x{i + 1}" for i in range(l)]
        w.writerow(header)
        for t in range(args.n):
            row = [repr(float(sample.y[t])), repr(float(mu[t]))]
            if l:
                row += [repr(float(v)) for v in sample.X[t]]
            w.writerow(row)
    print(f"wrote {args.n} rows to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit


def cmd_fit(args) -> int:
    return _run_guarded(_cmd_fit, args)


def _cmd_fit(args) -> int:
    t_start = time.perf_counter()
    _check(args.holdout >= 0, "--holdout", "must be >= 0")
    _check(args.lb_lags >= 1, "--lb-lags", "must be >= 1")
    if args.u0 is not None:
        _check(0.0 < args.u0 < 1.0, "--u0", "must lie in (0, 1)")
    if args.u0_grid is not None:
        _check(args.u0_grid >= 1, "--u0-grid", "must be >= 1")
    family = _parse_or_usage("--map", parse_family, args.map_name)
    g = _parse_or_usage("--link-g", parse_link, args.link_g)
    h = _parse_or_usage("--link-h", parse_link, args.link_h)

    full = read_series_csv(args.data)
    if args.holdout >= len(full):
        raise DataError(f"holdout {args.holdout} leaves no data to fit (n={len(full)})")
    sample = full.head(len(full) - args.holdout) if args.holdout else full
    l = 0 if sample.X is None else sample.X.shape[1]

    if family is MapFamily.BERNOULLI:
        _check(len(args.theta) == 1, "--theta", "bernoulli needs the integer k")
        m = MapSpec(family, tuple(args.theta))
    else:
        placeholder = {MapFamily.LOGISTIC: 2.0, MapFamily.PIECEWISE_LINEAR: 0.5,
                       MapFamily.MANNEVILLE_POMEAU: 1.0}[family]
        m = MapSpec(family, tuple(args.theta) if args.theta else (placeholder,))
    spec = ModelSpec(map=m, g=g, h=h, p=args.p, n_covariates=l)

    options = estimation.FitOptions(u0=args.u0, two_stage=args.two_stage,
                                    start={"theta": m.theta} if args.theta else {})
    if args.u0_grid is not None:
        result = estimation.fit_u0_grid(spec, sample, options, grid_size=args.u0_grid)
    else:
        result = estimation.fit(spec, sample, options)

    lb = diagnostics.ljung_box(result.residuals, m=args.lb_lags)
    acc_in = diagnostics.accuracy(sample.y, result.fitted, horizon="in-sample")
    doc = _fit_report(args, spec, result, lb, acc_in)

    if args.holdout > 0:
        X_future = None if full.X is None else full.X[len(sample):]
        preds = diagnostics.forecast(spec, result, sample, args.holdout, X_future)
        actual = full.y[len(sample):]
        acc_out = diagnostics.accuracy(actual, preds, horizon="out-of-sample")
        doc["accuracy"]["out_of_sample"] = _accuracy_dict(acc_out)
        doc["forecasts"] = [float(v) for v in preds]
        doc["holdout_actual"] = [float(v) for v in actual]

    elapsed = time.perf_counter() - t_start
    # reports are byte-reproducible by default; opt in to wall-clock timing
    if os.environ.get("BETARC_TIMING") == "1":
        doc["timing_seconds"] = elapsed
    report.validate(doc)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.emit(doc))
    print(f"elapsed {elapsed:.2f}s", file=sys.stderr)
    print(f"loglik {result.loglik:.4f}  AIC {result.aic:.2f}  BIC {result.bic:.2f}"
          f"  -> {args.out}")
    return EXIT_OK


def _parse_or_usage(flag: str, fn, value):
    try:
        return fn(value)
    except ValueError as exc:
        raise _UsageError(f"{flag}: {exc}") from None


def _fit_report(args, spec: ModelSpec, result, lb, acc_in) -> dict:
    estimates = []
    for i, name in enumerate(result.labels):
        estimates.append({
            "name": name,
            "value": float(result.estimate(name)),
            "se": _num_or_none(result.se[i]),
            "p_value": _num_or_none(result.p_values[i]),
        })
    return {
        "version": betarc.__version__,
        "backend": backend.BACKEND,
        "seed": args.seed,
        "model": {
            "family": spec.map.family.value,
            "link_g": spec.g.kind.value,
            "link_h": spec.h.kind.value,
            "p": spec.p,
            "n_covariates": spec.n_covariates,
        },
        "estimates": estimates,
        "u0": float(result.gamma_hat.u0),
        "loglik": float(result.loglik),
        "aic": float(result.aic),
        "bic": float(result.bic),
        "converged": bool(result.converged),
        "n_obs": int(result.n_obs),
        "k_params": int(result.k_params),
        "ljung_box": {
            "statistic": float(lb.statistic),
            "lags": int(lb.lags),
            "dof": int(lb.dof),
            "p_value": float(lb.p_value),
        },
        "accuracy": {"in_sample": _accuracy_dict(acc_in)},
        "u0_grid_trace": (None if result.u0_grid_trace is None
                          else [[u, ll] for u, ll in result.u0_grid_trace]),
        "timing_seconds": 0.0,
    }


def _accuracy_dict(acc) -> dict:
    return {"mape": acc.mape, "mpe": acc.mpe, "me": acc.me,
            "mae": acc.mae, "rmse": acc.rmse, "horizon": acc.horizon}


def _num_or_none(x: float):
    return float(x) if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# mc


def cmd_mc(args) -> int:
    return _run_guarded(_cmd_mc, args)


def _cmd_mc(args) -> int:
    if args.preset == "table1":
        cfg = montecarlo.table1_preset(replicates=args.replicates or 200,
                                       master_seed=args.seed)
    else:
        cfg = _read_mc_config(args.config, args)
    summary = montecarlo.run_mc(cfg)

    os.makedirs(args.out_dir, exist_ok=True)
    doc = {
        "family": cfg.family.value,
        "nu_true": cfg.nu_true,
        "replicates": cfg.replicates,
        "master_seed": cfg.master_seed,
        "cells": [
            {"theta": list(c.theta), "u0": c.u0, "n": c.n,
             "nu_bar": c.mean, "sd": c.sd, "mape": c.mape,
             "failures": c.failures, "failed": c.failed}
            for c in summary.cells
        ],
    }
    summary_path = os.path.join(args.out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for i, c in enumerate(summary.cells):
        path = os.path.join(args.out_dir, f"cell{i:02d}_replicates.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", "nu_hat"])
            for r, v in enumerate(c.estimates):
                w.writerow([r, repr(float(v))])
    print(f"wrote {len(summary.cells)} cells to {args.out_dir}")
    return EXIT_OK


def _read_mc_config(path: str, args) -> montecarlo.MCConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read MC config {path}: {exc}") from None
    try:
        cfg = montecarlo.MCConfig(
            family=raw["family"],
            thetas=tuple(tuple(np.atleast_1d(t)) for t in raw["thetas"]),
            u0s=tuple(raw["u0s"]),
            ns=tuple(raw["ns"]),
            nu_true=float(raw["nu_true"]),
            replicates=int(args.replicates or raw.get("replicates", 200)),
            master_seed=int(raw.get("master_seed", args.seed)),
            estimate=tuple(raw.get("estimate", ("nu",))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"invalid MC config: {exc}") from None
    return cfg


# ---------------------------------------------------------------------------
# density


def cmd_density(args) -> int:
    return _run_guarded(_cmd_density, args)


def _cmd_density(args) -> int:
    _check(args.grid >= 1, "--grid", "must be >= 1")
    _check(args.nu > 0, "--nu", "must be positive")
    _check(0.0 < args.u0 < 1.0, "--u0", "must lie in (0, 1)")
    try:
        m = MapSpec(parse_family(args.map_name), tuple(args.theta))
    except ValueError as exc:
        raise _UsageError(f"--map/--theta: {exc}") from None
    spec = ModelSpec(map=m)
    gamma = ParamVector(nu=args.nu, theta=m.theta, u0=args.u0)

    ys = np.linspace(0.0, 1.0, args.grid + 2)[1:-1] if args.grid > 1 else np.array([0.5])
    try:
        fy = model.unconditional_density(spec, gamma, ys, method=args.method, n=args.n)
    except ValueError as exc:
        raise NumericalError(str(exc)) from None

    density_path = f"{args.out}_density.csv"
    with open(density_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "f"])
        for yv, f in zip(ys, np.atleast_1d(fy)):
            w.writerow([repr(float(yv)), repr(float(f))])
    written = [density_path]

    if args.sample_size > 0:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
        sample = model.simulate(spec, gamma, args.sample_size, rng)
        counts, edges = np.histogram(sample.y, bins=30, range=(0.0, 1.0), density=True)
        sample_path = f"{args.out}_sample.csv"
        with open(sample_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "density"])
            for i, c in enumerate(counts):
                w.writerow([repr(float(edges[i])), repr(float(edges[i + 1])), repr(float(c))])
        written.append(sample_path)
    print("wrote " + ", ".join(written))
    return EXIT_OK


# ---------------------------------------------------------------------------
# CSV ingestion


def read_series_csv(path: str) -> SeriesSample:
    """Load a data file: header row, required column ``y`` strictly in (0,1),
    an optional ``date`` column, every other column a numeric covariate."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        names = [c.strip() for c in header]
        lower = [c.lower() for c in names]
        if "y" not in lower:
            raise DataError(f"{path} has no 'y' column (header: {names})")
        y_idx = lower.index("y")
        date_idx = lower.index("date") if "date" in lower else None
        cov_idx = [i for i in range(len(names)) if i not in (y_idx, date_idx)]

        ys: list[float] = []
        rows: list[list[float]] = []
        stamps: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(names):
                raise DataError(f"{path}:{lineno}: expected {len(names)} fields, "
                                f"got {len(row)}")
            try:
                yv = float(row[y_idx])
            except ValueError:
                raise DataError(f"{path}:{lineno}: y value {row[y_idx]!r} "
                                "is not a number") from None
            if not 0.0 < yv < 1.0:
                raise DataError(f"{path}:{lineno}: y={yv} outside (0,1)")
            ys.append(yv)
            if date_idx is not None:
                stamps.append(row[date_idx])
            if cov_idx:
                try:
                    rows.append([float(row[i]) for i in cov_idx])
                except ValueError:
                    raise DataError(f"{path}:{lineno}: non-numeric covariate") from None
    if not ys:
        raise DataError(f"{path} has no data rows")
    X = np.asarray(rows) if cov_idx else None
    return SeriesSample(y=np.asarray(ys), X=X,
                        timestamps=tuple(stamps) if stamps else None)


def _read_matrix_csv(path: str) -> tuple[np.ndarray, list[str]]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path} is empty")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise DataError(f"{path} has no data rows")
    return np.asarray(rows), [c.strip() for c in header]


if __name__ == "__main__":
    sys.exit(main())
