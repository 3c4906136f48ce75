"""Acceptance criteria; each test prints and records one PASS/FAIL line."""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE, record
from kernel_grids import kernel_grid, local_step, random_pairs
from kdx.data_model import (CensorPolicy, DeflatorSeries, StandardizationConfig,
                            censor_factor, parse_dataset, standardize)
from kdx.density import decompose, moments, tail_probs
from kdx.inference import bootstrap_criticals
from kdx.kernels import FAMILIES, KernelSpec, kernel_pdf, weibull_ratio, weibull_shape
from kdx.regression import DesignMatrix, pinball_loss, quantile_reg
from kdx.special import chi2_sf, gamma_fn, kolmogorov_sf
from kdx.synthetic import null_dataset, records_to_csv, synthetic_dataset, synthetic_records

PRESETS = ("gumbel-weibull", "gumbel-knotted", "normal-knotted", "normal", "johnson-su")
FACTORS = ("period", "prtp", "author")


def report(number, ok, detail):
    line = f"Criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE.append(line)
    return ok


def test_criterion_1_decomposition_identity():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    sizes = []
    for i in range(50):
        ds = synthetic_dataset(int(rng.integers(3, 60)), rng=int(rng.integers(2**31)))
        ds = ds.take(np.arange(min(len(ds), 500))).reweighted(
            ("none", "paper", "author", "quality")[i % 4])
        sizes.append(len(ds))
        dec = decompose(ds, FACTORS[i % 3], PRESETS[i % 5], ("sd", "silverman")[i % 2])
        total = np.sum([c.curve.values for c in dec.components], axis=0)
        worst = max(worst, float(np.max(np.abs(dec.composite.values - total))))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-12 and elapsed < 10 and max(sizes) <= 500
    assert report(1, ok, f"max deviation {worst:.2e}, n <= {max(sizes)}, {elapsed:.1f} s")


def test_criterion_2_kernel_normalization_and_mode():
    rng = np.random.default_rng(77)
    start = time.perf_counter()
    worst_mass, misplaced = 0.0, 0
    for family in FAMILIES:
        for center, h in random_pairs(family, rng, 100):
            x = kernel_grid(family, center, h, n=20_001)
            f = kernel_pdf(KernelSpec(family, h), center, x)
            worst_mass = max(worst_mass, abs(float(np.trapezoid(f, x)) - 1.0))
            i = int(np.argmax(f))
            misplaced += abs(x[i] - center) > local_step(x, i)
    elapsed = time.perf_counter() - start
    ok = worst_mass < 1e-6 and misplaced == 0 and elapsed < 5
    assert report(2, ok, f"max |mass - 1| {worst_mass:.2e}, argmax misses {misplaced}/"
                         f"{100 * len(FAMILIES)}, {elapsed:.1f} s")


def test_criterion_3_weibull_solver():
    ratios = np.geomspace(0.05, 50.0, 400)
    kappa, clamped = weibull_shape(ratios)
    residual = float(np.max(np.abs(weibull_ratio(kappa) - ratios)))
    # mode/sd at shape 2 from Gamma(1.5) = sqrt(pi)/2
    spot_ratio = math.sqrt(0.5) / math.sqrt(1 - math.pi / 4)
    spot, _ = weibull_shape(1.5264)
    ok = residual < 1e-10 and not clamped.any() and abs(spot - 2.0) < 1e-3
    ok = ok and abs(spot_ratio - 1.5264) < 1e-4
    assert report(3, ok, f"round-trip residual {residual:.1e}, shape at 1.5264 = {spot:.5f}")


def test_criterion_4_special_functions():
    g = gamma_fn(0.5)
    c = chi2_sf(11.82, 20)
    k = kolmogorov_sf(1.3581)
    ok = abs(g - math.sqrt(math.pi)) < 1e-10 and abs(c - 0.92) < 0.005 and abs(k - 0.05) < 0.002
    assert report(4, ok, f"gamma(0.5) err {abs(g - math.sqrt(math.pi)):.1e}, "
                         f"chi2_sf(11.82, 20) = {c:.4f}, kolmogorov_sf(1.3581) = {k:.4f}")


def test_criterion_5_pearson_null_calibration():
    start = time.perf_counter()
    rejections, pvalues, below10 = 0, [], 0
    trials = 400
    for trial in range(trials):
        ds = null_dataset(50, rng=1000 + trial).reweighted("none")
        res = bootstrap_criticals(ds, "period", B=199, seed=trial, kernel="normal",
                                  bandwidth="silverman")
        rejections += res.statistic > res.bootstrap_criticals[0.05]
        below10 += res.statistic <= res.bootstrap_criticals[0.10]
        pvalues.append(res.bootstrap_p)
    elapsed = time.perf_counter() - start
    rate = rejections / trials
    p = np.sort(pvalues)
    uniform_gap = float(np.max(np.abs(p - (np.arange(trials) + 0.5) / trials)))
    ok = 0.03 <= rate <= 0.07 and elapsed < 120
    assert report(5, ok, f"rejection rate {rate:.3f}, 10% acceptance {below10 / trials:.3f}, "
                         f"p-value KS gap {uniform_gap:.3f}, {elapsed:.0f} s")


def test_criterion_6_standardization():
    cfg = StandardizationConfig(deflator=DeflatorSeries(fallback_rate=0.0))
    mult = standardize(record(scc_reported=1.0, dollar_year=2010, emission_year=2000), cfg)
    policy = CensorPolicy()
    cens = [censor_factor(v, policy) for v in (1141.0, 7609.0, 4375.0)]
    ok = abs(mult - 1.022 ** 10) < 1e-12 and cens == [1.0, 0.0, 0.5]
    assert report(6, ok, f"multiplier err {abs(mult - 1.022 ** 10):.1e}, censor {cens}")


def _instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 120))
    x = rng.normal(size=n)
    y = 2.0 - 0.5 * x + rng.standard_t(3, size=n)
    X = np.column_stack([np.ones(n), x])
    return DesignMatrix(y, X, rng.random(n) + 0.05, ("const", "x1")), float(rng.uniform(0.1, 0.9))


def test_criterion_7_quantile_regression_oracle():
    beaten = 0
    for seed in range(20):
        d, tau = _instance(500 + seed)
        beta = quantile_reg(d, tau, B=0).coefficients
        loss = pinball_loss(d.y, d.X, d.weights, beta, tau)
        # exhaustive search on a 61 x 61 lattice centred on the OLS fit
        ols = np.linalg.lstsq(d.X, d.y, rcond=None)[0]
        a, b = np.meshgrid(ols[0] + np.linspace(-3, 3, 61), ols[1] + np.linspace(-3, 3, 61))
        grid = np.column_stack([a.ravel(), b.ravel()])
        resid = d.y[None, :] - grid @ d.X.T
        losses = np.sum(d.weights * resid * (tau - (resid < 0)), axis=1)
        beaten += loss > losses.min() + 1e-12
    y = np.random.default_rng(9).normal(size=101)
    med = quantile_reg(DesignMatrix(y, np.ones((101, 1)), np.ones(101), ("const",)),
                       0.5, B=0).coefficients[0]
    ok = beaten == 0 and med == np.median(y)
    assert report(7, ok, f"grid oracle beats fit in {beaten}/20, median exact {med == np.median(y)}")


def test_criterion_8_published_tables():
    path = os.environ.get("KDX_DATASET")
    if not path:
        line = "Criterion 8: SKIP (set KDX_DATASET to the published estimates CSV)"
        print(line)
        ACCEPTANCE.append(line)
        pytest.skip("published dataset not available")
    from kdx import report as tables

    start = time.perf_counter()
    deflator = os.environ.get("KDX_DEFLATOR")
    ds = parse_dataset(Path(path).read_text(encoding="utf-8"),
                       Path(deflator).read_text(encoding="utf-8") if deflator else None)
    ds = ds.reweighted("quality")
    checks = {}
    km, ks = moments(decompose(ds, "prtp").composite)
    checks["mean 509"] = abs(km / 509 - 1) <= 0.10
    checks["sd 560"] = abs(ks / 560 - 1) <= 0.10
    sub = tables.filter_dataset(ds, [("prtp", "3.0")], ds.scheme, ds.policy)
    dec3 = decompose(sub, "period")
    cell = moments(dec3.component("2018-2021").curve)[0]
    checks["3% recent 146"] = abs(cell / 146 - 1) <= 0.15
    normal = decompose(ds, "period", "normal", "silverman").composite
    below, _ = tail_probs(normal)
    checks["P(<0) 0.1882"] = abs(below - 0.1882) <= 0.01
    variants, _ = tables.table_kernel_variants(ds)
    mise_row = [r for r in variants.splitlines() if r.startswith("MISE")][0].split(",")[1:-1]
    mise = [float(v) for v in mise_row]
    checks["MISE smallest"] = mise[0] == min(mise)
    res = bootstrap_criticals(ds, "period", B=1000, seed=0)
    checks["statistic 11.82"] = abs(res.statistic / 11.82 - 1) <= 0.15
    for level, target in zip((0.10, 0.05, 0.01), (5.83, 6.86, 9.51)):
        checks[f"crit {target}"] = abs(res.bootstrap_criticals[level] / target - 1) <= 0.20
    elapsed = time.perf_counter() - start
    checks["runtime"] = elapsed < 300
    failed = [k for k, v in checks.items() if not v]
    detail = (f"mean {km:.0f}, sd {ks:.0f}, cell {cell:.0f}, P(<0) {below:.4f}, "
              f"stat {res.statistic:.2f}, {elapsed:.0f} s; failed: {failed or 'none'}")
    assert report(8, not failed, detail)


def _run_all(cfg, out, env_extra=(), extra=()):
    env = dict(os.environ, **dict(env_extra))
    src = str(Path(__file__).resolve().parents[1] / "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    cmd = [sys.executable, "-m", "kdx.cli", "reproduce-all", "--config", str(cfg),
           "--out", str(out), *extra]
    done = subprocess.run(cmd, env=env, capture_output=True, text=True, timeout=600)
    assert done.returncode == 0, done.stderr
    return {p.name: p.read_bytes() for p in sorted(Path(out).glob("*.csv"))}


def test_criterion_9_determinism(tmp_path):
    (tmp_path / "estimates.csv").write_text(records_to_csv(synthetic_records(15, rng=3)))
    (tmp_path / "run.cfg").write_text(
        "input = estimates.csv\nseed = 5\nbootstrap = 20\nband-bootstrap = 20\n"
        "regression_bootstrap = 5\ngrid_size = 512\n")
    cfg = tmp_path / "run.cfg"
    one = {"OPENBLAS_NUM_THREADS": "1", "OMP_NUM_THREADS": "1", "MKL_NUM_THREADS": "1"}
    four = {"OPENBLAS_NUM_THREADS": "4", "OMP_NUM_THREADS": "4", "MKL_NUM_THREADS": "4"}
    a = _run_all(cfg, tmp_path / "a", one)
    b = _run_all(cfg, tmp_path / "b", one)
    c = _run_all(cfg, tmp_path / "c", four)
    d = _run_all(cfg, tmp_path / "d", one, ["--workers", "2"])
    differing = sorted({name for other in (b, c, d) for name in set(a) | set(other)
                        if a.get(name) != other.get(name)})
    ok = len(a) > 0 and not differing
    assert report(9, ok, f"{len(a)} CSVs identical across 2 runs, 1 vs 4 threads and 2 workers"
                  if ok else f"differing: {differing}")
