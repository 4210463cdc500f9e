"""Whole-toolkit acceptance checks.

Each test prints one ``criterion NN ... PASS/FAIL`` line with the measured
quantity next to its required bound, then asserts the bound.  Criteria 1-5
share a single cached benchmark sweep over the four synthetic families so
the heavy training work runs once per session.
"""

import math
import time

import numpy as np
import pytest

import test_autoencoder as taux
import test_evaluation as tevx
import test_postprocess as tpox
import test_preprocess as tprx
from aecpd.autoencoder import FeatureTrack, TrainConfig, batch_loss, loss_gradient
from aecpd.cli import main
from aecpd.datagen import FAMILIES, gen_null
from aecpd.evaluation import roc_auc
from aecpd.pipeline import RunSettings, run_pipeline
from aecpd.postprocess import (
    DissimilarityCurve,
    dissimilarity,
    height_scores,
    matched_filter,
    prominence,
    quantile,
    smooth_features,
    triangular_kernel,
)
from aecpd.preprocess import dft_magnitude

# family -> (mode, n series, window size, toleration distance, auc floor)
BENCHMARKS = {
    "jm": ("td", 10, 20, 15, 0.80),
    "cc": ("fd", 3, 200, 150, 0.90),
    "gm": ("td", 10, 20, 15, 0.90),
    "sv": ("fd", 10, 20, 15, 0.78),
}


@pytest.fixture(scope="module")
def benchmark():
    """Mean AUC per family for both score variants, plus wall-clock time.

    The naive variant skips every use of the triangular kernel (no feature
    smoothing, no matched filter) and scores local maxima of the resulting
    dissimilarity curve by their raw height.
    """
    out = {}
    for family, (mode, n, window, delta, _) in BENCHMARKS.items():
        gen = FAMILIES[family]
        t0 = time.perf_counter()
        prom, naive = [], []
        for seed in range(n):
            ts = gen(seed)
            settings = RunSettings(window_size=window, mode=mode, seed=seed)
            res = run_pipeline(ts, settings)
            prom.append(roc_auc(res.scores, ts.change_points, delta).auc)
            track = res.td_features if mode == "td" else res.fd_features
            raw = height_scores(dissimilarity(track, window))
            naive.append(roc_auc(raw, ts.change_points, delta).auc)
        out[family] = {
            "prom": prom,
            "naive": naive,
            "elapsed": time.perf_counter() - t0,
        }
    return out


def report(capsys, num, label, ok, detail):
    with capsys.disabled():
        print(f"criterion {num:2d} {label}: "
              f"{'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num} {label}: {detail}"


def bench_line(stats, floor, budget):
    mean = np.mean(stats["prom"])
    ok = mean >= floor and stats["elapsed"] < budget
    detail = (f"mean auc {mean:.4f} vs floor {floor:.2f}, "
              f"per-seed {[round(a, 3) for a in stats['prom']]}, "
              f"{stats['elapsed']:.0f}s < {budget}s")
    return ok, detail


# ------------------------------------------------- 1-4 benchmark accuracy

def test_c01_jumping_mean_td_benchmark(benchmark, capsys):
    ok, detail = bench_line(benchmark["jm"], 0.80, 600)
    report(capsys, 1, "jumping-mean td-a", ok, detail)


def test_c02_changing_coefficients_fd_benchmark(benchmark, capsys):
    ok, detail = bench_line(benchmark["cc"], 0.90, 1800)
    report(capsys, 2, "changing-coefficients fd-a", ok, detail)


def test_c03_gaussian_mixtures_td_benchmark(benchmark, capsys):
    ok, detail = bench_line(benchmark["gm"], 0.90, 1800)
    report(capsys, 3, "gaussian-mixtures td-a", ok, detail)


def test_c04_scaling_variance_fd_benchmark(benchmark, capsys):
    ok, detail = bench_line(benchmark["sv"], 0.78, 1800)
    report(capsys, 4, "scaling-variance fd-a", ok, detail)


# --------------------------------------------- 5 postprocessing ablation

def test_c05_prominence_and_filter_beat_raw_heights(benchmark, capsys):
    """Averaged over families, prominence on the smoothed and filtered curve
    must beat naive height scoring on the unsmoothed curve by a clear
    margin."""
    prom = np.mean([np.mean(benchmark[f]["prom"]) for f in BENCHMARKS])
    naive = np.mean([np.mean(benchmark[f]["naive"]) for f in BENCHMARKS])
    gap = prom - naive
    ok = gap >= 0.15
    report(capsys, 5, "postprocessing ablation", ok,
           f"prominence+filter {prom:.4f} vs raw height {naive:.4f}, "
           f"gap {gap:.4f} >= 0.15")


# --------------------------------------------------- 6 gradient correctness

def test_c06_gradient_matches_finite_differences(capsys):
    rng = np.random.default_rng(2024)
    worst, n_cases = 0.0, 0
    for k in (1, 2, 5):
        for reg in (0.0, 1.0):
            for _ in range(4):
                windows, params, cfg, batch = taux.random_setup(
                    rng, k=k, reg=reg)
                got = loss_gradient(params, windows, batch, cfg)
                want = taux.numeric_gradient(params, windows, batch, cfg)
                for g, w in zip(got, want):
                    scale = max(1.0, np.abs(w).max())
                    worst = max(worst, np.abs(g - w).max() / scale)
                n_cases += 1
    ok = worst < 1e-4 and n_cases >= 20
    report(capsys, 6, "analytic gradient", ok,
           f"max rel err {worst:.2e} < 1e-4 over {n_cases} configurations")


# ------------------------------------------------------ 7 oracle equality

def test_c07_oracle_equivalences(capsys):
    rng = np.random.default_rng(77)

    worst_dft = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 40))
        bins = int(rng.integers(1, n + 1))
        w = rng.normal(0, 3, n)
        slow = tprx.naive_dft_magnitude(w, bins)
        scale = max(np.abs(slow).max(), 1e-30)
        worst_dft = max(worst_dft,
                        np.abs(dft_magnitude(w, bins) - slow).max() / scale)

    prom_exact = 0
    for _ in range(1000):
        v = tpox.random_curve(rng)
        got = prominence(DissimilarityCurve(v, 2)).values
        want = np.zeros_like(v)
        for t in tpox.brute_maxima(v):
            want[t] = tpox.brute_prominence(v, t)
        prom_exact += int(np.array_equal(got, want))

    auc_exact = 0
    for _ in range(100):
        curve, gt, delta = tevx.random_instance(rng)
        got = roc_auc(curve, gt, delta).auc
        auc_exact += int(got == tevx.oracle_auc(curve, gt, delta))

    worst_loss = 0.0
    for _ in range(30):
        windows, params, cfg, batch = taux.random_setup(
            rng, k=1, reg=float(rng.integers(0, 2)))
        got = batch_loss(params, windows, batch, cfg)
        want = taux.direct_loss_k1(params, windows, batch, cfg.reg_weight)
        worst_loss = max(worst_loss, abs(got - want) / max(abs(want), 1e-30))

    ok = (worst_dft < 1e-9 and prom_exact == 1000
          and auc_exact == 100 and worst_loss < 1e-12)
    report(capsys, 7, "oracle equivalences", ok,
           f"dft rel {worst_dft:.1e} < 1e-9; prominence exact "
           f"{prom_exact}/1000; auc exact {auc_exact}/100; "
           f"loss rel {worst_loss:.1e} < 1e-12")


# ------------------------------------------------------ 8 filter properties

def test_c08_kernel_properties(capsys):
    ok = True
    for n in range(2, 501):
        v = triangular_kernel(n)
        if v.size != 2 * n - 1 or abs(math.fsum(v) - 1.0) > 1e-12:
            ok = False
        if not np.array_equal(v, v[::-1]):
            ok = False
        track = FeatureTrack("time", n, np.full((2 * n + 5, 2), 0.625))
        smoothed = smooth_features(track, n)
        if np.abs(smoothed.values - 0.625).max() > 1e-12:
            ok = False
        flat = DissimilarityCurve(np.full(2 * n + 5, 0.25), n)
        if np.abs(matched_filter(flat).values - 0.25).max() > 1e-12:
            ok = False
    report(capsys, 8, "filter properties", ok,
           "kernel sum 1, symmetry and constant preservation for N in 2..500")


# ----------------------------------------------------------- 9 determinism

def test_c09_pipeline_determinism(tmp_path, capsys):
    rng = np.random.default_rng(5)
    y = np.concatenate([rng.normal(0, 1, 150), rng.normal(3, 1, 150)])
    lines = ["ch1"] + [repr(float(v)) for v in y]
    series = tmp_path / "series.csv"
    series.write_text("\n".join(lines) + "\n")

    outputs = []
    for name in ("one", "two"):
        out = tmp_path / name
        code = main(["detect", str(series), "--out", str(out),
                     "--window", "8", "--seed", "3"])
        assert code == 0
        outputs.append((
            (out / "series_detections.csv").read_bytes(),
            (out / "series_curve.csv").read_bytes(),
        ))
    ok = outputs[0] == outputs[1]
    report(capsys, 9, "byte-identical reruns", ok,
           f"detections {len(outputs[0][0])} bytes, "
           f"curve {len(outputs[0][1])} bytes, identical={ok}")


# ------------------------------------------------------ 10 null calibration

def test_c10_null_calibration(capsys):
    """On change-free noise the detector should stay almost silent when
    thresholded at the 95th percentile of the run's dissimilarity scores."""
    counts = []
    for seed in range(10):
        ts = gen_null(seed, length=5000)
        settings = RunSettings(window_size=20, mode="td", seed=seed)
        res = run_pipeline(ts, settings)
        tau = quantile(res.dissim.values, 0.95)
        counts.append(int(np.count_nonzero(res.scores.values > tau)))
    mean = float(np.mean(counts))
    ok = mean <= 2.0
    report(capsys, 10, "null calibration", ok,
           f"mean alarms {mean:.2f} <= 2.0 per series, counts {counts}")
