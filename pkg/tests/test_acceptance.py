"""Acceptance gate: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  The heavyweight schedule runs are shared through module fixtures;
per-cell seeds derive from (seed, curve, D, c, N, rep), so a cell's data is
identical no matter which grid requested it.
"""

import json
import math
import time

import numpy as np
import pytest

import nsim
from nsim.cli import main as cli_main
from nsim.data import Dataset
from nsim.evaluation import decay_slope, run_schedule

SEED = 20260811
N_GRID = (128, 256, 512, 1024, 2048, 4096)
REPS = 10


def _slope_f(result):
    return decay_slope(result.n_values, result.rmse_f_mean)


def _slope_a(result):
    return decay_slope(result.n_values, result.rmse_a_mean)


@pytest.fixture(scope="module")
def line_noise_free():
    start = time.perf_counter()
    results = run_schedule("line", [4, 8, 12], [0.0], N_GRID, REPS, SEED)
    elapsed = time.perf_counter() - start
    return {r.ambient_dim: r for r in results}, elapsed


@pytest.fixture(scope="module")
def line_noisy_d12():
    return run_schedule("line", [12], [0.1], N_GRID, REPS, SEED)[0]


@pytest.fixture(scope="module")
def helix_noise_free_pair():
    nsim_run = run_schedule("helix", [12], [0.0], N_GRID, REPS, SEED)[0]
    knn_run = run_schedule("helix", [12], [0.0], N_GRID, REPS, SEED, method="knn")[0]
    return nsim_run, knn_run


@pytest.fixture(scope="module")
def s_curve_plateau_pair():
    ns = (1024, 4096)
    noisy = run_schedule("s_curve", [12], [0.1], ns, REPS, SEED)[0]
    free = run_schedule("s_curve", [12], [0.0], ns, REPS, SEED)[0]
    return noisy, free


def test_criterion_1_noise_free_function_rate(line_noise_free):
    results, elapsed = line_noise_free
    result = results[4]
    assert not result.skipped
    slope = _slope_f(result)
    assert slope <= -0.80, f"criterion 1: rmse_f slope {slope:.3f} > -0.80"
    assert elapsed < 120.0, f"criterion 1: schedule took {elapsed:.0f}s >= 2 min"
    print(f"\n[criterion 1] PASS noise-free Line D=4 rmse_f slope {slope:.3f} <= -0.80 "
          f"(all-D schedule {elapsed:.1f}s)")


def test_criterion_2_noise_free_tangent_rate(line_noise_free):
    results, _ = line_noise_free
    slope = _slope_a(results[4])
    assert slope <= -0.80, f"criterion 2: rmse_a slope {slope:.3f} > -0.80"
    print(f"\n[criterion 2] PASS noise-free Line D=4 rmse_a slope {slope:.3f} <= -0.80")


def test_criterion_3_dimension_robustness(line_noise_free):
    results, _ = line_noise_free
    slopes = {d: _slope_f(results[d]) for d in (4, 8, 12)}
    for d, slope in slopes.items():
        assert slope <= -0.80, f"criterion 3: D={d} slope {slope:.3f} > -0.80"
    spread = max(slopes.values()) - min(slopes.values())
    assert spread < 0.25, f"criterion 3: slope spread {spread:.3f} >= 0.25"
    text = ", ".join(f"D={d}: {s:.3f}" for d, s in slopes.items())
    print(f"\n[criterion 3] PASS {text}; spread {spread:.3f} < 0.25")


def test_criterion_4_sim_with_noise_rate(line_noisy_d12):
    for cell in line_noisy_d12.cells:
        assert cell.k_used == math.ceil(0.5 * cell.n ** (2 / 3))
    slope = _slope_f(line_noisy_d12)
    assert -0.55 <= slope <= -0.15, f"criterion 4: slope {slope:.3f} outside [-0.55, -0.15]"
    print(f"\n[criterion 4] PASS noisy Line D=12 rmse_f slope {slope:.3f} in [-0.55, -0.15]")


def test_criterion_5_curse_of_dimensionality_contrast(helix_noise_free_pair):
    nsim_run, knn_run = helix_noise_free_pair
    nsim_slope, knn_slope = _slope_f(nsim_run), _slope_f(knn_run)
    gap = knn_slope - nsim_slope
    assert gap >= 0.3, (
        f"criterion 5: kNN slope {knn_slope:.3f} only {gap:.3f} shallower than "
        f"NSIM slope {nsim_slope:.3f}"
    )
    print(f"\n[criterion 5] PASS Helix D=12: NSIM slope {nsim_slope:.3f}, "
          f"kNN slope {knn_slope:.3f}, gap {gap:.3f} >= 0.3")


def test_criterion_6_bias_plateau(s_curve_plateau_pair):
    noisy, free = s_curve_plateau_pair
    noisy_ratio = noisy.rmse_a_mean[1] / noisy.rmse_a_mean[0]
    free_ratio = free.rmse_a_mean[1] / free.rmse_a_mean[0]
    assert noisy_ratio > 0.5, f"criterion 6: noisy rmse_a ratio {noisy_ratio:.3f} <= 0.5"
    assert free_ratio < 0.5, f"criterion 6: noise-free rmse_a ratio {free_ratio:.3f} >= 0.5"
    print(f"\n[criterion 6] PASS S-Curve rmse_a(4096)/rmse_a(1024): noisy {noisy_ratio:.3f} "
          f"> 0.5, noise-free {free_ratio:.3f} < 0.5")


def test_criterion_7_property_suites():
    rng = np.random.default_rng(1)

    # Moore-Penrose identities on covariance-shaped inputs
    for seed in range(3):
        m = nsim.sample_covariance(np.random.default_rng(seed).normal(size=(30, 5)))
        m_dag = nsim.pseudo_inverse(m)
        tol = 1e-8 * max(np.linalg.eigvalsh(m).max(), 1.0)
        assert np.allclose(m @ m_dag @ m, m, atol=tol)
        assert np.allclose(m_dag @ m @ m_dag, m_dag, atol=tol)
        assert np.allclose((m @ m_dag).T, m @ m_dag, atol=tol)
        assert np.allclose((m_dag @ m).T, m_dag @ m, atol=tol)

    # partition disjoint cover and equiblock balance
    responses = rng.uniform(size=97)
    for j_count in (1, 3, 10):
        for part in (
            nsim.dyadic_partition(responses, j_count),
            nsim.equiblock_partition(responses, j_count),
        ):
            joined = sorted(np.concatenate(part.groups).tolist())
            assert joined == list(range(97))
        sizes = [len(g) for g in nsim.equiblock_partition(responses, j_count).groups]
        assert max(sizes) - min(sizes) <= 1

    # eta-monotonicity of the restricted metric
    candidates = rng.normal(size=(30, 3))
    tangents = rng.normal(size=(30, 3))
    tangents /= np.linalg.norm(tangents, axis=1, keepdims=True)
    x = rng.normal(size=3)
    for eta_small, eta_large in ((0.5, 1.0), (1.0, 2.5), (2.5, math.inf)):
        small = nsim.proxy_distances(x, candidates, tangents, eta_small)
        large = nsim.proxy_distances(x, candidates, tangents, eta_large)
        assert set(np.flatnonzero(np.isfinite(small))) <= set(
            np.flatnonzero(np.isfinite(large))
        )

    # SIM equivalence: J=1, eta=inf equals kNN on projected samples exactly
    data, _ = nsim.generate(nsim.SynthConfig(nsim.make_curve("line"), 4, 150, 61))
    queries, _ = nsim.generate(nsim.SynthConfig(nsim.make_curve("line"), 4, 50, 62))
    model = nsim.fit(data, 1, 3, eta=math.inf)
    a = model.tangents.vectors[0]
    projected = Dataset((data.features @ a)[:, None], data.responses)
    assert np.array_equal(
        nsim.predict_many(model, queries.features),
        nsim.baseline_knn_many(projected, (queries.features @ a)[:, None], 3),
    )

    # noise-free k=1 interpolation and prediction-range containment
    model_k1 = nsim.fit(data, 2, 1, eta=0.5)
    assert np.array_equal(nsim.predict_many(model_k1, data.features), data.responses)
    wild = rng.normal(size=(100, 4)) * 3
    preds = nsim.predict_many(model_k1, wild)
    assert preds.min() >= data.responses.min() and preds.max() <= data.responses.max()

    # Grammian symmetry and unit diagonal
    gram = nsim.grammian(nsim.fit(data, 3, 1, eta=0.5).tangents)
    assert np.array_equal(gram, gram.T) and np.allclose(np.diag(gram), 1.0, atol=1e-9)

    # generator orthogonality and arc-length invariants
    for kind in nsim.CURVE_KINDS:
        curve = nsim.make_curve(kind)
        _, samples = nsim.generate(nsim.SynthConfig(curve, curve.embed_dim + 2, 200, 7))
        for s in samples:
            w = s.x - s.v_true
            assert abs(w @ s.a_true) <= 1e-9 and np.linalg.norm(w) <= 0.25 + 1e-9
        t0, t1 = curve.param_interval
        h = 1e-6
        ts = np.random.default_rng(8).uniform(t0 + h, t1 - h, 200)
        speeds = np.linalg.norm(
            (nsim.curve_point(curve, ts + h) - nsim.curve_point(curve, ts - h)) / (2 * h),
            axis=1,
        )
        assert np.allclose(speeds, 1.0, atol=1e-6)

    # seeded determinism: byte-identical repeated runs
    small = dict(d_values=[4], noise_factors=[0.0], n_grid=[64, 128], repetitions=2,
                 seed=99, test_count=40)
    first = json.dumps(nsim.evaluation.schedule_summary(run_schedule("line", **small)))
    second = json.dumps(nsim.evaluation.schedule_summary(run_schedule("line", **small)))
    assert first == second
    gen_a, _ = nsim.generate(nsim.SynthConfig(nsim.make_curve("helix"), 5, 100, 13))
    gen_b, _ = nsim.generate(nsim.SynthConfig(nsim.make_curve("helix"), 5, 100, 13))
    assert np.array_equal(gen_a.features, gen_b.features)

    print("\n[criterion 7] PASS property suites (Moore-Penrose, partition cover/balance, "
          "eta-monotonicity, SIM equivalence, interpolation, range, Grammian, generator, "
          "determinism)")


def test_criterion_8_oracle_equivalence_desk_scale():
    checked = 0
    for case in range(20):
        rng = np.random.default_rng(1000 + case)
        n = int(rng.integers(60, 201))
        d = int(rng.integers(2, 6))
        if case % 2 == 0:
            kind = ("line", "s_curve", "helix")[case % 3]
            curve = nsim.make_curve(kind)
            data, _ = nsim.generate(
                nsim.SynthConfig(curve, max(d, curve.embed_dim + 1), n, 500 + case,
                                 noise_factor=0.05)
            )
        else:
            t = rng.uniform(0, 1, n)
            features = np.outer(t, rng.normal(size=d)) + rng.normal(scale=0.2, size=(n, d))
            data = Dataset(features, t + 0.3 * t**2)
        j_count = int(rng.integers(1, 4))
        partition = nsim.dyadic_partition(data.responses, j_count)
        if min(len(g) for g in partition.groups) < data.d + 1:
            partition = nsim.dyadic_partition(data.responses, 1)
        field = nsim.fit_tangents(data, partition)
        for j, idx in enumerate(partition.groups):
            xc = data.features[idx] - data.features[idx].mean(axis=0)
            yc = data.responses[idx] - data.responses[idx].mean()
            oracle, *_ = np.linalg.lstsq(xc, yc, rcond=None)
            mine = nsim.pseudo_inverse(nsim.sample_covariance(data.features[idx])) @ (
                nsim.cross_covariance(data.features[idx], data.responses[idx])
            )
            rel = np.linalg.norm(mine - oracle) / np.linalg.norm(oracle)
            assert rel < 1e-8, f"criterion 8: dataset {case} level set {j} rel err {rel:.2e}"
            assert np.allclose(field.vectors[j], mine / np.linalg.norm(mine), atol=1e-9)
            checked += 1
    print(f"\n[criterion 8] PASS regression vectors match the least-squares oracle on 20 "
          f"datasets ({checked} level sets, rel err < 1e-8)")


def test_criterion_9_benchmark_runs_on_user_csv(tmp_path, monkeypatch):
    monkeypatch.delenv("NSIM_SEED", raising=False)
    data_csv = tmp_path / "table.csv"
    assert cli_main([
        "synth", "--curve", "line", "--ambient-dim", "4", "--n", "170",
        "--noise-factor", "0.1", "--seed", "21", "--out", str(data_csv),
        "--truth-out", str(tmp_path / "truth.json"),
    ]) == 0
    out_json = tmp_path / "report.json"
    out_csv = tmp_path / "splits.csv"
    assert cli_main([
        "benchmark", "--data", str(data_csv), "--standardize",
        "--j-grid", "1,2,4", "--k-grid", "1,2,4,8", "--seed", "22",
        "--out-json", str(out_json), "--out-csv", str(out_csv),
    ]) == 0
    report = json.loads(out_json.read_text())
    assert report["repetitions"] == 30
    for method in ("nsim-dyadic", "nsim-equiblock", "linreg", "knn"):
        entry = report["methods"][method]
        assert entry["splits_used"] == 30
        assert entry["rmse_mean"] > 0 and entry["rmse_std"] >= 0
    assert report["methods"]["nsim-dyadic"]["j_mean"] >= 1
    assert report["methods"]["nsim-dyadic"]["k_mean"] >= 1
    print(f"\n[criterion 9] PASS benchmark CSV mode: 30 splits, "
          f"nsim-dyadic rmse {report['methods']['nsim-dyadic']['rmse_mean']:.3f} "
          f"± {report['methods']['nsim-dyadic']['rmse_std']:.3f}, "
          f"mean k {report['methods']['nsim-dyadic']['k_mean']:.1f}, "
          f"mean J {report['methods']['nsim-dyadic']['j_mean']:.1f}")
