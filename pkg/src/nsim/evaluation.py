"""Error metrics, decay-rate fits, and the experiment harnesses.

``run_schedule`` reproduces the synthetic rate studies at desk scale: for
each (curve, D, noise factor, N, repetition) cell it generates data, fits
with the schedule's parameter rules, and evaluates the relative function
RMSE on 1000 fresh test points plus the tangent-field RMSE against the true
midpoint tangents.  ``real_benchmark`` runs the repeated-split protocol used
for tabular data sets.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DataError, InfeasibleFitError, UsageError
from .estimator import (
    baseline_knn_many,
    baseline_linreg,
    cross_validate,
    fit,
    fold_assignments,
    linreg_predict,
    predict_many,
    two_thirds_k,
)
from .geometry import (
    CURVE_KINDS,
    SynthConfig,
    curve_tangent,
    generate,
    make_curve,
    true_link_values,
)

SCHEDULE_METHODS = ("nsim", "knn")
_CURVE_ID = {kind: i for i, kind in enumerate(CURVE_KINDS)}


def rmse_function(predictions, truths) -> float:
    """Relative RMSE: sqrt(sum (pred - truth)^2 / sum truth^2)."""
    preds = np.asarray(predictions, dtype=np.float64)
    truth = np.asarray(truths, dtype=np.float64)
    if preds.shape != truth.shape or preds.ndim != 1 or preds.size == 0:
        raise DataError(
            f"predictions and truths must be equal-length vectors, got {preds.shape} and {truth.shape}"
        )
    denom = float(np.sum(truth**2))
    if denom == 0.0:
        raise DataError("undefined relative RMSE: truths are all zero")
    return math.sqrt(float(np.sum((preds - truth) ** 2)) / denom)


def rmse_tangent(estimated, true_at_midpoints) -> float:
    """sqrt((1/J) * sum_j ||a_hat_j - a_j||^2) over unit vectors."""
    est = np.atleast_2d(np.asarray(estimated, dtype=np.float64))
    true = np.atleast_2d(np.asarray(true_at_midpoints, dtype=np.float64))
    if est.shape != true.shape or est.size == 0:
        raise DataError(f"tangent lists differ in shape: {est.shape} vs {true.shape}")
    return math.sqrt(float(np.mean(np.sum((est - true) ** 2, axis=1))))


def decay_slope(n_values, errors) -> float:
    """Least-squares slope of log(error) against log(N)."""
    ns = np.asarray(n_values, dtype=np.float64)
    errs = np.asarray(errors, dtype=np.float64)
    if ns.shape != errs.shape or ns.ndim != 1 or ns.size < 3:
        raise UsageError("decay_slope needs at least 3 aligned points")
    if np.any(ns <= 0) or np.any(errs <= 0):
        raise DataError("decay_slope requires positive sample counts and errors")
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


@dataclass(frozen=True)
class ScheduleCell:
    """Outcome of one (curve, D, c, N, repetition) run."""

    curve: str
    ambient_dim: int
    noise_factor: float
    n: int
    rep: int
    rmse_f: float
    rmse_a: float  # NaN for the kNN baseline
    j_used: int
    k_used: int


@dataclass(frozen=True)
class ExperimentResult:
    """Per-(curve, D, c) aggregation over repetitions."""

    curve: str
    ambient_dim: int
    noise_factor: float
    method: str
    n_values: tuple[int, ...]
    repetitions: int
    rmse_f_mean: tuple[float, ...]
    rmse_f_std: tuple[float, ...]
    rmse_a_mean: tuple[float, ...]
    rmse_a_std: tuple[float, ...]
    cells: tuple[ScheduleCell, ...]
    skipped: tuple[dict, ...]
    fingerprint: str


def _cell_seeds(seed: int, curve: str, d: int, c: float, n: int, rep: int) -> tuple[int, int, int]:
    entropy = (int(seed), _CURVE_ID[curve], int(d), int(round(c * 1e12)), int(n), int(rep))
    state = np.random.SeedSequence(entropy).generate_state(3, dtype=np.uint64)
    return int(state[0]), int(state[1]), int(state[2])


def _fingerprint(payload: dict) -> str:
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def noise_free_j(n: int, d: int) -> int:
    return max(1, n // (15 * d))


def _true_midpoint_tangents(curve, model, t_true: np.ndarray, ambient_dim: int) -> np.ndarray:
    out = np.zeros((model.partition.n_groups, ambient_dim))
    for j, idx in enumerate(model.partition.groups):
        t_bar = float(np.mean(t_true[idx]))
        tangent = curve_tangent(curve, t_bar)
        out[j, : tangent.shape[0]] = tangent
    return out


def run_schedule(
    curve_kind: str,
    d_values,
    noise_factors,
    n_grid,
    repetitions: int,
    seed: int,
    *,
    method: str = "nsim",
    partition_kind: str = "dyadic",
    eta: float = 0.5,
    j_grid_noisy=(1, 2, 4, 8),
    cv_folds: int = 5,
    test_count: int = 1000,
    tube_radius: float = 0.25,
) -> list[ExperimentResult]:
    """Run the synthetic rate schedule for one curve.

    Noise-free cells use k = 1 and J = max(1, floor(N / (15 D))); noisy
    cells use k = ceil(0.5 * N^(2/3)) with J cross-validated over
    ``j_grid_noisy``.  Per-cell seeds derive deterministically from the
    master seed and the cell coordinates, so reruns and the kNN baseline
    see identical data.  Infeasible cells are recorded and skipped.
    """
    if method not in SCHEDULE_METHODS:
        raise UsageError(f"unknown schedule method {method!r}; expected one of {SCHEDULE_METHODS}")
    if repetitions < 1:
        raise UsageError(f"repetitions must be >= 1, got {repetitions}")
    curve = make_curve(curve_kind)
    results = []

    for d in d_values:
        for c in noise_factors:
            cells: list[ScheduleCell] = []
            skipped: list[dict] = []
            for n in n_grid:
                for rep in range(repetitions):
                    train_seed, test_seed, cv_seed = _cell_seeds(seed, curve_kind, d, c, n, rep)
                    train_ds, train_samples = _generate(curve, d, n, train_seed, tube_radius, c)
                    test_ds, test_samples = _generate(
                        curve, d, test_count, test_seed, tube_radius, c
                    )
                    test_truth = true_link_values(
                        curve, np.array([s.t_true for s in test_samples])
                    )
                    k_used = 1 if c == 0.0 else two_thirds_k(n)
                    if method == "nsim":
                        try:
                            if c == 0.0:
                                j_used = noise_free_j(n, d)
                            else:
                                report = cross_validate(
                                    train_ds, j_grid_noisy, k_used, eta, cv_folds,
                                    cv_seed, partition_kind,
                                )
                                j_used = report.selected[0]
                            model = fit(train_ds, j_used, k_used, eta, partition_kind)
                        except (InfeasibleFitError, DataError) as exc:
                            skipped.append({"n": int(n), "rep": rep, "reason": str(exc)})
                            continue
                        preds = predict_many(model, test_ds.features)
                        t_true = np.array([s.t_true for s in train_samples])
                        true_tangents = _true_midpoint_tangents(curve, model, t_true, d)
                        rmse_a = rmse_tangent(model.tangents.vectors, true_tangents)
                    else:
                        j_used = 0  # the Euclidean baseline has no level sets
                        preds = baseline_knn_many(train_ds, test_ds.features, k_used)
                        rmse_a = math.nan
                    cells.append(
                        ScheduleCell(
                            curve=curve_kind,
                            ambient_dim=int(d),
                            noise_factor=float(c),
                            n=int(n),
                            rep=rep,
                            rmse_f=rmse_function(preds, test_truth),
                            rmse_a=rmse_a,
                            j_used=int(j_used),
                            k_used=int(k_used),
                        )
                    )

            results.append(
                _aggregate(curve_kind, d, c, method, n_grid, repetitions, cells, skipped, seed)
            )
    return results


def _generate(curve, d, n, seed, tube_radius, c):
    return generate(
        SynthConfig(
            curve=curve,
            ambient_dim=int(d),
            n_samples=int(n),
            seed=int(seed),
            tube_radius=float(tube_radius),
            noise_factor=float(c),
        )
    )


def _aggregate(curve_kind, d, c, method, n_grid, repetitions, cells, skipped, seed):
    n_values = tuple(int(n) for n in n_grid)
    f_mean, f_std, a_mean, a_std = [], [], [], []
    for n in n_values:
        fs = [cell.rmse_f for cell in cells if cell.n == n]
        as_ = [cell.rmse_a for cell in cells if cell.n == n and not math.isnan(cell.rmse_a)]
        f_mean.append(float(np.mean(fs)) if fs else math.nan)
        f_std.append(float(np.std(fs)) if fs else math.nan)
        a_mean.append(float(np.mean(as_)) if as_ else math.nan)
        a_std.append(float(np.std(as_)) if as_ else math.nan)
    fingerprint = _fingerprint(
        {
            "curve": curve_kind,
            "ambient_dim": int(d),
            "noise_factor": float(c),
            "method": method,
            "n_values": list(n_values),
            "repetitions": repetitions,
            "seed": int(seed),
        }
    )
    return ExperimentResult(
        curve=curve_kind,
        ambient_dim=int(d),
        noise_factor=float(c),
        method=method,
        n_values=n_values,
        repetitions=repetitions,
        rmse_f_mean=tuple(f_mean),
        rmse_f_std=tuple(f_std),
        rmse_a_mean=tuple(a_mean),
        rmse_a_std=tuple(a_std),
        cells=tuple(cells),
        skipped=tuple(skipped),
        fingerprint=fingerprint,
    )


def schedule_csv_rows(results) -> list[list[str]]:
    """Per-repetition rows: curve, D, c, N, rep, rmse_f, rmse_a, J_used, k_used."""
    from .io import format_float

    rows = [["curve", "D", "c", "N", "rep", "rmse_f", "rmse_a", "J_used", "k_used"]]
    for result in results:
        for cell in result.cells:
            rows.append(
                [
                    cell.curve,
                    str(cell.ambient_dim),
                    format_float(cell.noise_factor),
                    str(cell.n),
                    str(cell.rep),
                    format_float(cell.rmse_f),
                    format_float(cell.rmse_a),
                    str(cell.j_used),
                    str(cell.k_used),
                ]
            )
    return rows


def schedule_summary(results) -> dict:
    """JSON-ready summary with per-result means/stds and log-log slopes."""
    out = {"version": 1, "results": []}
    for r in results:
        entry = {
            "curve": r.curve,
            "ambient_dim": r.ambient_dim,
            "noise_factor": r.noise_factor,
            "method": r.method,
            "n_values": list(r.n_values),
            "repetitions": r.repetitions,
            "rmse_f_mean": list(r.rmse_f_mean),
            "rmse_f_std": list(r.rmse_f_std),
            "rmse_a_mean": list(r.rmse_a_mean),
            "rmse_a_std": list(r.rmse_a_std),
            "skipped": list(r.skipped),
            "fingerprint": r.fingerprint,
        }
        entry["slope_rmse_f"] = _safe_slope(r.n_values, r.rmse_f_mean)
        entry["slope_rmse_a"] = _safe_slope(r.n_values, r.rmse_a_mean)
        out["results"].append(entry)
    return out


def _safe_slope(n_values, errors):
    errs = [e for e in errors if not math.isnan(e)]
    if len(errs) != len(errors) or len(errs) < 3 or any(e <= 0 for e in errs):
        return None
    return decay_slope(n_values, errors)


BENCHMARK_METHODS = ("nsim-dyadic", "nsim-equiblock", "linreg", "knn")


def real_benchmark(
    data: Dataset,
    seed: int,
    *,
    repetitions: int = 30,
    test_fraction: float = 0.15,
    folds: int = 5,
    j_grid=(1, 2, 4, 8, 16),
    k_grid=(1, 2, 4, 8, 16, 32, 64),
    eta: float = math.inf,
    methods=BENCHMARK_METHODS,
) -> dict:
    """Repeated-split benchmark: per repetition, hold out a test fraction,
    tune hyperparameters by k-fold cross-validation on the rest, and report
    mean and std of the relative test RMSE plus mean selected k and J."""
    if not 0.0 < test_fraction < 1.0:
        raise UsageError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if repetitions < 1:
        raise UsageError(f"repetitions must be >= 1, got {repetitions}")
    for m in methods:
        if m not in BENCHMARK_METHODS:
            raise UsageError(f"unknown benchmark method {m!r}")

    n_test = max(1, int(round(test_fraction * data.n)))
    if data.n - n_test < folds:
        raise UsageError(
            f"not enough training samples ({data.n - n_test}) for {folds}-fold CV"
        )

    records: dict[str, list[dict]] = {m: [] for m in methods}
    split_rows: list[dict] = []
    for rep in range(repetitions):
        state = np.random.SeedSequence((int(seed), rep)).generate_state(2, dtype=np.uint64)
        perm = np.random.default_rng(int(state[0])).permutation(data.n)
        cv_seed = int(state[1])
        test_idx = np.sort(perm[:n_test])
        train_idx = np.sort(perm[n_test:])
        train, test = data.subset(train_idx), data.subset(test_idx)

        for method in methods:
            row = {"method": method, "rep": rep, "rmse": math.nan, "k": None, "J": None}
            try:
                if method.startswith("nsim-"):
                    kind = method.split("-", 1)[1]
                    best = None
                    for k in k_grid:
                        report = cross_validate(
                            train, j_grid, int(k), eta, folds, cv_seed, kind
                        )
                        score = report.fold_scores[report.grid.index(report.selected)]
                        if best is None or score < best[0]:
                            best = (score, report.selected)
                    j_sel, k_sel = best[1]
                    model = fit(train, j_sel, k_sel, eta, kind)
                    preds = predict_many(model, test.features)
                    row.update(rmse=rmse_function(preds, test.responses), k=k_sel, J=j_sel)
                elif method == "knn":
                    k_sel = _knn_cv(train, k_grid, folds, cv_seed)
                    preds = baseline_knn_many(train, test.features, k_sel)
                    row.update(rmse=rmse_function(preds, test.responses), k=k_sel)
                else:
                    weights, intercept = baseline_linreg(train)
                    preds = linreg_predict(weights, intercept, test.features)
                    row.update(rmse=rmse_function(preds, test.responses))
            except InfeasibleFitError as exc:
                row["reason"] = str(exc)
                split_rows.append(row)
                continue
            split_rows.append(row)
            records[method].append(row)

    summary = {}
    for method in methods:
        rows = records[method]
        rmses = [r["rmse"] for r in rows]
        entry = {
            "splits_used": len(rows),
            "rmse_mean": float(np.mean(rmses)) if rows else None,
            "rmse_std": float(np.std(rmses)) if rows else None,
        }
        ks = [r["k"] for r in rows if r["k"] is not None]
        js = [r["J"] for r in rows if r["J"] is not None]
        if ks:
            entry["k_mean"] = float(np.mean(ks))
        if js:
            entry["j_mean"] = float(np.mean(js))
        summary[method] = entry

    return {
        "version": 1,
        "n": data.n,
        "d": data.d,
        "repetitions": repetitions,
        "test_fraction": test_fraction,
        "folds": folds,
        "j_grid": [int(j) for j in j_grid],
        "k_grid": [int(k) for k in k_grid],
        "eta": "inf" if math.isinf(eta) else float(eta),
        "seed": int(seed),
        "methods": summary,
        "splits": split_rows,
    }


def _knn_cv(train: Dataset, k_grid, folds: int, seed: int) -> int:
    fold_sets = fold_assignments(train.n, folds, seed)
    all_idx = np.arange(train.n)
    best = None
    for k in k_grid:
        mses = []
        for val_idx in fold_sets:
            fold_train = train.subset(np.sort(np.setdiff1d(all_idx, val_idx, assume_unique=True)))
            preds = baseline_knn_many(fold_train, train.features[val_idx], int(k))
            mses.append(float(np.mean((preds - train.responses[val_idx]) ** 2)))
        score = float(np.mean(mses))
        if best is None or score < best[0]:
            best = (score, int(k))
    return best[1]
