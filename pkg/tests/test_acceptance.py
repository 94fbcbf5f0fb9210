"""Acceptance gate: every criterion at its stated tolerance.

Each test records a one-line verdict that the terminal summary prints as
``criterion N PASS|FAIL``. Run with ``pytest tests/test_acceptance.py``.
"""

import json
import math
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from oracles import chi_square_textbook, ols_normal_equations, optimal_inertia_1d, optimal_inertia_colorings, t_cdf_quad
from tempotrad.cli import main
from tempotrad.features import FeatureMatrix, z_standardize
from tempotrad.kmeans import kmeans_fit, kmeans_pp_init, lloyd_descent
from tempotrad.regress import ols_fit, pearson_r, t_cdf
from tempotrad.sonatas import DRIFT_CASE, MOVEMENTS, PERIOD_CHANGES
from tempotrad.synth import (
    ClusterSpec,
    SynthSpec,
    cluster_years,
    noise_sd_for_r_squared,
    spec_from_table_row,
    spec_to_dict,
    synth_corpus,
)
from tempotrad.traditions import (
    aggregate_period_change,
    analyze_movement,
    contingency_statistics,
    intra_cluster_fit,
)


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number} {'PASS' if passed else 'FAIL'}: {detail}")
    assert passed, detail


def test_criterion_01_kmeans_oracle_equivalence():
    rng = np.random.default_rng(1)
    misses, fit_seconds = [], 0.0
    for i in range(200):
        k = 2 + i % 2
        if i < 100:
            x = rng.normal(0, 5, rng.integers(k + 1, 11))
            best = optimal_inertia_1d(x, k)
        else:
            x = rng.normal(0, 5, (rng.integers(k + 1, 9), 2))
            best = optimal_inertia_colorings(x, k)
        start = time.perf_counter()
        got = kmeans_fit(x, k, restarts=100, seed=i).inertia
        fit_seconds += time.perf_counter() - start
        if not abs(got - best) <= 1e-9 * max(best, 1e-300):
            misses.append(i)
    record(1, not misses and fit_seconds < 10, f"{200 - len(misses)}/200 optimal, k-means time {fit_seconds:.2f} s")


def test_criterion_02_lloyd_monotonicity():
    rng = np.random.default_rng(2)
    violations = 0
    for i in range(1000):
        n, d, k = rng.integers(3, 40), rng.integers(1, 4), rng.integers(1, 6)
        k = min(k, n)
        x = rng.normal(size=(n, d)) * rng.uniform(0.1, 100)
        _, _, _, trace, _ = lloyd_descent(x, kmeans_pp_init(x, k, rng))
        violations += sum(b > a for a, b in zip(trace, trace[1:]))
    record(2, violations == 0, f"{violations} increases over 1000 descents")


def test_criterion_03_standardization():
    rng = np.random.default_rng(3)
    worst_mean = worst_sd = 0.0
    for i in range(500):
        n, d = rng.integers(2, 40), rng.integers(1, 4)
        values = rng.normal(size=(n, d)) * rng.uniform(1e-3, 1e3, d) + rng.uniform(-1e4, 1e4, d)
        if i % 10 == 0:
            values[:, 0] = values[0, 0]
        s = z_standardize(FeatureMatrix("m", tuple(map(str, range(n))), tuple(f"c{j}" for j in range(d)), values))
        for j, name in enumerate(s.columns):
            if name in s.degenerate_columns:
                continue
            worst_mean = max(worst_mean, abs(s.values[:, j].mean()))
            worst_sd = max(worst_sd, abs(s.values[:, j].std(ddof=1) - 1))
    record(3, worst_mean <= 1e-12 and worst_sd <= 1e-12, f"max |mean| {worst_mean:.1e}, max |SD-1| {worst_sd:.1e}")


def test_criterion_04_regression():
    rng = np.random.default_rng(4)
    worst = worst_r2 = 0.0
    for _ in range(500):
        n = int(rng.integers(3, 30))
        x = np.sort(rng.uniform(1930, 2012, n))
        y = 80 + rng.normal(0, 0.05) * (x - 1970) + rng.normal(0, rng.uniform(0.1, 5), n)
        fit, ref = ols_fit(x, y), ols_normal_equations(x, y)
        got = {"slope": fit.slope, "intercept": fit.intercept, "r_squared": fit.r_squared,
               "slope_se": fit.slope_se, "t": fit.t_stat, "p": fit.p_two_tailed}
        worst = max(worst, max(abs(got[key] - ref[key]) / max(1.0, abs(ref[key])) for key in got))
        worst_r2 = max(worst_r2, abs(fit.r_squared - pearson_r(x, y) ** 2))
    record(4, worst <= 1e-9 and worst_r2 <= 1e-12, f"max oracle deviation {worst:.1e}, max |R2 - r^2| {worst_r2:.1e}")


def test_criterion_05_t_distribution():
    dfs = list(range(1, 31)) + [50, 100, 200]
    grid = np.arange(-5.0, 5.0001, 0.25)
    worst = max(abs(t_cdf(t, df) - t_cdf_quad(t, df)) for df in dfs for t in grid)
    cauchy = max(abs(t_cdf(t, 1) - (0.5 + math.atan(t) / math.pi)) for t in grid)
    record(5, worst <= 1e-8 and cauchy <= 1e-12, f"max quadrature deviation {worst:.1e}, Cauchy {cauchy:.1e}")


RECONSTRUCTION: dict = {}


def reconstruction_spec(movement_id):
    m = MOVEMENTS[movement_id]
    return spec_from_table_row(
        movement_id,
        m.rows,
        sonata_label=m.sonata_label,
        movement_name=m.movement_name,
        character=m.character,
        beats_per_bar=m.beats_per_bar,
        feature_spec=m.feature_spec,
        seed=0,
    )


@pytest.mark.parametrize("movement_id", sorted(MOVEMENTS))
def test_criterion_06_table_reconstruction(movement_id):
    start = time.perf_counter()
    corpus = synth_corpus(reconstruction_spec(movement_id))
    report = analyze_movement(corpus, movement_id, seed=0)
    elapsed = time.perf_counter() - start

    rows = MOVEMENTS[movement_id].rows
    problems = []
    for label, n, mean, _, _ in rows:
        c = report.cluster(label)
        got_n = 0 if c is None else c.n
        if got_n != n:
            problems.append(f"{label} n={got_n} (table {n})")
        elif n and abs(c.mean_bpm - mean) > 1.0:
            problems.append(f"{label} mean {c.mean_bpm:.1f} (table {mean})")
    expected_empty = {label for label, n, *_ in rows if n == 0}
    if report.empty_labels != expected_empty:
        problems.append(f"empty {sorted(report.empty_labels)} (table {sorted(expected_empty)})")

    RECONSTRUCTION[movement_id] = (not problems, elapsed)
    passed = sum(ok for ok, _ in RECONSTRUCTION.values())
    total_time = sum(t for _, t in RECONSTRUCTION.values())
    failing = sorted(m for m, (ok, _) in RECONSTRUCTION.items() if not ok)
    detail = f"{passed}/{len(RECONSTRUCTION)} movements reconstructed in {total_time:.2f} s"
    if failing:
        detail += f"; failing: {', '.join(failing)}"
    ACCEPTANCE[6] = (passed == len(MOVEMENTS) and total_time < 5, detail)
    print(f"{movement_id}: {'ok' if not problems else '; '.join(problems)}")
    assert not problems, f"{movement_id}: " + "; ".join(problems)


def test_criterion_07_drift_recovery():
    years = cluster_years(ClusterSpec("mid", DRIFT_CASE["n"], 100.0, year_min=DRIFT_CASE["year_min"], year_max=DRIFT_CASE["year_max"]))
    sd = noise_sd_for_r_squared(DRIFT_CASE["slope"], years, DRIFT_CASE["r_squared"])
    slopes, r2s = [], []
    for seed in range(50):
        cluster = ClusterSpec("mid", DRIFT_CASE["n"], 110.5, sd, DRIFT_CASE["year_min"], DRIFT_CASE["year_max"], DRIFT_CASE["slope"])
        corpus = synth_corpus(SynthSpec("drift", (cluster,), seed=seed))
        recs = corpus.recordings_for("drift")
        fit = intra_cluster_fit([r.year for r in recs], [np.mean(r.bar_bpm) for r in recs])
        slopes.append(fit.slope)
        r2s.append(fit.r_squared)
    slope, r2 = float(np.median(slopes)), float(np.median(r2s))
    ok = abs(slope - DRIFT_CASE["slope"]) <= 0.010 and abs(r2 - DRIFT_CASE["r_squared"]) <= 0.10
    record(7, ok, f"median slope {slope:.4f} (target -0.032 +/- 0.010), median R2 {r2:.3f} (target 0.246 +/- 0.10)")


def test_criterion_08_table_correlation():
    r = pearson_r(*zip(*PERIOD_CHANGES.values()))
    record(8, 0.96 <= abs(r) <= 1.0, f"|r| = {abs(r):.4f}")


def test_criterion_09_aggregate_identity():
    rng = np.random.default_rng(9)
    worst = 0.0
    for i in range(200):
        bars = int(rng.integers(1, 200))
        early = ClusterSpec("early", int(rng.integers(1, 12)), float(rng.uniform(20, 200)), 0.0, 1930, 1969)
        late = ClusterSpec("late", int(rng.integers(1, 12)), float(rng.uniform(20, 200)), 0.0, 1970, 2012)
        spec = SynthSpec("m", (early, late), bars_per_recording=bars, beats_per_bar=int(rng.integers(1, 7)), seed=i)
        c = aggregate_period_change(synth_corpus(spec), "m")
        worst = max(worst, abs((1 + c.tempo_pct / 100) * (1 + c.duration_pct / 100) - 1))
    record(9, worst <= 1e-9, f"max |(1+t)(1+d) - 1| = {worst:.1e} over 200 corpora")


def test_criterion_10_cli_determinism(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"movements": [spec_to_dict(reconstruction_spec(m)) for m in sorted(MOVEMENTS)]}))
    outputs = []
    for run in range(2):
        corpus, out = tmp_path / f"corpus{run}", tmp_path / f"out{run}"
        assert main(["synth", "--spec", str(spec_path), "--out", str(corpus)]) == 0
        assert main(["analyze", "--corpus", str(corpus), "--out", str(out), "--seed", "0"]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.suffix in (".json", ".svg")})
    same = outputs[0] == outputs[1] and len(outputs[0]) == 1 + len(MOVEMENTS)
    record(10, same, f"{len(outputs[0])} files (report.json + SVGs) byte-identical: {same}")


def test_criterion_11_association():
    chi2_ind, _, _, v_ind = contingency_statistics([[2, 4, 6], [3, 6, 9], [1, 2, 3]])
    v_diag = contingency_statistics([[9, 0], [0, 5]])[3]
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        table = (rng.multinomial(30, np.full(9, 1 / 9)).reshape(3, 3) + 1).tolist()
        chi2, _, _, v = contingency_statistics(table)
        ref_chi2, ref_v = chi_square_textbook(table)
        worst = max(worst, abs(chi2 - ref_chi2), abs(v - ref_v))
    ok = abs(chi2_ind) <= 1e-12 and abs(v_ind) <= 1e-6 and abs(v_diag - 1) <= 1e-12 and worst <= 1e-9
    record(11, ok, f"independence chi2 {chi2_ind:.1e} V {v_ind:.1e}; diagonal V {v_diag:.12f}; 3x3 max deviation {worst:.1e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
