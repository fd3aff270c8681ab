import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landgen.errors import ParameterError
from landgen.evaluation import (
    METRIC_NAMES,
    SMOOTHING_EPS,
    cos_dist,
    evaluate,
    format_table,
    group_distribution,
    hd,
    js,
    kl,
    replay_generator,
    square_size_study,
    stability_study,
    held_out_split,
    weighted_average,
)
from landgen.grid_data import LandUseConfiguration, SynthesisParams
from landgen.rng import Rng
from tests.conftest import TINY_CONFIG, TINY_PARAMS


def _config(grid):
    grid = np.asarray(grid, dtype=np.float64)
    return LandUseConfiguration(grid=grid, n=grid.shape[0], m=grid.shape[2])


def test_group_distribution_single_category_mass():
    grid = np.zeros((2, 2, 3))
    grid[:, :, 0] = 4
    dist = group_distribution([_config(grid)])
    assert dist.probs[0] == pytest.approx(1.0, abs=1e-9)
    assert dist.probs[1] == pytest.approx(0.0, abs=1e-9)
    assert dist.weight == 1


def test_group_distribution_scale_invariance():
    rng = np.random.RandomState(2)
    grid = rng.poisson(2.0, size=(3, 3, 4)).astype(float)
    one = group_distribution([_config(grid)])
    two = group_distribution([_config(grid), _config(grid)])
    assert np.allclose(one.probs, two.probs, atol=1e-15)
    assert two.weight == 2


def test_group_distribution_matches_recount_oracle():
    rng = np.random.RandomState(7)
    grids = [rng.poisson(1.5, size=(4, 4, 6)).astype(float) for _ in range(9)]
    dist = group_distribution([_config(g) for g in grids])

    totals = np.zeros(6)
    for g in grids:
        for r in range(4):
            for c in range(4):
                for cat in range(6):
                    totals[cat] += g[r, c, cat]
    expected = (totals / totals.sum() + SMOOTHING_EPS) / (1.0 + 6 * SMOOTHING_EPS)
    assert np.allclose(dist.probs, expected, atol=1e-15, rtol=0)
    assert abs(dist.probs.sum() - 1.0) < 1e-9


def test_group_distribution_empty_rejected():
    with pytest.raises(ParameterError):
        group_distribution([])


def test_metrics_zero_on_identical_vectors():
    p = np.array([0.2, 0.3, 0.5])
    for metric in (kl, js, hd, cos_dist):
        assert abs(metric(p, p)) <= 1e-12


def test_kl_known_value():
    # Direct evaluation of the formula: 0.5*ln(5/9) + 0.5*ln(5) = 0.5*ln(25/9)
    expected = 0.5 * math.log(25.0 / 9.0)
    assert kl([0.5, 0.5], [0.9, 0.1]) == pytest.approx(expected, abs=1e-14)
    assert expected == pytest.approx(0.5108, abs=5e-5)


def test_disjoint_support_limits_after_smoothing():
    a = (np.array([1.0, 0.0]) + SMOOTHING_EPS) / (1.0 + 2 * SMOOTHING_EPS)
    b = (np.array([0.0, 1.0]) + SMOOTHING_EPS) / (1.0 + 2 * SMOOTHING_EPS)
    assert js(a, b) == pytest.approx(math.log(2.0), abs=1e-7)
    assert hd(a, b) == pytest.approx(1.0, abs=1e-4)
    assert cos_dist(a, b) == pytest.approx(1.0, abs=1e-9)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=80, deadline=None)
def test_metric_identities_random_simplex_pairs(seed):
    rng = np.random.RandomState(seed)
    size = rng.randint(2, 30)
    p = rng.dirichlet(np.ones(size)) + SMOOTHING_EPS
    q = rng.dirichlet(np.ones(size)) + SMOOTHING_EPS
    p, q = p / p.sum(), q / q.sum()
    assert kl(p, q) >= -1e-12
    assert -1e-12 <= js(p, q) <= math.log(2.0) + 1e-12
    assert -1e-12 <= hd(p, q) <= 1.0 + 1e-12
    assert 0.0 <= cos_dist(p, q) <= 1.0 + 1e-12
    # Hellinger relates to the Bhattacharyya coefficient
    assert hd(p, q) ** 2 == pytest.approx(1.0 - np.sum(np.sqrt(p * q)), abs=1e-12)
    assert js(p, q) == pytest.approx(js(q, p), abs=1e-12)
    assert hd(p, q) == pytest.approx(hd(q, p), abs=1e-12)


def test_weighted_average_examples():
    assert weighted_average([0.4, 0.1, 9, 9, 9], [2, 1, 0, 0, 0]) == pytest.approx(0.3)
    assert weighted_average([1, 2, 3], [5, 5, 5]) == pytest.approx(2.0)
    assert weighted_average([4, 7, 9], [0, 1, 0]) == 7.0
    assert weighted_average([1.0], [3.0]) == weighted_average([1.0], [300.0])
    with pytest.raises(ParameterError):
        weighted_average([1, 2], [0, 0])


def test_evaluate_replay_generator_all_zero(tiny_dataset, tiny_bundle):
    bundle, _ = tiny_bundle
    held_out = held_out_split(tiny_dataset, bundle.training["split_seed"])
    report = evaluate(bundle, held_out, Rng(1, 0), gens_per_sample=3, generator=replay_generator)
    for value in report.averages().values():
        assert abs(value) < 1e-9


def test_evaluate_degenerate_generator_strictly_positive(tiny_dataset, tiny_bundle):
    bundle, _ = tiny_bundle
    held_out = held_out_split(tiny_dataset, bundle.training["split_seed"])
    spike = np.zeros((4, 4, 5))
    spike[:, :, 1] = 3.0

    def fixed(sample, level, count, rng):
        return [_config(spike)] * count

    report = evaluate(bundle, held_out, Rng(1, 0), gens_per_sample=2, generator=fixed)
    for value in report.averages().values():
        assert value > 0.0


def test_evaluate_matches_recomputation_from_raw_dump(tiny_dataset, tiny_bundle):
    bundle, _ = tiny_bundle
    held_out = held_out_split(tiny_dataset, bundle.training["split_seed"])
    report, raw = evaluate(bundle, held_out, Rng(2, 0), gens_per_sample=2, collect_raw=True)

    values, weights = {n: [] for n in METRIC_NAMES}, []
    for row in report.per_level:
        if row["weight"] == 0:
            assert str(row["level"]) not in raw["original_totals"]
            continue
        orig = np.asarray(raw["original_totals"][str(row["level"])])
        gen = np.asarray(raw["generated_totals"][str(row["level"])])
        m = orig.size
        p = (orig / orig.sum() + SMOOTHING_EPS) / (1.0 + m * SMOOTHING_EPS)
        q = (gen / gen.sum() + SMOOTHING_EPS) / (1.0 + m * SMOOTHING_EPS)
        assert row["kl"] == pytest.approx(kl(p, q), abs=1e-12)
        assert row["js"] == pytest.approx(js(p, q), abs=1e-12)
        assert row["hd"] == pytest.approx(hd(p, q), abs=1e-12)
        assert row["cos"] == pytest.approx(cos_dist(p, q), abs=1e-12)
        for name in METRIC_NAMES:
            values[name].append(row[name])
        weights.append(row["weight"])
    assert report.avg_js == pytest.approx(weighted_average(values["js"], weights), abs=1e-14)
    assert report.avg_kl == pytest.approx(weighted_average(values["kl"], weights), abs=1e-14)


def test_evaluate_deterministic_given_rng(tiny_dataset, tiny_bundle):
    bundle, _ = tiny_bundle
    held_out = held_out_split(tiny_dataset, bundle.training["split_seed"])
    r1 = evaluate(bundle, held_out, Rng(3, 0), gens_per_sample=2)
    r2 = evaluate(bundle, held_out, Rng(3, 0), gens_per_sample=2)
    assert r1 == r2


def test_evaluate_empty_test_set_rejected(tiny_bundle):
    bundle, _ = tiny_bundle
    with pytest.raises(ParameterError):
        evaluate(bundle, [], Rng(0, 0))


def test_stability_study_deterministic_and_variance_oracle(tiny_dataset):
    kwargs = dict(runs=2, variants=("full",), gens_per_sample=2)
    a = stability_study(tiny_dataset, TINY_CONFIG, master_seed=5, **kwargs)
    b = stability_study(tiny_dataset, TINY_CONFIG, master_seed=5, **kwargs)
    assert a == b
    per_run = a["variants"]["full"]["per_run"]
    series = [rm["js"] for rm in per_run]
    mean = sum(series) / len(series)
    brute_variance = sum((v - mean) ** 2 for v in series) / len(series)
    assert a["variants"]["full"]["summary"]["js"]["variance"] == pytest.approx(
        brute_variance, abs=1e-15
    )


def test_stability_study_single_run_zero_variance(tiny_dataset):
    out = stability_study(tiny_dataset, TINY_CONFIG, master_seed=9, runs=1, variants=("full",), gens_per_sample=2)
    for stats in out["variants"]["full"]["summary"].values():
        assert stats["variance"] == 0.0


def test_square_size_study_single_row_and_deterministic():
    base = SynthesisParams(n=4, m=5, z_count=2, k_samples=60, seed=33)
    a = square_size_study(base, TINY_CONFIG, n_values=(4,), master_seed=3, gens_per_sample=2)
    b = square_size_study(base, TINY_CONFIG, n_values=(4,), master_seed=3, gens_per_sample=2)
    assert len(a) == 1
    assert a == b
    assert a[0]["n"] == 4
    assert set(a[0]["mean"]) == set(METRIC_NAMES)


def test_format_table_contains_all_levels(tiny_dataset, tiny_bundle):
    bundle, _ = tiny_bundle
    held_out = held_out_split(tiny_dataset, bundle.training["split_seed"])
    report = evaluate(bundle, held_out, Rng(4, 0), gens_per_sample=1)
    text = format_table(report)
    assert "avg" in text
    assert len(text.splitlines()) == 7  # header + 5 levels + averages
