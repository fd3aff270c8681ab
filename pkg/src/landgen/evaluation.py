"""Distribution-distance evaluation of generated configurations.

Originals and generations are compared per green level through their
aggregate per-category distributions (tensor mass summed over samples and
cells, smoothed, normalized); the four distances are then averaged with the
level sample counts as weights.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .cluvae import (
    TrainConfig,
    TrainedBundle,
    dataset_arrays,
    generate,
    make_condition,
    split_indices,
    train,
)
from .errors import ParameterError
from .grid_data import LEVEL_COUNT, DatasetSample, LandUseConfiguration, SynthesisParams, synthesize_city
from .rng import STREAM_EVAL, STREAM_STUDY, Rng

SMOOTHING_EPS = 1e-10
METRIC_NAMES = ("kl", "js", "hd", "cos")


@dataclass(frozen=True)
class LevelDistribution:
    probs: np.ndarray  # length M, strictly positive, sums to 1
    weight: int  # sample count behind the distribution


@dataclass(frozen=True)
class MetricReport:
    avg_kl: float
    avg_js: float
    avg_hd: float
    avg_cos: float
    per_level: tuple[dict, ...]  # one row per green level; empty levels carry weight 0

    def as_dict(self) -> dict:
        return {
            "avg_kl": self.avg_kl,
            "avg_js": self.avg_js,
            "avg_hd": self.avg_hd,
            "avg_cos": self.avg_cos,
            "per_level": list(self.per_level),
        }

    def averages(self) -> dict:
        return {"kl": self.avg_kl, "js": self.avg_js, "hd": self.avg_hd, "cos": self.avg_cos}


def group_distribution(configs) -> LevelDistribution:
    """Aggregate category distribution of a configuration group.

    Totals are normalized before the smoothing floor is applied so the result
    is invariant under uniform scaling of the group's mass.
    """
    configs = list(configs)
    if not configs:
        raise ParameterError("cannot build a distribution from zero configurations")
    m = configs[0].m
    totals = np.zeros(m)
    for cfg in configs:
        if cfg.m != m:
            raise ParameterError("configurations have inconsistent category counts")
        totals += cfg.category_totals()
    mass = totals.sum()
    base = totals / mass if mass > 0 else np.full(m, 1.0 / m)
    probs = (base + SMOOTHING_EPS) / (1.0 + m * SMOOTHING_EPS)
    return LevelDistribution(probs=probs, weight=len(configs))


def _check_pair(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ParameterError(f"probability vectors must share one length, got {p.shape} and {q.shape}")
    return p, q


def kl(p, q) -> float:
    """Kullback-Leibler divergence in nats; inputs strictly positive."""
    p, q = _check_pair(p, q)
    return float(np.sum(p * np.log(p / q)))


def js(p, q) -> float:
    """Jensen-Shannon divergence, bounded by ln 2."""
    p, q = _check_pair(p, q)
    mid = 0.5 * (p + q)
    return 0.5 * kl(p, mid) + 0.5 * kl(q, mid)


def hd(p, q) -> float:
    """Hellinger distance in [0, 1]."""
    p, q = _check_pair(p, q)
    return float(np.sqrt(np.sum((np.sqrt(p) - np.sqrt(q)) ** 2)) / np.sqrt(2.0))


def cos_dist(p, q) -> float:
    """Cosine distance, in [0, 1] for non-negative vectors."""
    p, q = _check_pair(p, q)
    return float(1.0 - (p @ q) / (np.linalg.norm(p) * np.linalg.norm(q)))


def weighted_average(values, weights) -> float:
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if values.shape != weights.shape:
        raise ParameterError("values and weights must have equal length")
    total = weights.sum()
    if total <= 0:
        raise ParameterError("weights must not all be zero")
    return float((values * weights).sum() / total)


def _default_generator(bundle: TrainedBundle, s_by_id: dict[int, np.ndarray]):
    def generator(sample: DatasetSample, level: int, count: int, rng: Rng):
        cond = make_condition(s_by_id[sample.sample_id], level, bundle.variant).c
        return generate(bundle, cond, rng, count=count)

    return generator


def replay_generator(sample: DatasetSample, level: int, count: int, rng: Rng):
    """Oracle generator: echoes the original configuration."""
    return [sample.configuration] * count


def evaluate(
    bundle: TrainedBundle,
    test_samples: list[DatasetSample],
    rng: Rng,
    gens_per_sample: int = 5,
    generator=None,
    collect_raw: bool = False,
):
    """Weighted distribution distances between originals and generations.

    Levels without test samples are skipped and excluded from both the
    numerator and the denominator of every average. ``collect_raw`` also
    returns the pre-normalization category totals for oracle recomputation.
    """
    if not test_samples:
        raise ParameterError("evaluation needs a non-empty test set")
    if gens_per_sample < 1:
        raise ParameterError("gens_per_sample must be >= 1")
    if generator is None:
        feats = np.stack([s.context.features for s in test_samples])
        s_matrix = bundle.embed_feature_stack(feats)
        s_by_id = {s.sample_id: s_matrix[i] for i, s in enumerate(test_samples)}
        generator = _default_generator(bundle, s_by_id)

    by_level: dict[int, list[DatasetSample]] = {j: [] for j in range(LEVEL_COUNT)}
    for sample in test_samples:
        by_level[sample.green_level.level].append(sample)

    per_level = []
    values = {name: [] for name in METRIC_NAMES}
    weights = []
    raw = {"original_totals": {}, "generated_totals": {}}
    for level in range(LEVEL_COUNT):
        members = by_level[level]
        if not members:
            per_level.append({"level": level, "weight": 0, "kl": None, "js": None, "hd": None, "cos": None})
            continue
        originals = group_distribution([s.configuration for s in members])
        generated_configs: list[LandUseConfiguration] = []
        for sample in members:
            generated_configs.extend(generator(sample, level, gens_per_sample, rng))
        generated = group_distribution(generated_configs)
        row = {
            "level": level,
            "weight": originals.weight,
            "kl": kl(originals.probs, generated.probs),
            "js": js(originals.probs, generated.probs),
            "hd": hd(originals.probs, generated.probs),
            "cos": cos_dist(originals.probs, generated.probs),
        }
        per_level.append(row)
        for name in METRIC_NAMES:
            values[name].append(row[name])
        weights.append(originals.weight)
        if collect_raw:
            raw["original_totals"][str(level)] = np.sum(
                [s.configuration.category_totals() for s in members], axis=0
            ).tolist()
            raw["generated_totals"][str(level)] = np.sum(
                [g.category_totals() for g in generated_configs], axis=0
            ).tolist()

    report = MetricReport(
        avg_kl=weighted_average(values["kl"], weights),
        avg_js=weighted_average(values["js"], weights),
        avg_hd=weighted_average(values["hd"], weights),
        avg_cos=weighted_average(values["cos"], weights),
        per_level=tuple(per_level),
    )
    return (report, raw) if collect_raw else report


def held_out_split(dataset: list[DatasetSample], split_seed: int) -> list[DatasetSample]:
    """The held-out 10% matching a bundle's stored split seed."""
    _, test_idx = split_indices(len(dataset), split_seed)
    return [dataset[i] for i in test_idx]


def train_and_evaluate(
    dataset: list[DatasetSample],
    config: TrainConfig,
    seed: int,
    variant: str = "full",
    gens_per_sample: int = 5,
    split_seed: int | None = None,
) -> tuple[TrainedBundle, MetricReport]:
    bundle, _ = train(dataset, config, seed=seed, variant=variant, split_seed=split_seed)
    held_out = held_out_split(dataset, bundle.training["split_seed"])
    report = evaluate(bundle, held_out, Rng(seed, STREAM_EVAL), gens_per_sample=gens_per_sample)
    return bundle, report


def stability_study(
    dataset: list[DatasetSample],
    config: TrainConfig,
    master_seed: int,
    runs: int = 6,
    variants: tuple[str, ...] = ("full", "no_variational"),
    gens_per_sample: int = 5,
) -> dict:
    """Re-train each variant with fresh initialization seeds on one fixed split.

    Returns per-variant run metrics plus the mean and population variance of
    each average.
    """
    if runs < 1:
        raise ParameterError("stability study needs at least one run")
    out: dict = {"runs": runs, "variants": {}}
    for variant in variants:
        run_metrics = []
        for run in range(runs):
            seed = master_seed + 1000 * (run + 1)
            try:
                _, report = train_and_evaluate(
                    dataset,
                    config,
                    seed=seed,
                    variant=variant,
                    gens_per_sample=gens_per_sample,
                    split_seed=master_seed,
                )
            except Exception as exc:
                raise ParameterError(f"stability run {run} for {variant} failed: {exc}") from exc
            run_metrics.append(report.averages())
        summary = {}
        for name in METRIC_NAMES:
            series = np.array([rm[name] for rm in run_metrics])
            summary[name] = {"mean": float(series.mean()), "variance": float(series.var())}
        out["variants"][variant] = {"per_run": run_metrics, "summary": summary}
    return out


def square_size_study(
    base_params: SynthesisParams,
    config: TrainConfig,
    n_values=(5, 10, 25, 50, 100),
    master_seed: int = 42,
    seeds_per_n: int = 1,
    gens_per_sample: int = 5,
) -> list[dict]:
    """Regenerate data and retrain per grid resolution.

    The rate table scales by (base_n / n)^2 so the expected regional POI total
    stays constant while the cell size changes.
    """
    rows = []
    for n in n_values:
        scale = (base_params.n / n) ** 2
        params = replace(
            base_params,
            n=n,
            zone_rate_table=np.asarray(base_params.zone_rate_table) * scale,
        )
        reports = []
        for s in range(seeds_per_n):
            seed = master_seed + 7000 * s
            run_params = replace(params, seed=base_params.seed + 13 * s)
            dataset = synthesize_city(run_params)
            _, report = train_and_evaluate(
                dataset, config, seed=seed, gens_per_sample=gens_per_sample
            )
            reports.append(report)
        rows.append(
            {
                "n": n,
                "reports": [r.as_dict() for r in reports],
                "mean": {
                    name: float(np.mean([r.averages()[name] for r in reports]))
                    for name in METRIC_NAMES
                },
            }
        )
    return rows


def format_table(report: MetricReport) -> str:
    """Aligned text rendering of a metric report."""
    lines = [
        f"{'level':>5} {'weight':>6} {'kl':>12} {'js':>12} {'hd':>12} {'cos':>12}",
    ]
    for row in report.per_level:
        if row["weight"] == 0:
            lines.append(f"{row['level']:>5} {0:>6} {'-':>12} {'-':>12} {'-':>12} {'-':>12}")
        else:
            lines.append(
                f"{row['level']:>5} {row['weight']:>6} "
                f"{row['kl']:>12.6f} {row['js']:>12.6f} {row['hd']:>12.6f} {row['cos']:>12.6f}"
            )
    lines.append(
        f"{'avg':>5} {'':>6} {report.avg_kl:>12.6f} {report.avg_js:>12.6f} "
        f"{report.avg_hd:>12.6f} {report.avg_cos:>12.6f}"
    )
    return "\n".join(lines)
