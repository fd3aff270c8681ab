"""Grid configuration types, synthetic city generation, and dataset files.

A land-use configuration is an N x N x M tensor of POI counts per cell per
category; each sample pairs it with an N x N functional-zone grid, a green
level in [0, 5), and the surrounding-context ring graph.

The synthesizer replaces field data collection. Per sample it grows contiguous
zones from random seed cells, draws cell counts as Poisson with mean
``zone_rate_table[zone][cat] * alpha[cat] * sparsity_by_level[level]`` (alpha
is a per-sample category affinity with unit mean), and emits context features
that reflect the sample's own pre-sparsity composition and density. Contexts
deliberately carry no green-level signal: the surroundings exist before the
planner picks a level, so guidance stays the only source of level information.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .context_features import ContextGraph, feature_width
from .errors import DatasetFormatError, ParameterError
from .rng import SAMPLE_STREAM_BASE, Rng

LEVEL_COUNT = 5

# Synthesis shape constants: per-sample category affinity spread, context
# noise scales, and the per-zone characteristic-category weights.
ALPHA_SIGMA = 0.6
CONTEXT_RATIO_NOISE = 0.25
CHARACTERISTIC_WEIGHTS = (3.4, 2.4, 1.5, 0.9)
BACKGROUND_RATE = 0.04
# Per-category sensitivity of the green-level thinning: the level multiplier
# enters as sparsity^exponent, cycled over categories, so greener levels both
# shrink totals and shift composition toward thinning-resistant categories.
SPARSITY_EXPONENTS = (0.2, 1.0, 3.0)


@dataclass(frozen=True)
class PoiPoint:
    lat: float
    lon: float
    category: int


@dataclass(frozen=True)
class BoundingBox:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self):
        if not all(np.isfinite(v) for v in (self.lat_min, self.lat_max, self.lon_min, self.lon_max)):
            raise ParameterError("bounding box must be finite")
        if self.lat_max <= self.lat_min or self.lon_max <= self.lon_min:
            raise ParameterError("bounding box is degenerate")

    def contains(self, lat: float, lon: float) -> bool:
        return self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max


@dataclass(frozen=True)
class LandUseConfiguration:
    grid: np.ndarray  # (n, n, m), non-negative counts or intensities
    n: int
    m: int

    def __post_init__(self):
        if self.grid.shape != (self.n, self.n, self.m):
            raise ParameterError(
                f"grid shape {self.grid.shape} inconsistent with n={self.n}, m={self.m}"
            )
        if np.any(self.grid < 0):
            raise ParameterError("configuration entries must be non-negative")

    def total(self) -> float:
        return float(self.grid.sum())

    def category_totals(self) -> np.ndarray:
        return self.grid.sum(axis=(0, 1))


@dataclass(frozen=True)
class FunctionalZoneGrid:
    labels: np.ndarray  # (n, n) ints in [0, z_count)
    z_count: int

    def __post_init__(self):
        if self.labels.ndim != 2 or self.labels.shape[0] != self.labels.shape[1]:
            raise ParameterError("zone labels must be a square grid")
        if self.z_count < 1:
            raise ParameterError("z_count must be at least 1")
        if np.any(self.labels < 0) or np.any(self.labels >= self.z_count):
            raise ParameterError("zone labels must lie in [0, z_count)")


@dataclass(frozen=True)
class GreenLevel:
    level: int

    def __post_init__(self):
        if not 0 <= self.level < LEVEL_COUNT:
            raise ParameterError(f"green level must be in [0, {LEVEL_COUNT})")


@dataclass(frozen=True)
class DatasetSample:
    sample_id: int
    configuration: LandUseConfiguration
    zones: FunctionalZoneGrid
    context: ContextGraph
    green_level: GreenLevel


@dataclass(frozen=True)
class SynthesisParams:
    n: int
    k_samples: int
    seed: int
    m: int = 20
    z_count: int = 6
    t_months: int = 13
    zone_rate_table: np.ndarray | None = None
    sparsity_by_level: tuple[float, ...] = (1.0, 0.8, 0.6, 0.4, 0.2)

    def __post_init__(self):
        if self.n <= 0 or self.m <= 0 or self.k_samples < 0 or self.t_months < 2:
            raise ParameterError("n, m must be positive; k_samples >= 0; t_months >= 2")
        if self.z_count < 1 or self.z_count > self.n * self.n:
            raise ParameterError("z_count must be in [1, n^2]")
        if self.zone_rate_table is None:
            object.__setattr__(self, "zone_rate_table", default_zone_rate_table(self.z_count, self.m))
        table = np.asarray(self.zone_rate_table, dtype=np.float64)
        if table.shape != (self.z_count, self.m):
            raise ParameterError(
                f"zone_rate_table shape {table.shape} must be ({self.z_count}, {self.m})"
            )
        if np.any(table < 0):
            raise ParameterError("zone_rate_table must be non-negative")
        object.__setattr__(self, "zone_rate_table", table)
        levels = tuple(float(v) for v in self.sparsity_by_level)
        if len(levels) != LEVEL_COUNT:
            raise ParameterError(f"sparsity_by_level needs {LEVEL_COUNT} entries")
        if any(not 0.0 < v <= 1.0 for v in levels):
            raise ParameterError("sparsity multipliers must lie in (0, 1]")
        if any(levels[i + 1] >= levels[i] for i in range(LEVEL_COUNT - 1)):
            raise ParameterError("sparsity multipliers must be strictly decreasing")
        object.__setattr__(self, "sparsity_by_level", levels)


def default_zone_rate_table(z_count: int, m: int) -> np.ndarray:
    """Each zone gets a 4-category characteristic block over a low background."""
    table = np.full((z_count, m), BACKGROUND_RATE)
    for z in range(z_count):
        for j, w in enumerate(CHARACTERISTIC_WEIGHTS):
            table[z, (3 * z + j) % m] += w
    return table


def build_configuration(points, bbox: BoundingBox, n: int, m: int) -> LandUseConfiguration:
    """Count POIs per cell per category over an n x n division of the bbox."""
    if n <= 0:
        raise ParameterError("grid resolution n must be positive")
    if m < 1:
        raise ParameterError("category count m must be at least 1")
    grid = np.zeros((n, n, m), dtype=np.float64)
    lat_span = bbox.lat_max - bbox.lat_min
    lon_span = bbox.lon_max - bbox.lon_min
    for idx, p in enumerate(points):
        if not (np.isfinite(p.lat) and np.isfinite(p.lon)):
            raise ParameterError(f"point {idx} has non-finite coordinates")
        if not bbox.contains(p.lat, p.lon):
            raise ParameterError(f"point {idx} at ({p.lat}, {p.lon}) lies outside the bbox")
        if not 0 <= p.category < m:
            raise ParameterError(f"point {idx} category {p.category} outside [0, {m})")
        row = min(int((p.lat - bbox.lat_min) / lat_span * n), n - 1)
        col = min(int((p.lon - bbox.lon_min) / lon_span * n), n - 1)
        grid[row, col, p.category] += 1.0
    return LandUseConfiguration(grid=grid, n=n, m=m)


def _grow_zones(n: int, z_count: int, rng: Rng) -> np.ndarray:
    """Contiguous zone labels from multi-source random region growing."""
    labels = np.full((n, n), -1, dtype=np.int64)
    if z_count == 1:
        return np.zeros((n, n), dtype=np.int64)
    seeds: list[int] = []
    while len(seeds) < z_count:
        cell = rng.randint_below(n * n)
        if cell not in seeds:
            seeds.append(cell)
    frontier: list[tuple[int, int]] = []
    for z, cell in enumerate(seeds):
        r, c = divmod(cell, n)
        labels[r, c] = z
        frontier.append((r, c))
    remaining = n * n - z_count
    while remaining > 0:
        pick = rng.randint_below(len(frontier))
        r, c = frontier[pick]
        open_neighbors = [
            (rr, cc)
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
            if 0 <= rr < n and 0 <= cc < n and labels[rr, cc] < 0
        ]
        if not open_neighbors:
            frontier[pick] = frontier[-1]
            frontier.pop()
            continue
        rr, cc = open_neighbors[rng.randint_below(len(open_neighbors))]
        labels[rr, cc] = labels[r, c]
        frontier.append((rr, cc))
        remaining -= 1
    return labels


def _ring_smooth(noise: np.ndarray) -> np.ndarray:
    """Correlate per-direction noise around the ring (adjacent contexts share
    geography); unit marginal variance is preserved."""
    return (np.roll(noise, 1, axis=0) + 2.0 * noise + np.roll(noise, -1, axis=0)) / np.sqrt(6.0)


def _context_rows(
    p_self: np.ndarray, density: float, t_months: int, rng: Rng
) -> np.ndarray:
    """Eight directional feature rows echoing the sample's composition and
    density with ring-correlated noise (adjacent contexts share geography)."""
    m = p_self.size
    t1 = t_months - 1
    ratio_noise = _ring_smooth(rng.normals(8 * m, size=(8, m)))
    price_noise = _ring_smooth(rng.normals(8 * t1, size=(8, t1)))
    transport_noise = _ring_smooth(rng.normals(8 * 10, size=(8, 10)))
    rows = []
    for i in range(8):
        ratio = p_self * np.exp(CONTEXT_RATIO_NOISE * ratio_noise[i])
        ratio = ratio / ratio.sum()
        price_change = 15.0 * (density - 4.0) + 20.0 * price_noise[i]
        tn = transport_noise[i]
        bus_volumes = density * np.array([2.0, 1.6, 0.8]) * np.exp(0.3 * tn[:3])
        stops = density * 5e-6 * np.exp(0.3 * tn[3])
        fare = 2.0 + 0.2 * tn[4]
        taxi_volumes = density * np.array([1.4, 1.2, 0.6]) * np.exp(0.3 * tn[5:8])
        velocity = 40.0 / (1.0 + 0.1 * density) * np.exp(0.1 * tn[8])
        distance = 5.0 * np.exp(0.2 * tn[9])
        rows.append(
            np.concatenate(
                [
                    price_change,
                    ratio,
                    np.concatenate([bus_volumes, [stops, fare]]),
                    np.concatenate([taxi_volumes, [velocity, distance]]),
                ]
            )
        )
    return np.vstack(rows)


def synthesize_sample(params: SynthesisParams, sample_id: int) -> DatasetSample:
    """One sample from its own derived stream; draw order is fixed by this code."""
    rng = Rng(params.seed, SAMPLE_STREAM_BASE + sample_id)
    n, m = params.n, params.m
    labels = _grow_zones(n, params.z_count, rng)
    level = rng.randint_below(LEVEL_COUNT)
    alpha = np.exp(ALPHA_SIGMA * rng.normals(m))
    alpha = alpha / alpha.mean()
    base_rates = params.zone_rate_table[labels] * alpha  # (n, n, m), pre-sparsity
    exponents = np.array(SPARSITY_EXPONENTS)[np.arange(m) % len(SPARSITY_EXPONENTS)]
    level_mult = params.sparsity_by_level[level] ** exponents  # per-category thinning
    counts = rng.poisson(base_rates * level_mult)
    totals = base_rates.sum(axis=(0, 1))
    p_self = totals / totals.sum()
    density = float(base_rates.sum() / (n * n))
    features = _context_rows(p_self, density, params.t_months, rng)
    return DatasetSample(
        sample_id=sample_id,
        configuration=LandUseConfiguration(grid=counts.astype(np.float64), n=n, m=m),
        zones=FunctionalZoneGrid(labels=labels, z_count=params.z_count),
        context=ContextGraph(features=features),
        green_level=GreenLevel(level=level),
    )


def synthesize_city(params: SynthesisParams) -> list[DatasetSample]:
    """Full synthetic corpus; bit-identical for identical params."""
    return [synthesize_sample(params, k) for k in range(params.k_samples)]


def assign_green_level(green_rates, k_index: int) -> GreenLevel:
    """Equal-frequency quintile binning; ties resolve to the lowest bin."""
    rates = np.asarray(green_rates, dtype=np.float64)
    if rates.ndim != 1 or rates.size == 0:
        raise ParameterError("green rates must be a non-empty vector")
    if not np.all(np.isfinite(rates)):
        raise ParameterError("green rates must be finite")
    if not 0 <= k_index < rates.size:
        raise ParameterError(f"k_index {k_index} outside [0, {rates.size})")
    rank_low = int(np.sum(rates < rates[k_index]))
    return GreenLevel(level=rank_low * LEVEL_COUNT // rates.size)


def cluster_zones(config: LandUseConfiguration, z_count: int, seed: int) -> FunctionalZoneGrid:
    """Stand-in zone labeler: k-means on per-cell category ratios plus
    min-max-scaled cell coordinates at weight 0.5."""
    n, m = config.n, config.m
    if z_count < 1:
        raise ParameterError("z_count must be at least 1")
    if z_count > n * n:
        raise ParameterError(f"z_count {z_count} exceeds cell count {n * n}")
    if z_count == 1:
        return FunctionalZoneGrid(labels=np.zeros((n, n), dtype=np.int64), z_count=1)

    cells = config.grid.reshape(n * n, m)
    totals = cells.sum(axis=1, keepdims=True)
    ratios = np.where(totals > 0, cells / np.maximum(totals, 1.0), 1.0 / m)
    coord = np.arange(n, dtype=np.float64) / max(n - 1, 1)
    rows = np.repeat(coord, n)
    cols = np.tile(coord, n)
    feats = np.hstack([ratios, 0.5 * rows[:, None], 0.5 * cols[:, None]])

    # Farthest-point init: random first center, then maxmin (ties to lowest
    # index) — deterministic and immune to same-block seeding.
    rng = Rng(seed, 0)
    chosen = [rng.randint_below(n * n)]
    nearest = ((feats - feats[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < z_count:
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, ((feats - feats[nxt]) ** 2).sum(axis=1))
    centroids = feats[chosen].copy()
    labels = np.zeros(n * n, dtype=np.int64)
    for _ in range(100):
        dists = ((feats[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(dists, axis=1)
        if np.array_equal(new_labels, labels) and _ > 0:
            break
        labels = new_labels
        for z in range(z_count):
            members = feats[labels == z]
            if len(members):
                centroids[z] = members.mean(axis=0)
    return FunctionalZoneGrid(labels=labels.reshape(n, n), z_count=z_count)


DATASET_FORMAT = "landgen-dataset"
DATASET_VERSION = 1


def _sample_record(sample: DatasetSample) -> dict:
    cfg = sample.configuration
    return {
        "id": sample.sample_id,
        "n": cfg.n,
        "m": cfg.m,
        "z": sample.zones.z_count,
        "level": sample.green_level.level,
        "config": np.rint(cfg.grid).astype(int).tolist(),
        "zones": sample.zones.labels.astype(int).tolist(),
        "context": {"features": sample.context.features.tolist()},
    }


def save_dataset(samples, path) -> None:
    samples = list(samples)
    with open(path, "w", encoding="utf-8") as fh:
        header = {"format": DATASET_FORMAT, "version": DATASET_VERSION, "count": len(samples)}
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for sample in samples:
            fh.write(json.dumps(_sample_record(sample), separators=(",", ":")) + "\n")


def load_dataset(path) -> list[DatasetSample]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DatasetFormatError("empty file", record_index=0)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"bad header: {exc}", record_index=0) from exc
    if header.get("format") != DATASET_FORMAT:
        raise DatasetFormatError(f"unknown format {header.get('format')!r}", record_index=0)
    if header.get("version") != DATASET_VERSION:
        raise DatasetFormatError(f"unsupported version {header.get('version')!r}", record_index=0)
    count = header.get("count")
    body = [ln for ln in lines[1:] if ln.strip()]
    if count != len(body):
        raise DatasetFormatError(
            f"header count {count} but found {len(body)} records", record_index=len(body)
        )
    samples = []
    for idx, line in enumerate(body, start=1):
        try:
            rec = json.loads(line)
            n, m, z = rec["n"], rec["m"], rec["z"]
            grid = np.asarray(rec["config"], dtype=np.float64)
            zones = np.asarray(rec["zones"], dtype=np.int64)
            features = np.asarray(rec["context"]["features"], dtype=np.float64)
            samples.append(
                DatasetSample(
                    sample_id=int(rec["id"]),
                    configuration=LandUseConfiguration(grid=grid, n=n, m=m),
                    zones=FunctionalZoneGrid(labels=zones, z_count=z),
                    context=ContextGraph(features=features),
                    green_level=GreenLevel(level=int(rec["level"])),
                )
            )
        except DatasetFormatError:
            raise
        except (KeyError, ValueError, TypeError, ParameterError, json.JSONDecodeError) as exc:
            raise DatasetFormatError(str(exc), record_index=idx) from exc
    return samples


def dims_of(samples: list[DatasetSample]) -> tuple[int, int, int, int]:
    """(n, m, z_count, t_months) shared by all samples."""
    if not samples:
        raise ParameterError("dataset is empty")
    first = samples[0]
    n, m = first.configuration.n, first.configuration.m
    z = first.zones.z_count
    width = first.context.features.shape[1]
    t = width - m - 9
    for s in samples:
        if (
            s.configuration.n != n
            or s.configuration.m != m
            or s.zones.z_count != z
            or s.context.features.shape[1] != width
        ):
            raise ParameterError("dataset samples have inconsistent dimensions")
    if feature_width(m, t) != width:
        raise ParameterError(f"context width {width} inconsistent with m={m}")
    return n, m, z, t
