"""Surrounding-context feature extraction and the 8-vertex ring graph.

Each target square has eight neighboring squares; per neighbor we collect
four feature families (monthly house-price deltas, POI category ratios, and
five public / five private transport statistics) and concatenate them into
one row of the ring graph's feature matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError

RING_SIZE = 8
DIRECTIONS = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
TRANSPORT_WIDTH = 5


def feature_width(m: int, t_months: int) -> int:
    """Row width (t-1) + m + 5 + 5 = m + t + 9."""
    return m + t_months + 9


@dataclass(frozen=True)
class ContextFeatureRow:
    """One neighbor's features, pre-concatenation."""

    price_change: np.ndarray  # length T-1
    poi_ratio: np.ndarray  # length M, sums to 1
    public_transport: np.ndarray  # length 5
    private_transport: np.ndarray  # length 5

    def concat(self) -> np.ndarray:
        return np.concatenate(
            [self.price_change, self.poi_ratio, self.public_transport, self.private_transport]
        )


@dataclass(frozen=True)
class ContextGraph:
    """Ring of 8 attributed vertices in N, NE, E, SE, S, SW, W, NW order."""

    features: np.ndarray  # (8, m + t + 9)
    adjacency: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.features.shape[0] != RING_SIZE:
            raise ShapeError(f"context graph needs {RING_SIZE} rows, got {self.features.shape[0]}")
        if self.adjacency is None:
            object.__setattr__(self, "adjacency", ring_adjacency())


def ring_adjacency() -> np.ndarray:
    """Symmetric 0/1 ring: vertex i connects to (i±1) mod 8."""
    adj = np.zeros((RING_SIZE, RING_SIZE), dtype=np.float64)
    for i in range(RING_SIZE):
        adj[i, (i + 1) % RING_SIZE] = 1.0
        adj[i, (i - 1) % RING_SIZE] = 1.0
    return adj


def house_price_change(prices: np.ndarray) -> np.ndarray:
    """Month-over-month deltas: out[t] = prices[t+1] - prices[t]."""
    prices = np.asarray(prices, dtype=np.float64)
    if prices.ndim != 1 or prices.size < 2:
        raise ParameterError("price series needs at least two months")
    if not np.all(np.isfinite(prices)):
        raise ParameterError("price series must be finite")
    return np.diff(prices)


def poi_ratio(category_counts: np.ndarray) -> np.ndarray:
    """Counts normalized to a probability vector; uniform when the context is empty."""
    counts = np.asarray(category_counts, dtype=np.float64)
    if counts.ndim != 1 or counts.size == 0:
        raise ParameterError("category counts must be a non-empty vector")
    if np.any(counts < 0):
        raise ParameterError("category counts must be non-negative")
    total = counts.sum()
    if total == 0.0:
        return np.full(counts.size, 1.0 / counts.size)
    return counts / total


@dataclass(frozen=True)
class BusEvent:
    day: int
    kind: str  # leave | arrive | transit
    price: float


@dataclass(frozen=True)
class TaxiTrip:
    day: int
    kind: str  # leave | arrive | transit
    velocity: float
    distance: float


_KINDS = ("leave", "arrive", "transit")


def _daily_rates(events, days: int) -> list[float]:
    if days <= 0:
        raise ParameterError("observation window must cover at least one day")
    counts = {k: 0 for k in _KINDS}
    for ev in events:
        if ev.kind not in counts:
            raise ParameterError(f"unknown event kind {ev.kind!r}")
        counts[ev.kind] += 1
    return [counts[k] / days for k in _KINDS]


def public_transport_features(
    bus_events, days: int, stop_count: int = 0, area_m2: float = 1_000_000.0
) -> np.ndarray:
    """[leave/day, arrive/day, transit/day, stops per m^2, mean trip price].

    No events yields the all-zero vector.
    """
    bus_events = list(bus_events)
    if not bus_events:
        return np.zeros(TRANSPORT_WIDTH)
    rates = _daily_rates(bus_events, days)
    mean_price = float(np.mean([ev.price for ev in bus_events]))
    return np.array(rates + [stop_count / area_m2, mean_price])


def private_transport_features(taxi_trips, days: int) -> np.ndarray:
    """[leave/day, arrive/day, transit/day, mean velocity, mean distance]."""
    taxi_trips = list(taxi_trips)
    if not taxi_trips:
        return np.zeros(TRANSPORT_WIDTH)
    rates = _daily_rates(taxi_trips, days)
    mean_velocity = float(np.mean([t.velocity for t in taxi_trips]))
    mean_distance = float(np.mean([t.distance for t in taxi_trips]))
    return np.array(rates + [mean_velocity, mean_distance])


def build_context_graph(rows) -> ContextGraph:
    """Stack 8 directional rows into the attributed ring graph."""
    rows = list(rows)
    if len(rows) != RING_SIZE:
        raise ParameterError(f"expected {RING_SIZE} context rows, got {len(rows)}")
    stacked = [r.concat() for r in rows]
    widths = {v.size for v in stacked}
    if len(widths) != 1:
        raise ParameterError(f"context rows have inconsistent widths {sorted(widths)}")
    return ContextGraph(features=np.vstack(stacked))


@dataclass(frozen=True)
class FeatureScaler:
    """Per-column standardization fitted on the training contexts."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, feature_matrices) -> "FeatureScaler":
        stacked = np.vstack([np.asarray(f, dtype=np.float64) for f in feature_matrices])
        mean = stacked.mean(axis=0)
        std = stacked.std(axis=0)
        std = np.where(std > 0.0, std, 1.0)  # constant columns pass through
        return cls(mean=mean, std=std)

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.shape[-1] != self.mean.size:
            raise ShapeError(
                f"feature width {features.shape[-1]} does not match scaler width {self.mean.size}"
            )
        return (features - self.mean) / self.std
