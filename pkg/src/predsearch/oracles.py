"""Distance-prediction oracles.

Every oracle answers point queries with a value lambda(p) guaranteed to lie
in [c_lo*|pt|, c_hi*|pt|] for the hidden target t, is deterministic per
point (revisits return the identical value), and satisfies lambda(p)=0 only
at the target itself. Also provides the triangle-inequality inference that
tightens predictions from the query history.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from hashlib import blake2b

import numpy as np

from .geometry import Ball, Point, distance, origin
from .nets import dists_to, points_as_array, sample_in_ball

__all__ = [
    "ORACLE_KINDS",
    "OracleSpec",
    "PredictionOracle",
    "QueryHistory",
    "piecewise_prediction",
    "validate_oracle",
    "check_prediction_bounds",
    "infer_lipschitz",
    "refined_query",
]

ORACLE_KINDS = ("exact", "affine", "midpoint_open", "seeded_noise", "piecewise_lower_bound")


@dataclass(frozen=True)
class OracleSpec:
    """Parameters of a synthetic prediction function.

    kind:
      exact                  lambda(p) = |pt|
      affine                 lambda(p) = alpha * |pt|
      midpoint_open          lambda(p) = (1 + c_hi)/2 * |pt|
      seeded_noise           lambda(p) = u(p) * |pt|, u(p) a deterministic
                             pseudo-random factor in [c_lo, c_hi)
      piecewise_lower_bound  the piecewise family used by the adversarial
                             construction (requires c_hi > 2 and
                             |o t| <= 1/2 - 1/c_hi)
    """

    kind: str
    target: Point
    c_hi: float = 1.0
    c_lo: float = 1.0
    seed: int = 0
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ORACLE_KINDS:
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        object.__setattr__(self, "c_hi", float(self.c_hi))
        object.__setattr__(self, "c_lo", float(self.c_lo))
        if not (0.0 < self.c_lo <= 1.0 <= self.c_hi):
            raise ValueError(f"need 0 < c_lo <= 1 <= c_hi, got c_lo={self.c_lo}, c_hi={self.c_hi}")
        if self.kind == "affine":
            if self.alpha is None:
                raise ValueError("affine oracle needs alpha")
            object.__setattr__(self, "alpha", float(self.alpha))
            if not (self.c_lo <= self.alpha <= self.c_hi):
                raise ValueError(f"alpha={self.alpha} outside [{self.c_lo}, {self.c_hi}]")
        if self.kind == "piecewise_lower_bound":
            if self.c_hi <= 2.0:
                raise ValueError("piecewise_lower_bound requires c_hi > 2")
            dist_origin = distance(origin(self.target.dimension), self.target)
            limit = 0.5 - 1.0 / self.c_hi
            if dist_origin > limit:
                raise ValueError(
                    f"piecewise_lower_bound target must satisfy |o t| <= {limit}, got {dist_origin}"
                )

    @property
    def dimension(self) -> int:
        return self.target.dimension


def piecewise_prediction(target: Point, c: float, p: Point) -> float:
    """Piecewise prediction: c*|pt| inside B(t, 1/c), 1 inside B(o, 1/2)
    elsewhere, 2*|po| outside. Overlaps resolve in that order (closed tests).

    Shared by the piecewise oracle kind and the adaptive adversary so that
    query replays reproduce answers bit for bit.
    """
    dist_t = distance(p, target)
    if dist_t <= 1.0 / c:
        return c * dist_t
    dist_o = distance(p, origin(p.dimension))
    if dist_o <= 0.5:
        return 1.0
    return 2.0 * dist_o


def _noise_factor(seed: int, coords: tuple[float, ...], lo: float, hi: float) -> float:
    """Deterministic pseudo-random factor in [lo, hi), keyed on the exact
    coordinate bit patterns."""
    h = blake2b(digest_size=8, key=struct.pack("<q", seed))
    h.update(struct.pack(f"<{len(coords)}d", *coords))
    u = int.from_bytes(h.digest(), "little") / 2.0**64
    return lo + (hi - lo) * u


class PredictionOracle:
    """Queryable prediction source; owns the hidden target.

    Values are memoized on exact coordinates so revisits agree, and every
    query (including repeats) is appended to ``query_log``.
    """

    def __init__(self, spec: OracleSpec):
        self.spec = spec
        self.memo: dict[tuple[float, ...], float] = {}
        self.query_log: list[tuple[Point, float]] = []

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def c_factor(self) -> float:
        return self.spec.c_hi

    @property
    def query_count(self) -> int:
        return len(self.query_log)

    def query(self, p: Point) -> float:
        if p.dimension != self.dimension:
            raise ValueError(f"query dimension {p.dimension} != oracle dimension {self.dimension}")
        key = p.coords
        value = self.memo.get(key)
        if value is None:
            value = self._evaluate(p)
            self.memo[key] = value
        self.query_log.append((p, value))
        return value

    def _evaluate(self, p: Point) -> float:
        spec = self.spec
        if spec.kind == "piecewise_lower_bound":
            return piecewise_prediction(spec.target, spec.c_hi, p)
        dist = distance(p, spec.target)
        if spec.kind == "exact":
            return dist
        if spec.kind == "affine":
            return spec.alpha * dist
        if spec.kind == "midpoint_open":
            return (1.0 + spec.c_hi) / 2.0 * dist
        # seeded_noise
        return _noise_factor(spec.seed, p.coords, spec.c_lo, spec.c_hi) * dist


def check_prediction_bounds(
    query_fn,
    target: Point,
    c_lo: float,
    c_hi: float,
    probes: int,
    radius: float,
    seed: int,
    rel_slack: float = 1e-9,
) -> bool:
    """True iff c_lo*|pt| <= query_fn(p) <= c_hi*|pt| (within relative slack)
    on uniform probes in B(target, radius) plus the fixed probes o and t."""
    if probes < 1:
        raise ValueError("probes must be >= 1")
    rng = np.random.default_rng(seed)
    pts = sample_in_ball(rng, Ball(target, radius), probes)
    points = [Point(tuple(row)) for row in pts]
    points.append(origin(target.dimension))
    points.append(target)
    for p in points:
        value = query_fn(p)
        dist = distance(p, target)
        lo = c_lo * dist * (1.0 - rel_slack)
        hi = c_hi * dist * (1.0 + rel_slack)
        if not (lo <= value <= hi):
            return False
    return True


def validate_oracle(oracle: PredictionOracle, probes: int, radius: float, seed: int) -> bool:
    """Empirical validity certificate for an oracle against its own spec."""
    return check_prediction_bounds(
        oracle.query, oracle.spec.target, oracle.spec.c_lo, oracle.spec.c_hi, probes, radius, seed
    )


@dataclass
class QueryHistory:
    """Explored points with their prediction values."""

    points: list[Point] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise ValueError("points and values must have equal length")
        if any(v < 0.0 for v in self.values):
            raise ValueError("prediction values are nonnegative")

    def add(self, p: Point, value: float) -> None:
        if value < 0.0:
            raise ValueError("prediction values are nonnegative")
        self.points.append(p)
        self.values.append(float(value))

    def __len__(self) -> int:
        return len(self.points)


def infer_lipschitz(history: QueryHistory, p: Point) -> float:
    """Tightest triangle-inequality consequence of the history at p:
    min over recorded (p', v) of |pp'| + v. 1-Lipschitz in p."""
    if len(history) == 0:
        raise ValueError("history is empty")
    arr = points_as_array(history.points)
    totals = dists_to(arr, p.coords) + np.array(history.values, dtype=np.float64)
    return float(np.min(totals))


def refined_query(oracle: PredictionOracle, history: QueryHistory, p: Point) -> float:
    """min of the oracle's answer and the history inference; still a valid
    prediction whenever the oracle is."""
    direct = oracle.query(p)
    if len(history) == 0:
        return direct
    return min(direct, infer_lipschitz(history, p))
