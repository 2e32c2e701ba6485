"""Deterministic covering/separated point sets for balls in R^d.

Construction: candidate points on a cubic lattice intersected with the ball,
then a greedy selection of a maximal separated subset in lexicographic
candidate order. For a net with cover radius eps the lattice spacing is
(eps/3)/sqrt(d) (so candidates cover the ball within eps/3) and the greedy
separation is 2*eps/3, which certifies cover radius <= eps and cardinality
(r/eps)^d <= |N| <= (4.5*r/eps)^d for eps <= r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Ball, Point, distance, origin

__all__ = [
    "Net",
    "CoverReport",
    "CandidateCapExceeded",
    "DEFAULT_CANDIDATE_CAP",
    "build_net",
    "visit_order",
    "check_covering",
    "check_separation",
    "separated_set",
    "net_size_lower_bound",
    "net_size_upper_bound",
    "points_as_array",
    "sample_in_ball",
]

DEFAULT_CANDIDATE_CAP = 5_000_000

# Greedy blocking uses the KD-tree's arithmetic; the guard absorbs any
# last-ulp disagreement with our own distance so kept pairs always pass the
# exact separation check.
_BLOCK_GUARD = 1.0 + 1e-9


class CandidateCapExceeded(RuntimeError):
    """The lattice would need more candidates than the configured cap."""


@dataclass(frozen=True)
class Net:
    """Finite point set in a ball with covering / separation certificates.

    ``cover_radius`` is the claimed covering radius (checked empirically by
    :func:`check_covering`), ``separation`` the claimed pairwise minimum
    distance (checked exactly by :func:`check_separation`).
    """

    points: tuple[Point, ...]
    ball: Ball
    cover_radius: float
    separation: float

    @property
    def points_array(self) -> np.ndarray:
        arr = self.__dict__.get("_points_array")
        if arr is None:
            arr = points_as_array(self.points)
            arr.flags.writeable = False
            self.__dict__["_points_array"] = arr
        return arr

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class CoverReport:
    max_gap: float
    ok: bool
    samples: int


def points_as_array(points) -> np.ndarray:
    return np.array([p.coords for p in points], dtype=np.float64)


def dists_to(arr: np.ndarray, coords) -> np.ndarray:
    """Distances from every row of ``arr`` to ``coords``.

    Accumulates squared differences coordinate by coordinate, matching the
    scalar :func:`predsearch.geometry.distance` bit for bit.
    """
    acc = np.zeros(len(arr), dtype=np.float64)
    for k in range(arr.shape[1]):
        diff = arr[:, k] - coords[k]
        acc += diff * diff
    return np.sqrt(acc)


def _lattice_candidates(dimension: int, radius: float, spacing: float, cap: int) -> np.ndarray:
    """Cubic-lattice points (centered at the origin) inside the closed ball,
    in lexicographic order."""
    k_max = int(math.floor(radius / spacing)) if radius > 0 else 0
    per_axis = 2 * k_max + 1
    total = per_axis**dimension
    if total > cap:
        raise CandidateCapExceeded(
            f"{total} lattice candidates exceed the cap of {cap} "
            f"(d={dimension}, radius/spacing={radius / spacing:.3g})"
        )
    axis = np.arange(-k_max, k_max + 1, dtype=np.float64) * spacing
    mesh = np.meshgrid(*([axis] * dimension), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    keep = dists_to(pts, (0.0,) * dimension) <= radius
    return pts[keep]


def _greedy_separated(candidates: np.ndarray, separation: float) -> np.ndarray:
    """Maximal subset with pairwise distance > separation, greedily in
    candidate order. Every candidate ends up within separation*(1+1e-9) of a
    kept point."""
    if len(candidates) == 0:
        return candidates
    tree = cKDTree(candidates)
    blocked = np.zeros(len(candidates), dtype=bool)
    chosen: list[int] = []
    guard = separation * _BLOCK_GUARD
    for idx in range(len(candidates)):
        if blocked[idx]:
            continue
        chosen.append(idx)
        blocked[tree.query_ball_point(candidates[idx], guard)] = True
    return candidates[chosen]


@lru_cache(maxsize=64)
def _unit_net_points(dimension: int, eps: float, cap: int):
    """Net point coordinates for the unit ball at the origin.

    The construction is scale and translation invariant, so nets for
    arbitrary balls are affine images of these; caching them makes repeated
    builds with the same eps/radius ratio cheap.
    """
    spacing = (eps / 3.0) / math.sqrt(dimension)
    cands = _lattice_candidates(dimension, 1.0, spacing, cap)
    pts = _greedy_separated(cands, 2.0 * eps / 3.0)
    pts.flags.writeable = False
    return pts


def build_net(ball: Ball, eps: float, candidate_cap: int = DEFAULT_CANDIDATE_CAP) -> Net:
    """Deterministic eps-net for a closed ball.

    Returns a net with cover radius eps and separation 2*eps/3. Identical
    inputs produce identical point tuples. Raises ``ValueError`` for
    eps <= 0 or eps > radius and :class:`CandidateCapExceeded` when the
    lattice would be too large.
    """
    eps = float(eps)
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps!r}")
    if eps > ball.radius:
        raise ValueError(f"eps={eps!r} exceeds ball radius {ball.radius!r}")
    unit = _unit_net_points(ball.dimension, eps / ball.radius, candidate_cap)
    center = np.array(ball.center.coords, dtype=np.float64)
    pts = unit * ball.radius + center
    # The affine map can push a boundary point out of the float ball by one
    # ulp; re-filtering keeps closed membership exact.
    pts = pts[dists_to(pts, ball.center.coords) <= ball.radius]
    points = tuple(Point(tuple(row)) for row in pts)
    return Net(points=points, ball=ball, cover_radius=eps, separation=2.0 * eps / 3.0)


def net_size_lower_bound(radius: float, eps: float, dimension: int) -> float:
    """Volume floor (r/eps)^d that any eps-cover of the ball must meet."""
    return (radius / eps) ** dimension


def net_size_upper_bound(radius: float, eps: float, dimension: int) -> float:
    """Packing ceiling (4.5*r/eps)^d for the lattice-greedy construction."""
    return (4.5 * radius / eps) ** dimension


def visit_order(net: Net, start: Point) -> list[Point]:
    """Deterministic greedy nearest-neighbor ordering of the net points.

    Begins at the net point nearest to ``start``; ties are broken
    lexicographically by coordinates. The result is a permutation of
    ``net.points``.
    """
    if len(net.points) == 0:
        raise ValueError("cannot order an empty net")
    if start.dimension != net.ball.dimension:
        raise ValueError("start dimension does not match the net")
    arr = net.points_array
    n, d = arr.shape
    # Pre-sorting lexicographically makes "first argmin" the lex-smallest tie.
    lex = np.lexsort(tuple(arr[:, k] for k in reversed(range(d))))
    arr = arr[lex]
    remaining_dist = dists_to(arr, start.coords)
    order: list[int] = []
    for _ in range(n):
        current = int(np.argmin(remaining_dist))
        order.append(current)
        remaining_dist = dists_to(arr, arr[current])
        remaining_dist[order] = np.inf
    return [Point(tuple(arr[i])) for i in order]


def sample_in_ball(rng: np.random.Generator, ball: Ball, n: int) -> np.ndarray:
    """Uniform samples in the closed ball via rejection from the bounding cube."""
    if n < 1:
        raise ValueError("need at least one sample")
    d = ball.dimension
    out = np.empty((n, d), dtype=np.float64)
    got = 0
    batch = max(256, n)
    while got < n:
        cand = rng.uniform(-ball.radius, ball.radius, size=(batch, d))
        keep = cand[dists_to(cand, (0.0,) * d) <= ball.radius]
        take = min(len(keep), n - got)
        out[got : got + take] = keep[:take]
        got += take
    return out + np.array(ball.center.coords, dtype=np.float64)


def check_covering(net: Net, samples: int, seed: int) -> CoverReport:
    """Empirical covering certificate: max nearest-net-point distance over
    uniform samples in the ball, compared against the claimed cover radius."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if len(net.points) == 0:
        return CoverReport(max_gap=math.inf, ok=False, samples=samples)
    rng = np.random.default_rng(seed)
    probes = sample_in_ball(rng, net.ball, samples)
    gaps, _ = cKDTree(net.points_array).query(probes)
    max_gap = float(np.max(gaps))
    return CoverReport(max_gap=max_gap, ok=max_gap <= net.cover_radius, samples=samples)


def check_separation(net: Net) -> bool:
    """Exact all-pairs separation check (no tolerance)."""
    arr = net.points_array
    for i in range(len(arr) - 1):
        if np.min(dists_to(arr[i + 1 :], arr[i])) < net.separation:
            return False
    return True


def separated_set(
    ball: Ball,
    separation: float,
    spacing: float | None = None,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> tuple[Point, ...]:
    """Greedy maximal separated subset of a lattice inside the ball.

    Unlike :func:`build_net` this makes no covering claim; it is the
    primitive behind the adversarial target placement.
    """
    separation = float(separation)
    if separation <= 0.0:
        raise ValueError("separation must be > 0")
    d = ball.dimension
    if spacing is None:
        spacing = (separation / 3.0) / math.sqrt(d)
    cands = _lattice_candidates(d, ball.radius, spacing, candidate_cap)
    cands = cands + np.array(ball.center.coords, dtype=np.float64)
    cands = cands[dists_to(cands, ball.center.coords) <= ball.radius]
    pts = _greedy_separated(cands, separation)
    return tuple(Point(tuple(row)) for row in pts)
