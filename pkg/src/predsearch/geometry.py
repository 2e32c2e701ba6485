"""Elementary Euclidean geometry in R^d: points, balls, shells, polyline paths.

Dimension is a runtime value, all reals are 64-bit floats, and every set
membership test uses exact closed inequalities (no epsilon). All types are
immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "Point",
    "Ball",
    "SphericalShell",
    "PolyPath",
    "point",
    "origin",
    "distance",
    "contains",
    "shell_contains",
    "path_length",
]


@dataclass(frozen=True)
class Point:
    """Immutable point in R^d (d >= 1, all coordinates finite)."""

    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(x) for x in self.coords)
        if len(coords) == 0:
            raise ValueError("a point needs at least one coordinate")
        if not all(math.isfinite(x) for x in coords):
            raise ValueError(f"non-finite coordinate in {coords!r}")
        object.__setattr__(self, "coords", coords)

    @property
    def dimension(self) -> int:
        return len(self.coords)


def point(*coords: float) -> Point:
    """Convenience constructor: point(3, 4) == Point((3.0, 4.0))."""
    return Point(tuple(coords))


def origin(dimension: int) -> Point:
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    return Point((0.0,) * dimension)


@dataclass(frozen=True)
class Ball:
    """Closed ball {q : |center q| <= radius}."""

    center: Point
    radius: float

    def __post_init__(self):
        radius = float(self.radius)
        if not (math.isfinite(radius) and radius >= 0.0):
            raise ValueError(f"ball radius must be finite and >= 0, got {radius!r}")
        object.__setattr__(self, "radius", radius)

    @property
    def dimension(self) -> int:
        return self.center.dimension


@dataclass(frozen=True)
class SphericalShell:
    """Closed shell {q : r_inner <= |center q| <= r_outer}."""

    center: Point
    r_inner: float
    r_outer: float

    def __post_init__(self):
        r_inner = float(self.r_inner)
        r_outer = float(self.r_outer)
        if not (0.0 <= r_inner <= r_outer):
            raise ValueError(f"need 0 <= r_inner <= r_outer, got {r_inner!r}, {r_outer!r}")
        object.__setattr__(self, "r_inner", r_inner)
        object.__setattr__(self, "r_outer", r_outer)


@dataclass(frozen=True)
class PolyPath:
    """Polyline through >= 1 vertices, all of the same dimension."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        vertices = tuple(self.vertices)
        if len(vertices) == 0:
            raise ValueError("a path needs at least one vertex")
        d = vertices[0].dimension
        if any(v.dimension != d for v in vertices):
            raise ValueError("all path vertices must share one dimension")
        object.__setattr__(self, "vertices", vertices)

    @property
    def dimension(self) -> int:
        return self.vertices[0].dimension

    def __len__(self) -> int:
        return len(self.vertices)


def _check_same_dimension(p: Point, q: Point) -> None:
    if p.dimension != q.dimension:
        raise ValueError(f"dimension mismatch: {p.dimension} vs {q.dimension}")


def distance(p: Point, q: Point) -> float:
    """Euclidean distance |pq|.

    Squared differences are accumulated coordinate by coordinate; the
    vectorized helpers in the net module follow the same order so scalar and
    array code agree bit for bit.
    """
    _check_same_dimension(p, q)
    acc = 0.0
    for a, b in zip(p.coords, q.coords):
        diff = a - b
        acc += diff * diff
    return math.sqrt(acc)


def contains(ball: Ball, p: Point) -> bool:
    """Closed membership test: boundary points count as inside."""
    _check_same_dimension(ball.center, p)
    return distance(ball.center, p) <= ball.radius


def shell_contains(shell: SphericalShell, p: Point) -> bool:
    _check_same_dimension(shell.center, p)
    return shell.r_inner <= distance(shell.center, p) <= shell.r_outer


def path_length(path: PolyPath | Iterable[Point]) -> float:
    """Total length of a polyline; a single vertex has length 0."""
    vertices = path.vertices if isinstance(path, PolyPath) else tuple(path)
    total = 0.0
    for a, b in zip(vertices, vertices[1:]):
        total += distance(a, b)
    return total
