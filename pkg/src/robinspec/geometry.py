"""Planar domains, inscribed polygons and P1 meshes of convex polygons."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
import math
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from robinspec.conformal import PowerSeriesMap

__all__ = [
    "Domain",
    "Disk",
    "Annulus",
    "Rectangle",
    "ConvexPolygon",
    "ConformalImage",
    "Mesh",
    "regular_polygon",
    "polygonize",
    "mesh_convex_polygon",
    "scaled_quantity",
    "domain_from_json",
    "write_mesh_csv",
    "MAX_LEVEL",
]

MAX_LEVEL = 6


class Domain:
    """Base class; subclasses provide ``area``, ``perimeter`` and ``to_json``."""

    area: float
    perimeter: float

    @property
    def equal_area_radius(self) -> float:
        return math.sqrt(self.area / math.pi)

    def isoperimetric_deficit(self) -> float:
        """L^2 - 4 pi A, nonnegative for every planar domain."""
        return self.perimeter**2 - 4.0 * math.pi * self.area

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Disk(Domain):
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @property
    def perimeter(self) -> float:
        return 2.0 * math.pi * self.radius

    def scaled(self, t: float) -> "Disk":
        return Disk(self.radius * t)

    def to_json(self) -> dict:
        return {"type": "disk", "radius": self.radius}


@dataclass(frozen=True)
class Annulus(Domain):
    """The annulus inner < r < 1."""

    inner: float

    def __post_init__(self):
        if not 0.0 < self.inner < 1.0:
            raise ValueError("inner radius must lie in (0, 1)")

    @property
    def area(self) -> float:
        return math.pi * (1.0 - self.inner**2)

    @property
    def perimeter(self) -> float:
        return 2.0 * math.pi * (1.0 + self.inner)

    def to_json(self) -> dict:
        return {"type": "annulus", "inner": self.inner}


@dataclass(frozen=True)
class Rectangle(Domain):
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("side lengths must be positive")

    @property
    def area(self) -> float:
        return self.a * self.b

    @property
    def perimeter(self) -> float:
        return 2.0 * (self.a + self.b)

    def scaled(self, t: float) -> "Rectangle":
        return Rectangle(self.a * t, self.b * t)

    def to_json(self) -> dict:
        return {"type": "rectangle", "a": self.a, "b": self.b}


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True, eq=False)
class ConvexPolygon(Domain):
    """Strictly convex polygon with counterclockwise vertices."""

    vertices: np.ndarray
    area: float = field(init=False)
    perimeter: float = field(init=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("need at least three 2-D vertices")
        edges = np.roll(v, -1, axis=0) - v
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        if np.any(lengths <= 1e-14 * lengths.max()):
            raise ValueError("repeated vertices")
        turn = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(edges[:, 0], -1)
        if np.any(turn <= 0):
            raise ValueError("vertices must be strictly convex and counterclockwise")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "area", _shoelace(v))
        object.__setattr__(self, "perimeter", float(lengths.sum()))

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        return ((v + w) * cross[:, None]).sum(axis=0) / (6.0 * self.area)

    def scaled(self, t: float) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices * t)

    def to_json(self) -> dict:
        return {"type": "polygon", "vertices": self.vertices.tolist()}

    def __eq__(self, other):
        return isinstance(other, ConvexPolygon) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())


@dataclass(frozen=True)
class ConformalImage(Domain):
    """Image of the unit disk under a power-series map."""

    map: "PowerSeriesMap"

    @property
    def area(self) -> float:
        return self.map.area()

    @property
    def perimeter(self) -> float:
        return self.map.perimeter()

    def to_json(self) -> dict:
        return {"type": "conformal", **self.map.to_json()}


def regular_polygon(n: int, circumradius: float = 1.0, rotation: float = 0.0) -> ConvexPolygon:
    theta = rotation + 2.0 * np.pi * np.arange(n) / n
    return ConvexPolygon(circumradius * np.column_stack([np.cos(theta), np.sin(theta)]))


def polygonize(domain: Domain, m: int = 64) -> ConvexPolygon:
    """Polygon the downstream solvers treat as the domain itself.

    Disks and conformal images become the m-gon through the boundary points at
    equally spaced angles; rectangles and polygons convert exactly (m unused).
    """
    if isinstance(domain, ConvexPolygon):
        return domain
    if isinstance(domain, Rectangle):
        a, b = domain.a, domain.b
        return ConvexPolygon([[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]])
    if m < 3:
        raise ValueError("need m >= 3")
    if isinstance(domain, Disk):
        return regular_polygon(m, domain.radius)
    if isinstance(domain, ConformalImage):
        w = domain.map(np.exp(2j * np.pi * np.arange(m) / m))
        try:
            return ConvexPolygon(np.column_stack([w.real, w.imag]))
        except ValueError as exc:
            raise ValueError(f"conformal image boundary is not convex: {exc}") from None
    raise ValueError(f"cannot polygonize {type(domain).__name__}")


@dataclass(frozen=True, eq=False)
class Mesh:
    """P1 triangulation; triangles counterclockwise, boundary edges outward."""

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    level: int = 0

    def __post_init__(self):
        for name in ("nodes", "triangles", "boundary_edges"):
            arr = np.array(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    def triangle_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def boundary_lengths(self) -> np.ndarray:
        d = self.nodes[self.boundary_edges[:, 1]] - self.nodes[self.boundary_edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def area(self) -> float:
        return float(self.triangle_areas().sum())

    @property
    def perimeter(self) -> float:
        return float(self.boundary_lengths().sum())

    @property
    def h(self) -> float:
        """Longest edge."""
        t = self.triangles
        p = self.nodes
        e = np.concatenate([p[t[:, 1]] - p[t[:, 0]], p[t[:, 2]] - p[t[:, 1]], p[t[:, 0]] - p[t[:, 2]]])
        return float(np.hypot(e[:, 0], e[:, 1]).max())

    def scaled(self, t: float) -> "Mesh":
        return Mesh(self.nodes * t, self.triangles, self.boundary_edges, self.level)


def _refine(mesh: Mesh) -> Mesh:
    """One red refinement: every triangle split into four through edge midpoints."""
    tri = mesh.triangles
    n = mesh.n_nodes
    local = np.stack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]], axis=1)  # (t, 3, 2)
    keys = np.sort(local.reshape(-1, 2), axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    mid_index = n + inverse.reshape(-1, 3)
    mids = 0.5 * (mesh.nodes[uniq[:, 0]] + mesh.nodes[uniq[:, 1]])
    nodes = np.vstack([mesh.nodes, mids])

    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab, bc, ca = mid_index[:, 0], mid_index[:, 1], mid_index[:, 2]
    triangles = np.concatenate(
        [
            np.column_stack([a, ab, ca]),
            np.column_stack([ab, b, bc]),
            np.column_stack([ca, bc, c]),
            np.column_stack([ab, bc, ca]),
        ]
    )

    be = mesh.boundary_edges
    be_keys = np.sort(be, axis=1)
    pos = np.searchsorted(uniq[:, 0] * (n + 1) + uniq[:, 1], be_keys[:, 0] * (n + 1) + be_keys[:, 1])
    m = n + pos
    boundary = np.column_stack([np.column_stack([be[:, 0], m]), np.column_stack([m, be[:, 1]])]).reshape(-1, 2)
    return Mesh(nodes, triangles, boundary, mesh.level + 1)


def mesh_convex_polygon(poly: ConvexPolygon, levels: int = 0) -> Mesh:
    """Centroid fan followed by ``levels`` uniform red refinements."""
    if not 0 <= levels <= MAX_LEVEL:
        raise ValueError(f"levels must be in 0..{MAX_LEVEL}")
    v = poly.vertices
    k = len(v)
    nodes = np.vstack([v, poly.centroid])
    idx = np.arange(k)
    triangles = np.column_stack([idx, (idx + 1) % k, np.full(k, k)])
    boundary = np.column_stack([idx, (idx + 1) % k])
    mesh = Mesh(nodes, triangles, boundary, 0)
    for _ in range(levels):
        mesh = _refine(mesh)
    return mesh


def scaled_quantity(domain, lam: float) -> float:
    """lambda * A(domain); the scale-invariant product when lambda uses alpha/L."""
    return lam * domain.area


def domain_from_json(obj: dict) -> Domain:
    kind = obj.get("type")
    if kind == "disk":
        return Disk(float(obj.get("radius", 1.0)))
    if kind == "annulus":
        return Annulus(float(obj["inner"]))
    if kind == "rectangle":
        return Rectangle(float(obj["a"]), float(obj["b"]))
    if kind == "polygon":
        return ConvexPolygon(obj["vertices"])
    if kind == "regular_polygon":
        return regular_polygon(int(obj["n"]), float(obj.get("circumradius", 1.0)))
    if kind == "conformal":
        from robinspec.conformal import PowerSeriesMap

        return ConformalImage(PowerSeriesMap.from_json(obj))
    raise ValueError(f"unknown domain type {kind!r}")


def write_mesh_csv(mesh: Mesh, directory: str | Path, stem: str = "mesh") -> tuple[Path, Path]:
    """Write ``<stem>_nodes.csv`` (id, x, y) and ``<stem>_triangles.csv`` (i, j, k)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    node_path = directory / f"{stem}_nodes.csv"
    tri_path = directory / f"{stem}_triangles.csv"
    with open(node_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "y"])
        for i, (x, y) in enumerate(mesh.nodes):
            w.writerow([i, repr(float(x)), repr(float(y))])
    with open(tri_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "k"])
        w.writerows(mesh.triangles.tolist())
    return node_path, tri_path
