"""Exact convex bodies: boxes, ellipsoids, planar polygons and simplices.

Every body is an immutable, hashable value so that per-direction profiles can
be cached by the numerical modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .config import DEFAULT_QUAD, QuadConfig
from .specfun import unit_ball_volume

__all__ = [
    "BodyValidationError",
    "UnsupportedTransform",
    "ConditioningError",
    "BodySpec",
    "AffineMap",
    "IsotropicData",
    "box",
    "cube",
    "ellipsoid",
    "ball",
    "polygon",
    "simplex",
    "regular_polygon",
    "random_polygon",
    "volume",
    "centroid",
    "support",
    "contains",
    "apply_affine",
    "translate",
    "sample_uniform",
    "rejection_sample",
    "second_moments",
    "isotropic_position",
    "difference_body_radial",
    "difference_body_support",
    "radial_function",
    "body_from_json",
    "body_to_json",
    "BODY_SCHEMA",
]


class BodyValidationError(ValueError):
    """Invalid body description; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics: Sequence[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class UnsupportedTransform(ValueError):
    """The affine image of the body has no exact representation."""


class ConditioningError(ValueError):
    """Raised when a covariance matrix is numerically singular."""


def _as_tuple(a) -> tuple:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        return tuple(float(v) for v in arr)
    return tuple(tuple(float(v) for v in row) for row in arr)


@dataclass(frozen=True)
class BodySpec:
    """A convex body of one of four exact kinds.

    ``box`` is the centred box with the given half widths, ``ellipsoid`` is
    ``matrix @ B + center``, ``polygon`` is a planar polygon with
    counterclockwise strictly convex vertices and ``simplex`` is the convex
    hull of n+1 affinely independent points.
    """

    kind: str
    half_widths: tuple[float, ...] | None = None
    matrix: tuple[tuple[float, ...], ...] | None = None
    center: tuple[float, ...] | None = None
    vertices: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        problems = _validate(self)
        if problems:
            raise BodyValidationError(problems)

    @property
    def n(self) -> int:
        if self.kind == "box":
            return len(self.half_widths)
        if self.kind == "ellipsoid":
            return len(self.matrix)
        return len(self.vertices[0])

    @cached_property
    def vertex_array(self) -> np.ndarray:
        """Vertices for polytopes (boxes in n <= 3 included)."""
        if self.kind in ("polygon", "simplex"):
            return np.asarray(self.vertices, dtype=float)
        if self.kind == "box":
            a = np.asarray(self.half_widths)
            signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * self.n, indexing="ij")).reshape(self.n, -1).T
            return signs * a
        raise ValueError("ellipsoids have no vertices")

    @cached_property
    def matrix_array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    @cached_property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def is_polytope(self) -> bool:
        return self.kind != "ellipsoid"

    def label(self) -> str:
        if self.kind == "box":
            return "box(" + ",".join(f"{a:g}" for a in self.half_widths) + ")"
        if self.kind == "ellipsoid":
            return f"ellipsoid(n={self.n})"
        return f"{self.kind}({len(self.vertices)} vertices)"


def _validate(b: BodySpec) -> list[str]:
    out: list[str] = []
    if b.kind == "box":
        if not b.half_widths:
            return ["box requires half_widths"]
        if any(not (math.isfinite(a) and a > 0) for a in b.half_widths):
            out.append("box half_widths must be positive and finite")
    elif b.kind == "ellipsoid":
        if b.matrix is None or b.center is None:
            return ["ellipsoid requires matrix and center"]
        m = np.asarray(b.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            return ["ellipsoid matrix must be square"]
        if len(b.center) != m.shape[0]:
            out.append("ellipsoid center dimension mismatch")
        if not np.all(np.isfinite(m)):
            out.append("ellipsoid matrix must be finite")
        elif np.linalg.det(m) <= 0:
            out.append("ellipsoid matrix must have positive determinant")
    elif b.kind == "polygon":
        if b.vertices is None or len(b.vertices) < 3:
            return ["polygon requires at least 3 vertices"]
        v = np.asarray(b.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            return ["polygon vertices must be 2-vectors"]
        if not np.all(np.isfinite(v)):
            return ["polygon vertices must be finite"]
        scale = float(np.max(np.abs(v - v.mean(axis=0)))) or 1.0
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross <= 1e-12 * scale**2):
            out.append("polygon vertices must be strictly convex and counterclockwise")
    elif b.kind == "simplex":
        if b.vertices is None:
            return ["simplex requires vertices"]
        v = np.asarray(b.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
            return ["simplex requires n+1 vertices in dimension n"]
        if abs(np.linalg.det(v[1:] - v[0])) <= 1e-12 * max(1.0, float(np.max(np.abs(v)))) ** v.shape[1]:
            out.append("simplex vertices must be affinely independent")
    else:
        out.append(f"unknown body type {b.kind!r}")
    return out


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def box(half_widths: Sequence[float]) -> BodySpec:
    return BodySpec("box", half_widths=_as_tuple(half_widths))


def cube(n: int, side: float = 1.0) -> BodySpec:
    """The centred cube of the given side; side 1 gives Q_n."""
    return box([side / 2.0] * n)


def ellipsoid(matrix, center=None) -> BodySpec:
    m = np.asarray(matrix, dtype=float)
    c = np.zeros(m.shape[0]) if center is None else center
    return BodySpec("ellipsoid", matrix=_as_tuple(m), center=_as_tuple(c))


def ball(n: int, radius: float = 1.0) -> BodySpec:
    return ellipsoid(radius * np.eye(n))


def polygon(vertices) -> BodySpec:
    return BodySpec("polygon", vertices=_as_tuple(vertices))


def simplex(vertices) -> BodySpec:
    return BodySpec("simplex", vertices=_as_tuple(vertices))


def regular_polygon(m: int, radius: float = 1.0, phase: float = 0.0) -> BodySpec:
    t = phase + 2.0 * np.pi * np.arange(m) / m
    return polygon(np.column_stack([radius * np.cos(t), radius * np.sin(t)]))


def random_polygon(m: int, seed: int) -> BodySpec:
    """Convex hull of random points on a perturbed circle with exactly m vertices."""
    rng = np.random.default_rng(seed)
    while True:
        t = np.sort(rng.uniform(0.0, 2.0 * np.pi, m))
        r = rng.uniform(0.7, 1.0, m)
        pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
        hull = ConvexHull(pts)
        if len(hull.vertices) == m:
            v = pts[hull.vertices]  # counterclockwise for 2-D hulls
            gaps = np.diff(np.concatenate([t, t[:1] + 2 * np.pi]))
            if np.max(gaps) < np.pi * 0.9:
                return polygon(v - _polygon_centroid(v))


# ---------------------------------------------------------------------------
# Elementary geometry
# ---------------------------------------------------------------------------


def _polygon_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _polygon_centroid(v: np.ndarray) -> np.ndarray:
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = 0.5 * cr.sum()
    return np.array([((x + xn) * cr).sum(), ((y + yn) * cr).sum()]) / (6.0 * a)


def volume(body: BodySpec) -> float:
    """Exact n-volume."""
    if body.kind == "box":
        return float(np.prod(2.0 * np.asarray(body.half_widths)))
    if body.kind == "ellipsoid":
        return abs(float(np.linalg.det(body.matrix_array))) * unit_ball_volume(body.n)
    if body.kind == "polygon":
        return _polygon_area(body.vertex_array)
    v = body.vertex_array
    return abs(float(np.linalg.det(v[1:] - v[0]))) / math.factorial(body.n)


def centroid(body: BodySpec) -> np.ndarray:
    if body.kind == "box":
        return np.zeros(body.n)
    if body.kind == "ellipsoid":
        return body.center_array.copy()
    if body.kind == "polygon":
        return _polygon_centroid(body.vertex_array)
    return body.vertex_array.mean(axis=0)


def support(body: BodySpec, direction) -> float:
    """Support function h_K(direction)."""
    u = np.asarray(direction, dtype=float)
    if body.kind == "box":
        return float(np.dot(np.asarray(body.half_widths), np.abs(u)))
    if body.kind == "ellipsoid":
        return float(np.linalg.norm(body.matrix_array.T @ u) + body.center_array @ u)
    return float(np.max(body.vertex_array @ u))


def contains(body: BodySpec, x, slack: float = 0.0) -> bool:
    return bool(_contains_many(body, np.atleast_2d(np.asarray(x, dtype=float)), slack)[0])


def _contains_many(body: BodySpec, pts: np.ndarray, slack: float = 0.0) -> np.ndarray:
    if body.kind == "box":
        return np.all(np.abs(pts) <= np.asarray(body.half_widths) + slack, axis=1)
    if body.kind == "ellipsoid":
        y = np.linalg.solve(body.matrix_array, (pts - body.center_array).T).T
        return np.sum(y * y, axis=1) <= 1.0 + slack
    if body.kind == "polygon":
        v = body.vertex_array
        e = np.roll(v, -1, axis=0) - v
        rel = pts[:, None, :] - v[None, :, :]
        cross = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
        return np.all(cross >= -slack, axis=1)
    v = body.vertex_array
    lam = np.linalg.solve((v[1:] - v[0]).T, (pts - v[0]).T).T
    bary = np.column_stack([1.0 - lam.sum(axis=1), lam])
    return np.all(bary >= -slack, axis=1)


@dataclass(frozen=True)
class AffineMap:
    """x -> linear @ x + shift."""

    linear: tuple[tuple[float, ...], ...]
    shift: tuple[float, ...]

    @staticmethod
    def of(linear, shift=None) -> "AffineMap":
        a = np.asarray(linear, dtype=float)
        b = np.zeros(a.shape[0]) if shift is None else np.asarray(shift, dtype=float)
        return AffineMap(_as_tuple(a), _as_tuple(b))

    @property
    def A(self) -> np.ndarray:
        return np.asarray(self.linear, dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.asarray(self.shift, dtype=float)

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.A.T + self.b

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self after inner."""
        return AffineMap.of(self.A @ inner.A, self.A @ inner.b + self.b)

    def inverse(self) -> "AffineMap":
        ai = np.linalg.inv(self.A)
        return AffineMap.of(ai, -ai @ self.b)


def apply_affine(amap: AffineMap, body: BodySpec) -> BodySpec:
    """Image of the body under an invertible affine map."""
    a, b = amap.A, amap.b
    det = float(np.linalg.det(a))
    if abs(det) < 1e-300:
        raise UnsupportedTransform("affine map is singular")
    if body.kind == "ellipsoid":
        m = a @ body.matrix_array
        if det < 0:
            # T B = T R B for the reflection R; keep a positive determinant
            m = m.copy()
            m[:, 0] = -m[:, 0]
        return ellipsoid(m, a @ body.center_array + b)
    if body.kind == "box":
        if np.allclose(a, np.diag(np.diag(a)), atol=0.0) and not np.any(b):
            return box(np.abs(np.diag(a)) * np.asarray(body.half_widths))
        if body.n == 2:
            return apply_affine(amap, polygon(_box_polygon_vertices(body)))
        if body.n == 1:
            return apply_affine(amap, simplex([[-body.half_widths[0]], [body.half_widths[0]]]))
        raise UnsupportedTransform("general affine images of boxes are only exact in dimension <= 2")
    v = body.vertex_array @ a.T + b
    if body.kind == "polygon":
        return polygon(v if det > 0 else v[::-1])
    return simplex(v)


def translate(body: BodySpec, shift) -> BodySpec:
    return apply_affine(AffineMap.of(np.eye(body.n), shift), body)


def _box_polygon_vertices(body: BodySpec) -> np.ndarray:
    a1, a2 = body.half_widths
    return np.array([[-a1, -a2], [a1, -a2], [a1, a2], [-a1, a2]])


def _bounding_box(body: BodySpec) -> tuple[np.ndarray, np.ndarray]:
    if body.kind == "ellipsoid":
        half = np.linalg.norm(body.matrix_array, axis=1)
        return body.center_array - half, body.center_array + half
    v = body.vertex_array
    return v.min(axis=0), v.max(axis=0)


def rejection_sample(body: BodySpec, count: int, seed: int) -> tuple[np.ndarray, float]:
    """Uniform samples by rejection from the bounding box, with the acceptance rate."""
    rng = np.random.default_rng(seed)
    lo, hi = _bounding_box(body)
    out = []
    drawn = accepted = 0
    while accepted < count:
        batch = max(1024, int(1.5 * (count - accepted)) + 16)
        pts = rng.uniform(lo, hi, size=(batch, body.n))
        keep = pts[_contains_many(body, pts)]
        drawn += batch
        accepted += len(keep)
        out.append(keep)
    pts = np.concatenate(out)[:count]
    return pts, accepted / drawn


def sample_uniform(body: BodySpec, count: int, seed: int) -> np.ndarray:
    """Deterministic uniform samples from the body."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    if body.kind == "box":
        a = np.asarray(body.half_widths)
        return rng.uniform(-a, a, size=(count, body.n))
    if body.kind == "simplex":
        w = rng.dirichlet(np.ones(body.n + 1), size=count)
        return w @ body.vertex_array
    return rejection_sample(body, count, seed)[0]


def second_moments(body: BodySpec) -> tuple[np.ndarray, np.ndarray]:
    """Exact centroid and covariance (1/V) int (x-c)(x-c)^T dx."""
    c = centroid(body)
    if body.kind == "box":
        return c, np.diag(np.asarray(body.half_widths) ** 2 / 3.0)
    if body.kind == "ellipsoid":
        t = body.matrix_array
        return c, t @ t.T / (body.n + 2.0)
    if body.kind == "polygon":
        v = body.vertex_array - c
        total = np.zeros((2, 2))
        area = 0.0
        for i in range(len(v)):
            tri = np.array([np.zeros(2), v[i], v[(i + 1) % len(v)]])
            a, m = _simplex_moments(tri)
            total += m
            area += a
        return c, total / area
    a, m = _simplex_moments(body.vertex_array - c)
    return c, m / a


def _simplex_moments(v: np.ndarray) -> tuple[float, np.ndarray]:
    """Signed-free volume and int x x^T over a simplex with vertex rows v."""
    n = v.shape[1]
    vol = abs(float(np.linalg.det(v[1:] - v[0]))) / math.factorial(n)
    s = v.sum(axis=0)
    m = vol / ((n + 1) * (n + 2)) * (v.T @ v + np.outer(s, s))
    return vol, m


@dataclass(frozen=True)
class IsotropicData:
    normalizing_map: AffineMap
    L_K: float


def isotropic_position(body: BodySpec, quad: QuadConfig = DEFAULT_QUAD) -> IsotropicData:
    """Volume-one affine image with isotropic second moments.

    The map is x -> s Cov^(-1/2) (x - centroid) with s fixing the volume.
    """
    c, cov = second_moments(body)
    w, q = np.linalg.eigh(cov)
    if w.min() <= 0 or w.max() / w.min() > 1e12:
        raise ConditioningError("covariance matrix is numerically singular")
    inv_sqrt = q @ np.diag(w**-0.5) @ q.T
    vol = volume(body)
    s = (math.sqrt(float(np.prod(w))) / vol) ** (1.0 / body.n)
    a = s * inv_sqrt
    return IsotropicData(AffineMap.of(a, -a @ c), s)


# ---------------------------------------------------------------------------
# Radial functions and difference bodies
# ---------------------------------------------------------------------------


def _hull_equations(points: np.ndarray) -> np.ndarray:
    if points.shape[1] == 1:
        lo, hi = points.min(), points.max()
        return np.array([[1.0, -hi], [-1.0, lo]])
    return ConvexHull(points).equations


def _polytope_radial(eqs: np.ndarray, u: np.ndarray) -> float:
    # facets: normal . x + offset <= 0, origin inside
    dots = eqs[:, :-1] @ u
    pos = dots > 1e-15
    return float(np.min(-eqs[pos, -1] / dots[pos]))


def radial_function(body: BodySpec, direction) -> float:
    """rho_K(u) = sup{t > 0 : t u in K}; requires the origin in the interior."""
    u = np.asarray(direction, dtype=float)
    if body.kind == "box":
        return float(1.0 / np.max(np.abs(u) / np.asarray(body.half_widths)))
    if body.kind == "ellipsoid":
        t = body.matrix_array
        ti_u = np.linalg.solve(t, u)
        ti_c = np.linalg.solve(t, body.center_array)
        # |t T^-1 u - T^-1 c| = 1
        a = ti_u @ ti_u
        bq = -2.0 * ti_u @ ti_c
        cq = ti_c @ ti_c - 1.0
        return float((-bq + math.sqrt(bq * bq - 4 * a * cq)) / (2 * a))
    return _polytope_radial(_body_equations(body), u)


_EQ_CACHE: dict = {}


def _body_equations(body: BodySpec) -> np.ndarray:
    key = ("K", body)
    if key not in _EQ_CACHE:
        _EQ_CACHE[key] = _hull_equations(body.vertex_array)
    return _EQ_CACHE[key]


def _difference_equations(body: BodySpec) -> np.ndarray:
    key = ("D", body)
    if key not in _EQ_CACHE:
        v = body.vertex_array
        diffs = (v[:, None, :] - v[None, :, :]).reshape(-1, body.n)
        _EQ_CACHE[key] = _hull_equations(diffs)
    return _EQ_CACHE[key]


def difference_body_radial(body: BodySpec, direction) -> float:
    """Radial function of DK = K - K, i.e. sup{t : g_K(t u) > 0}."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    if body.kind == "box":
        return float(1.0 / np.max(np.abs(u) / (2.0 * np.asarray(body.half_widths))))
    if body.kind == "ellipsoid":
        return float(2.0 / np.linalg.norm(np.linalg.solve(body.matrix_array, u)))
    return _polytope_radial(_difference_equations(body), u)


def difference_body_support(body: BodySpec, direction) -> float:
    """Support function of DK, h_K(u) + h_K(-u); its reciprocal is rho of (DK)°."""
    u = np.asarray(direction, dtype=float)
    return support(body, u) + support(body, -u)


def projection_volume(body: BodySpec, direction) -> float:
    """(n-1)-volume of the orthogonal projection of K onto u-perp; 1/rho of the polar projection body."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    if body.n == 1:
        return 1.0
    if body.kind == "ellipsoid":
        t = body.matrix_array
        return float(unit_ball_volume(body.n - 1) * abs(np.linalg.det(t)) * np.linalg.norm(np.linalg.solve(t, u)))
    # Cauchy: half the sum over boundary facets of area times |cos|
    hull = ConvexHull(body.vertex_array)
    total = 0.0
    for simplex, eq in zip(hull.simplices, hull.equations):
        pts = hull.points[simplex]
        edges = pts[1:] - pts[0]
        area = math.sqrt(abs(np.linalg.det(edges @ edges.T))) / math.factorial(body.n - 1)
        total += area * abs(eq[:-1] @ u)
    return 0.5 * total


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

BODY_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fmb body",
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "type": {"const": "box"},
                "half_widths": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
            },
            "required": ["type", "half_widths"],
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "ellipsoid"},
                "matrix": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "center": {"type": "array", "items": {"type": "number"}},
            },
            "required": ["type", "matrix", "center"],
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "polygon"},
                "vertices": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    "minItems": 3,
                },
            },
            "required": ["type", "vertices"],
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "simplex"},
                "vertices": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
            },
            "required": ["type", "vertices"],
        },
    ],
}


def body_to_json(body: BodySpec) -> dict:
    if body.kind == "box":
        return {"type": "box", "half_widths": list(body.half_widths)}
    if body.kind == "ellipsoid":
        return {"type": "ellipsoid", "matrix": [list(r) for r in body.matrix], "center": list(body.center)}
    return {"type": body.kind, "vertices": [list(r) for r in body.vertices]}


def body_from_json(data: Any) -> BodySpec:
    """Parse and validate a body description."""
    if not isinstance(data, dict):
        raise BodyValidationError(["body must be a JSON object"])
    kind = data.get("type")
    required = {
        "box": ["half_widths"],
        "ellipsoid": ["matrix", "center"],
        "polygon": ["vertices"],
        "simplex": ["vertices"],
    }
    if kind not in required:
        raise BodyValidationError([f"'type' must be one of {sorted(required)}; got {kind!r}"])
    missing = [k for k in required[kind] if k not in data]
    extra = [k for k in data if k not in required[kind] and k != "type"]
    problems = [f"missing field {k!r}" for k in missing] + [f"unknown field {k!r}" for k in extra]
    if problems:
        raise BodyValidationError(problems)
    try:
        if kind == "box":
            return BodySpec("box", half_widths=_as_tuple(data["half_widths"]))
        if kind == "ellipsoid":
            return BodySpec("ellipsoid", matrix=_as_tuple(data["matrix"]), center=_as_tuple(data["center"]))
        return BodySpec(kind, vertices=_as_tuple(data["vertices"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BodyValidationError):
            raise
        raise BodyValidationError([f"malformed {kind}: {exc}"]) from exc
