"""Covariogram, parallel section function and the Radon transform of g_K.

For polytopes every quantity along a line is piecewise polynomial, so the
profiles below are stored as :class:`PiecewisePoly` objects whose knots are
the exact combinatorial breakpoints. Ellipsoids use the closed-form lens
volume of the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .bodies import BodySpec, _body_equations, difference_body_radial, polygon, sample_uniform, volume
from .config import DEFAULT_QUAD, QuadConfig
from .piecewise import PiecewisePoly, fit_piecewise
from .specfun import unit_ball_volume

__all__ = [
    "CovariogramValue",
    "covariogram",
    "covariogram_mc",
    "parallel_section",
    "radon_covariogram",
    "RayProfile",
    "ray_profile",
    "section_profile",
    "radon_profile",
    "ball_lens_fraction",
    "ball_section",
    "polygon_intersection_area",
]


@dataclass(frozen=True)
class CovariogramValue:
    value: float
    exact: bool
    std_err: float = 0.0


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _planar(body: BodySpec) -> BodySpec | None:
    """The body as a polygon when it is planar and polygonal."""
    if body.n != 2 or body.kind == "ellipsoid":
        return None
    if body.kind == "polygon":
        return body
    v = body.vertex_array
    if body.kind == "box":
        a1, a2 = body.half_widths
        return polygon([[-a1, -a2], [a1, -a2], [a1, a2], [-a1, a2]])
    # triangle: make it counterclockwise
    e1, e2 = v[1] - v[0], v[2] - v[0]
    d = e1[0] * e2[1] - e1[1] * e2[0]
    return polygon(v if d > 0 else v[::-1])


def _clip(subject: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Keep the part of a convex polygon left of the directed line a -> b."""
    if len(subject) == 0:
        return subject
    e = b - a
    side = e[0] * (subject[:, 1] - a[1]) - e[1] * (subject[:, 0] - a[0])
    out = []
    m = len(subject)
    for i in range(m):
        p, q = subject[i], subject[(i + 1) % m]
        sp, sq = side[i], side[(i + 1) % m]
        if sp >= 0:
            out.append(p)
        if (sp >= 0) != (sq >= 0):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.asarray(out) if out else np.zeros((0, 2))


def _shoelace(v: np.ndarray) -> float:
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_intersection_area(p: np.ndarray, q: np.ndarray) -> float:
    """Area of the intersection of two counterclockwise convex polygons."""
    out = np.asarray(p, dtype=float)
    m = len(q)
    for i in range(m):
        out = _clip(out, q[i], q[(i + 1) % m])
        if len(out) == 0:
            return 0.0
    return max(_shoelace(out), 0.0)


def _halfspace_volume(eqs: np.ndarray) -> float:
    """Volume of {y : eqs[:, :-1] y + eqs[:, -1] <= 0} (bounded)."""
    a, b = eqs[:, :-1], eqs[:, -1]
    # rows with a vanishing normal are constant constraints: satisfied or empty
    flat = np.linalg.norm(a, axis=1) <= 1e-12
    if np.any(b[flat] > 1e-12):
        return 0.0
    a, b = a[~flat], b[~flat]
    dim = a.shape[1]
    if dim == 1:
        col = a[:, 0]
        hi = np.min(-b[col > 0] / col[col > 0]) if np.any(col > 0) else np.inf
        lo = np.max(-b[col < 0] / col[col < 0]) if np.any(col < 0) else -np.inf
        return max(float(hi - lo), 0.0)
    norms = np.linalg.norm(a, axis=1)
    # Chebyshev centre: maximise r subject to a y + r |a| <= -b
    res = optimize.linprog(
        np.r_[np.zeros(dim), -1.0],
        A_ub=np.column_stack([a, norms]),
        b_ub=-b,
        bounds=[(None, None)] * dim + [(0, None)],
        method="highs",
    )
    if res.status != 0:
        return 0.0
    radius = res.x[-1]
    scale = float(np.max(np.abs(b) / norms)) or 1.0
    if radius <= 1e-10 * scale:
        return 0.0
    try:
        pts = HalfspaceIntersection(eqs, res.x[:-1]).intersections
        return float(ConvexHull(pts).volume)
    except QhullError:
        return 0.0


def ball_lens_fraction(n: int, u):
    """g_B(x) / omega_n for |x| = u: the regularised incomplete beta form."""
    u = np.asarray(u, dtype=float)
    z = np.clip(1.0 - 0.25 * u * u, 0.0, 1.0)
    return special.betainc(0.5 * (n + 1), 0.5, z)


def ball_lens_fraction_derivative(n: int, u):
    """d/du of :func:`ball_lens_fraction`."""
    u = np.asarray(u, dtype=float)
    inside = np.clip(1.0 - 0.25 * u * u, 0.0, None)
    return -unit_ball_volume(n - 1) * inside ** (0.5 * (n - 1)) / unit_ball_volume(n)


def ball_section(n: int, s):
    """Parallel section function of the unit ball, omega_{n-1}(1-s^2)^{(n-1)/2}."""
    s = np.asarray(s, dtype=float)
    return unit_ball_volume(n - 1) * np.clip(1.0 - s * s, 0.0, None) ** (0.5 * (n - 1))


# ---------------------------------------------------------------------------
# Covariogram
# ---------------------------------------------------------------------------


def covariogram(body: BodySpec, x) -> CovariogramValue:
    """g_K(x) = Vol(K cap (K + x)); exact for every variant."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if body.kind == "box":
        return CovariogramValue(float(np.prod(np.clip(2.0 * np.asarray(body.half_widths) - np.abs(x), 0.0, None))), True)
    if body.kind == "ellipsoid":
        t = body.matrix_array
        u = float(np.linalg.norm(np.linalg.solve(t, x)))
        return CovariogramValue(volume(body) * float(ball_lens_fraction(body.n, u)), True)
    if body.n == 1:
        length = volume(body)
        return CovariogramValue(max(length - abs(float(x[0])), 0.0), True)
    poly = _planar(body)
    if poly is not None:
        v = poly.vertex_array
        return CovariogramValue(polygon_intersection_area(v, v + x), True)
    eqs = _body_equations(body)
    shifted = eqs.copy()
    shifted[:, -1] -= eqs[:, :-1] @ x
    return CovariogramValue(_halfspace_volume(np.vstack([eqs, shifted])), True)


def covariogram_mc(body: BodySpec, x, samples: int, seed: int) -> CovariogramValue:
    """Monte-Carlo fallback: Vol(K) * P(y - x in K) for y uniform in K."""
    from .bodies import _contains_many

    pts = sample_uniform(body, samples, seed)
    hit = _contains_many(body, pts - np.asarray(x, dtype=float))
    frac = float(hit.mean())
    vol = volume(body)
    return CovariogramValue(vol * frac, False, vol * math.sqrt(max(frac * (1 - frac), 0.0) / samples))


# ---------------------------------------------------------------------------
# Parallel sections
# ---------------------------------------------------------------------------


def _complement_basis(theta: np.ndarray) -> np.ndarray:
    """Orthonormal basis of theta-perp as columns."""
    q, _ = np.linalg.qr(np.column_stack([theta, np.eye(len(theta))]))
    return q[:, 1 : len(theta)]


def parallel_section(body: BodySpec, theta, t: float) -> float:
    """A_{K,theta}(t) = Vol_{n-1}(K cap {<x, theta> = t})."""
    theta = np.asarray(theta, dtype=float)
    if body.kind == "ellipsoid":
        tm = body.matrix_array
        w = float(np.linalg.norm(tm.T @ theta))
        s = (t - float(body.center_array @ theta)) / w
        return abs(float(np.linalg.det(tm))) / w * float(ball_section(body.n, s))
    if body.n == 1:
        v = body.vertex_array[:, 0] * theta[0]
        return 1.0 if v.min() <= t <= v.max() else 0.0
    eqs = _body_equations(body)
    basis = _complement_basis(theta)
    # a (t theta + U y) + b <= 0
    sec = np.column_stack([eqs[:, :-1] @ basis, eqs[:, -1] + t * (eqs[:, :-1] @ theta)])
    return _halfspace_volume(sec)


def _key(theta) -> tuple[float, ...]:
    return tuple(float(v) for v in np.asarray(theta, dtype=float))


@lru_cache(maxsize=4096)
def _section_profile_cached(body: BodySpec, theta: tuple[float, ...]) -> PiecewisePoly:
    th = np.asarray(theta)
    heights = body.vertex_array @ th
    lo, hi = float(heights.min()), float(heights.max())
    knots = [lo, hi] + [float(h) for h in heights]
    return fit_piecewise(
        lambda ts: np.array([parallel_section(body, th, float(t)) for t in ts]),
        knots,
        body.n - 1,
    )


def section_profile(body: BodySpec, theta) -> PiecewisePoly:
    """A_{K,theta} as an exact piecewise polynomial (polytopes only)."""
    if not body.is_polytope:
        raise ValueError("section profiles are piecewise polynomial only for polytopes")
    return _section_profile_cached(body, _key(theta))


# ---------------------------------------------------------------------------
# Radon transform of the covariogram
# ---------------------------------------------------------------------------

_GL_Y, _GL_W = np.polynomial.legendre.leggauss(16)


def _autocorrelation(a: PiecewisePoly, s: float) -> float:
    """int A(t) A(t - s) dt, exact for piecewise polynomials of low degree."""
    lo = max(a.knots[0], a.knots[0] + s)
    hi = min(a.knots[-1], a.knots[-1] + s)
    if hi <= lo:
        return 0.0
    pts = sorted({lo, hi, *[k for k in a.knots if lo < k < hi], *[k + s for k in a.knots if lo < k + s < hi]})
    total = 0.0
    for x0, x1 in zip(pts[:-1], pts[1:]):
        x = 0.5 * (x1 - x0) * _GL_Y + 0.5 * (x0 + x1)
        total += 0.5 * (x1 - x0) * float(np.dot(_GL_W, a(x) * a(x - s)))
    return total


def _ball_autocorrelation(n: int, s: float, quad: QuadConfig) -> float:
    s = abs(s)
    if s >= 2.0:
        return 0.0
    val, _ = integrate.quad(
        lambda t: float(ball_section(n, t) * ball_section(n, t - s)),
        s - 1.0,
        1.0,
        epsabs=quad.tol * 1e-2,
        epsrel=quad.rel_tol,
        limit=200,
    )
    return val


def radon_covariogram(body: BodySpec, theta, t: float, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """R g_K(theta; t) = (A_{K,theta} * A_{K,theta}(-.))(t)."""
    theta = np.asarray(theta, dtype=float)
    if body.kind == "ellipsoid":
        tm = body.matrix_array
        w = float(np.linalg.norm(tm.T @ theta))
        det = abs(float(np.linalg.det(tm)))
        return det * det / w * _ball_autocorrelation(body.n, t / w, quad)
    return _autocorrelation(section_profile(body, theta), float(t))


@lru_cache(maxsize=4096)
def _radon_profile_cached(body: BodySpec, theta: tuple[float, ...]) -> PiecewisePoly:
    a = _section_profile_cached(body, theta)
    k = np.asarray(a.knots)
    diffs = np.abs(k[:, None] - k[None, :]).ravel()
    width = float(k[-1] - k[0])
    knots = [0.0, width] + [float(d) for d in diffs if 0.0 < d < width]
    return fit_piecewise(
        lambda ss: np.array([_autocorrelation(a, float(s)) for s in ss]),
        knots,
        2 * body.n - 1,
    )


def radon_profile(body: BodySpec, theta) -> PiecewisePoly:
    """s -> R g_K(theta; s) on [0, width] as an exact piecewise polynomial."""
    if not body.is_polytope:
        raise ValueError("Radon profiles are piecewise polynomial only for polytopes")
    return _radon_profile_cached(body, _key(theta))


# ---------------------------------------------------------------------------
# Covariogram along rays
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RayProfile:
    """r -> g_K(r theta) / Vol(K) on [0, reach], reach = rho_{DK}(theta).

    Polytopes carry an exact piecewise polynomial; ellipsoids use the lens
    formula with ``scale`` = |T^{-1} theta|.
    """

    reach: float
    n: int
    poly: PiecewisePoly | None = None
    scale: float | None = None

    @property
    def knots(self) -> tuple[float, ...]:
        return self.poly.knots if self.poly is not None else (0.0, self.reach)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.poly is not None:
            return np.where(r <= self.reach, self.poly(np.clip(r, 0.0, self.reach)), 0.0)
        return ball_lens_fraction(self.n, r * self.scale)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.poly is not None:
            d = self.poly.derivative()
            return np.where(r <= self.reach, d(np.clip(r, 0.0, self.reach)), 0.0)
        return self.scale * ball_lens_fraction_derivative(self.n, r * self.scale)


def _ray_breakpoints(body: BodySpec, theta: np.ndarray, reach: float) -> list[float]:
    """Candidate values of r where the combinatorics of K cap (K + r theta) change."""
    if body.kind == "box":
        return []
    v = body.vertex_array
    eqs = _body_equations(body)
    normals, offsets = eqs[:, :-1], eqs[:, -1]
    out: list[float] = []
    for nrm, off in zip(normals, offsets):
        d = float(nrm @ theta)
        if abs(d) < 1e-15:
            continue
        # vertex v_j + r theta on the facet plane of K, and the mirror event
        r = -(v @ nrm + off) / d
        out.extend(r.tolist())
        out.extend((-r).tolist())
    if body.n == 3:
        hull = ConvexHull(v)
        edges = set()
        for simp in hull.simplices:
            for i in range(3):
                a, b = sorted((simp[i], simp[(i + 1) % 3]))
                edges.add((a, b))
        edges = sorted(edges)
        for a1, b1 in edges:
            e1 = v[b1] - v[a1]
            for a2, b2 in edges:
                e2 = v[b2] - v[a2]
                c = np.cross(e1, e2)
                d = float(c @ theta)
                if np.linalg.norm(c) < 1e-14 or abs(d) < 1e-15:
                    continue
                out.append(float((v[a1] - v[a2]) @ c) / d)
    elif body.n > 3:
        raise ValueError("exact ray profiles are implemented for polytopes in n <= 3")
    return [r for r in out if 1e-14 * reach < r < reach * (1 - 1e-14)]


@lru_cache(maxsize=8192)
def _ray_profile_cached(body: BodySpec, theta: tuple[float, ...]) -> RayProfile:
    th = np.asarray(theta)
    reach = difference_body_radial(body, th)
    if body.kind == "ellipsoid":
        scale = float(np.linalg.norm(np.linalg.solve(body.matrix_array, th)))
        return RayProfile(reach=reach, n=body.n, scale=scale)
    vol = volume(body)
    knots = [0.0, reach] + _ray_breakpoints(body, th, reach)
    poly = fit_piecewise(
        lambda rs: np.array([covariogram(body, r * th).value / vol for r in rs]),
        knots,
        body.n,
    )
    return RayProfile(reach=reach, n=body.n, poly=poly)


def ray_profile(body: BodySpec, theta) -> RayProfile:
    """Normalised covariogram along the ray r theta, r >= 0."""
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    return _ray_profile_cached(body, _key(theta))
