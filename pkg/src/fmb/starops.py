"""Sampled star bodies: volumes, dual mixed volumes, inclusion and convexity tests."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import ConvexHull

from .specfun import NOT_APPLICABLE, harmonic

__all__ = [
    "LogSingularity",
    "StarSample",
    "GridMismatch",
    "ResolutionError",
    "VolumeResult",
    "InclusionResult",
    "ConvexityResult",
    "circle_directions",
    "sphere_directions",
    "sample_star",
    "star_volume",
    "dual_quermass",
    "dual_mixed_volume",
    "inclusion_check",
    "convexity_check_2d",
    "bm_lower_cube",
    "write_star_csv",
    "read_star_csv",
]


class GridMismatch(ValueError):
    """Two star samples do not share a direction grid."""


class ResolutionError(ValueError):
    """A star sample is too sparse for the requested operation."""


@dataclass(frozen=True)
class LogSingularity:
    """rho(phi)^n ~ coefficient * log(1/|sin(phi - angle)|) near angle and angle + pi."""

    angle: float
    coefficient: float


@dataclass(frozen=True, eq=False)
class StarSample:
    """Radial function of an origin-symmetric star body on a grid closed under negation.

    In the plane the grid is ``phi_k = 2 pi k / N``; in space it is a
    Fibonacci hemisphere together with its antipodes.
    """

    n: int
    directions: np.ndarray
    radii: np.ndarray
    err_est: np.ndarray
    singularities: tuple[LogSingularity, ...] = field(default=())

    def __post_init__(self):
        if len(self.directions) != len(self.radii) or len(self.radii) != len(self.err_est):
            raise ValueError("directions, radii and err_est must have equal length")
        if np.any(~(self.radii > 0)):
            raise ValueError("radii must be positive")

    @property
    def size(self) -> int:
        return len(self.radii)

    @property
    def angles(self) -> np.ndarray:
        if self.n != 2:
            raise ValueError("angles are defined for planar samples")
        return 2.0 * math.pi * np.arange(self.size) / self.size

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.radii)))

    def same_grid(self, other: "StarSample") -> bool:
        return self.n == other.n and self.size == other.size and np.allclose(self.directions, other.directions, atol=1e-14)

    def _spline(self) -> CubicSpline:
        if not self.finite:
            raise ValueError("interpolation needs finite radii")
        phi = np.append(self.angles, 2.0 * math.pi)
        return CubicSpline(phi, np.append(self.radii, self.radii[0]), bc_type="periodic")

    def interpolator(self) -> Callable[[np.ndarray], np.ndarray]:
        """Radial function at arbitrary unit vectors."""
        if self.n == 2:
            spline = self._spline()
            step = 2.0 * math.pi / self.size

            def rho2(u):
                u = np.atleast_2d(u)
                phi = np.mod(np.arctan2(u[:, 1], u[:, 0]), 2.0 * math.pi)
                out = spline(phi)
                # exact grid values where the direction lies on the grid
                k = np.rint(phi / step)
                on = np.abs(phi - k * step) < 1e-13
                out[on] = self.radii[k[on].astype(int) % self.size]
                return out

            return rho2
        hull = ConvexHull(self.directions)
        tri = hull.simplices
        normals = hull.equations[:, :-1]

        def rho3(u):
            u = np.atleast_2d(u)
            out = np.empty(len(u))
            for i, x in enumerate(u):
                face = int(np.argmax(normals @ x))
                verts = self.directions[tri[face]]
                lam = np.linalg.solve(verts.T, x)
                lam = lam / lam.sum()
                out[i] = float(lam @ self.radii[tri[face]])
            return out

        return rho3


def circle_directions(grid: int) -> np.ndarray:
    phi = 2.0 * math.pi * np.arange(grid) / grid
    return np.column_stack([np.cos(phi), np.sin(phi)])


def sphere_directions(nodes: int) -> np.ndarray:
    """Fibonacci hemisphere of nodes/2 points followed by their antipodes."""
    half = nodes // 2
    i = np.arange(half)
    z = 1.0 - (2.0 * i + 1.0) / nodes
    r = np.sqrt(1.0 - z * z)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden * i
    upper = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return np.vstack([upper, -upper])


def _evaluate(evaluator, u) -> tuple[float, float]:
    out = evaluator(u)
    if isinstance(out, tuple):
        return float(out[0]), float(out[1])
    return float(out), 0.0


def sample_star(evaluator, grid_size: int, n: int | None = None, singularities: Sequence[LogSingularity] = ()) -> StarSample:
    """Evaluate an even radial function on a grid closed under negation.

    ``evaluator`` maps a unit vector to a radius or to ``(radius, err_est)``.
    The function is called once per direction of one half of the grid and
    mirrored to the other half.
    """
    if grid_size < 8 or grid_size % 2:
        raise ValueError("grid_size must be even and at least 8")
    n = n if n is not None else getattr(evaluator, "n", 2)
    dirs = circle_directions(grid_size) if n == 2 else sphere_directions(grid_size)
    half = grid_size // 2
    vals = [_evaluate(evaluator, dirs[k]) for k in range(half)]
    radii = np.array([v[0] for v in vals])
    errs = np.array([v[1] for v in vals])
    return StarSample(n, dirs, np.concatenate([radii, radii]), np.concatenate([errs, errs]), tuple(singularities))


# ---------------------------------------------------------------------------
# Volumes
# ---------------------------------------------------------------------------

INF_ERR = math.inf


@dataclass(frozen=True)
class VolumeResult:
    value: float
    err_est: float
    lower_bound: bool = False


def _sphere_weight(m: StarSample) -> float:
    return 2.0 * math.pi / m.size if m.n == 2 else 4.0 * math.pi / m.size


def _planar_volume(radii: np.ndarray, phi: np.ndarray, singularities) -> tuple[float, float, bool]:
    """Trapezoid value of (1/2) int rho^2 with envelope handling; (value, node_err, lower_bound)."""
    w = 2.0 * math.pi / len(radii)
    powered = radii**2
    if np.all(np.isfinite(powered)) and not singularities:
        return float(powered.sum()) * w / 2.0, 0.0, False
    if not singularities:
        return float(powered[np.isfinite(powered)].sum()) * w / 2.0, INF_ERR, True
    envelope = np.zeros_like(phi)
    for s in singularities:
        with np.errstate(divide="ignore"):
            envelope -= s.coefficient * np.log(np.abs(np.sin(phi - s.angle)))
    with np.errstate(invalid="ignore"):
        rest = powered - envelope
    bad = np.flatnonzero(~np.isfinite(rest))
    for k in bad:
        # the remainder is even about the singular direction
        r1, r2 = rest[(k + 1) % len(rest)], rest[(k + 2) % len(rest)]
        rest[k] = (4.0 * r1 - r2) / 3.0
    if np.any(~np.isfinite(rest)):
        return float(powered[np.isfinite(powered)].sum()) * w / 2.0, INF_ERR, True
    exact = sum(s.coefficient for s in singularities) * 2.0 * math.pi * math.log(2.0)
    # the extrapolated nodes dominate the node error
    node_err = float(np.sum(np.abs(rest[bad]))) * w / 2.0 * 0.1
    return (float(rest.sum()) * w + exact) / 2.0, node_err, False


def star_volume(m: StarSample) -> VolumeResult:
    """(1/n) int rho^n over the sphere.

    Infinite radii are handled through the sample's logarithmic
    singularities when present: the envelope is subtracted, the smooth
    remainder integrated by the trapezoid rule (with its value at a singular
    node extrapolated from the neighbours) and the envelope added back
    exactly. Without an envelope the finite part is returned flagged as a
    lower bound.

    In the plane the error estimate includes the discretisation error,
    estimated from the same rule on every other node under an h^2 model
    (radial functions of polytopes have corners).
    """
    fin = np.isfinite(m.radii)
    err = float(np.sum(m.radii[fin] ** (m.n - 1) * m.err_est[fin])) * _sphere_weight(m)
    if m.n != 2:
        powered = m.radii**m.n
        value = float(powered[fin].sum()) * _sphere_weight(m) / m.n
        return VolumeResult(value, err if m.finite else INF_ERR, not m.finite)
    phi = m.angles
    value, node_err, lower = _planar_volume(m.radii, phi, m.singularities)
    if lower:
        return VolumeResult(value, INF_ERR, True)
    if m.size % 4 == 0 and m.size >= 32:
        coarse, coarse_err, coarse_lower = _planar_volume(m.radii[::2], phi[::2], m.singularities)
        # safety factor 2 on the h^2 model, whose leading term alone can fall just short
        err += INF_ERR if coarse_lower else 2.0 * abs(value - coarse) / 3.0 + coarse_err / 4.0
    return VolumeResult(value, err + node_err)


def dual_quermass(m: StarSample, p: float) -> float:
    """(1/n) int rho_M^p over the sphere."""
    return float(np.sum(m.radii**p)) * _sphere_weight(m) / m.n


def dual_mixed_volume(d: StarSample, m: StarSample, p: float) -> float:
    """(1/n) int rho_D^p rho_M^(n-p) over the sphere."""
    if not d.same_grid(m):
        raise GridMismatch("dual mixed volumes need a shared grid")
    return float(np.sum(d.radii**p * m.radii ** (d.n - p))) * _sphere_weight(d) / d.n


# ---------------------------------------------------------------------------
# Inclusion and convexity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InclusionResult:
    included: bool
    worst_margin: float
    worst_dir: tuple[float, ...]


def inclusion_check(a: StarSample, b: StarSample, tol: float = 0.0) -> InclusionResult:
    """A inside B pointwise: rho_A <= rho_B + tol in every grid direction.

    The margin is rho_B - rho_A (infinite radii on both sides count as 0).
    """
    if not a.same_grid(b):
        raise GridMismatch("inclusion checks need a shared grid")
    with np.errstate(invalid="ignore"):
        margin = b.radii - a.radii
    margin = np.where(np.isinf(a.radii) & np.isinf(b.radii), 0.0, margin)
    k = int(np.argmin(margin))
    return InclusionResult(bool(np.all(margin >= -tol)), float(margin[k]), tuple(float(x) for x in a.directions[k]))


@dataclass(frozen=True)
class ConvexityResult:
    convex: bool
    min_curvature_proxy: float
    argmin_angle: float
    hull_gap: float = 0.0
    violation: float = 0.0


def _periodic_derivatives(rho: np.ndarray, h: float, stride: int) -> tuple[np.ndarray, np.ndarray]:
    up = np.roll(rho, -stride)
    dn = np.roll(rho, stride)
    step = stride * h
    return (up - dn) / (2.0 * step), (up - 2.0 * rho + dn) / (step * step)


def convexity_check_2d(m: StarSample, tol: float = 1e-9):
    """Convexity of a planar star body from rho^2 + 2 rho'^2 - rho rho''.

    Derivatives come from central differences at spacings h and 2h combined
    by Richardson extrapolation; a direction counts as nonconvex only when the
    proxy is below -10 times the difference between the two estimates. The
    sampled boundary is also compared with its convex hull.
    """
    if m.n != 2 or not m.finite:
        return NOT_APPLICABLE
    if m.size < 256:
        raise ResolutionError("convexity checks need at least 256 directions")
    rho = m.radii
    h = 2.0 * math.pi / m.size
    d1h, d2h = _periodic_derivatives(rho, h, 1)
    d12, d22 = _periodic_derivatives(rho, h, 2)
    d1 = (4.0 * d1h - d12) / 3.0
    d2 = (4.0 * d2h - d22) / 3.0
    proxy = rho**2 + 2.0 * d1**2 - rho * d2
    coarse = rho**2 + 2.0 * d1h**2 - rho * d2h
    noise = np.abs(proxy - coarse) + tol * rho**2
    excess = (-proxy - 10.0 * noise) / rho**2
    k = int(np.argmin(proxy))
    pts = rho[:, None] * m.directions
    hull = ConvexHull(pts)
    # distance of each sample point inside the hull to the hull boundary
    dist = -(pts @ hull.equations[:, :-1].T + hull.equations[:, -1])
    gap = float(np.max(np.min(dist, axis=1)))
    scale = float(np.max(rho))
    allowed = max(tol, 1e-9) * scale + float(np.max(m.err_est))
    # positive when either test sees a violation beyond its noise level
    violation = max(float(np.max(excess)), (gap - allowed) / scale)
    return ConvexityResult(violation <= 0.0, float(proxy[k]), float(m.angles[k]), gap, violation)


def bm_lower_cube(n: int, p: float) -> float:
    """Lower bound sqrt(n) ((p+1)/C(n+p,p))^(1/p) for d_BM(R_p Q_n, B_2^n).

    At p = 0 the limit sqrt(n) exp(1 - H_n) is returned.
    """
    if p == 0.0:
        return math.sqrt(n) * math.exp(1.0 - harmonic(float(n)))
    log_binom = math.lgamma(n + p + 1.0) - math.lgamma(p + 1.0) - math.lgamma(n + 1.0)
    return math.sqrt(n) * math.exp((math.log(p + 1.0) - log_binom) / p)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.17g}"


def write_star_csv(m: StarSample, stream) -> None:
    """Write ``dir_0..dir_{n-1},rho,err_est`` rows with 17 significant digits."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"dir_{i}" for i in range(m.n)] + ["rho", "err_est"])
    for u, r, e in zip(m.directions, m.radii, m.err_est):
        writer.writerow([_fmt(float(x)) for x in u] + [_fmt(float(r)), _fmt(float(e))])


def read_star_csv(stream, singularities: Sequence[LogSingularity] = ()) -> StarSample:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rows = list(csv.reader(stream))
    header, body = rows[0], rows[1:]
    n = len(header) - 2
    if header != [f"dir_{i}" for i in range(n)] + ["rho", "err_est"]:
        raise ValueError(f"unexpected CSV header {header}")
    data = np.array([[float(x) for x in row] for row in body])
    return StarSample(n, data[:, :n], data[:, n], data[:, n + 1], tuple(singularities))
