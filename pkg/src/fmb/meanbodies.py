"""Radial functions of mean bodies: R_p K, F_p K, Z°_p K, Γ°_q and intersection bodies.

Conventions: ``rho_R(theta)^p = p int_0^inf g(r theta)/V r^(p-1) dr`` with the
usual modifications for p <= 0, ``rho_F(theta)^p = p int_0^inf |chi_hat(r
theta)|^2 r^(p-1) dr / V`` and ``rho_Z(theta) = (V^-2 int |<theta,z>|^p g(z) dz)^(-1/p)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .bodies import BodySpec, contains, radial_function, volume
from .config import DEFAULT_QUAD, QuadConfig
from .covariogram import _key, _planar, ball_section, parallel_section, radon_profile, ray_profile
from .fourier import mellin_ghat
from .piecewise import fit_piecewise, power_excess
from .specfun import DomainError, unit_ball_volume
from .starops import LogSingularity, ResolutionError, StarSample, sample_star, star_volume

__all__ = [
    "RadialEvaluator",
    "DensitySpec1D",
    "radial_R",
    "radial_F",
    "radial_Z",
    "radial_gamma_polar",
    "intersection_body_radial",
    "direction_moment",
    "fourier_singularities",
    "sample_family",
    "FAMILIES",
]

FAMILIES = ("R", "F", "Z", "Gamma_polar", "I")
INF = math.inf


def _mean_root(excess: float, p: float) -> float:
    """(1 + p E)^(1/p) = exp(log1p(p E)/p), equal to exp(E) at p = 0.

    Power means of order p are written through the excess E = int (x^p - 1)/p
    against a probability measure, so that small |p| loses no digits.
    """
    z = p * excess
    return math.exp(excess * (math.log1p(z) / z if z != 0.0 else 1.0))


def _excess_quad(func, upper: float, q: float, beta: float) -> tuple[float, float]:
    """int_0^upper func(u) (upper - u)^beta (u^q - 1)/q du by adaptive quadrature.

    The interval is split so that the singularity at 0 and the endpoint power
    at ``upper`` are handled separately.
    """
    mid = 0.5 * upper
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=200)
    v1, e1 = integrate.quad(lambda u: func(u) * (upper - u) ** beta * float(power_excess(q, math.log(u))), 0.0, mid, **opts)
    v2, e2 = integrate.quad(lambda u: func(u) * float(power_excess(q, math.log(u))), mid, upper, weight="alg", wvar=(0.0, beta), **opts)
    return v1 + v2, e1 + e2


def _unit(theta) -> np.ndarray:
    u = np.atleast_1d(np.asarray(theta, dtype=float))
    return u / np.linalg.norm(u)


def _perp(theta: np.ndarray) -> np.ndarray:
    return np.array([-theta[1], theta[0]])


# ---------------------------------------------------------------------------
# Radial mean bodies
# ---------------------------------------------------------------------------


@lru_cache(maxsize=512)
def _ball_radial_moment(n: int, p: float) -> tuple[float, float]:
    """int_0^2 (-d/du lens(u)) u^p du for the unit ball.

    -d/du lens(u) = (omega_{n-1}/omega_n) ((2 - u)(2 + u)/4)^((n-1)/2).
    """
    a = 0.5 * (n - 1)
    c = unit_ball_volume(n - 1) / unit_ball_volume(n)
    return integrate.quad(lambda u: c * ((2.0 + u) / 4.0) ** a, 0.0, 2.0, weight="alg", wvar=(p, a), epsabs=1e-14, epsrel=1e-13)


@lru_cache(maxsize=512)
def _ball_radial_excess(n: int, p: float) -> tuple[float, float]:
    """int_0^2 (-d/du lens(u)) (u^p - 1)/p du for the unit ball."""
    a = 0.5 * (n - 1)
    c = unit_ball_volume(n - 1) / unit_ball_volume(n)
    return _excess_quad(lambda u: c * ((2.0 + u) / 4.0) ** a, 2.0, p, a)


def _radial_R(body: BodySpec, p: float, theta: np.ndarray) -> tuple[float, float]:
    if not p > -1.0:
        raise DomainError(f"radial mean bodies need p > -1; got p={p}")
    if body.kind == "ellipsoid":
        scale = float(np.linalg.norm(np.linalg.solve(body.matrix_array, theta)))
        if p <= 1.0:
            excess, err = _ball_radial_excess(body.n, p)
            rho = _mean_root(excess, p) / scale
            return rho, rho * err
        val, err = _ball_radial_moment(body.n, p)
        rho = val ** (1.0 / p) / scale
        return rho, rho * err / (p * val)
    prof = ray_profile(body, theta)
    if p > 1.0:
        # p int_0^rho (g/V) r^(p-1) dr
        m = p * prof.poly.moment(p - 1.0)
        rho = m ** (1.0 / p)
    else:
        # -d/dr (g/V) is a probability density on [0, rho_DK]; the branches
        # for p <= 1 are integrals against it (integration by parts), which
        # keeps the power weight integrable as p -> 0
        dens = prof.poly.derivative()
        rho = _mean_root(-dens.excess_moment(p), p)
    return rho, 1e-12 * rho


def radial_R(body: BodySpec, p: float, theta, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """Radial function of the radial p-th mean body R_p K in direction theta."""
    return _radial_R(body, float(p), _unit(theta))[0]


# ---------------------------------------------------------------------------
# Direction moments of the covariogram
# ---------------------------------------------------------------------------


def _ball_overlap(n: int, s: float) -> float:
    """int A_B(t) A_B(t - s) dt for the unit ball, 0 <= s <= 2."""
    if s >= 2.0:
        return 0.0
    a = 0.5 * (n - 1)
    w2 = unit_ball_volume(n - 1) ** 2
    if a == 0.0:
        return w2 * (2.0 - s)
    val, _ = integrate.quad(
        lambda t: w2 * ((1.0 + t) * (1.0 - t + s)) ** a,
        s - 1.0,
        1.0,
        weight="alg",
        wvar=(a, a),
        epsabs=1e-15,
        epsrel=1e-13,
        limit=200,
    )
    return val


@lru_cache(maxsize=512)
def _ball_direction_moment(n: int, q: float, log: bool) -> tuple[float, float]:
    """int_0^2 s^q R g_B(e; s) ds, or the log moment, for the unit ball."""
    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=200)
    if log:
        return integrate.quad(lambda s: _ball_overlap(n, s), 0.0, 2.0, weight="alg-loga", wvar=(0.0, 0.0), **opts)
    return integrate.quad(lambda s: _ball_overlap(n, s), 0.0, 2.0, weight="alg", wvar=(q, 0.0), **opts)


def direction_moment(body: BodySpec, q: float, theta, log: bool = False) -> tuple[float, float]:
    """int |<theta, z>|^q g_K(z) dz (or int log|<theta, z>| g_K(z) dz) with an error estimate."""
    theta = _unit(theta)
    if not q > -1.0:
        raise DomainError(f"direction moments need q > -1; got q={q}")
    if body.kind == "ellipsoid":
        t = body.matrix_array
        det = abs(float(np.linalg.det(t)))
        w = float(np.linalg.norm(t.T @ theta))
        if log:
            jl, el = _ball_direction_moment(body.n, 0.0, True)
            total = unit_ball_volume(body.n) ** 2 / 2.0
            return 2.0 * det * det * (jl + math.log(w) * total), 2.0 * det * det * el
        j, e = _ball_direction_moment(body.n, float(q), False)
        return 2.0 * det * det * w**q * j, 2.0 * det * det * w**q * e
    prof = radon_profile(body, theta)
    val = 2.0 * (prof.log_moment() if log else prof.moment(q))
    return val, 1e-12 * abs(val) + 1e-15


@lru_cache(maxsize=512)
def _ball_direction_excess(n: int, q: float) -> tuple[float, float]:
    """int_0^2 (s^q - 1)/q R g_B(e; s) ds for the unit ball."""
    return _excess_quad(lambda s: _ball_overlap(n, s), 2.0, q, 0.0)


def _direction_excess(body: BodySpec, q: float, theta: np.ndarray) -> tuple[float, float]:
    """V^-2 int (|<theta, z>|^q - 1)/q g_K(z) dz, the log moment at q = 0."""
    if body.kind == "ellipsoid":
        # (w s)^q - 1 = w^q (s^q - 1) + (w^q - 1), and int_0^2 R g_B = omega_n^2 / 2
        w = float(np.linalg.norm(body.matrix_array.T @ theta))
        j, e = _ball_direction_excess(body.n, q)
        c = 2.0 * w**q / unit_ball_volume(body.n) ** 2
        return c * j + float(power_excess(q, math.log(w))), c * e
    val = 2.0 * radon_profile(body, theta).excess_moment(q) / volume(body) ** 2
    return val, 1e-12 * abs(val) + 1e-15


def _radial_Z(body: BodySpec, p: float, theta: np.ndarray) -> tuple[float, float]:
    if not p > -1.0:
        raise DomainError(f"polar mean zonoids need p > -1; got p={p}")
    if p <= 1.0:
        excess, e = _direction_excess(body, p, theta)
        rho = 1.0 / _mean_root(excess, p)
        return rho, rho * e
    v2 = volume(body) ** 2
    m, e = direction_moment(body, p, theta)
    rho = (m / v2) ** (-1.0 / p)
    return rho, rho * e / (abs(p) * m)


def radial_Z(body: BodySpec, p: float, theta, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """Radial function of the polar p-th mean zonoid Z°_p K."""
    return _radial_Z(body, float(p), _unit(theta))[0]


# ---------------------------------------------------------------------------
# Fourier mean bodies
# ---------------------------------------------------------------------------


def _radial_F(body: BodySpec, p: float, theta: np.ndarray, quad: QuadConfig, route: str) -> tuple[float, float]:
    if not p > 0.0:
        raise DomainError(f"Fourier mean bodies need p > 0; got p={p}")
    if route in ("direct", "closed_form", "split_quadrature"):
        res = mellin_ghat(body, theta, p, quad, route="auto" if route == "direct" else route)
        if res.diverged:
            return INF, INF
        rho = res.value ** (1.0 / p)
        return rho, rho * res.err_est / (p * res.value)
    if route == "z_route":
        if not 0.0 < p < 1.0:
            raise DomainError("the z_route needs 0 < p < 1")
        m, e = direction_moment(body, -p, theta)
        c = math.gamma(1.0 + p) * math.cos(math.pi * p / 2.0) / volume(body)
        rho = (c * m) ** (1.0 / p)
        return rho, rho * e / (p * m)
    if route == "i_route":
        if p != 1.0:
            raise DomainError("the i_route applies at p = 1")
        if body.n == 2:
            r, e = _radial_R(body, 1.0, _perp(theta))
            return 2.0 * math.pi * r, 2.0 * math.pi * e
        if body.n == 3:
            basis = np.linalg.svd(theta[None, :])[2][1:]
            phi = 2.0 * math.pi * np.arange(256) / 256
            vals = [_radial_R(body, 2.0, math.cos(a) * basis[0] + math.sin(a) * basis[1])[0] for a in phi[:128]]
            area = 0.5 * float(np.sum(np.square(vals))) * 2.0 * (2.0 * math.pi / 256)
            return math.pi * area, 1e-6 * math.pi * area
        raise DomainError("the i_route is implemented for n = 2 and n = 3")
    raise ValueError(f"unknown route {route!r}")


def radial_F(body: BodySpec, p: float, theta, quad: QuadConfig = DEFAULT_QUAD, route: str = "direct") -> float:
    """Radial function of the Fourier p-th mean body F_p K; ``inf`` when unbounded."""
    return _radial_F(body, float(p), _unit(theta), quad, route)[0]


def fourier_singularities(body: BodySpec, p: float) -> tuple[LogSingularity, ...]:
    """Logarithmic singularities of rho_F^n on the circle, where known in closed form.

    For a planar polygon at p = 2, |chi_hat|^2 decays like L^2/r^2 along the
    normal of an edge of length L, so rho^2 ~ (2/V) sum L^2 log(1/|angle|)
    near each normal direction, summed over the edges sharing it.
    """
    poly = _planar(body)
    if poly is None or p != 2.0:
        return ()
    v = poly.vertex_array
    edges = np.roll(v, -1, axis=0) - v
    vol = volume(body)
    merged: dict[float, float] = {}
    for e in edges:
        angle = math.atan2(-e[0], e[1]) % math.pi
        key = next((k for k in merged if abs(k - angle) < 1e-12 or abs(k - angle) > math.pi - 1e-12), angle)
        merged[key] = merged.get(key, 0.0) + 2.0 * float(e @ e) / vol
    return tuple(LogSingularity(a, c) for a, c in sorted(merged.items()))


# ---------------------------------------------------------------------------
# Polar centroid bodies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensitySpec1D:
    """Even probability density on the line.

    ``s_affine`` is (1+s)/(2s) rho (1 - rho|t|)_+^(1/s); ``tabulated`` is the
    piecewise-linear interpolant of ``values`` on the sorted ``grid``.
    """

    kind: str
    s: float = 0.0
    rho: float = 0.0
    grid: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    @staticmethod
    def s_affine(s: float, rho: float) -> "DensitySpec1D":
        if not (s > 0 and rho > 0):
            raise ValueError("s_affine densities need s > 0 and rho > 0")
        return DensitySpec1D("s_affine", s=float(s), rho=float(rho))

    @staticmethod
    def tabulated(grid: Sequence[float], values: Sequence[float]) -> "DensitySpec1D":
        g = np.asarray(grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or np.any(np.diff(g) <= 0) or np.any(v < 0):
            raise ValueError("tabulated densities need a sorted grid and non-negative values")
        return DensitySpec1D("tabulated", grid=tuple(g.tolist()), values=tuple(v.tolist()))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "s_affine":
            base = np.clip(1.0 - self.rho * np.abs(t), 0.0, None)
            return (1.0 + self.s) / (2.0 * self.s) * self.rho * base ** (1.0 / self.s)
        return np.interp(t, self.grid, self.values, left=0.0, right=0.0)


def _power_antiderivative(x: np.ndarray, k: int, q: float, log: bool) -> np.ndarray:
    """Antiderivative of x^k x^q (or x^k log x) on x >= 0, vanishing at 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if log:
            e = k + 1.0
            out = x**e * (np.log(x) / e - 1.0 / (e * e))
        else:
            out = x ** (k + q + 1.0) / (k + q + 1.0)
    return np.where(x > 0, out, 0.0)


def _tabulated_moment(d: DensitySpec1D, q: float, log: bool) -> float:
    """int |t|^q f(t) dt (or int log|t| f(t) dt) for the piecewise-linear f, exactly."""
    g = np.asarray(d.grid)
    v = np.asarray(d.values)
    if g[0] < 0 < g[-1] and 0.0 not in d.grid:
        i = int(np.searchsorted(g, 0.0))
        v0 = v[i - 1] + (v[i] - v[i - 1]) * (0.0 - g[i - 1]) / (g[i] - g[i - 1])
        g = np.insert(g, i, 0.0)
        v = np.insert(v, i, v0)
    total = 0.0
    for x0, x1, y0, y1 in zip(g[:-1], g[1:], v[:-1], v[1:]):
        # on each side of 0 write f in terms of |t|
        a, b = sorted((abs(x0), abs(x1)))
        fa, fb = (y0, y1) if abs(x0) <= abs(x1) else (y1, y0)
        if b == a:
            continue
        slope = (fb - fa) / (b - a)
        c0 = fa - slope * a
        ends = np.array([a, b])
        prim = c0 * _power_antiderivative(ends, 0, q, log) + slope * _power_antiderivative(ends, 1, q, log)
        total += float(prim[1] - prim[0])
    return total


def _density_moment(d: DensitySpec1D, q: float, log: bool = False) -> float:
    if d.kind == "tabulated":
        return _tabulated_moment(d, q, log)
    # s_affine: 2 int_0^{1/rho} t^q f(t) dt with the endpoint power as a weight
    c = (1.0 + d.s) / d.s * d.rho
    end = 1.0 / d.rho
    beta = 1.0 / d.s
    # (1 - rho t)^(1/s) = rho^(1/s) (1/rho - t)^(1/s)
    scale = c * d.rho**beta
    if log:
        val, _ = integrate.quad(lambda t: scale, 0.0, end, weight="alg-loga", wvar=(0.0, beta), epsabs=1e-15, epsrel=1e-13)
    else:
        val, _ = integrate.quad(lambda t: scale, 0.0, end, weight="alg", wvar=(q, beta), epsabs=1e-15, epsrel=1e-13)
    return val


def _gamma_polar_star2(m: StarSample, q: float, theta: np.ndarray) -> float:
    """(1/V) int_M |<x, theta>|^q dx for a planar star sample (log moment at q = 0)."""
    spline = m._spline()
    vol = star_volume(m).value
    phi_t = math.atan2(theta[1], theta[0])
    total = 0.0
    opts = dict(epsabs=1e-13, epsrel=1e-11, limit=400)
    # the spline is only C^2 at the sample angles, so quad may report roundoff
    # well below the interpolation error of the sample itself
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for start in (phi_t - math.pi / 2.0, phi_t + math.pi / 2.0):
            total += _half_turn_moment(spline, start, q, opts)
    return total / vol


def _half_turn_moment(spline, start: float, q: float, opts: dict) -> float:
    """Polar-coordinate moment over the half turn [start, start + pi]."""

    # on [start, start + pi] the cosine factor is sin(x) with x = phi - start
    def rho_at(x):
        return float(spline(np.mod(start + x, 2.0 * math.pi)))

    def smooth_sin(x):
        # sin(x) / (x (pi - x)), positive and smooth on [0, pi]
        if x < 1e-8 or math.pi - x < 1e-8:
            return 1.0 / math.pi
        return math.sin(x) / (x * (math.pi - x))

    if q == 0.0:
        # int r log(r |cos|) dr from 0 to rho = rho^2/2 (log rho - 1/2 + log|cos|)
        base, _ = integrate.quad(
            lambda x: 0.5 * rho_at(x) ** 2 * (math.log(rho_at(x)) - 0.5 + math.log(smooth_sin(x))), 0.0, math.pi, **opts
        )
        la, _ = integrate.quad(lambda x: 0.5 * rho_at(x) ** 2, 0.0, math.pi, weight="alg-loga", wvar=(0.0, 0.0), **opts)
        lb, _ = integrate.quad(lambda x: 0.5 * rho_at(x) ** 2, 0.0, math.pi, weight="alg-logb", wvar=(0.0, 0.0), **opts)
        return base + la + lb
    val, _ = integrate.quad(
        lambda x: rho_at(x) ** (q + 2.0) * smooth_sin(x) ** q / (q + 2.0), 0.0, math.pi, weight="alg", wvar=(q, q), **opts
    )
    return val


def _gamma_polar_star3(m: StarSample, q: float, theta: np.ndarray) -> float:
    if q < 0.0:
        raise DomainError("spatial star samples support q >= 0 only")
    w = 4.0 * math.pi / m.size
    vol = star_volume(m).value
    cosines = np.abs(m.directions @ theta)
    if q == 0.0:
        with np.errstate(divide="ignore"):
            logc = np.where(cosines > 0, np.log(cosines), 0.0)
        integrand = m.radii**3 / 3.0 * (np.log(m.radii) - 1.0 / 3.0 + logc)
        return float(np.sum(integrand)) * w / vol
    return float(np.sum(m.radii ** (q + 3.0) * cosines**q)) * w / ((q + 3.0) * vol)


def radial_gamma_polar(source, q: float, theta) -> float:
    """Radial function of the polar L^q centroid body of a star body or a 1-D density.

    rho(theta) = ((1/V) int |<x, theta>|^q dx)^(-1/q), with the geometric-mean
    form exp(-(1/V) int log|<x, theta>| dx) at q = 0.
    """
    if not q > -1.0:
        raise DomainError(f"polar centroid bodies need q > -1; got q={q}")
    if isinstance(source, DensitySpec1D):
        t = float(np.atleast_1d(theta)[0])
        scale = abs(t)
        if q == 0.0:
            return math.exp(-(_density_moment(source, 0.0, log=True) + math.log(scale) * _density_moment(source, 0.0)))
        return (scale**q * _density_moment(source, q)) ** (-1.0 / q)
    theta = _unit(theta)
    moment = _gamma_polar_star2(source, q, theta) if source.n == 2 else _gamma_polar_star3(source, q, theta)
    if q == 0.0:
        return math.exp(-moment)
    return moment ** (-1.0 / q)


def _half_section_excess(body: BodySpec, q: float, theta: np.ndarray) -> float:
    """int_0^inf (t^q - 1)/q A_{K,theta}(t) dt for a body containing the origin."""
    if body.kind == "ellipsoid":
        tm = body.matrix_array
        w = float(np.linalg.norm(tm.T @ theta))
        c = float(body.center_array @ theta)
        hi, lo = c + w, c - w
        if hi <= 0.0:
            return 0.0
        beta = 0.5 * (body.n - 1)
        scale = abs(float(np.linalg.det(tm))) / w * unit_ball_volume(body.n - 1) / w ** (2.0 * beta)
        # A(t) = scale ((hi - t)(t - lo))^beta; the (hi - t)^beta factor goes into the weight
        return _excess_quad(lambda t: scale * (t - lo) ** beta, hi, q, beta)[0]
    heights = body.vertex_array @ theta
    hi = float(heights.max())
    if hi <= 0.0:
        return 0.0
    prof = fit_piecewise(
        lambda ts: np.array([parallel_section(body, theta, float(t)) for t in ts]),
        [0.0, hi] + [float(h) for h in heights if 0.0 < h < hi],
        body.n - 1,
    )
    return prof.excess_moment(q)


def _body_gamma_polar(body: BodySpec, q: float, theta: np.ndarray) -> tuple[float, float]:
    """Radial function of the polar centroid body of a body, from its parallel sections."""
    if not q > -1.0:
        raise DomainError(f"polar centroid bodies need q > -1; got q={q}")
    excess = (_half_section_excess(body, q, theta) + _half_section_excess(body, q, -theta)) / volume(body)
    rho = 1.0 / _mean_root(excess, q)
    return rho, 1e-11 * rho


# ---------------------------------------------------------------------------
# Intersection bodies
# ---------------------------------------------------------------------------


def _check_resolution(m: StarSample) -> None:
    if m.n == 2:
        gap = 2.0 * math.pi / m.size
    else:
        gap = math.sqrt(4.0 * math.pi / m.size)
    if gap > math.radians(5.0):
        raise ResolutionError(f"angular spacing {math.degrees(gap):.2f} deg exceeds 5 deg")


def intersection_body_radial(m: StarSample, theta, circle_nodes: int = 256) -> float:
    """Vol_{n-1}(M cap theta-perp) from a planar or spatial star sample."""
    _check_resolution(m)
    theta = _unit(theta)
    rho = m.interpolator()
    if m.n == 2:
        u = _perp(theta)
        return float(rho(u)[0] + rho(-u)[0])
    basis = np.linalg.svd(theta[None, :])[2][1:]
    phi = 2.0 * math.pi * np.arange(circle_nodes) / circle_nodes
    pts = np.cos(phi)[:, None] * basis[0] + np.sin(phi)[:, None] * basis[1]
    return 0.5 * float(np.sum(rho(pts) ** 2)) * 2.0 * math.pi / circle_nodes


def _body_intersection_radial(body: BodySpec, theta: np.ndarray, circle_nodes: int = 512) -> float:
    if body.n == 2:
        u = _perp(theta)
        return radial_function(body, u) + radial_function(body, -u)
    basis = np.linalg.svd(theta[None, :])[2][1:]
    phi = 2.0 * math.pi * np.arange(circle_nodes) / circle_nodes
    vals = [radial_function(body, math.cos(a) * basis[0] + math.sin(a) * basis[1]) for a in phi]
    return 0.5 * float(np.sum(np.square(vals))) * 2.0 * math.pi / circle_nodes


# ---------------------------------------------------------------------------
# Evaluator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialEvaluator:
    """Radial function of one mean body family at a fixed order.

    Calling the evaluator with a direction returns ``(radius, err_est)``.
    """

    body: BodySpec
    family: str
    order: float
    route: str = "direct"
    quad: QuadConfig = DEFAULT_QUAD

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")

    @property
    def n(self) -> int:
        return self.body.n

    def __call__(self, theta) -> tuple[float, float]:
        u = _unit(theta)
        if self.family == "R":
            return _radial_R(self.body, self.order, u)
        if self.family == "F":
            return _radial_F(self.body, self.order, u, self.quad, self.route)
        if self.family == "Z":
            return _radial_Z(self.body, self.order, u)
        if not contains(self.body, np.zeros(self.n)):
            raise DomainError("the origin must lie in the body")
        if self.family == "I":
            return _body_intersection_radial(self.body, u), 0.0
        return _body_gamma_polar(self.body, self.order, u)

    def radius(self, theta) -> float:
        return self(theta)[0]


def sample_family(body: BodySpec, family: str, p: float, grid: int, route: str = "direct", quad: QuadConfig = DEFAULT_QUAD) -> StarSample:
    """Star sample of a mean body, with known singular envelopes attached."""
    ev = RadialEvaluator(body, family, float(p), route, quad)
    sing = fourier_singularities(body, float(p)) if family == "F" else ()
    return sample_star(ev, grid, n=body.n, singularities=sing)
