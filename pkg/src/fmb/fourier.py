"""Fourier transforms of indicators and Mellin integrals of |chi_hat|^2 along rays.

Along a ray r theta the transform of a polytope indicator is a finite sum of
terms r^(-a) alpha exp(-i r h), so |chi_hat|^2 is a finite sum of powers times
cosines and sines. Its Mellin transform is then available in closed form
through Gamma(z) cos(pi z/2) and Gamma(z) sin(pi z/2), with finite parts at
the removable poles. Ellipsoids use the Bessel closed form. A split
quadrature with Levin acceleration serves as an independent second route.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, linalg

from .bodies import BodySpec, difference_body_support, volume
from .config import DEFAULT_QUAD, QuadConfig
from .covariogram import _key, _planar
from .specfun import DomainError, bessel_j, bessel_mellin_sq, digamma, gamma, unit_ball_volume

__all__ = [
    "MellinResult",
    "FourierIndex",
    "chi_hat",
    "g_hat",
    "ray_expansion",
    "mellin_ghat",
    "mellin_split",
    "mellin_exponential_sum",
    "fourier_index",
    "w_transform",
]

INF = math.inf


@dataclass(frozen=True)
class MellinResult:
    """p int_0^inf g_hat(r theta) r^(p-1) dr / Vol(K); value is inf when divergent."""

    value: float
    err_est: float
    route: str  # closed_form | split_quadrature | diverged

    @property
    def diverged(self) -> bool:
        return self.route == "diverged"


@dataclass(frozen=True)
class FourierIndex:
    value: float
    is_estimate: bool


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def _ball_transform(n: int, t: float) -> float:
    """Fourier transform of the unit ball indicator at |xi| = t."""
    if t < 1e-6:
        return unit_ball_volume(n) * (1.0 - t * t / (2.0 * (n + 2)))
    return (2.0 * math.pi / t) ** (n / 2.0) * float(bessel_j(n / 2.0, t))


def _simplex_transform(vertices: np.ndarray, xi: np.ndarray) -> complex:
    """int over the simplex of exp(-i <x, xi>) via the divided difference of exp."""
    n = vertices.shape[1]
    vol = abs(float(np.linalg.det(vertices[1:] - vertices[0]))) / math.factorial(n)
    z = -1j * (vertices @ xi)
    # exp of a bidiagonal matrix holds the divided differences of exp
    m = np.diag(z) + np.diag(np.ones(n), 1)
    return complex(math.factorial(n) * vol * linalg.expm(m)[0, n])


def chi_hat(body: BodySpec, xi) -> complex:
    """Fourier transform of the indicator, int_K exp(-i <x, xi>) dx."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if body.kind == "box":
        a = np.asarray(body.half_widths)
        return complex(np.prod(2.0 * a * np.sinc(a * xi / math.pi)))
    if body.kind == "ellipsoid":
        t = body.matrix_array
        det = abs(float(np.linalg.det(t)))
        phase = np.exp(-1j * float(body.center_array @ xi))
        return complex(det * phase * _ball_transform(body.n, float(np.linalg.norm(t.T @ xi))))
    poly = _planar(body)
    if poly is None:
        return _simplex_transform(body.vertex_array, xi)
    v = poly.vertex_array
    nrm2 = float(xi @ xi)
    diam = float(np.max(np.linalg.norm(v - v.mean(axis=0), axis=1)))
    if nrm2 * diam * diam < 1e-16:
        from .bodies import centroid

        return complex(volume(poly) * np.exp(-1j * float(centroid(poly) @ xi)))
    e = np.roll(v, -1, axis=0) - v
    mid = v + 0.5 * e
    normals = np.column_stack([e[:, 1], -e[:, 0]])
    terms = (normals @ xi) * np.exp(-1j * (mid @ xi)) * np.sinc((e @ xi) / (2.0 * math.pi))
    return complex(1j / nrm2 * terms.sum())


def g_hat(body: BodySpec, xi) -> float:
    """Fourier transform of the covariogram, |chi_hat|^2."""
    return abs(chi_hat(body, xi)) ** 2


# ---------------------------------------------------------------------------
# Exponential sums along rays
# ---------------------------------------------------------------------------

# A ray expansion is a list of (a, alpha, h) with chi_hat(r theta) = sum r^-a alpha e^{-i r h}.


def _box_expansion(body: BodySpec, theta: np.ndarray):
    a = np.asarray(body.half_widths)
    active = np.abs(theta) > 1e-14
    const = float(np.prod(2.0 * a[~active]))
    k = int(active.sum())
    comps = [(a[i], theta[i]) for i in range(len(a)) if active[i]]
    terms = []
    for signs in np.array(np.meshgrid(*[[-1, 1]] * k, indexing="ij")).reshape(k, -1).T if k else [np.zeros(0)]:
        coef = complex(const)
        h = 0.0
        for s, (ai, ti) in zip(signs, comps):
            # 2 sin(a t r)/(t r) = (e^{i a t r} - e^{-i a t r}) / (i t r)
            coef *= s / (1j * ti)
            h -= s * ai * ti
        terms.append((float(k), coef, h))
    return terms


def _polygon_expansion(poly: BodySpec, theta: np.ndarray):
    v = poly.vertex_array
    e = np.roll(v, -1, axis=0) - v
    heights = v @ theta
    terms = []
    for k in range(len(v)):
        nk = np.array([e[k, 1], -e[k, 0]])
        tn = float(theta @ nk)
        ak = float(e[k] @ theta)
        length = float(np.linalg.norm(e[k]))
        if abs(ak) <= 1e-11 * length:
            mid = 0.5 * (heights[k] + heights[(k + 1) % len(v)])
            terms.append((1.0, 1j * tn, mid))
        else:
            terms.append((2.0, tn / ak, float(heights[k])))
            terms.append((2.0, -tn / ak, float(heights[(k + 1) % len(v)])))
    return terms


def _simplex_expansion(body: BodySpec, theta: np.ndarray):
    v = body.vertex_array
    n = body.n
    h = v @ theta
    vol = volume(body)
    diam = float(np.ptp(h)) or 1.0
    gaps = np.abs(h[:, None] - h[None, :]) + np.eye(n + 1) * diam
    if gaps.min() < 1e-6 * diam:
        return None
    terms = []
    for j in range(n + 1):
        prod = complex(1.0)
        for k in range(n + 1):
            if k != j:
                prod *= -1j * (h[j] - h[k])
        terms.append((float(n), math.factorial(n) * vol / prod, float(h[j])))
    return terms


def ray_expansion(body: BodySpec, theta):
    """Exponential-sum form of chi_hat along the ray, or None when unavailable."""
    theta = np.asarray(theta, dtype=float)
    if body.kind == "box":
        return _box_expansion(body, theta)
    if body.kind == "ellipsoid":
        return None
    poly = _planar(body)
    if poly is not None:
        return _polygon_expansion(poly, theta)
    if body.n == 1:
        lo, hi = sorted(body.vertex_array[:, 0] * theta[0])
        return [(1.0, -1j, lo), (1.0, 1j, hi)]
    return _simplex_expansion(body, theta)


def _ghat_terms(expansion, rel: float = 1e-12):
    """Square an expansion into real terms (a, omega >= 0, cos coef, sin coef)."""
    hs = np.array([t[2] for t in expansion])
    grid = rel * (float(np.max(np.abs(hs))) or 1.0)
    coefs: dict = defaultdict(lambda: [0.0, 0.0])
    freqs: dict = {}
    for a1, c1, h1 in expansion:
        for a2, c2, h2 in expansion:
            beta = c1 * np.conj(c2)
            w = h1 - h2
            sgn = 1.0
            if w < 0:
                w, sgn = -w, -1.0
            if w < grid:
                w = 0.0
            # Re(beta e^{-i r w}); the sine coefficient flips with the sign of w
            key = (a1 + a2, round(w / grid))
            coefs[key][0] += beta.real
            coefs[key][1] += sgn * beta.imag
            freqs.setdefault(key, w)
    return [(key[0], freqs[key], c, d) for key, (c, d) in coefs.items()]


def _eval_terms(terms, r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    for a, w, c, d in terms:
        out += r ** (-a) * (c * np.cos(w * r) + d * np.sin(w * r))
    return out


def _pole_order(z: float) -> int | None:
    k = round(z)
    if k <= 0 and abs(z - k) < 1e-10:
        return -k
    return None


def mellin_exponential_sum(terms, p: float) -> tuple[float, float, bool]:
    """int_0^inf r^(p-1) sum_terms dr by analytic continuation.

    Returns (value, magnitude of the summands, diverged).
    """
    total = 0.0
    mag = 0.0
    for a, w, c, d in terms:
        z = p - a
        if w == 0.0:
            if abs(c) > 1e-12 * (1.0 + abs(c)) and z >= -1e-12:
                return INF, INF, True
            continue
        if z >= 1.0 - 1e-12 and (abs(c) > 0 or abs(d) > 0):
            return INF, INF, True
        k = _pole_order(z)
        lw = math.log(w)
        if c:
            if k is not None and k % 2 == 0:
                m = k // 2
                res = (-1) ** m / math.factorial(2 * m)
                val = c * w ** k * (res * digamma(2 * m + 1) - res * lw)
            else:
                zz = -k if k is not None else z
                val = c * _gamma_cos(zz) * math.exp(-zz * lw)
            total += val
            mag += abs(val)
        if d:
            if k is not None and k % 2 == 1:
                m = (k - 1) // 2
                res = (-1) ** m / math.factorial(2 * m + 1)
                val = d * w ** k * (res * digamma(2 * m + 2) - res * lw)
            elif k == 0:
                val = d * math.pi / 2.0
            else:
                zz = -k if k is not None else z
                val = d * _gamma_sin(zz) * math.exp(-zz * lw)
            total += val
            mag += abs(val)
    return total, mag, False


def _gamma_cos(z: float) -> float:
    if z > 0.5:
        return gamma(z) * math.cos(math.pi * z / 2.0)
    # reflection keeps accuracy for negative z
    return math.pi / (2.0 * gamma(1.0 - z) * math.sin(math.pi * z / 2.0))


def _gamma_sin(z: float) -> float:
    if z > 0.5:
        return gamma(z) * math.sin(math.pi * z / 2.0)
    return math.pi / (2.0 * gamma(1.0 - z) * math.cos(math.pi * z / 2.0))


# ---------------------------------------------------------------------------
# Split quadrature
# ---------------------------------------------------------------------------

_GL32_Y, _GL32_W = np.polynomial.legendre.leggauss(32)


def w_transform(partial: np.ndarray, remainder: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Sidi-type W transform of a tail.

    Models ``partial[j] = limit + remainder[j] * points[j] * P(1/points[j])``
    with P a polynomial whose degree grows with the order. Returns the
    estimates for orders 1, 2, ... computed by divided differences in 1/x.
    """
    t = 1.0 / points
    scale = remainder * points
    m = partial / scale
    nn = 1.0 / scale
    out = []
    for k in range(1, len(points)):
        m = (m[:-1] - m[1:]) / (t[:-k] - t[k:])
        nn = (nn[:-1] - nn[1:]) / (t[:-k] - t[k:])
        out.append(m[0] / nn[0])
    return np.asarray(out)


def mellin_split(
    func, p: float, half_period: float, quad: QuadConfig = DEFAULT_QUAD, levels: int = 12
) -> tuple[float, float, bool]:
    """int_0^inf func(r) r^(p-1) dr for a non-negative oscillating ``func``.

    Adaptive quadrature on a head interval [0, R0], then full-period
    Gauss-Legendre panels out to geometrically spaced checkpoints whose
    partial integrals are extrapolated with :func:`w_transform`.
    ``half_period`` is pi over the largest frequency of ``func``.
    Returns (value, err_est, diverged).
    """
    period = 2.0 * half_period
    r0 = quad.head_half_periods * half_period
    first = min(half_period, r0)
    head1, e1 = integrate.quad(
        lambda r: float(func(np.asarray([r]))[0]), 0.0, first, weight="alg", wvar=(p - 1.0, 0.0),
        epsabs=quad.tol * 1e-2, epsrel=quad.rel_tol, limit=200,
    )
    head2, e2 = integrate.quad(
        lambda r: float(func(np.asarray([r]))[0]) * r ** (p - 1.0), first, r0,
        epsabs=quad.tol * 1e-2, epsrel=quad.rel_tol, limit=2000,
    )
    # checkpoints r0 + m_j * period with m_j roughly geometric
    base = r0 / period
    marks = [0]
    for j in range(1, levels + 1):
        marks.append(max(marks[-1] + 1, int(round(base * (1.3**j - 1.0)))))
    if marks[-1] + 1 > quad.max_segments:
        raise ValueError("split quadrature needs more tail segments than max_segments allows")
    starts = r0 + period * np.arange(marks[-1] + 1)
    x = starts[:, None] + 0.5 * period * (1.0 + _GL32_Y)[None, :]
    vals = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape) * x ** (p - 1.0)
    seg = 0.5 * period * (vals @ _GL32_W)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    marks = np.asarray(marks)
    points = starts[marks]
    remainder = seg[marks]
    if np.any(remainder <= 0):
        raise ValueError("split quadrature expects a positive integrand over each period")
    # period integrals decay like r^slope; the tail is summable only for slope < -1
    slope = np.polyfit(np.log(points[-6:]), np.log(remainder[-6:]), 1)[0]
    if slope > -1.0 - 1e-2:
        return INF, INF, True
    est = w_transform(cum[marks], remainder, points)
    diffs = np.abs(np.diff(est))
    best = int(np.argmin(diffs[2:])) + 3
    tail = float(est[best])
    # incommensurate frequencies leave residual oscillation; be conservative
    err = 10.0 * float(max(diffs[best - 1], diffs[best - 2])) + e1 + e2
    return head1 + head2 + tail, err, False


# ---------------------------------------------------------------------------
# Mellin of g_hat
# ---------------------------------------------------------------------------


def _ray_ghat(body: BodySpec, theta: np.ndarray):
    if body.kind == "ellipsoid":
        t = body.matrix_array
        det = abs(float(np.linalg.det(t)))
        w = float(np.linalg.norm(t.T @ theta))
        n = body.n

        def f(r):
            r = np.asarray(r, dtype=float)
            s = r * w
            out = np.empty_like(s)
            small = s < 1e-6
            out[small] = unit_ball_volume(n) ** 2
            ss = s[~small]
            out[~small] = (2.0 * math.pi / ss) ** n * np.asarray(bessel_j(n / 2.0, ss)) ** 2
            return det * det * out

        return f
    return lambda r: np.array([g_hat(body, rr * theta) for rr in np.atleast_1d(r)])


@lru_cache(maxsize=8192)
def _mellin_cached(body: BodySpec, theta: tuple[float, ...], p: float, quad: QuadConfig, route: str) -> MellinResult:
    th = np.asarray(theta)
    vol = volume(body)
    if route in ("auto", "closed_form"):
        if body.kind == "ellipsoid":
            n = body.n
            if p >= n + 1:
                return MellinResult(INF, INF, "diverged")
            t = body.matrix_array
            det = abs(float(np.linalg.det(t)))
            w = float(np.linalg.norm(t.T @ th))
            val = p * det * det * (2.0 * math.pi) ** n / vol * w ** (-p) * bessel_mellin_sq(n / 2.0, p - n)
            return MellinResult(val, 1e-13 * val, "closed_form")
        expansion = ray_expansion(body, th)
        if expansion is not None:
            terms = _ghat_terms(expansion)
            val, mag, div = mellin_exponential_sum(terms, p)
            if div:
                return MellinResult(INF, INF, "diverged")
            val *= p / vol
            err = 1e-14 * p / vol * mag + 1e-15 * abs(val)
            return MellinResult(max(val, 0.0), err, "closed_form")
        if route == "closed_form":
            raise ValueError("no closed form for this body and direction")
    width = difference_body_support(body, th)
    val, err, div = mellin_split(_ray_ghat(body, th), p, math.pi / width, quad)
    if div:
        return MellinResult(INF, INF, "diverged")
    return MellinResult(p * val / vol, p * err / vol, "split_quadrature")


def mellin_ghat(body: BodySpec, theta, p: float, quad: QuadConfig = DEFAULT_QUAD, route: str = "auto") -> MellinResult:
    """p int_0^inf g_hat(r theta) r^(p-1) dr / Vol(K), i.e. rho_{F_p K}(theta)^p.

    ``route`` is ``auto`` (closed form when available), ``closed_form`` or
    ``split_quadrature``.
    """
    if not p > 0:
        raise DomainError(f"mellin_ghat requires p > 0; got p={p}")
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    return _mellin_cached(body, _key(theta), float(p), quad, route)


# ---------------------------------------------------------------------------
# Fourier index
# ---------------------------------------------------------------------------


def fourier_index(body: BodySpec, samples: int = 120) -> FourierIndex:
    """Supremum of p for which F_p K is bounded.

    Exact for boxes (2) and ellipsoids (n + 1). For other polytopes the decay
    exponent of max_theta g_hat(r theta) is fitted on a log-log grid, with
    facet normals included among the directions.
    """
    if body.kind == "box":
        return FourierIndex(2.0, False)
    if body.kind == "ellipsoid":
        return FourierIndex(float(body.n + 1), False)
    from .bodies import _body_equations

    normals = _body_equations(body)[:, :-1]
    if body.n == 2:
        t = np.linspace(0.0, np.pi, samples, endpoint=False)
        dirs = np.column_stack([np.cos(t), np.sin(t)])
    else:
        rng = np.random.default_rng(0)
        dirs = rng.normal(size=(samples, body.n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = np.vstack([dirs, normals / np.linalg.norm(normals, axis=1, keepdims=True)])
    diam = float(np.max([difference_body_support(body, d) for d in dirs[: body.n + 1]]))
    radii = np.geomspace(20.0, 400.0, 8) / diam
    peaks = []
    for r in radii:
        # maximum over directions and over one oscillation period
        rs = r + np.linspace(0.0, 2.0 * np.pi / diam, 5)
        peaks.append(max(g_hat(body, rr * d) for d in dirs for rr in rs))
    slope = np.polyfit(np.log(radii), np.log(peaks), 1)[0]
    return FourierIndex(float(max(2.0, -slope)), True)
