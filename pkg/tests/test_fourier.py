import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from fmb import bodies as bd
from fmb import covariogram as cv
from fmb import fourier as fo
from fmb.config import DEFAULT_QUAD
from fmb.specfun import DomainError

SQUARE = bd.cube(2)
BIG_SQUARE = bd.box([1.0, 1.0])
DISK = bd.ball(2)
TRIANGLE = bd.simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
PENTAGON = bd.random_polygon(5, 0)


def quad_transform(body, xi):
    """Oracle: int_K exp(-i <x, xi>) dx by nested adaptive quadrature over the x-extent."""
    lo, hi = -bd.support(body, [-1.0, 0.0]), bd.support(body, [1.0, 0.0])

    def chord(x):
        # vertical chord at abscissa x from the edge crossings
        ys = []
        v = body.vertex_array
        for i in range(len(v)):
            p, q = v[i], v[(i + 1) % len(v)]
            if (p[0] - x) * (q[0] - x) <= 0 and p[0] != q[0]:
                ys.append(p[1] + (x - p[0]) * (q[1] - p[1]) / (q[0] - p[0]))
        return min(ys), max(ys)

    def inner(x, part):
        y0, y1 = chord(x)
        f = (lambda y: math.cos(x * xi[0] + y * xi[1])) if part == 0 else (lambda y: -math.sin(x * xi[0] + y * xi[1]))
        return integrate.quad(f, y0, y1, epsabs=1e-13)[0]

    kinks = sorted(set(body.vertex_array[:, 0]))
    re = integrate.quad(lambda x: inner(x, 0), lo, hi, points=kinks, epsabs=1e-13, limit=200)[0]
    im = integrate.quad(lambda x: inner(x, 1), lo, hi, points=kinks, epsabs=1e-13, limit=200)[0]
    return complex(re, im)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def test_chi_hat_examples():
    assert fo.chi_hat(BIG_SQUARE, [0.0, 0.0]) == pytest.approx(4.0, rel=1e-15)
    assert abs(fo.chi_hat(BIG_SQUARE, [math.pi, 0.0])) < 1e-15
    assert fo.chi_hat(DISK, [1e-9, 0.0]).real == pytest.approx(math.pi, rel=1e-12)


def test_polygon_square_matches_box_product():
    poly = bd.polygon([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    rng = np.random.default_rng(0)
    for xi in rng.normal(scale=6.0, size=(30, 2)):
        assert abs(fo.chi_hat(poly, xi) - fo.chi_hat(BIG_SQUARE, xi)) <= 1e-10
    # directions parallel to edges take the analytic limit
    for xi in ([3.0, 0.0], [0.0, -2.5], [1e-9, 4.0]):
        assert abs(fo.chi_hat(poly, xi) - fo.chi_hat(BIG_SQUARE, xi)) <= 1e-10


@pytest.mark.parametrize("body", [TRIANGLE, PENTAGON])
def test_polygon_transform_matches_quadrature(body):
    rng = np.random.default_rng(1)
    for xi in rng.normal(scale=3.0, size=(4, 2)):
        assert abs(fo.chi_hat(body, xi) - quad_transform(body, xi)) <= 1e-9


def test_simplex_in_three_dimensions_matches_monte_carlo_free_limit():
    tetra = bd.simplex([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    xi = np.array([0.7, -1.3, 2.1])
    oracle = integrate.tplquad(
        lambda z, y, x: math.cos(x * xi[0] + y * xi[1] + z * xi[2]),
        0.0, 1.0, lambda x: 0.0, lambda x: 1.0 - x, lambda x, y: 0.0, lambda x, y: 1.0 - x - y, epsabs=1e-12,
    )[0]
    assert fo.chi_hat(tetra, xi).real == pytest.approx(oracle, abs=1e-10)
    assert fo.chi_hat(tetra, [0.0, 0.0, 0.0]).real == pytest.approx(1.0 / 6.0, rel=1e-13)


def test_ball_transform_matches_bessel():
    for t in (0.5, 3.0, 11.0, 40.0):
        assert fo.chi_hat(DISK, [0.0, t]).real == pytest.approx(2 * math.pi / t * special.jv(1, t), abs=1e-11)
        ball3 = fo.chi_hat(bd.ball(3), [t, 0.0, 0.0]).real
        oracle = (2 * math.pi / t) ** 1.5 * special.jv(1.5, t)
        assert ball3 == pytest.approx(oracle, abs=1e-11)
        assert ball3 == pytest.approx(4 * math.pi * (math.sin(t) - t * math.cos(t)) / t**3, rel=1e-9)


def test_g_hat_examples():
    for body in (SQUARE, DISK, PENTAGON):
        assert fo.g_hat(body, [0.0, 0.0]) == pytest.approx(bd.volume(body) ** 2, rel=1e-12)
    assert fo.g_hat(SQUARE, [2 * math.pi, 2 * math.pi]) < 1e-30
    # (2 pi / 5)^2 J_1(5)^2 for the unit disk
    assert fo.g_hat(DISK, [3.0, 4.0]) == pytest.approx((2 * math.pi / 5) ** 2 * special.jv(1, 5.0) ** 2, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_contravariance(seed):
    rng = np.random.default_rng(seed)
    t = rng.normal(size=(2, 2))
    t = t if np.linalg.det(t) > 0 else t[:, ::-1]
    amap = bd.AffineMap.of(t)
    for body in (PENTAGON, DISK, SQUARE):
        image = bd.apply_affine(amap, body)
        xi = rng.normal(scale=2.0, size=2)
        lhs = fo.chi_hat(image, xi)
        rhs = abs(np.linalg.det(t)) * fo.chi_hat(body, t.T @ xi)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["square", "pentagon", "triangle", "disk"]), st.floats(-8, 8), st.floats(-8, 8))
def test_g_hat_even(name, a, b):
    body = {"square": SQUARE, "pentagon": PENTAGON, "triangle": TRIANGLE, "disk": DISK}[name]
    assert fo.g_hat(body, [a, b]) == pytest.approx(fo.g_hat(body, [-a, -b]), rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("body", [PENTAGON, TRIANGLE, DISK])
def test_g_hat_is_squared_transform_of_parallel_sections(body):
    rng = np.random.default_rng(2)
    for _ in range(3):
        u = rng.normal(size=2)
        u /= np.linalg.norm(u)
        r = rng.uniform(0.5, 6.0)
        lo, hi = -bd.support(body, -u), bd.support(body, u)
        kinks = sorted(set(body.vertex_array @ u)) if body.is_polytope else None
        re = integrate.quad(lambda s: cv.parallel_section(body, u, s) * math.cos(r * s), lo, hi, points=kinks, epsabs=1e-13, limit=200)[0]
        im = integrate.quad(lambda s: cv.parallel_section(body, u, s) * math.sin(r * s), lo, hi, points=kinks, epsabs=1e-13, limit=200)[0]
        assert fo.g_hat(body, r * u) == pytest.approx(re * re + im * im, rel=1e-8, abs=1e-12)


# ---------------------------------------------------------------------------
# Mellin integrals
# ---------------------------------------------------------------------------


def test_mellin_disk_at_one():
    res = fo.mellin_ghat(DISK, [0.6, 0.8], 1.0)
    assert res.value == pytest.approx(16.0 / 3.0, rel=1e-12)
    assert res.route == "closed_form"


def test_mellin_box_diverges_at_two():
    res = fo.mellin_ghat(BIG_SQUARE, [1.0, 0.0], 2.0)
    assert res.diverged and math.isinf(res.value)


def test_mellin_interval_at_one_is_pi():
    res = fo.mellin_ghat(bd.box([1.0]), [1.0], 1.0)
    assert res.value == pytest.approx(math.pi, rel=1e-12)


def test_mellin_rejects_nonpositive_order():
    with pytest.raises(DomainError):
        fo.mellin_ghat(DISK, [1.0, 0.0], 0.0)


def interval_closed_form(p):
    return p / (2 - p) * math.gamma(p / 2) * math.gamma(0.5) / math.gamma((3 - p) / 2)


@pytest.mark.parametrize("p", [0.3, 0.7, 1.0, 1.4, 1.8])
def test_interval_split_quadrature_matches_closed_form(p):
    interval = bd.box([1.0])
    split = fo.mellin_ghat(interval, [1.0], p, route="split_quadrature")
    assert split.route == "split_quadrature"
    assert split.value == pytest.approx(interval_closed_form(p), rel=1e-6)
    auto = fo.mellin_ghat(interval, [1.0], p)
    assert auto.value == pytest.approx(interval_closed_form(p), rel=1e-12)


@pytest.mark.parametrize("p", [0.5, 1.0, 1.7, 2.4, 2.85])
def test_disk_split_quadrature_matches_closed_form(p):
    split = fo.mellin_ghat(DISK, [1.0, 0.0], p, route="split_quadrature")
    closed = fo.mellin_ghat(DISK, [1.0, 0.0], p, route="closed_form")
    assert split.value == pytest.approx(closed.value, rel=1e-6)


@pytest.mark.parametrize("body", [SQUARE, PENTAGON, TRIANGLE])
@pytest.mark.parametrize("p", [0.4, 1.0, 1.6])
def test_polytope_exponential_sum_matches_split_quadrature(body, p):
    u = np.array([math.cos(0.4), math.sin(0.4)])
    closed = fo.mellin_ghat(body, u, p)
    split = fo.mellin_ghat(body, u, p, route="split_quadrature")
    assert closed.route == "closed_form"
    assert abs(closed.value - split.value) <= max(1e-6 * closed.value, split.err_est)


def test_square_mellin_matches_direct_quadrature():
    # oracle independent of both routes: adaptive quadrature of g_hat over [0, R] plus a crude tail bound
    u = np.array([math.cos(0.4), math.sin(0.4)])
    p = 0.5
    f = lambda r: fo.g_hat(SQUARE, r * u) * r ** (p - 1)
    edges = np.arange(0, 801) * math.pi / 2
    head = integrate.quad(lambda r: fo.g_hat(SQUARE, r * u), 0.0, edges[1], weight="alg", wvar=(p - 1, 0.0), epsabs=1e-14)[0]
    total = head + sum(integrate.quad(f, a, b, epsabs=1e-14)[0] for a, b in zip(edges[1:-1], edges[2:]))
    oracle = p * total / bd.volume(SQUARE)
    assert fo.mellin_ghat(SQUARE, u, p).value == pytest.approx(oracle, rel=1e-6)


def test_mellin_split_on_sine_integral():
    for a, p in [(0.5, 1.3), (2.0, 1.7)]:
        f = lambda r, a=a: a * np.sinc(a * np.asarray(r) / math.pi)
        val, err, div = fo.mellin_split(f, p, math.pi / a, DEFAULT_QUAD)
        closed = a ** (1 - p) * math.gamma(p) * math.cos(math.pi * p / 2) / (1 - p)
        assert not div
        assert val == pytest.approx(closed, rel=1e-6)


def test_w_transform_recovers_geometric_limit():
    # partial sums of an alternating-free algebraic series sum 1/k^2 reach pi^2/6
    k = np.arange(1, 4001, dtype=float)
    cum = np.cumsum(1.0 / k**2)
    marks = np.array([10, 20, 40, 80, 160, 320, 640, 1280, 2560])
    est = fo.w_transform(cum[marks - 1], 1.0 / marks**2, marks.astype(float))
    assert est[4] == pytest.approx(math.pi**2 / 6, rel=1e-9)


# ---------------------------------------------------------------------------
# Fourier index
# ---------------------------------------------------------------------------


def test_fourier_index_examples():
    assert fo.fourier_index(BIG_SQUARE) == fo.FourierIndex(2.0, False)
    assert fo.fourier_index(bd.ellipsoid(np.diag([2.0, 0.5]))) == fo.FourierIndex(3.0, False)
    hexagon = fo.fourier_index(bd.regular_polygon(6))
    assert hexagon.is_estimate and hexagon.value >= 2.0
