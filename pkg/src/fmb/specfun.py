"""Special functions and the scalar coefficient functions used by the mean bodies.

Gamma and digamma are evaluated with a 15-term Lanczos approximation and an
asymptotic series respectively, with reflection for negative arguments.
Bessel functions of the first kind use a power series for small arguments,
the Hankel asymptotic expansion for large ones and Schlaefli's integral in
between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "PoleError",
    "DomainError",
    "NotApplicable",
    "NOT_APPLICABLE",
    "GammaValues",
    "CoeffBundle",
    "gamma",
    "ln_gamma",
    "digamma",
    "polygamma",
    "gamma_family",
    "harmonic",
    "unit_ball_volume",
    "m_coefficient",
    "kappa",
    "kappa_s",
    "lambda_coefficient",
    "d_coefficient",
    "binom_radial",
    "alpha_coefficient",
    "coefficients",
    "bessel_j",
    "bessel_mellin_sq",
    "dirichlet_sine",
    "gamma_cos",
    "gamma_sin",
]


class PoleError(ValueError):
    """Raised when a function is evaluated at one of its poles."""


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a closed form."""


class NotApplicable:
    """Marker for a coefficient whose defining branch excludes the inputs."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NOT_APPLICABLE"

    def __bool__(self) -> bool:
        return False


NOT_APPLICABLE = NotApplicable()
Coefficient = Union[float, NotApplicable]

# Lanczos coefficients, g = 671/128, 14 correction terms plus the constant.
_LANCZOS_G = 5.24218750000000000
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COEF = (
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
)
_SQRT_2PI = 2.5066282746310005
_EULER_GAMMA = 0.57721566490153286061

# Bernoulli numbers B_2k / (2k) for the digamma asymptotic series.
_DIGAMMA_ASYM = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
# B_2k for the polygamma asymptotic series.
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0)


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _ln_gamma_positive(x: float) -> float:
    """log Gamma(x) for x > 0 by the Lanczos sum."""
    tmp = x + _LANCZOS_G
    tmp = (x + 0.5) * math.log(tmp) - tmp
    ser = _LANCZOS_C0
    y = x
    for c in _LANCZOS_COEF:
        y += 1.0
        ser += c / y
    return tmp + math.log(_SQRT_2PI * ser / x)


def _sin_pi(x: float) -> float:
    """sin(pi x) with exact zeros at integers and argument reduction."""
    r = math.fmod(x, 2.0)
    if r == math.floor(r):
        return 0.0
    return math.sin(math.pi * r)


def ln_gamma(x: float) -> float:
    """log|Gamma(x)|."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at x={x}")
    if x > 0.0:
        return _ln_gamma_positive(x)
    # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return math.log(math.pi / abs(_sin_pi(x))) - _ln_gamma_positive(1.0 - x)


def gamma(x: float) -> float:
    """Gamma(x) for real x off the non-positive integers."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at x={x}")
    if x > 0.0:
        if x == math.floor(x) and x <= 30:
            return float(math.factorial(int(x) - 1))
        return math.exp(_ln_gamma_positive(x))
    return math.pi / (_sin_pi(x) * math.exp(_ln_gamma_positive(1.0 - x)))


def digamma(x: float) -> float:
    """psi(x) = d/dx log Gamma(x)."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma has a pole at x={x}")
    if x < 0.0:
        # psi(1-x) - psi(x) = pi cot(pi x)
        r = x - math.floor(x)
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * r)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_ASYM:
        series += c * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def polygamma(m: int, x: float) -> float:
    """psi^(m)(x) for m = 0, 1, 2 and x > 0."""
    if m == 0:
        return digamma(x)
    if m not in (1, 2):
        raise ValueError("polygamma implemented for m in {0, 1, 2}")
    x = float(x)
    if x <= 0.0:
        raise DomainError("polygamma requires x > 0")
    acc = 0.0
    sign = 1.0 if m == 1 else -1.0
    while x < 12.0:
        acc += sign * math.factorial(m) / x ** (m + 1)
        x += 1.0
    if m == 1:
        val = 1.0 / x + 0.5 / x**2
        for k, b in enumerate(_BERNOULLI, start=1):
            val += b / x ** (2 * k + 1)
    else:
        val = -1.0 / x**2 - 1.0 / x**3
        for k, b in enumerate(_BERNOULLI, start=1):
            val -= b * (2 * k + 1) / x ** (2 * k + 2)
    return acc + val


@dataclass(frozen=True)
class GammaValues:
    gamma: float
    ln_gamma: float
    digamma: float


def gamma_family(x: float) -> GammaValues:
    """Gamma, log|Gamma| and digamma at x."""
    return GammaValues(gamma=gamma(x), ln_gamma=ln_gamma(x), digamma=digamma(x))


def harmonic(q: float) -> float:
    """Generalized harmonic number H_q = psi(q+1) + Euler's constant."""
    if float(q) == math.floor(q) and q >= 0:
        return math.fsum(1.0 / j for j in range(1, int(q) + 1))
    return digamma(q + 1.0) + _EULER_GAMMA


def unit_ball_volume(q: float) -> float:
    """omega_q = pi^(q/2) / Gamma(1 + q/2)."""
    return math.pi ** (q / 2.0) / gamma(1.0 + q / 2.0)


def gamma_cos(z: float) -> float:
    """Gamma(z) cos(pi z / 2), finite at odd negative integers."""
    z = float(z)
    if z > 0.5:
        return gamma(z) * math.cos(math.pi * z / 2.0)
    s = _sin_half_pi(z)
    if s == 0.0:
        raise PoleError(f"Gamma(z)cos(pi z/2) has a pole at z={z}")
    return math.pi / (2.0 * gamma(1.0 - z) * s)


def gamma_sin(z: float) -> float:
    """Gamma(z) sin(pi z / 2), finite at zero and even negative integers."""
    z = float(z)
    if z > 0.5:
        return gamma(z) * math.sin(math.pi * z / 2.0)
    c = _cos_half_pi(z)
    if c == 0.0:
        raise PoleError(f"Gamma(z)sin(pi z/2) has a pole at z={z}")
    return math.pi / (2.0 * gamma(1.0 - z) * c)


def _sin_half_pi(z: float) -> float:
    """sin(pi z / 2) with exact zeros at even integers."""
    return _sin_pi(z / 2.0)


def _cos_half_pi(z: float) -> float:
    """cos(pi z / 2) with exact zeros at odd integers."""
    return _sin_pi(z / 2.0 + 0.5)


# ---------------------------------------------------------------------------
# Coefficient functions
# ---------------------------------------------------------------------------


def m_coefficient(n: int, p: float) -> Coefficient:
    """The coefficient m(p) relating the Fourier transform of rho_{R_p}^p to Z°_{p-n}."""
    q = float(p) - n
    if q >= 0 and q == math.floor(q) and int(q) % 2 == 0:
        k = int(q) // 2
        return float(math.factorial(2 * k) * (-1) ** k)
    if q + 1.0 <= 0 and q == math.floor(q):
        j = -int(q)
        if j % 2 == 1:
            return NOT_APPLICABLE
        # removable: Gamma pole cancelled by the sine zero
        half = j // 2
        return float((-1) ** half / math.factorial(j - 1))
    return -2.0 / math.pi * gamma(q + 1.0) * _sin_half_pi(q)


def _log_binom_ratio(a: float, p: float) -> float:
    """log C(a + p, p) / p, continuous through p = 0 (a > 0)."""
    if a == math.floor(a) and a >= 0:
        if p == 0.0:
            return harmonic(a)
        return math.fsum(math.log1p(p / j) for j in range(1, int(a) + 1)) / p
    if abs(p) < 1e-4:
        # Taylor expansion of lnGamma(a+1+p) - lnGamma(1+p) around p = 0
        d0 = digamma(a + 1.0) - digamma(1.0)
        d1 = polygamma(1, a + 1.0) - polygamma(1, 1.0)
        d2 = polygamma(2, a + 1.0) - polygamma(2, 1.0)
        return d0 + 0.5 * p * d1 + p * p * d2 / 6.0
    return (ln_gamma(a + p + 1.0) - ln_gamma(a + 1.0) - ln_gamma(p + 1.0)) / p


def kappa(n: int, p: float) -> Coefficient:
    """kappa(p) = C(2n+p, p)^(-1/p); kappa(0) = exp(-H_{2n})."""
    if p <= -1.0:
        return NOT_APPLICABLE
    if p == 0.0:
        return math.exp(-harmonic(2 * n))
    return math.exp(-_log_binom_ratio(2 * n, p))


def kappa_s(n: int, p: float, s: float) -> Coefficient:
    """kappa_s(p) = C(1/s + n + p, p)^(-1/p); value at p=0 is exp(psi(1) - psi(1/s+n+1))."""
    if s <= 0 or p <= -1.0:
        return NOT_APPLICABLE
    a = 1.0 / s + n
    if p == 0.0:
        return math.exp(digamma(1.0) - digamma(a + 1.0))
    return math.exp(-_log_binom_ratio(a, p))


def binom_radial(n: int, p: float) -> Coefficient:
    """C(n+p, n)^(1/p); limit exp(H_n) at p = 0."""
    if p <= -1.0:
        return NOT_APPLICABLE
    if p == 0.0:
        return math.exp(harmonic(n))
    return math.exp(_log_binom_ratio(n, p))


def lambda_coefficient(n: int, p: float) -> Coefficient:
    """lambda(p) for p in (0, 1], with lambda(1) = 1 / (pi n)."""
    if not 0.0 < p <= 1.0:
        return NOT_APPLICABLE
    if p == 1.0:
        return 1.0 / (math.pi * n)
    # C(2n-p, 2n) = Gamma(2n+1-p) / (Gamma(2n+1) Gamma(1-p)); cos(pi p/2) = sin(pi (1-p)/2)
    eps = 1.0 - p
    log_binom = ln_gamma(2 * n + 1.0 - p) - ln_gamma(2 * n + 1.0) - ln_gamma(eps)
    denom = gamma(p + 1.0) * math.sin(math.pi * eps / 2.0)
    return math.exp((log_binom - math.log(denom)) / p)


def d_coefficient(p: float) -> Coefficient:
    """d_p = cos(pi p/2) Gamma(p+1) 2^(1-p) / ((4-p)(3-p)(2-p)(1-p)) on (1, 2)."""
    if not 1.0 < p < 2.0:
        return NOT_APPLICABLE
    return (
        math.cos(math.pi * p / 2.0)
        * gamma(p + 1.0)
        * 2.0 ** (1.0 - p)
        / ((4.0 - p) * (3.0 - p) * (2.0 - p) * (1.0 - p))
    )


def alpha_coefficient(q: float) -> float:
    """alpha_q = psi(1) + H_q."""
    return digamma(1.0) + harmonic(q)


@dataclass(frozen=True)
class CoeffBundle:
    n: int
    p: float
    m_p: Coefficient
    kappa_p: Coefficient
    kappa_s_p: Coefficient
    lambda_p: Coefficient
    d_p: Coefficient
    binom_radial: Coefficient
    omega_q: float
    alpha_q: Coefficient


def coefficients(n: int, p: float, s: float | None = None) -> CoeffBundle:
    """All named coefficients at dimension n and order p.

    ``omega_q`` and ``alpha_q`` are evaluated at q = p.
    """
    if n < 1:
        raise DomainError("dimension must be >= 1")
    try:
        alpha = alpha_coefficient(p)
    except PoleError:
        alpha = NOT_APPLICABLE
    return CoeffBundle(
        n=n,
        p=p,
        m_p=m_coefficient(n, p),
        kappa_p=kappa(n, p),
        kappa_s_p=kappa_s(n, p, s) if s is not None else NOT_APPLICABLE,
        lambda_p=lambda_coefficient(n, p),
        d_p=d_coefficient(p),
        binom_radial=binom_radial(n, p),
        omega_q=unit_ball_volume(p) if p > -2 else float("nan"),
        alpha_q=alpha,
    )


# ---------------------------------------------------------------------------
# Bessel functions
# ---------------------------------------------------------------------------


def _bessel_series(mu: float, t: np.ndarray) -> np.ndarray:
    x = -(t * t) / 4.0
    term = np.full_like(t, 1.0 / gamma(mu + 1.0))
    total = term.copy()
    k = 0
    while True:
        term = term * x / ((k + 1) * (k + 1 + mu))
        total = total + term
        k += 1
        if k > 8 and np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
        if k > 500:
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = np.where(t > 0, (t / 2.0) ** mu, 1.0 if mu == 0 else 0.0)
    return pref * total


def _hankel_coefficients(mu: float, kmax: int = 60) -> list[float]:
    four_mu2 = 4.0 * mu * mu
    coef = [1.0]
    for k in range(1, kmax + 1):
        coef.append(coef[-1] * (four_mu2 - (2 * k - 1) ** 2) / (k * 8.0))
    return coef


def _bessel_hankel_many(mu: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hankel expansion of J_mu at each t; returns (values, smallest neglected term).

    Each argument keeps terms until they start to grow or fall below 1e-17.
    """
    coef = np.asarray(_hankel_coefficients(mu))
    k = np.arange(coef.size)[:, None]
    terms = coef[:, None] / t[None, :] ** k
    mag = np.abs(terms)
    growing = np.zeros_like(mag, dtype=bool)
    growing[3:] = mag[3:] > mag[2:-1]
    tiny = mag < 1e-17
    stop = np.logical_or.accumulate(growing, axis=0)
    stop[1:] |= np.logical_or.accumulate(tiny, axis=0)[:-1]
    used = np.where(stop, 0.0, terms)
    sign = np.where((k // 2) % 2 == 0, 1.0, -1.0)
    p_sum = np.sum((sign * used)[0::2], axis=0)
    q_sum = np.sum((sign * used)[1::2], axis=0)
    smallest = np.min(np.where(stop, np.inf, mag), axis=0)
    chi = t - (mu / 2.0 + 0.25) * math.pi
    val = np.sqrt(2.0 / (math.pi * t)) * (p_sum * np.cos(chi) - q_sum * np.sin(chi))
    return val, smallest


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(200)


def _bessel_schlaefli(mu: float, t: float) -> float:
    """Schlaefli integral representation for moderate arguments."""
    tau = 0.5 * math.pi * (_GL_NODES + 1.0)
    first = 0.5 * math.pi * np.dot(_GL_WEIGHTS, np.cos(mu * tau - t * np.sin(tau))) / math.pi
    s = math.sin(mu * math.pi)
    if s == 0.0:
        return float(first)
    # second integral on [0, U] with U large enough for exp(-t sinh u) to vanish
    upper = math.asinh(40.0 / t) if t > 0 else 40.0
    u = 0.5 * upper * (_GL_NODES + 1.0)
    second = 0.5 * upper * np.dot(_GL_WEIGHTS, np.exp(-t * np.sinh(u) - mu * u))
    return float(first - s / math.pi * second)


def bessel_j(mu: float, t):
    """Bessel function J_mu(t) of real order mu >= 0 and argument t >= 0.

    Accepts scalars or arrays for ``t``.
    """
    if mu < 0:
        raise DomainError("bessel_j requires mu >= 0")
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0):
        raise DomainError("bessel_j requires t >= 0")
    out = np.empty_like(arr)
    series_cut = max(12.0, mu)
    small = arr <= series_cut
    if np.any(small):
        out[small] = _bessel_series(mu, arr[small])
    large = np.flatnonzero(~small)
    if large.size:
        vals, errs = _bessel_hankel_many(mu, arr[large])
        for idx in np.flatnonzero(errs > 1e-14):
            vals[idx] = _bessel_schlaefli(mu, float(arr[large[idx]]))
        out[large] = vals
    return float(out[0]) if scalar else out


def bessel_mellin_sq(mu: float, nu: float) -> float:
    """Closed form of the Mellin transform  int_0^inf J_mu(t)^2 t^(nu-1) dt.

    Valid for -1/2 < -nu/2 < mu.
    """
    if not -nu / 2.0 > -0.5:
        raise DomainError(f"requires -1/2 < -nu/2 (nu < 1); got nu={nu}")
    if not -nu / 2.0 < mu:
        raise DomainError(f"requires -nu/2 < mu; got mu={mu}, nu={nu}")
    log_val = (
        ln_gamma(1.0 - nu)
        - (1.0 - nu) * math.log(2.0)
        - 2.0 * ln_gamma(1.0 - nu / 2.0)
        + ln_gamma(mu + nu / 2.0)
        - ln_gamma(mu + 1.0 - nu / 2.0)
    )
    return math.exp(log_val)


def dirichlet_sine(a: float, p: float) -> float:
    """int_0^inf x^(p-2) sin(a x) dx = a^(1-p) Gamma(p) cos(pi p/2) / (1-p) for 1 < p < 2.

    At p = 2 the continuous extension (value 1) is returned.
    """
    if a <= 0:
        raise DomainError("dirichlet_sine requires a > 0")
    if p == 2.0:
        return 1.0
    if not 1.0 < p < 2.0:
        raise DomainError(f"dirichlet_sine requires 1 < p < 2; got p={p}")
    return a ** (1.0 - p) * gamma(p) * math.cos(math.pi * p / 2.0) / (1.0 - p)
