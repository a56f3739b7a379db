"""Piecewise polynomials on [0, inf) with exact power and log moments.

Covariograms along rays and autocorrelations of parallel section functions
of polytopes are piecewise polynomial; representing them this way makes
every Mellin-type integral exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import special

_GL_ORDER = 24


@lru_cache(maxsize=256)
def _gauss_jacobi(order: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    # weight (1 + y)^beta on [-1, 1]
    y, w = special.roots_jacobi(order, 0.0, beta)
    return y, w


_GL_Y, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def power_excess(q: float, y):
    """(exp(q y) - 1)/q, equal to y at q = 0, accurate for every q."""
    return y * special.exprel(q * y)


@dataclass(frozen=True)
class PiecewisePoly:
    """Polynomial pieces on consecutive intervals ``knots[i]..knots[i+1]``.

    Each piece is stored as Chebyshev coefficients on its own interval. The
    function vanishes outside ``[knots[0], knots[-1]]``.
    """

    knots: tuple[float, ...]
    coeffs: tuple[tuple[float, ...], ...]

    @property
    def support(self) -> float:
        return self.knots[-1]

    def _piece(self, i: int, x: np.ndarray) -> np.ndarray:
        a, b = self.knots[i], self.knots[i + 1]
        y = (2.0 * x - (a + b)) / (b - a)
        return C.chebval(y, self.coeffs[i])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for i in range(len(self.coeffs)):
            a, b = self.knots[i], self.knots[i + 1]
            last = i == len(self.coeffs) - 1
            mask = (x >= a) & ((x <= b) if last else (x < b))
            if np.any(mask):
                out[mask] = self._piece(i, x[mask])
        return out

    def derivative(self) -> "PiecewisePoly":
        new = []
        for i, c in enumerate(self.coeffs):
            a, b = self.knots[i], self.knots[i + 1]
            d = C.chebder(np.asarray(c)) * (2.0 / (b - a)) if len(c) > 1 else np.zeros(1)
            new.append(tuple(float(v) for v in d))
        return PiecewisePoly(self.knots, tuple(new))

    def moment(self, q: float) -> float:
        """int x^q f(x) dx over the support (requires knots >= 0, q > -1)."""
        total = 0.0
        for i in range(len(self.coeffs)):
            a, b = self.knots[i], self.knots[i + 1]
            total += self._piece_moment(i, a, b, q)
        return total

    def _piece_moment(self, i: int, a: float, b: float, q: float) -> float:
        if a < 0:
            raise ValueError("moments require non-negative knots")
        if a == 0.0 or a < 0.25 * (b - a):
            # int_a^b = int_0^b - int_0^a with Gauss-Jacobi weight x^q
            return self._jacobi(i, b, q) - (self._jacobi(i, a, q) if a > 0 else 0.0)
        x = 0.5 * (b - a) * _GL_Y + 0.5 * (a + b)
        return 0.5 * (b - a) * float(np.dot(_GL_W, x**q * self._piece(i, x)))

    def _jacobi(self, i: int, upper: float, q: float) -> float:
        y, w = _gauss_jacobi(_GL_ORDER, float(q))
        x = 0.5 * upper * (1.0 + y)
        return (0.5 * upper) ** (q + 1.0) * float(np.dot(w, self._piece(i, x)))

    def excess_moment(self, q: float) -> float:
        """int (x^q - 1)/q f(x) dx over the support, the log moment at q = 0.

        Equals (moment(q) - integral()) / q but keeps full relative accuracy
        for small |q|, where that difference cancels.
        """
        total = 0.0
        for i in range(len(self.coeffs)):
            a, b = self.knots[i], self.knots[i + 1]
            if a < 0:
                raise ValueError("moments require non-negative knots")
            if a == 0.0 or a < 0.25 * (b - a):
                total += self._excess_from_zero(i, b, q) - (self._excess_from_zero(i, a, q) if a > 0 else 0.0)
            else:
                x = 0.5 * (b - a) * _GL_Y + 0.5 * (a + b)
                total += 0.5 * (b - a) * float(np.dot(_GL_W, power_excess(q, np.log(x)) * self._piece(i, x)))
        return total

    def _excess_from_zero(self, i: int, upper: float, q: float) -> float:
        # with P(upper s) = sum_k d_k s^k on [0, 1]:
        # int_0^upper (x^q - 1)/q P(x) dx = upper sum_k d_k (e(q, log upper)/(k+1+q) - 1/((k+1)(k+1+q)))
        m = len(self.coeffs[i])
        s = 0.5 * (1.0 + np.cos(np.pi * (np.arange(m) + 0.5) / m))
        d = np.polynomial.polynomial.polyfit(s, self._piece(i, upper * s), m - 1)
        k = np.arange(m, dtype=float)
        terms = power_excess(q, math.log(upper)) / (k + 1.0 + q) - 1.0 / ((k + 1.0) * (k + 1.0 + q))
        return upper * float(np.dot(d, terms))

    def log_moment(self) -> float:
        """int log(x) f(x) dx over the support."""
        return self.excess_moment(0.0)

    def integral(self) -> float:
        return self.moment(0.0)


def fit_piecewise(
    func: Callable[[np.ndarray], np.ndarray],
    knots: Sequence[float],
    degree: int,
) -> PiecewisePoly:
    """Interpolate ``func`` by a polynomial of ``degree`` on each knot interval.

    Exact when ``func`` is piecewise polynomial of at most that degree with
    breakpoints among ``knots``.
    """
    raw = sorted(set(float(k) for k in knots))
    kept = [raw[0]]
    for k in raw[1:-1]:
        if k - kept[-1] > 1e-13 * max(1.0, abs(k)):
            kept.append(k)
    if raw[-1] - kept[-1] <= 1e-13 * max(1.0, abs(raw[-1])) and len(kept) > 1:
        kept[-1] = raw[-1]
    else:
        kept.append(raw[-1])
    m = degree + 1
    # Chebyshev points of the first kind avoid the interval ends (kinks)
    y = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    coeffs = []
    for a, b in zip(kept[:-1], kept[1:]):
        x = 0.5 * (b - a) * y + 0.5 * (a + b)
        vals = np.asarray(func(x), dtype=float)
        coeffs.append(tuple(float(v) for v in C.chebfit(y, vals, degree)))
    return PiecewisePoly(tuple(kept), tuple(coeffs))
