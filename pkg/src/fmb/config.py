"""Quadrature and Monte-Carlo policy shared by the numerical modules."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class QuadConfig:
    """Numerical policy.

    Attributes
    ----------
    tol:
        Absolute tolerance on Mellin-type integrals.
    rel_tol:
        Relative tolerance passed to adaptive quadrature.
    head_half_periods:
        Length of the head interval of the split oscillatory quadrature,
        measured in half periods of the dominant oscillation.
    max_segments:
        Maximum number of half-period tail segments.
    mc_samples:
        Default Monte-Carlo sample count.
    seed:
        Base seed for every random draw.
    grid:
        Default number of directions of a planar star sample.
    sphere_nodes:
        Default number of Fibonacci nodes of a spatial star sample.
    """

    tol: float = 1e-10
    rel_tol: float = 1e-11
    head_half_periods: int = 40
    max_segments: int = 4000
    mc_samples: int = 200_000
    seed: int = 0
    grid: int = 360
    sphere_nodes: int = 2048

    def with_(self, **changes) -> "QuadConfig":
        return replace(self, **changes)


DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True)
class CheckDefaults:
    """Fixed parameter grids of the verification catalogue.

    Attributes
    ----------
    radial, zonoid, fourier:
        Orders used by the inclusion chains of R_p, Z°_p and F_p.
    iso_radial, iso_polar, iso_fourier_affine, iso_dual_fourier:
        Orders of the isoperimetric checks.
    iso_exploratory:
        Orders of the polar Blaschke-Santalo check outside the proven range.
    berwald:
        Orders of the one-dimensional Berwald equality check.
    nonconvex, convex_control:
        Orders of the square nonconvexity check and of its convex controls.
    parseval, cosine_bridge:
        Orders of the two Fourier identities on the reference bodies.
    chain_grid, volume_grid, radial_volume_grid, iso_grid, convexity_grid:
        Number of planar directions used by each group of checks; the
        radial volume identity gets a finer grid because its 1e-6 tolerance
        is close to the h^2 error of radial functions with corners.
    """

    radial: tuple[float, ...] = (-0.5, 0.0, 0.5, 1.0, 2.0, 5.0)
    zonoid: tuple[float, ...] = (-0.5, 0.0, 0.5, 1.0, 2.0, 5.0)
    fourier: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    iso_radial: tuple[float, ...] = (-0.5, 0.5, 1.0, 3.0)
    iso_polar: tuple[float, ...] = (0.5, 1.0, 2.0, -0.5)
    iso_exploratory: tuple[float, ...] = (-0.3,)
    iso_fourier_affine: tuple[float, ...] = (1.0, 2.0 / 3.0, 0.5)
    iso_dual_fourier: tuple[float, ...] = (0.5, 1.0, 1.5)
    berwald: tuple[float, ...] = (-0.5, 0.0, 1.0, 2.0, 5.0)
    nonconvex: tuple[float, ...] = (1.1, 1.5, 1.9)
    convex_control: tuple[float, ...] = (0.5, 0.9, 1.0)
    parseval: tuple[float, ...] = (0.5, 1.0)
    cosine_bridge: tuple[float, ...] = (1.5, 2.0, 2.5)
    chain_grid: int = 360
    volume_grid: int = 4096
    radial_volume_grid: int = 8192
    iso_grid: int = 2048
    convexity_grid: int = 4096

    def with_(self, **changes) -> "CheckDefaults":
        return replace(self, **changes)


DEFAULT_CHECKS = CheckDefaults()
