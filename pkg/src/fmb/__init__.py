"""Radial, Fourier and polar mean bodies of convex bodies, with numerical verification."""

from .bodies import BodySpec, ball, body_from_json, body_to_json, box, cube, ellipsoid, polygon, simplex
from .config import DEFAULT_QUAD, QuadConfig
from .meanbodies import radial_F, radial_gamma_polar, radial_R, radial_Z, sample_family
from .starops import StarSample, convexity_check_2d, star_volume
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "BodySpec",
    "DEFAULT_QUAD",
    "QuadConfig",
    "StarSample",
    "ball",
    "body_from_json",
    "body_to_json",
    "box",
    "convexity_check_2d",
    "cube",
    "ellipsoid",
    "polygon",
    "radial_F",
    "radial_R",
    "radial_Z",
    "radial_gamma_polar",
    "run_suite",
    "sample_family",
    "simplex",
    "star_volume",
]
