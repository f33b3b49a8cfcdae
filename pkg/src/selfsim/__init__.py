"""Singularity structure, core representation and ideal lattice of self-similar maps."""
from .exact import QSqrt3, SQRT3, format_scalar, parse_scalar
from .ifs import AffineMap, SelfSimilarSystem, builtin, compose, load_system

__version__ = "0.1.0"

__all__ = [
    "QSqrt3",
    "SQRT3",
    "format_scalar",
    "parse_scalar",
    "AffineMap",
    "SelfSimilarSystem",
    "builtin",
    "compose",
    "load_system",
]
