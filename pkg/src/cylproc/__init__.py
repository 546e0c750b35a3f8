"""Simulation and asymptotic analysis of Boolean cylinder processes."""

from . import analytics, functionals, geometry, kernels, sampler, stats
from .geometry import (Ball, BallWindow, Box, ConstantRadius, CubeWindow, DilatedBase,
                       FixedBase, Frame, GeometryError, Interval, Point, UniformRadius)
from .rng import SeedPath
from .sampler import (AtomicDirections, FixedDirection, ModelSpec, ResourceCapError,
                      UniformDirections, sample_realization)

__version__ = "0.1.0"

__all__ = [
    "analytics", "functionals", "geometry", "kernels", "sampler", "stats",
    "Ball", "BallWindow", "Box", "ConstantRadius", "CubeWindow", "DilatedBase",
    "FixedBase", "Frame", "GeometryError", "Interval", "Point", "UniformRadius",
    "SeedPath", "AtomicDirections", "FixedDirection", "ModelSpec",
    "ResourceCapError", "UniformDirections", "sample_realization",
]
