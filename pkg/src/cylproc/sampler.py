"""
Sampling Poisson cylinder processes restricted to a window.

Cylinders are generated with base points uniform in a ball of the base
space that is large enough for every cylinder able to hit the window to
be represented. The extra cylinders never meet the window and do not
affect any point-probe estimate.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import geometry as geo
from .geometry import (Ball, Box, Cylinder, Frame, GeometryError, Interval, Point,
                       as_base_law, haar_rotations, law_intvol_moment, law_reach)
from .rng import SeedPath

DEFAULT_CYLINDER_CAP = 10_000_000


class ResourceCapError(RuntimeError):
    """The expected number of cylinders exceeds the configured cap."""


# ---------------------------------------------------------------------------
# Direction laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniformDirections:
    """Rotation-invariant direction law (the frame is Haar distributed)."""

    def sample(self, rng: np.random.Generator, size: int, n: int):
        return haar_rotations(n, size, rng), np.full(size, -1, dtype=np.int64)

    def describe(self) -> str:
        return "uniform"


@dataclass(frozen=True)
class FixedDirection:
    frame: Frame

    def sample(self, rng: np.random.Generator, size: int, n: int):
        mats = np.broadcast_to(self.frame.matrix, (size, n, n))
        return np.array(mats), np.zeros(size, dtype=np.int64)

    @property
    def atoms(self):
        return ((self.frame, 1.0),)

    def describe(self) -> str:
        return "fixed"


@dataclass(frozen=True)
class AtomicDirections:
    """Finitely many direction frames with positive weights summing to one."""

    frames: tuple
    weights: tuple

    def __post_init__(self):
        frames = tuple(self.frames)
        w = tuple(float(v) for v in self.weights)
        if not frames or len(frames) != len(w):
            raise GeometryError("need one weight per direction atom")
        if any(v <= 0 for v in w):
            raise GeometryError("atom weights must be positive")
        if abs(sum(w) - 1.0) > 1e-12:
            raise GeometryError("atom weights must sum to 1")
        if len({(f.dim_n, f.dim_m) for f in frames}) != 1:
            raise GeometryError("all atoms need the same (n, m)")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "weights", w)

    @property
    def atoms(self):
        return tuple(zip(self.frames, self.weights))

    def sample(self, rng: np.random.Generator, size: int, n: int):
        idx = rng.choice(len(self.frames), size=size, p=np.asarray(self.weights))
        stack = np.stack([f.matrix for f in self.frames])
        return stack[idx], idx.astype(np.int64)

    def describe(self) -> str:
        return "atoms(" + ",".join(f"{w:g}" for w in self.weights) + ")"


DirectionLaw = Union[UniformDirections, FixedDirection, AtomicDirections]


def direction_atoms(law: DirectionLaw):
    """``((frame, weight), ...)`` for atomic laws, ``None`` for the uniform law."""
    return None if isinstance(law, UniformDirections) else law.atoms


# ---------------------------------------------------------------------------
# Model specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    """
    A stationary Poisson cylinder process in R^n with m-dimensional
    direction spaces, intensity ``gamma`` of base points, and independent
    direction and base laws.
    """

    n: int
    m: int
    gamma: float
    direction: DirectionLaw
    base: object

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.m <= max(self.n - 1, 0):
            raise GeometryError(f"need n >= 1 and 0 <= m <= n-1 (n={self.n}, m={self.m})")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise GeometryError("gamma must be a positive finite number")
        law = as_base_law(self.base)
        geo.check_shape_dim(law.prototype, self.d)
        object.__setattr__(self, "base", law)
        atoms = direction_atoms(self.direction)
        if atoms is not None:
            for frame, _ in atoms:
                if (frame.dim_n, frame.dim_m) != (self.n, self.m):
                    raise GeometryError("direction frame does not match (n, m)")

    @property
    def d(self) -> int:
        return self.n - self.m

    @property
    def m1(self) -> float:
        """Mean base volume ``E[L^d(Ξ)]``."""
        return law_intvol_moment(self.base, self.d, self.d, 1)

    @property
    def m2(self) -> float:
        return law_intvol_moment(self.base, self.d, self.d, 2)

    @property
    def s1(self) -> float:
        """Mean ``E[V_{d-1}(Ξ)]``."""
        return law_intvol_moment(self.base, self.d, self.d - 1, 1)

    def with_gamma(self, gamma: float) -> "ModelSpec":
        return ModelSpec(self.n, self.m, gamma, self.direction, self.base)

    def describe_base(self) -> str:
        return self.base.describe()

    def describe_direction(self) -> str:
        return self.direction.describe()


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingRegion:
    radius: float
    mean_count: float
    dim: int


def sampling_region(spec: ModelSpec, window, r: float, margin: float = 0.0) -> SamplingRegion:
    """
    Ball in base space holding every base point whose cylinder can come
    within ``margin`` of ``W_r``, and the Poisson mean of its cylinder count.
    """
    if not r > 0:
        raise GeometryError("r must be positive")
    radius = window.circumradius(spec.n, r) + law_reach(spec.base) + margin
    d = spec.d
    return SamplingRegion(radius, spec.gamma * geo.unit_ball_volume(d) * radius**d, d)


_KIND = {Ball: 0, Box: 1, Interval: 2, Point: 3}


def _shape_params(shape, d: int) -> np.ndarray:
    p = np.zeros(max(d, 2))
    if isinstance(shape, Ball):
        p[0] = shape.radius
    elif isinstance(shape, Box):
        p[:d] = shape.half_widths
    elif isinstance(shape, Interval):
        p[0], p[1] = shape.a, shape.b
    return p


@dataclass(eq=False)
class CylinderPack(Sequence):
    """
    Structure-of-arrays storage for a set of cylinders, as consumed by the
    probe kernels. Indexing yields :class:`Cylinder` objects.
    """

    n: int
    m: int
    prototype: object
    centers: np.ndarray          # (K, d)
    frames: np.ndarray           # (K, n, n)
    factors: np.ndarray          # (K,) dilation factors of the prototype
    atom_index: np.ndarray       # (K,) direction atom, -1 for non-atomic laws
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def d(self) -> int:
        return self.n - self.m

    def __len__(self) -> int:
        return len(self.centers)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return Cylinder(self.centers[i], Frame(self.frames[i], self.m),
                        self.prototype.scaled(float(self.factors[i])))

    @property
    def proj(self) -> np.ndarray:
        return np.ascontiguousarray(self.frames[:, :, : self.d])

    def kernel_arrays(self):
        """``(proj, centers, kinds, params, reach)`` in kernel layout."""
        if "arrays" not in self._cache:
            d = self.d
            K = len(self)
            kind = _KIND[type(self.prototype)]
            params = np.tile(_shape_params(self.prototype, d), (K, 1)) * self.factors[:, None]
            reach = geo.reach(self.prototype) * self.factors
            self._cache["arrays"] = (self.proj, np.ascontiguousarray(self.centers),
                                     np.full(K, kind, dtype=np.int32),
                                     np.ascontiguousarray(params),
                                     np.ascontiguousarray(reach, dtype=float))
        return self._cache["arrays"]

    def subset(self, idx) -> "CylinderPack":
        idx = np.asarray(idx)
        return CylinderPack(self.n, self.m, self.prototype, self.centers[idx],
                            self.frames[idx], self.factors[idx], self.atom_index[idx])

    @classmethod
    def empty(cls, n: int, m: int, prototype=None) -> "CylinderPack":
        d = n - m
        return cls(n, m, prototype if prototype is not None else Point(),
                   np.zeros((0, d)), np.zeros((0, n, n)), np.zeros(0),
                   np.zeros(0, dtype=np.int64))


@dataclass(eq=False)
class MixedPack:
    """Kernel arrays for cylinders of different base shapes."""

    n: int
    m: int
    cylinders: list

    def __len__(self) -> int:
        return len(self.cylinders)

    def __iter__(self):
        return iter(self.cylinders)

    def __getitem__(self, i):
        return self.cylinders[i]

    def kernel_arrays(self):
        d = self.n - self.m
        K = len(self.cylinders)
        proj = np.zeros((K, self.n, d))
        centers = np.zeros((K, d))
        kinds = np.zeros(K, dtype=np.int32)
        params = np.zeros((K, max(d, 2)))
        reach = np.zeros(K)
        for k, c in enumerate(self.cylinders):
            proj[k] = c.frame.base_block
            centers[k] = c.center
            kinds[k] = _KIND[type(c.base)]
            params[k] = _shape_params(c.base, d)
            reach[k] = geo.reach(c.base)
        return proj, centers, kinds, params, reach


def pack_cylinders(cyls, n: int | None = None, m: int | None = None):
    """Kernel-ready view of any collection of cylinders."""
    if isinstance(cyls, (CylinderPack, MixedPack)):
        return cyls
    cyls = list(cyls)
    if not cyls:
        if n is None or m is None:
            raise GeometryError("dimensions needed to pack an empty cylinder list")
        return CylinderPack.empty(n, m)
    n0, m0 = cyls[0].frame.dim_n, cyls[0].frame.dim_m
    if any((c.frame.dim_n, c.frame.dim_m) != (n0, m0) for c in cyls):
        raise GeometryError("cylinders of different dimensions cannot be combined")
    return MixedPack(n0, m0, cyls)


def sample_realization(spec: ModelSpec, window, r: float, seed: SeedPath,
                       margin: float = 0.0,
                       cap: float = DEFAULT_CYLINDER_CAP) -> CylinderPack:
    """
    One realization of the cylinders that can meet ``W_r`` (enlarged by
    ``margin``), as a :class:`CylinderPack` (a sequence of cylinders).
    """
    region = sampling_region(spec, window, r, margin)
    if region.mean_count > cap:
        raise ResourceCapError(
            f"expected {region.mean_count:.3g} cylinders per realization exceeds the "
            f"cap of {cap:.3g}; lower gamma or r, or raise the cap")
    K = int(seed.stream("count").poisson(region.mean_count))
    d = spec.d
    pos = seed.stream("position")
    if d == 1:
        centers = (2.0 * pos.random((K, 1)) - 1.0) * region.radius
    else:
        g = pos.standard_normal((K, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        centers = g * (region.radius * pos.random(K) ** (1.0 / d))[:, None]
    frames, atom_idx = spec.direction.sample(seed.stream("direction"), K, spec.n)
    factors = spec.base.radius_law.sample(seed.stream("base"), K)
    return CylinderPack(spec.n, spec.m, spec.base.prototype, centers,
                        np.ascontiguousarray(frames, dtype=float),
                        np.asarray(factors, dtype=float), atom_idx)


def coverage_indicator(cyls, y) -> bool:
    """Whether the point ``y`` lies in the union of ``cyls``."""
    y = np.asarray(y, dtype=float)[None, :]
    for c in cyls:
        if c.contains(y)[0]:
            return True
    return False


def sample_cylinders(spec: ModelSpec, count: int, radius: float,
                     rng: np.random.Generator) -> CylinderPack:
    """``count`` independent cylinders of the model with base points uniform
    in the base-space ball of the given radius, all drawn from one stream."""
    d = spec.d
    if d == 1:
        centers = (2.0 * rng.random((count, 1)) - 1.0) * radius
    else:
        g = rng.standard_normal((count, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        centers = g * (radius * rng.random(count) ** (1.0 / d))[:, None]
    frames, atom_idx = spec.direction.sample(rng, count, spec.n)
    factors = spec.base.radius_law.sample(rng, count)
    return CylinderPack(spec.n, spec.m, spec.base.prototype, centers,
                        np.ascontiguousarray(frames, dtype=float),
                        np.asarray(factors, dtype=float), atom_idx)


__all__ = [
    "DEFAULT_CYLINDER_CAP", "ResourceCapError", "UniformDirections", "FixedDirection",
    "AtomicDirections", "DirectionLaw", "direction_atoms", "ModelSpec",
    "SamplingRegion", "sampling_region", "CylinderPack", "MixedPack",
    "pack_cylinders", "sample_realization", "sample_cylinders", "coverage_indicator",
]
