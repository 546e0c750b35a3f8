"""
Convex bases, rotation frames, observation windows and their covariograms.

All objects here are immutable value types. Base shapes live in the base
space R^d (d = n - m) of a cylinder and are described relative to a
reference point (the germ); windows live in R^n and are centred at the
origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special

ORTHO_TOL = 1e-12


class GeometryError(ValueError):
    """Unsupported or invalid shape/dimension combination."""


def unit_ball_volume(k: int) -> float:
    """Volume ``kappa_k = pi^(k/2) / Gamma(1 + k/2)`` of the unit k-ball."""
    if k < 0:
        raise GeometryError(f"dimension must be >= 0, got {k}")
    return math.pi ** (k / 2.0) / math.gamma(1.0 + k / 2.0)


def unit_sphere_area(k: int) -> float:
    """Surface area of the unit sphere in R^k, i.e. ``k * kappa_k``."""
    return k * unit_ball_volume(k)


def ball_covariogram(t, radius: float, dim: int):
    """
    Set covariogram ``L^d(B ∩ (B + z))`` of a d-ball, as a function of ``|z|``.

    Uses the regularized incomplete beta function; exact for every d >= 1.
    """
    t = np.asarray(t, dtype=float)
    u = np.clip(t / (2.0 * radius), 0.0, 1.0)
    val = (unit_ball_volume(dim) * radius**dim
           * special.betainc((dim + 1) / 2.0, 0.5, 1.0 - u * u))
    return np.where(t >= 2.0 * radius, 0.0, val)


def sphere_cap_area(t, radius: float, dim: int):
    """
    ``H^{d-1}(∂B ∩ (B - z))`` for a d-ball B of the given radius and ``|z| = t``.

    The part of the sphere lying in a translated copy of the ball is a cap
    of polar half-angle ``arccos(t / 2 rho)``.
    """
    t = np.asarray(t, dtype=float)
    if dim == 1:
        return np.where(t == 0.0, 2.0, np.where(t <= 2.0 * radius, 1.0, 0.0))
    c = np.clip(t / (2.0 * radius), 0.0, 1.0)
    s2 = 1.0 - c * c
    full = unit_sphere_area(dim) * radius ** (dim - 1)
    val = 0.5 * full * special.betainc((dim - 1) / 2.0, 0.5, s2)
    val = np.where(t == 0.0, full, val)
    return np.where(t > 2.0 * radius, 0.0, val)


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Frame:
    """
    A proper rotation split into base-space and direction-space blocks.

    The first ``n - m`` columns of ``matrix`` span the base space, the last
    ``m`` columns span the direction space of the cylinder.
    """

    matrix: np.ndarray
    dim_m: int

    def __post_init__(self):
        q = np.array(self.matrix, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise GeometryError("frame matrix must be square")
        n = q.shape[0]
        if not 0 <= self.dim_m <= max(n - 1, 0):
            raise GeometryError(f"need 0 <= m <= n-1, got m={self.dim_m}, n={n}")
        err = np.max(np.abs(q.T @ q - np.eye(n)))
        if err > ORTHO_TOL:
            raise GeometryError(f"frame not orthonormal (max deviation {err:.3g})")
        if np.linalg.det(q) < 0:
            raise GeometryError("frame must have determinant +1")
        q.setflags(write=False)
        object.__setattr__(self, "matrix", q)

    @property
    def dim_n(self) -> int:
        return self.matrix.shape[0]

    @property
    def base_dim(self) -> int:
        return self.dim_n - self.dim_m

    @property
    def base_block(self) -> np.ndarray:
        return self.matrix[:, : self.base_dim]

    @property
    def direction_block(self) -> np.ndarray:
        return self.matrix[:, self.base_dim:]

    def project(self, y) -> np.ndarray:
        """Base-space coordinates ``Π(θᵀ y)`` of one point or an (N, n) array."""
        return np.asarray(y, dtype=float) @ self.base_block

    def compose(self, rotation) -> "Frame":
        return Frame(np.asarray(rotation) @ self.matrix, self.dim_m)

    @classmethod
    def identity(cls, n: int, m: int) -> "Frame":
        return cls(np.eye(n), m)

    @classmethod
    def from_axes(cls, n: int, m: int, perm) -> "Frame":
        """Frame whose columns are the standard basis vectors in order ``perm``."""
        q = np.eye(n)[:, list(perm)]
        if np.linalg.det(q) < 0:
            q[:, -1] *= -1.0
        return cls(q, m)

    def __eq__(self, other):
        return (isinstance(other, Frame) and self.dim_m == other.dim_m
                and np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash((self.dim_m, self.matrix.tobytes()))


def haar_rotations(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    ``size`` Haar-distributed rotations in SO(n) as an array (size, n, n).

    QR of a Gaussian matrix with the sign of diag(R) fixed gives Haar O(n);
    flipping the last column of the improper ones gives Haar SO(n).
    """
    g = rng.standard_normal((size, n, n))
    q, r = np.linalg.qr(g)
    sign = np.sign(np.diagonal(r, axis1=1, axis2=2))
    sign[sign == 0] = 1.0
    q = q * sign[:, None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, -1] *= -1.0
    return q


def random_frame(n: int, m: int, rng: np.random.Generator) -> Frame:
    return Frame(haar_rotations(n, 1, rng)[0], m)


# ---------------------------------------------------------------------------
# Base shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("ball radius must be positive")

    def scaled(self, s: float) -> "Ball":
        return Ball(self.radius * s)

    def describe(self) -> str:
        return f"ball(radius={self.radius:g})"


@dataclass(frozen=True)
class Box:
    half_widths: tuple

    def __post_init__(self):
        h = tuple(float(v) for v in self.half_widths)
        if not h or any(v < 0 for v in h):
            raise GeometryError("box half-widths must be nonnegative")
        object.__setattr__(self, "half_widths", h)

    def scaled(self, s: float) -> "Box":
        return Box(tuple(v * s for v in self.half_widths))

    def describe(self) -> str:
        return "box(" + ",".join(f"{v:g}" for v in self.half_widths) + ")"


@dataclass(frozen=True)
class Interval:
    """The segment ``[-a, b]``; only meaningful in base dimension 1."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise GeometryError("interval needs a, b > 0")

    @property
    def length(self) -> float:
        return self.a + self.b

    def scaled(self, s: float) -> "Interval":
        return Interval(self.a * s, self.b * s)

    def describe(self) -> str:
        return f"interval(a={self.a:g},b={self.b:g})"


@dataclass(frozen=True)
class Point:
    def scaled(self, s: float) -> "Point":
        return self

    def describe(self) -> str:
        return "point"


BaseShape = Union[Ball, Box, Interval, Point]


def check_shape_dim(shape: BaseShape, dim: int) -> None:
    if dim < 1:
        raise GeometryError("base dimension must be >= 1")
    if isinstance(shape, Interval) and dim != 1:
        raise GeometryError("Interval bases require base dimension 1")
    if isinstance(shape, Box) and len(shape.half_widths) != dim:
        raise GeometryError(
            f"Box has {len(shape.half_widths)} half-widths, base dimension is {dim}")
    if not isinstance(shape, (Ball, Box, Interval, Point)):
        raise GeometryError(f"unsupported base shape {shape!r}")


def shape_dimension(shape: BaseShape, dim: int) -> int:
    """Dimension of the affine hull of the shape."""
    if isinstance(shape, Point):
        return 0
    if isinstance(shape, Box):
        return sum(1 for h in shape.half_widths if h > 0)
    return dim


def circumradius(shape: BaseShape) -> float:
    """Radius of the smallest ball containing the shape."""
    if isinstance(shape, Ball):
        return shape.radius
    if isinstance(shape, Box):
        return math.sqrt(sum(h * h for h in shape.half_widths))
    if isinstance(shape, Interval):
        return 0.5 * shape.length
    return 0.0


def reach(shape: BaseShape) -> float:
    """Largest distance from the reference point (the germ) to the shape."""
    if isinstance(shape, Interval):
        return max(shape.a, shape.b)
    return circumradius(shape)


def diameter(shape: BaseShape) -> float:
    if isinstance(shape, Interval):
        return shape.length
    return 2.0 * circumradius(shape)


def _elementary_symmetric(values) -> list:
    e = [1.0]
    for v in values:
        e = [1.0] + [e[j] + v * e[j - 1] for j in range(1, len(e))] + [v * e[-1]]
    return e


def intrinsic_volumes(shape: BaseShape, dim: int) -> np.ndarray:
    """Intrinsic volumes ``V_0 .. V_dim`` of a base shape in R^dim."""
    check_shape_dim(shape, dim)
    out = np.zeros(dim + 1)
    if isinstance(shape, Point):
        out[0] = 1.0
    elif isinstance(shape, Interval):
        out[0], out[1] = 1.0, shape.length
    elif isinstance(shape, Box):
        e = _elementary_symmetric([2.0 * h for h in shape.half_widths])
        out[:] = e[: dim + 1]
    else:
        kd = unit_ball_volume(dim)
        for j in range(dim + 1):
            out[j] = (math.comb(dim, j) * kd / unit_ball_volume(dim - j)
                      * shape.radius**j)
    return out


def parallel_volume(shape: BaseShape, dim: int, eps: float) -> float:
    """Volume of the eps-parallel set, by Steiner's polynomial."""
    if eps < 0:
        raise GeometryError("eps must be >= 0")
    v = intrinsic_volumes(shape, dim)
    return float(sum(eps ** (dim - j) * unit_ball_volume(dim - j) * v[j]
                     for j in range(dim + 1)))


def contains(shape: BaseShape, u) -> np.ndarray:
    """Exact membership of base-space points ``u`` (shape (N, d)) in the shape."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if isinstance(shape, Ball):
        return np.einsum("ij,ij->i", u, u) <= shape.radius * shape.radius
    if isinstance(shape, Box):
        return np.all(np.abs(u) <= np.asarray(shape.half_widths), axis=1)
    if isinstance(shape, Interval):
        return (u[:, 0] >= -shape.a) & (u[:, 0] <= shape.b)
    return np.all(u == 0.0, axis=1)


def distance(shape: BaseShape, u) -> np.ndarray:
    """Euclidean distance from base-space points ``u`` (N, d) to the shape."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if isinstance(shape, Ball):
        return np.maximum(np.linalg.norm(u, axis=1) - shape.radius, 0.0)
    if isinstance(shape, Box):
        ex = np.maximum(np.abs(u) - np.asarray(shape.half_widths), 0.0)
        return np.linalg.norm(ex, axis=1)
    if isinstance(shape, Interval):
        x = u[:, 0]
        return np.maximum(np.maximum(-shape.a - x, x - shape.b), 0.0)
    return np.linalg.norm(u, axis=1)


# ---------------------------------------------------------------------------
# Covariograms of a single shape
# ---------------------------------------------------------------------------

def shape_covariogram(shape: BaseShape, z, dim: int) -> np.ndarray:
    """``L^d(X ∩ (X + z))`` for points ``z`` of shape (N, d)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if isinstance(shape, Point):
        return np.zeros(len(z))
    if isinstance(shape, Interval):
        return np.maximum(shape.length - np.abs(z[:, 0]), 0.0)
    if isinstance(shape, Box):
        w = 2.0 * np.asarray(shape.half_widths)
        return np.prod(np.maximum(w - np.abs(z), 0.0), axis=1)
    return ball_covariogram(np.linalg.norm(z, axis=1), shape.radius, dim)


def shape_boundary_covariogram(shape: BaseShape, z, dim: int) -> np.ndarray:
    """``H^{d-1}(∂X ∩ (X - z))`` for points ``z`` of shape (N, d)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if isinstance(shape, Point):
        # ∂{0} = {0}; H^0 counts it in d = 1, zero measure otherwise
        return np.where(np.all(z == 0.0, axis=1), 1.0 if dim == 1 else 0.0, 0.0)
    if isinstance(shape, Interval):
        x = z[:, 0]
        ell = shape.length
        left = (x >= 0) & (x <= ell)
        right = (x <= 0) & (x >= -ell)
        return left.astype(float) + right.astype(float)
    if isinstance(shape, Box):
        h = np.asarray(shape.half_widths)
        if np.any(h == 0):
            raise GeometryError("boundary covariogram needs a full-dimensional box")
        w = 2.0 * h
        overlap = np.maximum(w - np.abs(z), 0.0)
        total = np.zeros(len(z))
        for i in range(dim):
            others = np.prod(np.delete(overlap, i, axis=1), axis=1) if dim > 1 else 1.0
            zi = z[:, i]
            faces = (((zi >= -w[i]) & (zi <= 0)).astype(float)
                     + ((zi >= 0) & (zi <= w[i])).astype(float))
            total += faces * others
        return total
    return sphere_cap_area(np.linalg.norm(z, axis=1), shape.radius, dim)


def is_radial(shape: BaseShape) -> bool:
    """Whether the covariogram depends on ``|z|`` only."""
    return isinstance(shape, (Ball, Point, Interval))


# ---------------------------------------------------------------------------
# Windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BallWindow:
    """The origin-centred ball of the given radius; scaled multiplicatively by r."""

    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("window radius must be positive")

    def volume(self, n: int, r: float = 1.0) -> float:
        return unit_ball_volume(n) * (r * self.radius) ** n

    def circumradius(self, n: int, r: float = 1.0) -> float:
        return r * self.radius

    def diameter(self, n: int, r: float = 1.0) -> float:
        return 2.0 * r * self.radius

    def intrinsic_volumes(self, n: int, r: float = 1.0) -> np.ndarray:
        return intrinsic_volumes(Ball(r * self.radius), n)

    def covariogram(self, x, n: int, r: float = 1.0) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return ball_covariogram(np.linalg.norm(x, axis=1), r * self.radius, n)

    def isotropic_covariogram(self, t, n: int, r: float = 1.0):
        return ball_covariogram(t, r * self.radius, n)

    def sample(self, rng: np.random.Generator, size: int, n: int,
               r: float = 1.0) -> np.ndarray:
        g = rng.standard_normal((size, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = r * self.radius * rng.random(size) ** (1.0 / n)
        return g * rad[:, None]

    def ray_exit(self, x: np.ndarray, w: np.ndarray, r: float = 1.0) -> np.ndarray:
        """Distance from interior points ``x`` along unit directions ``w`` to the boundary."""
        R = r * self.radius
        xw = np.einsum("ij,ij->i", x, w)
        xx = np.einsum("ij,ij->i", x, x)
        return -xw + np.sqrt(np.maximum(xw * xw + R * R - xx, 0.0))

    def describe(self) -> str:
        return f"ball(radius={self.radius:g})"


@dataclass(frozen=True)
class CubeWindow:
    """The origin-centred cube ``[-s/2, s/2]^n``; scaled multiplicatively by r."""

    side: float = 1.0

    def __post_init__(self):
        if not self.side > 0:
            raise GeometryError("cube side must be positive")

    def volume(self, n: int, r: float = 1.0) -> float:
        return (r * self.side) ** n

    def circumradius(self, n: int, r: float = 1.0) -> float:
        return 0.5 * r * self.side * math.sqrt(n)

    def diameter(self, n: int, r: float = 1.0) -> float:
        return r * self.side * math.sqrt(n)

    def intrinsic_volumes(self, n: int, r: float = 1.0) -> np.ndarray:
        return intrinsic_volumes(Box((0.5 * r * self.side,) * n), n)

    def covariogram(self, x, n: int, r: float = 1.0) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.prod(np.maximum(r * self.side - np.abs(x), 0.0), axis=1)

    def isotropic_covariogram(self, t, n: int, r: float = 1.0):
        """Covariogram averaged over uniformly random directions of length ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        dirs, wts = sphere_rule(n)
        pts = t[:, None, None] * dirs[None, :, :]
        vals = np.prod(np.maximum(r * self.side - np.abs(pts), 0.0), axis=2)
        return vals @ wts

    def sample(self, rng: np.random.Generator, size: int, n: int,
               r: float = 1.0) -> np.ndarray:
        return (rng.random((size, n)) - 0.5) * (r * self.side)

    def ray_exit(self, x: np.ndarray, w: np.ndarray, r: float = 1.0) -> np.ndarray:
        half = 0.5 * r * self.side
        with np.errstate(divide="ignore", invalid="ignore"):
            tt = np.where(w > 0, (half - x) / w, np.where(w < 0, (-half - x) / w, np.inf))
        return np.min(tt, axis=1)

    def describe(self) -> str:
        return f"cube(side={self.side:g})"


Window = Union[BallWindow, CubeWindow]


_SPHERE_CACHE: dict = {}


def sphere_rule(n: int, order: int = 64):
    """
    Quadrature rule (directions, weights) for the uniform law on S^{n-1}.

    Exact Gauss-type product rules for n <= 3; a fixed Fibonacci-type
    lattice of equal weights beyond that.
    """
    key = (n, order)
    if key in _SPHERE_CACHE:
        return _SPHERE_CACHE[key]
    if n == 1:
        dirs, w = np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    elif n == 2:
        k = 4 * order
        phi = (np.arange(k) + 0.5) * (2.0 * math.pi / k)
        dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        w = np.full(k, 1.0 / k)
    elif n == 3:
        c, wc = np.polynomial.legendre.leggauss(order)
        k = 2 * order
        phi = (np.arange(k) + 0.5) * (2.0 * math.pi / k)
        s = np.sqrt(1.0 - c * c)
        dirs = np.stack([np.outer(s, np.cos(phi)).ravel(),
                         np.outer(s, np.sin(phi)).ravel(),
                         np.repeat(c, k)], axis=1)
        w = np.repeat(wc / 2.0, k) / k
    else:
        rng = np.random.default_rng(0x5EED)
        g = rng.standard_normal((4096, n))
        dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
        dirs = np.concatenate([dirs, -dirs])
        w = np.full(len(dirs), 1.0 / len(dirs))
    _SPHERE_CACHE[key] = (dirs, w)
    return dirs, w


def window_flat_section_integral(window: Window, frame: "Frame | None", n: int, m: int,
                                 r: float = 1.0, tol: float = 1e-10) -> float:
    """
    ``∫_{R^m} C_W(θ(0, w)) dw``: integral of the window covariogram over the
    direction space. Equals ``∫ L^m(H(y, θ) ∩ W)^2 dy`` by Fubini. With
    ``frame=None`` the covariogram is averaged over uniform directions.
    """
    if m == 0:
        return window.volume(n, r)
    diam = window.diameter(n, r)
    if frame is None or isinstance(window, BallWindow):
        if isinstance(window, BallWindow):
            cov = lambda t: float(window.isotropic_covariogram(t, n, r))
        else:
            cov = lambda t: float(window.isotropic_covariogram(t, n, r)[0])
        val, _ = integrate.quad(lambda t: cov(t) * t ** (m - 1), 0.0, diam,
                                epsabs=tol, epsrel=tol, limit=200)
        return unit_sphere_area(m) * val
    dblock = frame.direction_block

    def cov_at(*w):
        x = dblock @ np.asarray(w)
        return float(window.covariogram(x[None, :], n, r)[0])

    if m > 3:
        raise GeometryError("cube-window section integrals supported for m <= 3")
    val, _ = integrate.nquad(cov_at, [(-diam, diam)] * m,
                             opts={"epsabs": tol, "epsrel": tol, "limit": 100})
    return val


# ---------------------------------------------------------------------------
# Base laws
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


@dataclass(frozen=True)
class ConstantRadius:
    value: float = 1.0

    def __post_init__(self):
        if not self.value > 0:
            raise GeometryError("radius factor must be positive")

    @property
    def sup(self) -> float:
        return self.value

    def moment(self, k: float) -> float:
        return self.value**k

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.value)

    def nodes(self):
        return np.array([self.value]), np.array([1.0])

    def describe(self) -> str:
        return f"const({self.value:g})"


@dataclass(frozen=True)
class UniformRadius:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise GeometryError("need 0 <= lo < hi for a uniform radius law")

    @property
    def sup(self) -> float:
        return self.hi

    def moment(self, k: float) -> float:
        return (self.hi ** (k + 1) - self.lo ** (k + 1)) / ((k + 1) * (self.hi - self.lo))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.random(size)

    def nodes(self):
        """Gauss-Legendre nodes and probability weights for expectations over R."""
        half = 0.5 * (self.hi - self.lo)
        return self.lo + half * (_GL_NODES + 1.0), 0.5 * _GL_WEIGHTS

    def describe(self) -> str:
        return f"uniform({self.lo:g},{self.hi:g})"


RadiusLaw = Union[ConstantRadius, UniformRadius]


@dataclass(frozen=True)
class FixedBase:
    """Deterministic typical base."""

    shape: BaseShape

    @property
    def prototype(self) -> BaseShape:
        return self.shape

    @property
    def radius_law(self) -> RadiusLaw:
        return ConstantRadius(1.0)

    def describe(self) -> str:
        return self.shape.describe()


@dataclass(frozen=True)
class DilatedBase:
    """Typical base ``R * K`` for a fixed prototype K and a random factor R."""

    prototype: BaseShape
    radius_law: RadiusLaw

    def describe(self) -> str:
        return f"{self.prototype.describe()}*{self.radius_law.describe()}"


BaseLaw = Union[FixedBase, DilatedBase]


def as_base_law(base) -> BaseLaw:
    if isinstance(base, (FixedBase, DilatedBase)):
        return base
    return FixedBase(base)


def law_reach(law: BaseLaw) -> float:
    """Essential supremum of the reach of the typical base."""
    law = as_base_law(law)
    return reach(law.prototype) * law.radius_law.sup


def law_diameter(law: BaseLaw) -> float:
    law = as_base_law(law)
    return diameter(law.prototype) * law.radius_law.sup


def law_intvol_moment(law: BaseLaw, dim: int, j: int, power: int = 1) -> float:
    """``E[V_j(Ξ)^power]``; V_j of ``R K`` is ``R^j V_j(K)``."""
    law = as_base_law(law)
    vj = intrinsic_volumes(law.prototype, dim)[j]
    return vj**power * law.radius_law.moment(j * power)


def law_intvol_cross_moment(law: BaseLaw, dim: int, i: int, j: int) -> float:
    """``E[V_i(Ξ) V_j(Ξ)]``."""
    law = as_base_law(law)
    v = intrinsic_volumes(law.prototype, dim)
    return v[i] * v[j] * law.radius_law.moment(i + j)


def covariogram_f(base_law, z, dim: int, atom_weight: float | None = None) -> np.ndarray:
    """
    Mean covariogram ``E[V_d(Ξ ∩ (Ξ + z))]`` of the typical base.

    ``atom_weight`` multiplies by ``Q(Θ = ρ_i)``, which is how the
    restriction to one direction atom enters under independence of base and
    direction. Returns one value per row of ``z`` (shape (N, d)).
    """
    law = as_base_law(base_law)
    check_shape_dim(law.prototype, dim)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    rs, ws = law.radius_law.nodes()
    out = np.zeros(len(z))
    for rad, w in zip(rs, ws):
        if rad <= 0:
            continue
        out += w * rad**dim * shape_covariogram(law.prototype, z / rad, dim)
    return out if atom_weight is None else atom_weight * out


def covariogram_g(base_law, z, dim: int, atom_weight: float | None = None) -> np.ndarray:
    """Mean boundary covariogram ``E[H^{d-1}(∂Ξ ∩ (Ξ - z))]``."""
    law = as_base_law(base_law)
    check_shape_dim(law.prototype, dim)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    rs, ws = law.radius_law.nodes()
    out = np.zeros(len(z))
    for rad, w in zip(rs, ws):
        if rad <= 0:
            continue
        out += w * rad ** (dim - 1) * shape_boundary_covariogram(law.prototype, z / rad, dim)
    return out if atom_weight is None else atom_weight * out


# ---------------------------------------------------------------------------
# Cylinders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cylinder:
    """``Z(x, θ, X) = θ((X + x) × E^m)``."""

    center: np.ndarray
    frame: Frame
    base: BaseShape

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(-1)
        if len(c) != self.frame.base_dim:
            raise GeometryError("cylinder center must live in the base space")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        check_shape_dim(self.base, self.frame.base_dim)

    def contains(self, y) -> np.ndarray:
        """Exact membership ``Π(θᵀ y) - x ∈ X`` of points ``y`` (N, n)."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return contains(self.base, self.frame.project(y) - self.center)

    def distance(self, y) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return distance(self.base, self.frame.project(y) - self.center)


__all__ = [
    "ORTHO_TOL", "GeometryError", "unit_ball_volume", "unit_sphere_area",
    "ball_covariogram", "sphere_cap_area", "Frame", "haar_rotations", "random_frame",
    "Ball", "Box", "Interval", "Point", "BaseShape", "check_shape_dim",
    "shape_dimension", "circumradius", "reach", "diameter", "intrinsic_volumes",
    "parallel_volume", "contains", "distance", "shape_covariogram",
    "shape_boundary_covariogram", "is_radial", "BallWindow", "CubeWindow", "Window",
    "sphere_rule", "window_flat_section_integral", "ConstantRadius", "UniformRadius",
    "RadiusLaw", "FixedBase", "DilatedBase", "BaseLaw", "as_base_law", "law_reach",
    "law_diameter", "law_intvol_moment", "law_intvol_cross_moment", "covariogram_f",
    "covariogram_g", "Cylinder",
]
