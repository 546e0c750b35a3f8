"""
Closed-form and quadrature values of first- and second-order quantities.

Means and exact variances of the covered volume, the window factor
``T(W, θ)``, chord-power integrals, the asymptotic variance and covariance
constants of volume and surface functionals, the two families of models
with a vanishing surface variance constant, and the covariance matrix of
intrinsic volumes of a randomly dilated base.

``f`` and ``g`` below are the mean covariogram and mean boundary
covariogram of the typical base. Restricting to a direction atom of weight
``p`` multiplies both by ``p`` because base and direction are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from . import geometry as geo
from .geometry import (Ball, BallWindow, Box, CubeWindow, Frame, GeometryError, Interval,
                       Point, covariogram_f, covariogram_g, is_radial,
                       law_intvol_cross_moment, law_intvol_moment, unit_ball_volume,
                       unit_sphere_area)
from .sampler import (AtomicDirections, FixedDirection, ModelSpec, UniformDirections,
                      direction_atoms)

DEFAULT_QUAD_TOL = 1e-8


class QuadratureError(RuntimeError):
    """An adaptive quadrature did not reach the requested tolerance."""


def _quad(func, a, b, tol, **kw):
    val, err = integrate.quad(func, a, b, epsabs=tol, epsrel=tol, limit=400, **kw)
    if not np.isfinite(val):
        raise QuadratureError("quadrature returned a non-finite value")
    return val, err


# ---------------------------------------------------------------------------
# First order
# ---------------------------------------------------------------------------

def mean_volume(spec: ModelSpec, window, r: float = 1.0) -> float:
    """``E[L^n(Z ∩ W_r)] = V_n(W_r) (1 - exp(-γ m_1))``."""
    return window.volume(spec.n, r) * -math.expm1(-spec.gamma * spec.m1)


def coverage_probability(spec: ModelSpec) -> float:
    return -math.expm1(-spec.gamma * spec.m1)


# ---------------------------------------------------------------------------
# Covariograms of the typical base
# ---------------------------------------------------------------------------

def _f_radial(law, d: int, t, weight: float = 1.0) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z = np.zeros((len(t), d))
    z[:, 0] = t
    return weight * covariogram_f(law, z, d)


def _g_radial(law, d: int, t, weight: float = 1.0) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z = np.zeros((len(t), d))
    z[:, 0] = t
    return weight * covariogram_g(law, z, d)


def isotropic_f(law, d: int, t) -> np.ndarray:
    """Base covariogram averaged over uniformly rotated shift directions."""
    law = geo.as_base_law(law)
    if is_radial(law.prototype) or d == 1:
        return _f_radial(law, d, t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    dirs, wts = geo.sphere_rule(d)
    pts = (t[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    return covariogram_f(law, pts, d).reshape(len(t), len(wts)) @ wts


def projected_f(law, d: int, m: int, t: float, tol: float = 1e-10) -> float:
    """
    ``E[f(Π(Θᵀ x))]`` for ``|x| = t`` and Θ uniform. The squared length of
    the projection of a fixed unit vector onto a uniform d-subspace is
    Beta(d/2, m/2) distributed, so this is a one-dimensional integral.
    """
    law = geo.as_base_law(law)
    if m == 0:
        return float(isotropic_f(law, d, t)[0])
    if t == 0.0:
        return float(isotropic_f(law, d, 0.0)[0])
    D = geo.law_diameter(law)
    alpha, beta = d / 2.0 - 1.0, m / 2.0 - 1.0
    norm = special.beta(d / 2.0, m / 2.0)
    h = lambda s: float(isotropic_f(law, d, t * math.sqrt(s))[0])
    if t <= D:
        val, _ = _quad(h, 0.0, 1.0, tol, weight="alg", wvar=(alpha, beta))
    else:
        sk = (D / t) ** 2
        val, _ = _quad(lambda s: h(s) * (1.0 - s) ** beta, 0.0, sk, tol,
                       weight="alg", wvar=(alpha, 0.0))
    return val / norm


def _box_integral(law, d: int, integrand: Callable, weight: float, nodes: int = 24,
                  panels: int = 8) -> float:
    """∫_{R^d} of an even-in-each-coordinate integrand for Box bases."""
    if d > 3:
        raise GeometryError("box-base integrals supported for base dimension <= 3")
    law = geo.as_base_law(law)
    w = 2.0 * np.asarray(law.prototype.half_widths) * law.radius_law.sup
    x, wx = np.polynomial.legendre.leggauss(nodes)
    axes, waxes = [], []
    for k in range(d):
        edges = np.linspace(0.0, w[k], panels + 1)
        pts = (0.5 * (edges[1:, None] - edges[:-1, None]) * (x[None, :] + 1.0)
               + edges[:-1, None]).ravel()
        wts = (0.5 * (edges[1:, None] - edges[:-1, None]) * wx[None, :]).ravel()
        axes.append(pts)
        waxes.append(wts)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    wgrid = np.prod(np.stack(np.meshgrid(*waxes, indexing="ij"), axis=-1).reshape(-1, d),
                    axis=1)
    fv = covariogram_f(law, grid, d, weight)
    gv = covariogram_g(law, grid, d, weight)
    gm = covariogram_g(law, -grid, d, weight)
    return float(2.0**d * np.sum(wgrid * integrand(fv, gv, gm)))


def base_space_integral(law, d: int, integrand: Callable, weight: float = 1.0,
                        tol: float = DEFAULT_QUAD_TOL) -> float:
    """
    ``∫_{R^d} integrand(f(z), g(z), g(-z)) dz`` with ``f``, ``g`` scaled by
    ``weight``. The integrand must vanish where ``f`` and ``g`` do, so the
    domain is truncated at the diameter of the base.
    """
    law = geo.as_base_law(law)
    proto = law.prototype
    if isinstance(proto, Box) and d > 1:
        return _box_integral(law, d, integrand, weight)
    D = geo.law_diameter(law)
    if D == 0.0:
        return 0.0
    area = unit_sphere_area(d)

    def h(t):
        fv = _f_radial(law, d, t, weight)
        gv = _g_radial(law, d, t, weight)
        return float(integrand(fv, gv, gv)[0]) * area * t ** (d - 1)

    val, _ = _quad(h, 0.0, D, tol)
    return val


# ---------------------------------------------------------------------------
# Window factor and chord-power integrals
# ---------------------------------------------------------------------------

def t_window_ball_closed_form(n: int, m: int, radius: float = 1.0) -> float:
    """``m! π^{-m} κ_m² κ_{n+m} R^{n+m}`` for the ball of radius R."""
    return (math.factorial(m) * math.pi ** (-m) * unit_ball_volume(m) ** 2
            * unit_ball_volume(n + m) * radius ** (n + m))


def t_window_ball_radial(n: int, m: int, radius: float = 1.0,
                         tol: float = 1e-13) -> float:
    """Same quantity from the radial integral of squared section volumes."""
    d = n - m
    val, _ = _quad(lambda s: (1.0 - s * s) ** m * s ** (d - 1), 0.0, 1.0, tol)
    return d * unit_ball_volume(d) * unit_ball_volume(m) ** 2 * val * radius ** (n + m)


def t_window(window, frame: "Frame | None", n: int, m: int, r: float = 1.0,
             quad_tol: float = 1e-10) -> float:
    """
    ``T(W_r, θ) = ∫ L^m(H(y, θ) ∩ W_r)² dy``. ``frame=None`` averages over
    uniform directions. Ball windows use the closed form.
    """
    if m == 0:
        return window.volume(n, r)
    if isinstance(window, BallWindow):
        return t_window_ball_closed_form(n, m, r * window.radius)
    return geo.window_flat_section_integral(window, frame, n, m, r, quad_tol)


def expected_t_window(spec: ModelSpec, window, quad_tol: float = 1e-10) -> float:
    """``E[T(W, Θ)]`` under the direction law of the model."""
    atoms = direction_atoms(spec.direction)
    if atoms is None:
        return t_window(window, None, spec.n, spec.m, 1.0, quad_tol)
    return sum(p * t_window(window, f, spec.n, spec.m, 1.0, quad_tol) for f, p in atoms)


def chord_power_integral(window, n: int, m: int) -> float:
    """
    ``I_{m+1}(W) = (m+1)/κ_m · E[T(W, Θ)]`` for ball windows. Cube windows
    need the Monte Carlo energy form :func:`chord_power_energy_mc`.
    """
    if not isinstance(window, BallWindow):
        raise GeometryError("closed-form chord-power integral needs a ball window; "
                            "use chord_power_energy_mc")
    return (m + 1) / unit_ball_volume(m) * t_window(window, None, n, m)


def chord_power_energy_mc(window, n: int, m: int, samples: int,
                          rng: np.random.Generator):
    """
    Monte Carlo value and standard error of the chord-power integral from
    its energy representation ``m(m+1)/(n κ_n) ∫∫ |x-y|^{m-n}``.

    Integrating the kernel radially from each point turns it into
    ``(m+1) V(W) E[ρ(x, ω)^m]`` with ``x`` uniform in W, ``ω`` uniform on
    the sphere and ``ρ`` the distance to the boundary along ``ω``; this form
    has finite variance.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    x = window.sample(rng, samples, n)
    w = rng.standard_normal((samples, n))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    vals = (m + 1) * window.volume(n) * window.ray_exit(x, w) ** m
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


# ---------------------------------------------------------------------------
# Exact variance of the covered volume
# ---------------------------------------------------------------------------

def _window_isotropic_cov(window, n: int, r: float, t: float) -> float:
    return float(np.atleast_1d(window.isotropic_covariogram(t, n, r))[0])


def variance_volume_exact(spec: ModelSpec, window, r: float = 1.0,
                          quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """
    ``Var L^n(Z ∩ W_r) = e^{-2γm_1} ∫ C_{W_r}(x) (e^{γ f̄(x)} - 1) dx`` where
    ``f̄(x) = E[f(Π(Θᵀ x))]`` averages the base covariogram over directions.
    """
    n, m, d, gamma = spec.n, spec.m, spec.d, spec.gamma
    if spec.m1 == 0.0:
        return 0.0
    pref = math.exp(-2.0 * gamma * spec.m1)
    DW = window.diameter(n, r)
    DX = geo.law_diameter(spec.base)
    atoms = direction_atoms(spec.direction)
    inner_tol = min(quad_tol, 1e-10)

    if atoms is None or m == 0:
        if m == 0 and atoms is not None and not is_radial(spec.base.prototype) and d > 1:
            raise GeometryError("m = 0 with fixed rotations of non-radial grains is unsupported")
        upper = DW if m > 0 else min(DW, DX)
        area = unit_sphere_area(n)

        def h(t):
            fb = projected_f(spec.base, d, m, t, inner_tol)
            return (_window_isotropic_cov(window, n, r, t) * math.expm1(gamma * fb)
                    * area * t ** (n - 1))

        pts = [DX] if 0 < DX < upper else None
        val, _ = _quad(h, 0.0, upper, quad_tol, points=pts)
        return pref * val

    if len(atoms) == 1 and isinstance(window, BallWindow):
        R = r * window.radius
        amass = unit_sphere_area(m)

        def section(s):
            # ∫_{R^m} C_W(√(s² + |w|²)) dw
            if s >= DW:
                return 0.0
            top = math.sqrt(DW * DW - s * s)
            val, _ = _quad(lambda q: float(geo.ball_covariogram(math.hypot(s, q), R, n))
                           * q ** (m - 1), 0.0, top, inner_tol)
            return amass * val

        def integrand(fv, gv, gm):
            return np.expm1(gamma * fv)

        law = spec.base
        if isinstance(law.prototype, Box) and d > 1:
            # tensor rule with the radial section factor
            return pref * _box_section_integral(law, d, gamma, section)
        area = unit_sphere_area(d)
        upper = min(DX, DW)
        val, _ = _quad(lambda s: math.expm1(gamma * float(_f_radial(law, d, s)[0]))
                       * section(s) * area * s ** (d - 1), 0.0, upper, quad_tol)
        return pref * val

    if n > 3:
        raise GeometryError("exact variance for several atoms supported for n <= 3")
    frames = [(f.base_block, p) for f, p in atoms]

    def fbar(*x):
        x = np.asarray(x)
        tot = 0.0
        for P, p in frames:
            tot += p * float(covariogram_f(spec.base, (x @ P)[None, :], d)[0])
        return tot

    def g(*x):
        cw = float(window.covariogram(np.asarray(x)[None, :], n, r)[0])
        return cw * math.expm1(gamma * fbar(*x)) if cw > 0 else 0.0

    lim = [(-DW, DW)] * n
    val, _ = integrate.nquad(g, lim, opts={"epsabs": quad_tol, "epsrel": quad_tol,
                                           "limit": 100})
    return pref * val


def _box_section_integral(law, d, gamma, section) -> float:
    law = geo.as_base_law(law)
    w = 2.0 * np.asarray(law.prototype.half_widths) * law.radius_law.sup
    x, wx = np.polynomial.legendre.leggauss(24)
    axes = [0.5 * wk * (x + 1.0) for wk in w]
    waxes = [0.5 * wk * wx for wk in w]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    wgrid = np.prod(np.stack(np.meshgrid(*waxes, indexing="ij"), axis=-1).reshape(-1, d),
                    axis=1)
    fv = covariogram_f(law, grid, d)
    sec = np.array([section(float(s)) for s in np.linalg.norm(grid, axis=1)])
    return float(2.0**d * np.sum(wgrid * np.expm1(gamma * fv) * sec))


# ---------------------------------------------------------------------------
# Asymptotic constants
# ---------------------------------------------------------------------------

def _atoms_for_constants(spec: ModelSpec):
    """Atoms in the sense of the variance formulas; m = 0 is a single atom."""
    atoms = direction_atoms(spec.direction)
    if spec.m == 0:
        if atoms is not None and not is_radial(spec.base.prototype) and spec.d > 1:
            raise GeometryError("m = 0 with fixed rotations of non-radial grains is unsupported")
        return ((None, 1.0),)
    return atoms


def _t_atom(window, frame, n, m, tol):
    if m == 0:
        return window.volume(n)
    return t_window(window, frame, n, m, 1.0, tol)


def v_volume(spec: ModelSpec, window, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Limit of ``r^{-(n+m)} Var L^n(Z ∩ W_r)``."""
    return _v_volume_parts(spec, window, quad_tol)[0]


def _v_volume_parts(spec, window, quad_tol):
    gamma = spec.gamma
    pref = math.exp(-2.0 * gamma * spec.m1)
    atoms = _atoms_for_constants(spec)
    if atoms is None:
        return gamma * spec.m2 * pref * expected_t_window(spec, window), ()
    parts = []
    for frame, p in atoms:
        T = _t_atom(window, frame, spec.n, spec.m, quad_tol)
        if spec.m == 0 and isinstance(spec.direction, UniformDirections):
            integ = _isotropic_boolean_integral(spec, quad_tol)
        else:
            integ = base_space_integral(spec.base, spec.d,
                                        lambda fv, gv, gm: np.expm1(gamma * fv), p, quad_tol)
        parts.append({"weight": p, "t_window": T, "v_volume": pref * T * integ})
    return sum(x["v_volume"] for x in parts), tuple(parts)


def _isotropic_boolean_integral(spec, tol):
    d = spec.d
    D = geo.law_diameter(spec.base)
    area = unit_sphere_area(d)
    val, _ = _quad(lambda t: math.expm1(spec.gamma * float(isotropic_f(spec.base, d, t)[0]))
                   * area * t ** (d - 1), 0.0, D, tol)
    return val


def _require_surface_model(spec: ModelSpec):
    if spec.m < 1:
        raise GeometryError("surface constants are defined for m >= 1")


def _squared_surface_moment(spec: ModelSpec) -> float:
    """``E[(γ s_1 V_d(Ξ) - V_{d-1}(Ξ))²]`` without cancellation."""
    law, d, g = spec.base, spec.d, spec.gamma
    v = geo.intrinsic_volumes(law.prototype, d)
    rs, ws = law.radius_law.nodes()
    s1 = spec.s1
    vals = (g * s1 * v[d] * rs**d - v[d - 1] * rs ** (d - 1)) ** 2
    return float(np.dot(ws, vals))


def _boundary_pair_integral(law, d: int, gamma: float, weight: float,
                            rng: np.random.Generator | None = None, samples: int = 200_000):
    """
    ``E[∫_{∂Ξ}∫_{∂Ξ} e^{γ f_i(y - z)}]`` with ``f_i = weight · f``; returns
    (value, standard error). Box bases in d >= 2 use Monte Carlo.
    """
    law = geo.as_base_law(law)
    proto = law.prototype
    rs, ws = law.radius_law.nodes()
    fexp = lambda t: np.exp(gamma * _f_radial(law, d, t, weight))
    if isinstance(proto, Point):
        return (float(np.exp(gamma * weight * covariogram_f(law, np.zeros((1, d)), d)[0]))
                if d == 1 else 0.0), 0.0
    if d == 1:
        if isinstance(proto, Interval):
            ell = proto.length
        elif isinstance(proto, Ball):
            ell = 2.0 * proto.radius
        else:
            ell = 2.0 * proto.half_widths[0]
        vals = [2.0 * fexp(0.0)[0] + 2.0 * fexp(ell * R)[0] for R in rs]
        return float(np.dot(ws, vals)), 0.0
    if isinstance(proto, Ball):
        out = 0.0
        for R, w in zip(rs, ws):
            rho = proto.radius * R
            A = unit_sphere_area(d) * rho ** (d - 1)
            ring = unit_sphere_area(d - 1) * rho ** (d - 1)
            val, _ = _quad(lambda phi: float(fexp(2.0 * rho * math.sin(phi / 2.0))[0])
                           * math.sin(phi) ** (d - 2), 0.0, math.pi, 1e-11)
            out += w * A * ring * val
        return out, 0.0
    # Box: pairs of uniform points on the surface
    rng = rng if rng is not None else np.random.default_rng(12345)
    h0 = np.asarray(proto.half_widths)
    Rs = law.radius_law.sample(rng, samples)
    y = _box_surface_points(h0, rng, samples) * Rs[:, None]
    z = _box_surface_points(h0, rng, samples) * Rs[:, None]
    area0 = 2.0 * geo.intrinsic_volumes(proto, d)[d - 1]
    areas = area0 * Rs ** (d - 1)
    vals = areas * areas * np.exp(gamma * covariogram_f(law, y - z, d, weight))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


def _box_surface_points(h, rng, size):
    d = len(h)
    face_area = np.array([np.prod(np.delete(2.0 * h, i)) for i in range(d)])
    axis = rng.choice(d, size=size, p=face_area / face_area.sum())
    pts = (2.0 * rng.random((size, d)) - 1.0) * h
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    pts[np.arange(size), axis] = sign * h[axis]
    return pts


def _v_surface_parts(spec: ModelSpec, window, quad_tol):
    _require_surface_model(spec)
    gamma, d = spec.gamma, spec.d
    pref = gamma * math.exp(-2.0 * gamma * spec.m1)
    atoms = _atoms_for_constants(spec)
    if atoms is None:
        return pref * _squared_surface_moment(spec) * expected_t_window(spec, window), 0.0, ()
    s1 = spec.s1
    full_dim = geo.shape_dimension(spec.base.prototype, d) == d
    parts, se2 = [], 0.0
    for frame, p in atoms:
        T = _t_atom(window, frame, spec.n, spec.m, quad_tol)
        vol_term = gamma * base_space_integral(
            spec.base, d,
            lambda fv, gv, gm: (np.exp(gamma * fv) * (s1 * s1 - s1 * gv + 0.25 * gv * gm)
                                - s1 * s1), p, quad_tol)
        bnd, bse = _boundary_pair_integral(spec.base, d, gamma, p)
        low = 0.0 if full_dim else 0.75 * p * bnd
        inner = vol_term + 0.25 * p * bnd + low
        se2 += (pref * T * (0.25 * p + (0.0 if full_dim else 0.75 * p)) * bse) ** 2
        parts.append({"weight": p, "t_window": T, "v_surface": pref * T * inner})
    return sum(x["v_surface"] for x in parts), math.sqrt(se2), tuple(parts)


def v_surface(spec: ModelSpec, window, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Limit of ``r^{-(n+m)} Var V_{n-1}(Z ∩ W_r)``."""
    return _v_surface_parts(spec, window, quad_tol)[0]


def _cov_parts(spec: ModelSpec, window, quad_tol):
    _require_surface_model(spec)
    gamma, d = spec.gamma, spec.d
    pref = gamma * math.exp(-2.0 * gamma * spec.m1)
    atoms = _atoms_for_constants(spec)
    s1 = spec.s1
    if atoms is None:
        mom = (law_intvol_cross_moment(spec.base, d, d, d - 1)
               - gamma * s1 * law_intvol_moment(spec.base, d, d, 2))
        return pref * mom * expected_t_window(spec, window), ()
    parts = []
    for frame, p in atoms:
        T = _t_atom(window, frame, spec.n, spec.m, quad_tol)
        integ = base_space_integral(
            spec.base, d, lambda fv, gv, gm: s1 - np.exp(gamma * fv) * (s1 - 0.5 * gv),
            p, quad_tol)
        parts.append({"weight": p, "t_window": T, "cov": pref * T * integ})
    return sum(x["cov"] for x in parts), tuple(parts)


def cov_volume_surface(spec: ModelSpec, window, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """Limit of ``r^{-(n+m)} Cov(V_n, V_{n-1})`` of ``Z ∩ W_r``."""
    return _cov_parts(spec, window, quad_tol)[0]


@dataclass(frozen=True)
class AsymptoticConstants:
    v_vn: float
    v_vn1: float | None
    cov_vn_vn1: float | None
    t_window: float
    surface_se: float = 0.0
    per_atom: tuple = field(default=())

    def matrix(self) -> np.ndarray:
        return np.array([[self.v_vn, self.cov_vn_vn1], [self.cov_vn_vn1, self.v_vn1]])


def asymptotic_constants(spec: ModelSpec, window,
                         quad_tol: float = DEFAULT_QUAD_TOL) -> AsymptoticConstants:
    vv, vparts = _v_volume_parts(spec, window, quad_tol)
    vs = cv = None
    se = 0.0
    sparts, cparts = (), ()
    if spec.m >= 1 and not isinstance(spec.base.prototype, Point):
        vs, se, sparts = _v_surface_parts(spec, window, quad_tol)
        cv, cparts = _cov_parts(spec, window, quad_tol)
    per_atom = []
    for i, vp in enumerate(vparts):
        row = dict(vp)
        if sparts:
            row["v_surface"] = sparts[i]["v_surface"]
            row["cov"] = cparts[i]["cov"]
        per_atom.append(row)
    T = (_t_atom(window, None, spec.n, spec.m, quad_tol)
         if spec.m == 0 else expected_t_window(spec, window))
    return AsymptoticConstants(vv, vs, cv, T, se, tuple(per_atom))


# ---------------------------------------------------------------------------
# Lambert W and the interval-base example with direction atoms
# ---------------------------------------------------------------------------

def lambert_w(x: float) -> float:
    """Principal branch ``W(x)`` for ``x >= -1/e``: bisection, then Newton polish."""
    if not math.isfinite(x) or x < -math.exp(-1.0):
        raise ValueError("lambert_w needs a finite x >= -1/e")
    if x == 0:
        return 0.0
    if x == -math.exp(-1.0):
        return -1.0
    if x < 0:
        lo, hi = -1.0, 0.0
    else:
        lo, hi = 0.0, max(1.0, math.log(x) + 1.0)
        while hi * math.exp(hi) < x:
            hi *= 2.0
    while hi - lo > 1e-12 * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < x:
            lo = mid
        else:
            hi = mid
    w = 0.5 * (lo + hi)
    for _ in range(3):
        ew = math.exp(w)
        den = ew * (w + 1.0)
        if den == 0.0:
            break
        # keep a step only if it improves the residual (Newton is unstable near -1/e)
        step = w - (w * ew - x) / den
        if abs(step * math.exp(step) - x) >= abs(w * ew - x):
            break
        w = step
    return w


def critical_weight(gamma: float, ell: float) -> float:
    """``p(γ) = (1 + 4ℓγ - e^{ℓγ}) / (1 + e^{ℓγ})``."""
    e = math.exp(ell * gamma)
    return (1.0 + 4.0 * ell * gamma - e) / (1.0 + e)


def critical_weight_peak(ell: float) -> float:
    """``M = (1 + 2 W(e^{-1/2})) / (2ℓ)``, the end of the increasing range of p."""
    return (1.0 + 2.0 * lambert_w(math.exp(-0.5))) / (2.0 * ell)


@dataclass(frozen=True)
class AtomicExampleReport:
    ell: float
    M: float
    p_M: float
    weights: tuple
    t_windows: tuple
    gamma_star: float | None
    v_displayed_at_star: float | None
    v_corollary_at_star: float | None
    message: str
    spec_template: ModelSpec = field(repr=False, default=None)

    def p(self, gamma: float) -> float:
        return critical_weight(gamma, self.ell)

    def v_displayed(self, gamma: float) -> float:
        """``γ/2 e^{-2ℓγ} Σ T_i (e^{ℓγ}(1 + p_i) + p_i - 4ℓγ - 1)``."""
        ell = self.ell
        e = math.exp(ell * gamma)
        s = sum(T * (e * (1.0 + p) + p - 4.0 * ell * gamma - 1.0)
                for T, p in zip(self.t_windows, self.weights))
        return 0.5 * gamma * math.exp(-2.0 * ell * gamma) * s

    def v_corollary(self, gamma: float) -> float:
        """Surface variance constant of the general formula at intensity γ."""
        return (0.5 * gamma * math.exp(-2.0 * self.ell * gamma)
                * sum(T * _atomic_interval_bracket(gamma, self.ell, p)
                      for T, p in zip(self.t_windows, self.weights)))


def _atomic_interval_bracket(gamma: float, ell: float, p: float) -> float:
    """
    Twice the per-atom bracket for the interval base with atom weight p,
    both covariograms carrying the factor p:
    ``p (1 + e^{pℓγ}) + 4γ ∫_0^ℓ [e^{pγ(ℓ-z)} (1 - p/2)² - 1] dz``.
    """
    q = p * gamma
    if q == 0:
        integral = ell * ((1.0 - 0.5 * p) ** 2 - 1.0)
    else:
        integral = (1.0 - 0.5 * p) ** 2 * math.expm1(q * ell) / q - ell
    return p * (1.0 + math.exp(q * ell)) + 4.0 * gamma * integral


def atomic_example(a: float, b: float, atoms, window, n: int | None = None,
                   quad_tol: float = 1e-10) -> AtomicExampleReport:
    """
    Interval base ``[-a, b]`` with finitely many direction atoms in
    ``R^n``, ``m = n - 1``. Locates the critical intensity ``γ*`` with
    ``p(γ*) = 1/|I|`` on ``[0, M]``, and evaluates the surface variance
    constant there, both from the displayed closed form and from the
    general per-atom formula.
    """
    if not (a > 0 and b > 0):
        raise ValueError("need a, b > 0")
    atoms = list(atoms)
    if not atoms:
        raise ValueError("need at least one atom")
    frames = [f for f, _ in atoms]
    weights = tuple(float(w) for _, w in atoms)
    n = n if n is not None else frames[0].dim_n
    m = n - 1
    if any(f.dim_n != n or f.dim_m != m for f in frames):
        raise GeometryError("atoms must be frames with m = n - 1")
    ell = a + b
    M = critical_weight_peak(ell)
    pM = critical_weight(M, ell)
    Ts = tuple(t_window(window, f, n, m, 1.0, quad_tol) for f in frames)
    k = len(atoms)
    spec = ModelSpec(n, m, 1.0, AtomicDirections(tuple(frames), weights)
                     if k > 1 else FixedDirection(frames[0]), Interval(a, b))
    target = 1.0 / k
    gs = None
    msg = "ok"
    if k < 2:
        msg = "a single atom has no critical intensity"
    elif target > pM:
        msg = f"no root: 1/|I| = {target:.6g} exceeds p(M) = {pM:.6g}"
    else:
        lo, hi = 0.0, M
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if critical_weight(mid, ell) < target:
                lo = mid
            else:
                hi = mid
        gs = 0.5 * (lo + hi)
        for _ in range(3):
            e = math.exp(ell * gs)
            # residual of e^{ℓγ}(1+p) + p - 4ℓγ - 1 and its derivative
            res = e * (1.0 + target) + target - 4.0 * ell * gs - 1.0
            der = ell * e * (1.0 + target) - 4.0 * ell
            if der == 0:
                break
            gs -= res / der
    rep = AtomicExampleReport(ell, M, pM, weights, Ts, gs, None, None, msg, spec)
    if gs is not None:
        rep = AtomicExampleReport(ell, M, pM, weights, Ts, gs, rep.v_displayed(gs),
                                  rep.v_corollary(gs), msg, spec)
    return rep


# ---------------------------------------------------------------------------
# Intrinsic-volume covariance of dilated bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntVolCovariance:
    indices: tuple
    matrix: np.ndarray
    min_eigenvalue: float


def intvol_cov_matrix(base_law, dim: int, index_range: tuple | None = None,
                      include_zero: bool = False) -> IntVolCovariance:
    """
    ``Cov(V_i(Ξ), V_j(Ξ)) = V_i(K) V_j(K) (E R^{i+j} - E R^i E R^j)`` for
    ``Ξ = R K``. Indices default to ``1..dim``; ``include_zero`` prepends
    ``V_0``, which is constant and so makes the matrix singular.
    """
    law = geo.as_base_law(base_law)
    lo, hi = index_range if index_range is not None else (1, dim)
    if include_zero:
        lo = 0
    if not 0 <= lo <= hi <= dim:
        raise ValueError("index range must satisfy 0 <= lo <= hi <= dim")
    idx = tuple(range(lo, hi + 1))
    v = geo.intrinsic_volumes(law.prototype, dim)
    mom = law.radius_law.moment
    C = np.array([[v[i] * v[j] * (mom(i + j) - mom(i) * mom(j)) for j in idx] for i in idx])
    C = 0.5 * (C + C.T)
    eig = np.linalg.eigvalsh(C)
    return IntVolCovariance(idx, C, float(eig[0]))


# ---------------------------------------------------------------------------
# Integral of the covered volume over base translations
# ---------------------------------------------------------------------------

def translative_check(base, frame: Frame, window, r: float = 1.0, probes: int = 4000,
                      grid: int = 201, seed: int = 0):
    """
    ``(lhs, rhs)`` with ``lhs = ∫ L^n(Z(x, θ, X) ∩ W_r) dx`` computed with a
    midpoint grid over base positions and one common set of probes for the
    inner volumes, and ``rhs = L^d(X) V_n(W_r)``.
    """
    n, m = frame.dim_n, frame.dim_m
    d = n - m
    geo.check_shape_dim(base, d)
    rhs = geo.intrinsic_volumes(base, d)[d] * window.volume(n, r)
    if isinstance(base, Point):
        return 0.0, rhs
    if d > 2:
        raise GeometryError("translative check supports base dimension <= 2")
    rng = np.random.default_rng(seed)
    y = window.sample(rng, probes, n, r)
    u = frame.project(y)
    ext = window.circumradius(n, r) + geo.reach(base)
    h = 2.0 * ext / grid
    ax = -ext + (np.arange(grid) + 0.5) * h
    centers = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
    hits = 0
    chunk = max(1, 2_000_000 // probes)
    for s in range(0, len(centers), chunk):
        c = centers[s:s + chunk]
        rel = (u[None, :, :] - c[:, None, :]).reshape(-1, d)
        hits += int(np.count_nonzero(geo.contains(base, rel)))
    lhs = window.volume(n, r) / probes * hits * h**d
    return float(lhs), float(rhs)


__all__ = [
    "DEFAULT_QUAD_TOL", "QuadratureError", "mean_volume", "coverage_probability",
    "isotropic_f", "projected_f", "base_space_integral", "t_window_ball_closed_form",
    "t_window_ball_radial", "t_window", "expected_t_window", "chord_power_integral",
    "chord_power_energy_mc", "variance_volume_exact", "v_volume", "v_surface",
    "cov_volume_surface", "AsymptoticConstants", "asymptotic_constants", "lambert_w",
    "critical_weight", "critical_weight_peak", "AtomicExampleReport", "atomic_example",
    "IntVolCovariance", "intvol_cov_matrix", "translative_check",
]
