"""
Per-realization estimates of volume and surface functionals of ``Z ∩ W_r``.

All estimators classify one set of uniform probe points in the window
against the union of cylinders. Reusing the same probes across several
unions turns additive identities between the estimates into exact integer
identities.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import BallWindow, GeometryError, Interval, Point
from .rng import SeedPath
from .sampler import CylinderPack, ModelSpec, pack_cylinders, sample_realization

MAX_DIFF_ORDER = 20


def window_half_extent(window, n: int, r: float) -> float:
    """Bound on ``max_i |y_i|`` over points of ``W_r``."""
    if isinstance(window, BallWindow):
        return window.circumradius(n, r)
    return 0.5 * r * window.side


def draw_probes(window, n: int, r: float, probes: int, seed: SeedPath,
                sub: int = 0) -> np.ndarray:
    if probes < 1:
        raise ValueError("need at least one probe")
    return np.ascontiguousarray(window.sample(seed.stream("probe", sub), probes, n, r))


def classify_probes(cyls, y: np.ndarray, eps: float, half_extent: float,
                    n: int | None = None, m: int | None = None) -> np.ndarray:
    """Kernel codes (0 covered, 1 within ``eps``, 2 outside) for probes ``y``."""
    pack = pack_cylinders(cyls, n if n is not None else y.shape[1], m)
    if len(pack) == 0:
        return np.full(len(y), kernels.OUTSIDE, dtype=np.uint8)
    proj, centers, kinds, params, reach = pack.kernel_arrays()
    return kernels.classify(y, proj, centers, kinds, params, reach, float(eps),
                            float(half_extent))


def covered_mask(cyls, y: np.ndarray, half_extent: float, m: int | None = None) -> np.ndarray:
    return classify_probes(cyls, y, 0.0, half_extent, m=m) == kernels.COVERED


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float


@dataclass(frozen=True)
class RealizationResult:
    """
    Functional estimates for one realization.

    The ``*_noise_var`` fields are unbiased estimates of the probe-sampling
    variance of the estimators given the cylinders; subtracting their mean
    from the across-realization variance leaves the variance of the true
    functionals.
    """

    vol_estimate: float
    surf_estimate: float | None
    cylinder_count: int
    probe_count: int
    seed: SeedPath
    r: float
    vol_noise_var: float = 0.0
    surf_noise_var: float | None = None
    noise_cov: float | None = None

    @property
    def vol_se(self) -> float:
        return float(np.sqrt(self.vol_noise_var))


def _check_model_dims(cyls, n: int):
    if isinstance(cyls, CylinderPack) and cyls.n != n:
        raise GeometryError("cylinder dimension does not match window dimension")


def _infer_m(cyls, m):
    if m is not None:
        return m
    if isinstance(cyls, CylinderPack):
        return cyls.m
    cl = list(cyls)
    if cl:
        return cl[0].frame.dim_m
    return 0


def estimate_volume(cyls, window, r: float, probes: int, seed: SeedPath,
                    n: int | None = None, m: int | None = None) -> Estimate:
    """
    Hit-or-miss estimate ``V_n(W_r) * hits / probes`` of ``L^n(Z ∩ W_r)``
    with its binomial standard error.
    """
    n = n if n is not None else _infer_n(cyls)
    y = draw_probes(window, n, r, probes, seed)
    vol = window.volume(n, r)
    hits = int(np.count_nonzero(covered_mask(cyls, y, window_half_extent(window, n, r),
                                             m=_infer_m(cyls, m))))
    p = hits / probes
    return Estimate(vol * p, vol * np.sqrt(p * (1.0 - p) / probes))


def _infer_n(cyls) -> int:
    if isinstance(cyls, CylinderPack):
        return cyls.n
    cl = list(cyls)
    if not cl:
        raise GeometryError("pass n explicitly for an empty cylinder list")
    return cl[0].frame.dim_n


def _reject_points(cyls):
    if isinstance(cyls, CylinderPack):
        bad = isinstance(cyls.prototype, Point) and len(cyls) > 0
    else:
        bad = any(isinstance(c.base, Point) for c in cyls)
    if bad:
        raise GeometryError("surface estimation is undefined for point bases (flat processes)")


def estimate_surface(cyls, window, r: float, eps: float, probes: int, seed: SeedPath,
                     n: int | None = None, m: int | None = None) -> Estimate:
    """
    Outer Minkowski-content estimate of ``V_{n-1}(Z ∩ W_r)``:
    ``(vol(Z^eps ∩ W_r) - vol(Z ∩ W_r)) / (2 eps)`` on shared probes.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    _reject_points(cyls)
    n = n if n is not None else _infer_n(cyls)
    y = draw_probes(window, n, r, probes, seed)
    codes = classify_probes(cyls, y, eps, window_half_extent(window, n, r), n,
                            _infer_m(cyls, m))
    vol = window.volume(n, r)
    ps = np.count_nonzero(codes == kernels.SHELL) / probes
    scale = vol / (2.0 * eps)
    return Estimate(scale * ps, scale * np.sqrt(ps * (1.0 - ps) / probes))


def measure_realization(pack: CylinderPack, window, r: float, probes: int, seed: SeedPath,
                        eps: float | None = None) -> RealizationResult:
    """Volume (and, with ``eps``, surface) estimates of one sampled realization."""
    n = pack.n
    y = draw_probes(window, n, r, probes, seed)
    codes = classify_probes(pack, y, eps or 0.0, window_half_extent(window, n, r), n, pack.m)
    vol = window.volume(n, r)
    N = probes
    p0 = np.count_nonzero(codes == kernels.COVERED) / N
    denom = max(N - 1, 1)
    vol_est = vol * p0
    vol_nv = vol * vol * p0 * (1.0 - p0) / denom
    surf = surf_nv = ncov = None
    if eps is not None:
        _reject_points(pack)
        ps = np.count_nonzero(codes == kernels.SHELL) / N
        surf = vol * ps / (2.0 * eps)
        surf_nv = vol * vol * ps * (1.0 - ps) / (denom * 4.0 * eps * eps)
        ncov = -vol * vol * p0 * ps / (denom * 2.0 * eps)
    return RealizationResult(vol_est, surf, len(pack), N, seed, r, vol_nv, surf_nv, ncov)


def simulate_realization(spec: ModelSpec, window, r: float, probes: int, seed: SeedPath,
                         eps: float | None = None, cap: float | None = None) -> RealizationResult:
    """Sample one realization and measure it. With ``eps`` the sampling
    region is widened by ``eps`` so cylinders just outside ``W_r`` count."""
    kwargs = {} if cap is None else {"cap": cap}
    pack = sample_realization(spec, window, r, seed, margin=eps or 0.0, **kwargs)
    return measure_realization(pack, window, r, probes, seed, eps)


# ---------------------------------------------------------------------------
# Difference operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DifferenceOperatorReport:
    """
    Counts and volumes from one shared probe set.

    ``definition`` is the alternating sum over all unions with subsets of
    the added cylinders, ``closed_form`` the signed difference of the two
    intersection volumes. ``single_volumes`` are the probe volumes of each
    added cylinder inside the window, ``joint_volume`` that of the
    intersection of all added cylinders.
    """

    definition: float
    closed_form: float
    definition_count: int
    closed_form_count: int
    single_volumes: tuple
    joint_volume: float
    probes: int


def difference_operator_terms(cyls, extra, window, r: float, probes: int,
                              seed: SeedPath, n: int | None = None,
                              m: int | None = None) -> DifferenceOperatorReport:
    extra = list(extra)
    k = len(extra)
    if k < 1:
        raise ValueError("need at least one added cylinder")
    if k > MAX_DIFF_ORDER:
        raise ValueError(f"difference order {k} exceeds {MAX_DIFF_ORDER} (2^k unions)")
    n = n if n is not None else extra[0].frame.dim_n
    m = m if m is not None else extra[0].frame.dim_m
    y = draw_probes(window, n, r, probes, seed)
    he = window_half_extent(window, n, r)
    base = covered_mask(pack_cylinders(cyls, n, m), y, he, m)
    singles = [covered_mask([c], y, he, m) for c in extra]

    total = 0
    for size in range(k + 1):
        sign = -1 if (k - size) % 2 else 1
        for J in itertools.combinations(range(k), size):
            u = base.copy()
            for j in J:
                u |= singles[j]
            total += sign * int(np.count_nonzero(u))

    inter = np.logical_and.reduce(singles)
    closed = (-1) ** k * (int(np.count_nonzero(base & inter)) - int(np.count_nonzero(inter)))
    scale = window.volume(n, r) / probes
    return DifferenceOperatorReport(
        definition=scale * total, closed_form=scale * closed,
        definition_count=total, closed_form_count=closed,
        single_volumes=tuple(scale * int(np.count_nonzero(s)) for s in singles),
        joint_volume=scale * int(np.count_nonzero(inter)), probes=probes)


def difference_operator_volume(cyls, extra, window, r: float, probes: int,
                               seed: SeedPath, n: int | None = None,
                               m: int | None = None) -> float:
    """
    k-th difference operator of the volume functional on shared probes,
    computed from its definition and checked against the closed form.
    """
    rep = difference_operator_terms(cyls, extra, window, r, probes, seed, n, m)
    if rep.definition_count != rep.closed_form_count:
        raise AssertionError(
            f"difference operator mismatch: {rep.definition_count} != {rep.closed_form_count}")
    return rep.definition


# ---------------------------------------------------------------------------
# Exact volumes on the line
# ---------------------------------------------------------------------------

def _line_interval(window, r: float):
    h = window_half_extent(window, 1, r)
    return -h, h


def union_length_1d(pack: CylinderPack, window, r: float) -> float:
    """Exact length of the union of segments inside ``W_r`` (n = 1, m = 0)."""
    return float(union_lengths_1d([pack], window, r)[0])


def union_lengths_1d(packs, window, r: float) -> np.ndarray:
    """Exact union lengths inside ``W_r`` for many one-dimensional realizations."""
    lo, hi = _line_interval(window, r)
    starts, ends, offsets = [], [], [0]
    for p in packs:
        if p.n != 1:
            raise GeometryError("exact union lengths need n = 1")
        proto = p.prototype
        if isinstance(proto, Point):
            a = b = np.zeros(len(p))
        elif isinstance(proto, Interval):
            a, b = proto.a * p.factors, proto.b * p.factors
        else:
            rad = (proto.radius if hasattr(proto, "radius") else proto.half_widths[0])
            a = b = rad * p.factors
        # the single frame entry is the orientation of the line
        sgn = p.frames[:, 0, 0]
        c = p.centers[:, 0] * sgn
        lo_i = np.where(sgn > 0, c - a, c - b)
        hi_i = np.where(sgn > 0, c + b, c + a)
        starts.append(lo_i)
        ends.append(hi_i)
        offsets.append(offsets[-1] + len(p))
    s = np.ascontiguousarray(np.concatenate(starts) if starts else np.zeros(0))
    e = np.ascontiguousarray(np.concatenate(ends) if ends else np.zeros(0))
    return kernels.interval_union_lengths(s, e, np.asarray(offsets, dtype=np.intp),
                                          float(lo), float(hi))


__all__ = [
    "MAX_DIFF_ORDER", "window_half_extent", "draw_probes", "classify_probes",
    "covered_mask", "Estimate", "RealizationResult", "estimate_volume",
    "estimate_surface", "measure_realization", "simulate_realization",
    "DifferenceOperatorReport", "difference_operator_terms",
    "difference_operator_volume", "union_length_1d", "union_lengths_1d",
]
