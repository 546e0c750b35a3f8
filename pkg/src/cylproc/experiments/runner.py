"""Execution of experiment modes into flat result records."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import analytics as an
from ..functionals import difference_operator_terms, simulate_realization
from ..geometry import Frame, GeometryError
from ..rng import SeedPath
from ..sampler import (direction_atoms, sample_cylinders, sample_realization,
                       sampling_region)
from .. import stats
from .config import ExperimentConfig
from .records import AGGREGATE_INDEX, ResultRecord

_CHUNK = 64


def _simulate_chunk(args):
    spec, window, r, probes, eps, cap, master, scope, indices = args
    return [simulate_realization(spec, window, r, probes, SeedPath(master, i, scope),
                                 eps, cap) for i in indices]


def simulate_many(cfg: ExperimentConfig, r: float, scope: int, realizations: int | None = None):
    """Realization results for one scale, in realization order.

    Each realization is a pure function of its seed path, so the result does
    not depend on the number of workers.
    """
    count = cfg.realizations if realizations is None else realizations
    eps = cfg.surface_eps
    idx = list(range(count))
    chunks = [idx[i:i + _CHUNK] for i in range(0, count, _CHUNK)]
    jobs = [(cfg.spec, cfg.window, r, cfg.probes, eps, cfg.cap, cfg.seed, scope, c)
            for c in chunks]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_simulate_chunk, jobs))
    else:
        parts = [_simulate_chunk(j) for j in jobs]
    return [res for part in parts for res in part]


def _row(cfg: ExperimentConfig, mode: str, r, index: int, **kw) -> ResultRecord:
    spec = cfg.spec
    kw.setdefault("seed", str(cfg.seed))
    gamma = kw.pop("gamma", spec.gamma)
    return ResultRecord(mode, spec.n, spec.m, gamma, spec.describe_base(),
                        spec.describe_direction(), r, index, **kw)


def _safe(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (GeometryError, an.QuadratureError, NotImplementedError):
        return None


def _exact_var(cfg, r):
    if not cfg.analytic_var:
        return None
    return _safe(an.variance_volume_exact, cfg.spec, cfg.window, r, cfg.quad_tol)


def run_simulate(cfg: ExperimentConfig) -> list:
    out = []
    for scope, r in enumerate(cfg.r_values):
        mean = an.mean_volume(cfg.spec, cfg.window, r)
        var = _exact_var(cfg, r)
        for res in simulate_many(cfg, r, scope):
            out.append(_row(cfg, "simulate", r, res.seed.realization_index,
                            vol=res.vol_estimate, surf=res.surf_estimate,
                            count=res.cylinder_count, analytic_mean=mean,
                            analytic_var=var, seed=str(res.seed)))
    return out


def corrected_moments(results):
    """
    Across-realization variances and covariance with the mean probe-noise
    contribution removed.
    """
    vol = np.array([x.vol_estimate for x in results])
    var_v = stats.summarize(vol).variance - float(np.mean([x.vol_noise_var for x in results]))
    if results and results[0].surf_estimate is not None:
        surf = np.array([x.surf_estimate for x in results])
        var_s = (stats.summarize(surf).variance
                 - float(np.mean([x.surf_noise_var for x in results])))
        cov = (float(np.cov(vol, surf, ddof=1)[0, 1])
               - float(np.mean([x.noise_cov for x in results])))
    else:
        var_s = cov = None
    return var_v, var_s, cov


def run_variance_scan(cfg: ExperimentConfig) -> list:
    spec = cfg.spec
    consts = _safe(an.asymptotic_constants, spec, cfg.window, cfg.quad_tol)
    vref = consts.v_vn if consts else None
    out = []
    for scope, r in enumerate(cfg.r_values):
        results = simulate_many(cfg, r, scope)
        var_v, var_s, cov = corrected_moments(results)
        scale = r ** (spec.n + spec.m)
        mean = an.mean_volume(spec, cfg.window, r)
        out.append(_row(cfg, "variance-scan", r, AGGREGATE_INDEX, vol=var_v / scale,
                        surf=None if var_s is None else var_s / scale,
                        count=len(results), analytic_mean=mean, analytic_var=vref))
        if var_s is not None:
            out.append(_row(cfg, "variance-scan:surface", r, AGGREGATE_INDEX,
                            vol=var_s / scale, count=len(results),
                            analytic_var=consts.v_vn1 if consts else None))
            out.append(_row(cfg, "variance-scan:cov", r, AGGREGATE_INDEX,
                            vol=cov / scale, count=len(results),
                            analytic_var=consts.cov_vn_vn1 if consts else None))
    return out


def run_clt_scan(cfg: ExperimentConfig) -> list:
    spec = cfg.spec
    out, pairs = [], []
    for scope, r in enumerate(cfg.r_values):
        results = simulate_many(cfg, r, scope)
        vol = np.array([x.vol_estimate for x in results])
        mean = an.mean_volume(spec, cfg.window, r)
        var = _exact_var(cfg, r)
        if var is not None:
            noise = float(np.mean([x.vol_noise_var for x in results]))
            z = stats.standardize(vol, mean, math.sqrt(var + noise))
            tag = "clt-scan"
        else:
            z = stats.standardize_empirical(vol)
            tag = "clt-scan:empirical"
        ks = stats.ks_distance_to_normal(z)
        pairs.append((r, ks))
        out.append(_row(cfg, tag, r, AGGREGATE_INDEX, vol=ks, count=len(results),
                        analytic_mean=mean, analytic_var=var))
    if len(pairs) >= 3:
        fit = stats.fit_rate(pairs)
        out.append(_row(cfg, "clt-scan:slope", None, AGGREGATE_INDEX, vol=fit.slope,
                        surf=fit.intercept))
    return out


_R_QUERIES = ("mean_volume", "variance_volume_exact")


def run_analytic(cfg: ExperimentConfig) -> list:
    spec, W = cfg.spec, cfg.window
    out = []
    for q in cfg.queries:
        if q in _R_QUERIES:
            for r in cfg.r_values:
                fn = an.mean_volume if q == "mean_volume" else an.variance_volume_exact
                args = (spec, W, r) if q == "mean_volume" else (spec, W, r, cfg.quad_tol)
                out.append(_row(cfg, f"analytic:{q}", r, AGGREGATE_INDEX,
                                vol=_safe(fn, *args)))
            continue
        if q == "t_window":
            val = _safe(an.expected_t_window, spec, W)
        elif q == "chord_power_integral":
            val = _safe(an.chord_power_integral, W, spec.n, spec.m) if spec.m >= 1 else None
        elif q == "v_volume":
            val = _safe(an.v_volume, spec, W, cfg.quad_tol)
        elif q == "v_surface":
            val = _safe(an.v_surface, spec, W, cfg.quad_tol)
        else:
            val = _safe(an.cov_volume_surface, spec, W, cfg.quad_tol)
        out.append(_row(cfg, f"analytic:{q}", None, AGGREGATE_INDEX, vol=val))
    return out


def run_diffop_test(cfg: ExperimentConfig) -> list:
    """Check the difference-operator identities on random configurations."""
    spec, W = cfg.spec, cfg.window
    n_conf = int(cfg.diffop.get("configurations", 100))
    k_values = [int(k) for k in cfg.diffop.get("k_values", [1, 2, 3])]
    out, failures = [], 0
    for scope, r in enumerate(cfg.r_values):
        region = sampling_region(spec, W, r)
        for i in range(n_conf):
            sp = SeedPath(cfg.seed, i, scope)
            base = sample_realization(spec, W, r, sp, cap=cfg.cap)
            for k in k_values:
                extra = sample_cylinders(spec, k, region.radius, sp.stream("aux", k))
                rep = difference_operator_terms(base, list(extra), W, r, cfg.probes, sp,
                                                spec.n, spec.m)
                ok = rep.definition_count == rep.closed_form_count
                if k == 1:
                    ok &= abs(rep.definition) <= rep.single_volumes[0]
                if k == 2:
                    ok &= abs(rep.definition) <= rep.joint_volume
                failures += not ok
                out.append(_row(cfg, "diffop-test", r, i, vol=rep.definition,
                                surf=rep.closed_form, count=k, seed=str(sp)))
    out.append(_row(cfg, "diffop-test:failures", None, AGGREGATE_INDEX, vol=float(failures),
                    count=len(out)))
    return out


def _atomic_atoms(cfg: ExperimentConfig):
    atoms = direction_atoms(cfg.spec.direction)
    if atoms is not None:
        return list(atoms)
    # uniform directions: equal weights on cyclically permuted coordinate frames
    n = cfg.spec.n
    k = int(cfg.atomic.get("atoms", 2))
    frames = [Frame.from_axes(n, n - 1, [(j + i) % n for j in range(n)]) for i in range(k)]
    if len(set(frames)) < k:
        raise GeometryError("not enough distinct coordinate frames for the requested atoms")
    return [(f, 1.0 / k) for f in frames]


def run_atomic_example(cfg: ExperimentConfig) -> list:
    a = float(cfg.atomic.get("a", 0.5))
    b = float(cfg.atomic.get("b", 0.5))
    rep = an.atomic_example(a, b, _atomic_atoms(cfg), cfg.window, cfg.spec.n)
    out = [_row(cfg, "atomic-example:ell", None, AGGREGATE_INDEX, vol=rep.ell),
           _row(cfg, "atomic-example:M", None, AGGREGATE_INDEX, vol=rep.M),
           _row(cfg, "atomic-example:p_M", None, AGGREGATE_INDEX, vol=rep.p_M)]
    if rep.gamma_star is not None:
        gs = rep.gamma_star
        out += [_row(cfg, "atomic-example:gamma_star", None, AGGREGATE_INDEX, vol=gs, gamma=gs),
                _row(cfg, "atomic-example:v_displayed_at_star", None, AGGREGATE_INDEX,
                     vol=rep.v_displayed_at_star, gamma=gs),
                _row(cfg, "atomic-example:v_corollary_at_star", None, AGGREGATE_INDEX,
                     vol=rep.v_corollary_at_star, gamma=gs)]
    grid = np.linspace(0.0, rep.M, int(cfg.atomic.get("grid", 21)))
    for j, g in enumerate(grid):
        g = float(g)
        out += [_row(cfg, "atomic-example:p", None, j, vol=rep.p(g), gamma=g),
                _row(cfg, "atomic-example:v_displayed", None, j, vol=rep.v_displayed(g), gamma=g),
                _row(cfg, "atomic-example:v_corollary", None, j, vol=rep.v_corollary(g), gamma=g)]
    return out


RUNNERS = {
    "simulate": run_simulate,
    "analytic": run_analytic,
    "clt-scan": run_clt_scan,
    "variance-scan": run_variance_scan,
    "diffop-test": run_diffop_test,
    "atomic-example": run_atomic_example,
}


def run(cfg: ExperimentConfig) -> list:
    """Execute the configured mode; records come back in canonical order."""
    records = RUNNERS[cfg.mode](cfg)
    if cfg.mode in ("simulate", "diffop-test"):
        records = sorted(records, key=ResultRecord.sort_key)
    return records
