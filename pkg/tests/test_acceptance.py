"""
Acceptance checks at full scale.

Each test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary. Run directly (``python tests/test_acceptance.py``) to get
the same lines without pytest.
"""
import math
import sys
import time

import numpy as np
import pytest

from cylproc import analytics as an
from cylproc import geometry as geo
from cylproc import stats
from cylproc.experiments.config import config_from_dict
from cylproc.experiments.runner import corrected_moments, run, simulate_many
from cylproc.functionals import union_lengths_1d
from cylproc.rng import SeedPath
from cylproc.sampler import AtomicDirections, ModelSpec, UniformDirections, sample_realization

SEED = 20240611
BALL = {"type": "ball", "radius": 1.0}
DISK_MODEL = {"n": 3, "m": 1, "gamma": 0.5, "base": {"type": "ball", "radius": 0.5}}
DISK_MODEL_03 = {**DISK_MODEL, "gamma": 0.3}

LINES: list = []


def _config(**kw):
    raw = {"mode": "simulate", "window": BALL, "seed": SEED, "analytic_var": False}
    raw.update(kw)
    return config_from_dict(raw)


def _record(num, title, ok, detail, elapsed):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {title} | {detail} ({elapsed:.1f}s)"
    LINES.append(line)
    return line


def _inversions(seq):
    return sum(b > a for a, b in zip(seq, seq[1:]))


# --- checks: each returns (ok, detail) ---------------------------------------

def check_coverage_mean():
    cfg = _config(model=DISK_MODEL, realizations=200, probes=10_000)
    vol = np.array([x.vol_estimate for x in simulate_many(cfg, 1.0, 0)])
    s = stats.summarize(vol)
    target = 1.35990
    z = abs(s.mean - target) / s.se_mean
    exact = an.mean_volume(cfg.spec, cfg.window, 1.0)
    return z <= 3.0, (f"mean {s.mean:.5f} se {s.se_mean:.5f} target {target} "
                      f"|z| {z:.2f} <= 3 (closed form {exact:.7f})")


def check_exact_variance():
    cfg = _config(model=DISK_MODEL, realizations=2000, probes=10_000)
    var, _, _ = corrected_moments(simulate_many(cfg, 1.0, 0))
    exact = an.variance_volume_exact(cfg.spec, cfg.window, 1.0)
    rel = abs(var - exact) / exact
    return rel <= 0.10, f"noise-corrected var {var:.5f} exact {exact:.5f} rel {rel:.3f} <= 0.10"


def check_one_dimensional_oracle():
    spec = ModelSpec(1, 0, 1.0, UniformDirections(), geo.Interval(0.5, 0.5))
    w = geo.CubeWindow(10.0)
    packs = [sample_realization(spec, w, 1.0, SeedPath(SEED, i)) for i in range(50_000)]
    s = stats.summarize(union_lengths_1d(packs, w, 1.0))
    target = 1.8851
    oracle = 2 * math.exp(-2) * (9 * math.e - 17.5)
    z = abs(s.variance - target) / s.se_variance
    return z <= 3.0, (f"var {s.variance:.4f} se {s.se_variance:.4f} target {target} "
                      f"|z| {z:.2f} <= 3 (oracle {oracle:.6f})")


def check_asymptotic_variance():
    cfg = _config(mode="variance-scan", model=DISK_MODEL_03, r_values=[5.0, 10.0, 20.0],
                  realizations=1500, probes=20_000)
    rows = [x for x in run(cfg) if x.mode == "variance-scan"]
    target = 0.7259
    final = rows[-1].vol
    rel = abs(final - target) / target
    m1 = math.pi * 0.5**2
    two = an.v_volume(cfg.spec, cfg.window)
    one = two * math.exp(0.3 * m1)
    finite = an.variance_volume_exact(cfg.spec, cfg.window, 20.0) / 20.0**4
    closer = "e^{-2 gamma m1}" if abs(final - two) < abs(final - one) else "e^{-gamma m1}"
    scan = ", ".join(f"r={x.r:g}: {x.vol:.4f}" for x in rows)
    return rel <= 0.15, (f"Var/r^4 {scan}; rel {rel:.3f} <= 0.15 vs {target}; exact at r=20 "
                         f"{finite:.4f}; prefactor e^(-2 gamma m1) {two:.4f} vs "
                         f"e^(-gamma m1) {one:.4f}; closer: {closer}")


def check_degenerate_cube():
    model = {"n": 2, "m": 1, "gamma": 1.0,
             "base": {"type": "box", "half_widths": [0.5]}}
    cfg = _config(model=model, realizations=1500, probes=20_000, eps=0.05)
    v_analytic = an.v_surface(cfg.spec, cfg.window)
    scaled = {}
    for scope, (r, probes) in enumerate([(4.0, 20_000), (16.0, 100_000)]):
        c = _config(model=model, realizations=1500, probes=probes, eps=0.05)
        _, var_s, _ = corrected_moments(simulate_many(c, r, scope))
        scaled[r] = var_s / r ** 3
    ratio = scaled[16.0] / scaled[4.0]
    ok = v_analytic == 0.0 and ratio < 0.5
    return ok, (f"analytic v_surface {v_analytic!r}; Var(S)/r^3 at r=4 {scaled[4.0]:.4f}, "
                f"r=16 {scaled[16.0]:.4f}, ratio {ratio:.3f} < 0.5")


def check_degenerate_atomic():
    atoms = AtomicDirections((geo.Frame.from_axes(2, 1, [0, 1]),
                              geo.Frame.from_axes(2, 1, [1, 0])), (0.5, 0.5))
    rep = an.atomic_example(0.5, 0.5, atoms.atoms, geo.BallWindow(1.0), 2)
    gs = rep.gamma_star
    lo, hi = rep.v_displayed(gs - 0.1), rep.v_displayed(gs + 0.1)
    ok = (abs(rep.p_M - 0.619) <= 1e-3 and abs(gs - 0.4825) <= 5e-4
          and abs(rep.v_displayed_at_star) <= 1e-12 and lo > 0 and hi > 0)
    return ok, (f"p(M) {rep.p_M:.6f}; gamma* {gs:.6f}; v(gamma*) {rep.v_displayed_at_star:.2e}; "
                f"v(gamma*-0.1) {lo:.4f}, v(gamma*+0.1) {hi:.4f} (both must be > 0); "
                f"p-weighted constant at gamma* {rep.v_corollary_at_star:.4f}")


def check_clt_rate():
    model = {"n": 2, "m": 1, "gamma": 0.3, "base": {"type": "interval", "length": 1.0}}
    cfg = _config(mode="clt-scan", model=model, r_values=[4.0, 8.0, 16.0, 32.0],
                  realizations=2000, probes=4000, analytic_var=True)
    recs = run(cfg)
    ks = [x.vol for x in recs if x.mode == "clt-scan"]
    slope = next(x.vol for x in recs if x.mode == "clt-scan:slope")
    inv = _inversions(ks)
    ok = ks[-1] < 0.05 and inv <= 1 and slope < 0 and abs(slope + 0.5) <= 0.35
    return ok, (f"KS {', '.join(f'{v:.4f}' for v in ks)}; KS(32) < 0.05; inversions {inv} <= 1; "
                f"slope {slope:.3f} in [-0.85, -0.15]")


def check_translative():
    rng = np.random.default_rng(SEED)
    cases = [
        ("interval, plane, ball", geo.Interval(0.5, 0.5), geo.Frame.identity(2, 1),
         geo.BallWindow(1.0), 20_000, 801),
        ("interval, plane, cube", geo.Interval(0.2, 0.6), geo.Frame.from_axes(2, 1, [1, 0]),
         geo.CubeWindow(2.0), 20_000, 801),
        ("disk, space, ball", geo.Ball(0.3), geo.random_frame(3, 1, rng),
         geo.BallWindow(1.0), 8000, 161),
        ("box, space, cube", geo.Box((0.3, 0.2)), geo.random_frame(3, 1, rng),
         geo.CubeWindow(2.0), 8000, 161),
        ("slab, space, ball", geo.Interval(0.25, 0.25), geo.random_frame(3, 2, rng),
         geo.BallWindow(1.0), 20_000, 801),
    ]
    parts, ok = [], True
    for name, base, frame, window, probes, grid in cases:
        lhs, rhs = an.translative_check(base, frame, window, 1.0, probes, grid, SEED)
        rel = abs(lhs - rhs) / rhs
        ok &= rel <= 0.01
        parts.append(f"{name} {rel:.4f}")
    return ok, "relative error " + "; ".join(parts) + " (each <= 0.01)"


def check_difference_operator():
    cfg = _config(mode="diffop-test", model=DISK_MODEL, r_values=[2.0], probes=3000,
                  diffop={"configurations": 100, "k_values": [1, 2, 3]})
    recs = run(cfg)
    failures = next(x.vol for x in recs if x.mode == "diffop-test:failures")
    rows = [x for x in recs if x.mode == "diffop-test"]
    exact = all(x.vol == x.surf for x in rows)
    ok = failures == 0 and exact and len(rows) == 300
    return ok, (f"{len(rows)} cases (100 configurations x k in 1..3), definition == closed form "
                f"in all: {exact}, bound or identity failures {int(failures)}")


def check_covariance():
    cfg = _config(mode="variance-scan", model=DISK_MODEL_03, r_values=[20.0],
                  realizations=600, probes=200_000, eps=0.025)
    recs = {x.mode: x for x in run(cfg)}
    vv = recs["variance-scan"].vol
    vs = recs["variance-scan:surface"].vol
    cv = recs["variance-scan:cov"].vol
    ref = an.asymptotic_constants(cfg.spec, cfg.window)
    pairs = [("v_volume", vv, ref.v_vn), ("v_surface", vs, ref.v_vn1),
             ("cov", cv, ref.cov_vn_vn1)]
    rels = [abs(a - b) / abs(b) for _, a, b in pairs]
    psd = stats.is_psd(np.array([[vv, cv], [cv, vs]]))
    ok = all(x <= 0.20 for x in rels) and psd
    detail = "; ".join(f"{k} {a:.4f} vs {b:.4f} rel {x:.3f}"
                       for (k, a, b), x in zip(pairs, rels))
    return ok, f"{detail} (each <= 0.20); PSD {psd}"


def check_positive_definite():
    law = geo.DilatedBase(geo.Ball(1.0), geo.UniformRadius(0.5, 1.5))
    pos = an.intvol_cov_matrix(law, 2)
    with0 = an.intvol_cov_matrix(law, 2, include_zero=True)
    ok = pos.min_eigenvalue > 0 and abs(with0.min_eigenvalue) <= 1e-12
    return ok, (f"min eigenvalue over {pos.indices} {pos.min_eigenvalue:.5f} > 0; "
                f"over {with0.indices} {with0.min_eigenvalue:.1e} == 0")


def check_two_path():
    worst = max(abs(an.t_window_ball_closed_form(n, m) - an.t_window_ball_radial(n, m))
                for n in range(1, 6) for m in range(0, n))
    w = geo.BallWindow(1.0)
    exact = an.chord_power_integral(w, 3, 1)
    mc, se = an.chord_power_energy_mc(w, 3, 1, 200_000, np.random.default_rng(SEED))
    z = abs(mc - exact) / se
    ok = worst <= 1e-8 and z <= 3.0
    return ok, (f"t_window closed form vs quadrature max diff {worst:.1e} <= 1e-8; "
                f"chord power {exact:.6f} vs energy MC {mc:.6f} se {se:.6f} |z| {z:.2f} <= 3")


CRITERIA = [
    (1, "coverage mean", check_coverage_mean),
    (2, "exact volume variance", check_exact_variance),
    (3, "one-dimensional union oracle", check_one_dimensional_oracle),
    (4, "asymptotic volume variance constant", check_asymptotic_variance),
    (5, "degenerate surface variance, cube base", check_degenerate_cube),
    (6, "degenerate surface variance, atomic directions", check_degenerate_atomic),
    (7, "normal approximation rate", check_clt_rate),
    (8, "translative integral identity", check_translative),
    (9, "difference operator identities", check_difference_operator),
    (10, "volume/surface covariance structure", check_covariance),
    (11, "intrinsic volume covariance definiteness", check_positive_definite),
    (12, "two-path analytic quantities", check_two_path),
]


def _evaluate(num, title, check):
    t = time.perf_counter()
    ok, detail = check()
    return ok, _record(num, title, ok, detail, time.perf_counter() - t)


@pytest.mark.acceptance
@pytest.mark.parametrize("num,title,check", CRITERIA, ids=[f"c{c[0]:02d}" for c in CRITERIA])
def test_acceptance(num, title, check):
    ok, line = _evaluate(num, title, check)
    print(line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for crit in CRITERIA:
        ok, line = _evaluate(*crit)
        print(line, flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
