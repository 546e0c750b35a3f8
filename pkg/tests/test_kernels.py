import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylproc import _kernels_py, geometry as geo, kernels
from cylproc.sampler import MixedPack

compiled = pytest.importorskip("cylproc._kernels") if kernels.HAVE_COMPILED else None


def _random_pack(rng, n, m, K, kinds=("ball", "box", "interval", "point")):
    d = n - m
    cyls = []
    for _ in range(K):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "ball":
            shape = geo.Ball(rng.uniform(0.05, 0.8))
        elif kind == "box":
            shape = geo.Box(tuple(rng.uniform(0.05, 0.6, size=d)))
        elif kind == "interval" and d == 1:
            shape = geo.Interval(rng.uniform(0.0, 0.5), rng.uniform(0.0, 0.5))
        else:
            shape = geo.Point()
        cyls.append(geo.Cylinder(rng.uniform(-2, 2, size=d), geo.random_frame(n, m, rng), shape))
    return MixedPack(n, m, cyls)


def _truth(pack, y, eps):
    """Codes from the geometric distance of each probe to each cylinder."""
    dist = np.stack([c.distance(y) for c in pack], axis=1) if len(pack) else np.full(
        (len(y), 1), np.inf)
    dmin = dist.min(axis=1)
    out = np.full(len(y), kernels.OUTSIDE, dtype=np.uint8)
    out[dmin <= eps] = kernels.SHELL
    out[dmin == 0] = kernels.COVERED
    return out


@pytest.mark.parametrize("n,m,K", [(2, 1, 5), (2, 1, 40), (3, 1, 30), (3, 2, 25), (3, 0, 20),
                                   (1, 0, 30)])
def test_numpy_kernel_matches_geometry(n, m, K):
    rng = np.random.default_rng(n * 10 + K)
    pack = _random_pack(rng, n, m, K)
    y = rng.uniform(-2.5, 2.5, size=(3000, n))
    codes = _kernels_py.classify(y, *pack.kernel_arrays(), 0.05, 2.5)
    truth = _truth(pack, y, 0.05)
    # distances are computed differently; disagreements can only sit on rounding boundaries
    assert np.mean(codes != truth) < 1e-3


@pytest.mark.skipif(not kernels.HAVE_COMPILED, reason="extension not built")
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), nm=st.sampled_from([(1, 0), (2, 0), (2, 1), (3, 1),
                                                           (3, 2), (4, 2)]),
       K=st.integers(0, 60), eps=st.sampled_from([0.0, 0.01, 0.2]),
       half=st.sampled_from([0.5, 2.5, 10.0]))
def test_backends_bit_identical(seed, nm, K, eps, half):
    n, m = nm
    rng = np.random.default_rng(seed)
    pack = _random_pack(rng, n, m, K)
    # some probes beyond the declared half extent exercise the fallback scan
    y = np.ascontiguousarray(rng.uniform(-3.0, 3.0, size=(500, n)))
    arrs = pack.kernel_arrays() if K else (
        np.zeros((0, n, n - m)), np.zeros((0, n - m)), np.zeros(0, dtype=np.int32),
        np.zeros((0, max(n - m, 2))), np.zeros(0))
    a = _kernels_py.classify(y, *arrs, eps, half)
    b = compiled.classify(y, *arrs, eps, half)
    np.testing.assert_array_equal(np.asarray(a), np.asarray(b))


def _union_oracle(starts, ends, lo, hi):
    # sweep on sorted clipped intervals
    segs = sorted((max(s, lo), min(e, hi)) for s, e in zip(starts, ends) if min(e, hi) > max(s, lo))
    total, cur_s, cur_e = 0.0, None, None
    for s, e in segs:
        if cur_e is None or s > cur_e:
            if cur_e is not None:
                total += cur_e - cur_s
            cur_s, cur_e = s, e
        else:
            cur_e = max(cur_e, e)
    if cur_e is not None:
        total += cur_e - cur_s
    return total


@pytest.mark.parametrize("impl", ["numpy", "compiled"])
def test_interval_union_lengths(impl):
    if impl == "compiled" and not kernels.HAVE_COMPILED:
        pytest.skip("extension not built")
    mod = _kernels_py if impl == "numpy" else compiled
    rng = np.random.default_rng(9)
    starts, ends, offsets, expected = [], [], [0], []
    for _ in range(50):
        k = int(rng.integers(0, 15))
        s = rng.uniform(-6, 6, size=k)
        e = s + rng.uniform(0, 2, size=k)
        starts.append(s)
        ends.append(e)
        offsets.append(offsets[-1] + k)
        expected.append(_union_oracle(s, e, -5.0, 5.0))
    out = mod.interval_union_lengths(np.concatenate(starts), np.concatenate(ends),
                                     np.asarray(offsets, dtype=np.intp), -5.0, 5.0)
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_backend_name():
    assert kernels.BACKEND_NAME in ("numpy", "compiled")


def test_pure_env_forces_numpy(monkeypatch):
    import importlib
    monkeypatch.setenv("CYLPROC_PURE", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND_NAME == "numpy"
    finally:
        monkeypatch.delenv("CYLPROC_PURE")
        importlib.reload(kernels)
