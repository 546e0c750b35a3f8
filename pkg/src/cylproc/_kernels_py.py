"""
Pure-numpy implementation of the point-probe kernels.

This is the fallback used when the compiled extension is unavailable and
the reference the compiled kernels are tested against. Floating-point
operations are carried out in the same order as in ``_kernels.pyx`` so the
two backends classify every probe identically.
"""

import numpy as np

KIND_BALL, KIND_BOX, KIND_INTERVAL, KIND_POINT = 0, 1, 2, 3
COVERED, SHELL, OUTSIDE = 0, 1, 2

_CHUNK = 1 << 16


def _classify_against(u, kind, prm, eps):
    # u: (N, d) base coordinates relative to the germ
    d = u.shape[1]
    if kind == KIND_BALL:
        uu = u[:, 0] * u[:, 0]
        for k in range(1, d):
            uu = uu + u[:, k] * u[:, k]
        rho = prm[0]
        cov = uu <= rho * rho
        near = uu <= (rho + eps) * (rho + eps)
    elif kind == KIND_BOX:
        cov = np.ones(len(u), dtype=bool)
        dd = np.zeros(len(u))
        for k in range(d):
            a = np.abs(u[:, k])
            cov &= a <= prm[k]
            ex = np.maximum(a - prm[k], 0.0)
            dd = dd + ex * ex
        near = dd <= eps * eps
    elif kind == KIND_INTERVAL:
        x = u[:, 0]
        cov = (x >= -prm[0]) & (x <= prm[1])
        near = (x >= -prm[0] - eps) & (x <= prm[1] + eps)
    else:
        uu = u[:, 0] * u[:, 0]
        for k in range(1, d):
            uu = uu + u[:, k] * u[:, k]
        cov = uu == 0.0
        near = uu <= eps * eps
    return np.where(cov, COVERED, np.where(near, SHELL, OUTSIDE)).astype(np.uint8)


def classify(probes, proj, centers, kinds, params, reach, eps, half_extent):
    """
    Classify probes against a union of cylinders.

    Returns a uint8 array with 0 for probes inside the union, 1 for probes
    within distance ``eps`` of it (but outside), 2 otherwise. ``reach`` and
    ``half_extent`` are unused here; they size the compiled kernel's grid.
    """
    probes = np.ascontiguousarray(probes, dtype=np.float64)
    N, n = probes.shape
    K = len(kinds)
    out = np.full(N, OUTSIDE, dtype=np.uint8)
    if K == 0 or N == 0:
        return out
    d = centers.shape[1]
    for start in range(0, N, _CHUNK):
        y = probes[start:start + _CHUNK]
        codes = out[start:start + _CHUNK]
        for c in range(K):
            live = codes != COVERED
            if not live.any():
                break
            yl = y[live]
            u = np.empty((len(yl), d))
            P = proj[c]
            for k in range(d):
                s = yl[:, 0] * P[0, k]
                for j in range(1, n):
                    s = s + yl[:, j] * P[j, k]
                u[:, k] = s - centers[c, k]
            codes[live] = np.minimum(codes[live],
                                     _classify_against(u, kinds[c], params[c], eps))
    return out


def interval_union_lengths(starts, ends, offsets, lo, hi):
    """
    Length of ``[lo, hi] ∩ ⋃ [starts[i], ends[i]]`` for consecutive groups.

    Group g consists of intervals ``offsets[g]:offsets[g+1]``.
    """
    G = len(offsets) - 1
    out = np.zeros(G)
    for g in range(G):
        s = np.clip(starts[offsets[g]:offsets[g + 1]], lo, hi)
        e = np.clip(ends[offsets[g]:offsets[g + 1]], lo, hi)
        if len(s) == 0:
            continue
        order = np.argsort(s, kind="stable")
        s, e = s[order], e[order]
        total = 0.0
        cur_s, cur_e = s[0], e[0]
        for a, b in zip(s[1:], e[1:]):
            if a > cur_e:
                total += cur_e - cur_s
                cur_s, cur_e = a, b
            elif b > cur_e:
                cur_e = b
        total += cur_e - cur_s
        out[g] = total
    return out
