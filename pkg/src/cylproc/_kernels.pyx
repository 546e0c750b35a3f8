# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""
Compiled point-probe kernels.

``classify`` is the inner loop of every volume and surface estimate: each
probe is tested against the union of cylinders. Cylinders are binned on a
uniform grid over the window so that a probe is only tested against the
few cylinders whose reach can cover its cell.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, fabs

cnp.import_array()

DEF KIND_BALL = 0
DEF KIND_BOX = 1
DEF KIND_INTERVAL = 2
DEF KIND_POINT = 3
DEF MAX_D = 16
DEF MAX_CELLS = 65536


cdef inline unsigned char _classify_one(const double* y, Py_ssize_t n, Py_ssize_t d,
                                        const double[:, :, ::1] proj,
                                        const double[:, ::1] centers,
                                        const int[::1] kinds,
                                        const double[:, ::1] params,
                                        Py_ssize_t c, double eps) noexcept nogil:
    cdef double u[MAX_D]
    cdef Py_ssize_t j, k
    cdef double s, uu, dd, a, ex, rho, x
    cdef int covered
    for k in range(d):
        s = y[0] * proj[c, 0, k]
        for j in range(1, n):
            s = s + y[j] * proj[c, j, k]
        u[k] = s - centers[c, k]
    cdef int kind = kinds[c]
    if kind == KIND_BALL:
        uu = u[0] * u[0]
        for k in range(1, d):
            uu = uu + u[k] * u[k]
        rho = params[c, 0]
        if uu <= rho * rho:
            return 0
        if uu <= (rho + eps) * (rho + eps):
            return 1
        return 2
    elif kind == KIND_BOX:
        covered = 1
        dd = 0.0
        for k in range(d):
            a = fabs(u[k])
            if not (a <= params[c, k]):
                covered = 0
            ex = a - params[c, k]
            if ex < 0.0:
                ex = 0.0
            dd = dd + ex * ex
        if covered:
            return 0
        if dd <= eps * eps:
            return 1
        return 2
    elif kind == KIND_INTERVAL:
        x = u[0]
        if x >= -params[c, 0] and x <= params[c, 1]:
            return 0
        if x >= -params[c, 0] - eps and x <= params[c, 1] + eps:
            return 1
        return 2
    else:
        uu = u[0] * u[0]
        for k in range(1, d):
            uu = uu + u[k] * u[k]
        if uu == 0.0:
            return 0
        if uu <= eps * eps:
            return 1
        return 2


cdef inline unsigned char _scan(const double* y, Py_ssize_t n, Py_ssize_t d,
                                const double[:, :, ::1] proj,
                                const double[:, ::1] centers,
                                const int[::1] kinds,
                                const double[:, ::1] params,
                                const Py_ssize_t* ids, Py_ssize_t count,
                                double eps) noexcept nogil:
    cdef unsigned char best = 2, code
    cdef Py_ssize_t t, c
    for t in range(count):
        c = ids[t] if ids != NULL else t
        code = _classify_one(y, n, d, proj, centers, kinds, params, c, eps)
        if code < best:
            best = code
            if best == 0:
                break
    return best


def classify(const double[:, ::1] probes, const double[:, :, ::1] proj,
             const double[:, ::1] centers, const int[::1] kinds,
             const double[:, ::1] params, const double[::1] reach,
             double eps, double half_extent):
    """
    Classify probes against a union of cylinders.

    Returns a uint8 array: 0 inside the union, 1 within ``eps`` of it,
    2 otherwise. ``half_extent`` bounds ``max|y_i|`` over the probes and
    sizes the acceleration grid.
    """
    cdef Py_ssize_t N = probes.shape[0]
    cdef Py_ssize_t n = probes.shape[1]
    cdef Py_ssize_t K = kinds.shape[0]
    cdef Py_ssize_t d = centers.shape[1] if K > 0 else 0
    out_arr = np.full(N, 2, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t i, j, k, c, cell, rem, G, ncell, idx
    cdef double h, hd, lim, s, vv, max_reach, L
    cdef double cc[MAX_D]
    cdef int inside
    if K == 0 or N == 0:
        return out_arr
    if d > MAX_D or n > MAX_D:
        raise ValueError("dimension too large for the compiled kernel")

    max_reach = 0.0
    for c in range(K):
        if reach[c] > max_reach:
            max_reach = reach[c]
    L = half_extent
    G = 1
    if K > 8 and L > 0:
        G = <Py_ssize_t> floor(2.0 * L / (max_reach + eps + 1e-12))
        lim = floor((N / 2.0) ** (1.0 / n))
        if G > lim:
            G = <Py_ssize_t> lim
        lim = floor(MAX_CELLS ** (1.0 / n) + 1e-9)
        if G > lim:
            G = <Py_ssize_t> lim
        if G < 1:
            G = 1

    if G == 1:
        with nogil:
            for i in range(N):
                out[i] = _scan(&probes[i, 0], n, d, proj, centers, kinds, params,
                               NULL, K, eps)
        return out_arr

    ncell = 1
    for k in range(n):
        ncell *= G
    h = 2.0 * L / G
    hd = 0.5 * h * sqrt(<double> n)

    starts_arr = np.zeros(ncell + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] starts = starts_arr
    # pass 1 counts, pass 2 fills
    cdef Py_ssize_t[::1] ids
    cdef Py_ssize_t[::1] fill
    cdef int npass
    for npass in range(2):
        if npass == 1:
            for cell in range(ncell):
                starts[cell + 1] += starts[cell]
            ids_arr = np.empty(max(starts[ncell], 1), dtype=np.intp)
            ids = ids_arr
            fill_arr = starts_arr[:ncell].copy()
            fill = fill_arr
        with nogil:
            for cell in range(ncell):
                rem = cell
                for k in range(n):
                    cc[k] = -L + (rem % G + 0.5) * h
                    rem = rem // G
                for c in range(K):
                    lim = reach[c] + hd + eps
                    vv = 0.0
                    for k in range(d):
                        s = cc[0] * proj[c, 0, k]
                        for j in range(1, n):
                            s = s + cc[j] * proj[c, j, k]
                        s = s - centers[c, k]
                        vv = vv + s * s
                    if vv <= lim * lim:
                        if npass == 0:
                            starts[cell + 1] += 1
                        else:
                            ids[fill[cell]] = c
                            fill[cell] += 1

    with nogil:
        for i in range(N):
            cell = 0
            idx = 1
            inside = 1
            for k in range(n):
                s = (probes[i, k] + L) / h
                if s < 0.0 or s >= G:
                    inside = 0
                    break
                cell += (<Py_ssize_t> s) * idx
                idx *= G
            if inside:
                out[i] = _scan(&probes[i, 0], n, d, proj, centers, kinds, params,
                               &ids[starts[cell]], starts[cell + 1] - starts[cell], eps)
            else:
                out[i] = _scan(&probes[i, 0], n, d, proj, centers, kinds, params,
                               NULL, K, eps)
    return out_arr


def interval_union_lengths(const double[::1] starts, const double[::1] ends,
                           const Py_ssize_t[::1] offsets, double lo, double hi):
    """Length of ``[lo, hi]`` covered by each consecutive group of intervals."""
    cdef Py_ssize_t G = offsets.shape[0] - 1
    out_arr = np.zeros(G, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t g, t, a0, a1
    cdef double total, cur_s, cur_e, s, e
    cdef Py_ssize_t[::1] order
    for g in range(G):
        a0 = offsets[g]
        a1 = offsets[g + 1]
        if a1 == a0:
            continue
        order = np.argsort(np.clip(starts[a0:a1], lo, hi), kind="stable").astype(np.intp)
        total = 0.0
        cur_s = min(max(starts[a0 + order[0]], lo), hi)
        cur_e = min(max(ends[a0 + order[0]], lo), hi)
        for t in range(1, a1 - a0):
            s = min(max(starts[a0 + order[t]], lo), hi)
            e = min(max(ends[a0 + order[t]], lo), hi)
            if s > cur_e:
                total += cur_e - cur_s
                cur_s = s
                cur_e = e
            elif e > cur_e:
                cur_e = e
        total += cur_e - cur_s
        out[g] = total
    return out_arr
