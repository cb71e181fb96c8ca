# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: same contracts as _pykern, C loops instead of numpy.

Values stay in [0, p) with p < 2**20, so sums of K < 2**13 products fit
int64 without intermediate reduction.
"""
import numpy as np

BACKEND = "compiled"


def encode(object msgs_in, object vmat_in, long long p):
    """Evaluate each row of msgs (degree-<K coefficients) at the vmat points."""
    msgs = np.ascontiguousarray(np.asarray(msgs_in, dtype=np.int64))
    single = msgs.ndim == 1
    if single:
        msgs = msgs[None, :]
    vmat = np.ascontiguousarray(vmat_in, dtype=np.int64)
    cdef long long[:, ::1] m = msgs
    cdef long long[:, ::1] v = vmat
    cdef Py_ssize_t rows = m.shape[0], K = m.shape[1], N = v.shape[0]
    out = np.empty((rows, N), dtype=np.int64)
    cdef long long[:, ::1] o = out
    cdef Py_ssize_t r, x, j
    cdef long long acc
    for r in range(rows):
        for x in range(N):
            acc = 0
            for j in range(K):
                acc += m[r, j] * v[x, j]
            o[r, x] = acc % p
    return out[0] if single else out


def interpolate(object xs_in, object ys_in, long long p):
    """Coefficients of the unique degree-<K polynomial through (xs[i], ys[i])."""
    xs = np.ascontiguousarray(np.asarray(xs_in, dtype=np.int64) % p)
    ys = np.ascontiguousarray(np.asarray(ys_in, dtype=np.int64) % p)
    cdef long long[::1] xv = xs
    cdef long long[::1] yv = ys
    cdef Py_ssize_t K = xv.shape[0]
    master = np.zeros(K + 1, dtype=np.int64)
    cdef long long[::1] mv = master
    out = np.zeros(K, dtype=np.int64)
    cdef long long[::1] ov = out
    cdef Py_ssize_t i, t
    cdef long long xi, d, w, q, e, base
    mv[0] = 1
    for i in range(K):
        xi = xv[i]
        for t in range(K, 0, -1):
            q = (mv[t - 1] - xi * mv[t]) % p
            mv[t] = q + p if q < 0 else q
        q = (-xi * mv[0]) % p
        mv[0] = q + p if q < 0 else q
    for i in range(K):
        xi = xv[i]
        # derivative of the master polynomial at x_i, by Horner
        d = 0
        for t in range(K, 0, -1):
            d = (d * xi + t * mv[t]) % p
        # Fermat inverse of the derivative
        w = 1
        base = d
        e = p - 2
        while e:
            if e & 1:
                w = (w * base) % p
            base = (base * base) % p
            e >>= 1
        w = (w * yv[i]) % p
        # synthetic-division quotient (master / (x - x_i)), folded with w
        q = mv[K]
        ov[K - 1] = (ov[K - 1] + q * w) % p
        for t in range(K - 1, 0, -1):
            q = (mv[t] + xi * q) % p
            ov[t - 1] = (ov[t - 1] + q * w) % p
    return out


def certify_loads(object member_in, object subsets_in, double lo, double hi):
    """Per sampled index set: count of out-of-window elements, min and max load."""
    mem = np.ascontiguousarray(member_in, dtype=np.uint8)
    sub = np.ascontiguousarray(subsets_in, dtype=np.int64)
    cdef unsigned char[:, ::1] M = mem
    cdef long long[:, ::1] SS = sub
    cdef Py_ssize_t S = SS.shape[0], k = SS.shape[1], n = M.shape[1]
    bad = np.empty(S, dtype=np.int64)
    mn = np.empty(S, dtype=np.int64)
    mx = np.empty(S, dtype=np.int64)
    cdef long long[::1] bv = bad, mnv = mn, mxv = mx
    loads = np.zeros(n, dtype=np.int64)
    cdef long long[::1] L = loads
    cdef Py_ssize_t s, j, c
    cdef long long row, nbad, lmin, lmax, v
    for s in range(S):
        for c in range(n):
            L[c] = 0
        for j in range(k):
            row = SS[s, j]
            for c in range(n):
                L[c] += M[row, c]
        nbad = 0
        lmin = L[0]
        lmax = L[0]
        for c in range(n):
            v = L[c]
            if v < lmin:
                lmin = v
            if v > lmax:
                lmax = v
            if v < lo or v > hi:
                nbad += 1
        bv[s] = nbad
        mnv[s] = lmin
        mxv[s] = lmax
    return bad, mn, mx
