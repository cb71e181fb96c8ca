"""Pure-python (numpy) kernels: the fallback when the compiled core is absent.

Same contracts as the compiled module `_ckern`:
  encode(msgs, vmat, p)           polynomial evaluation, batched
  interpolate(xs, ys, p)          coefficient recovery from K points
  certify_loads(member, subsets, lo, hi)   per-sample load statistics

All arrays are int64 (member is uint8) and all values live in [0, p) with
p small enough that products fit int64 exactly.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def vander(p: int, N: int, K: int) -> np.ndarray:
    """Evaluation matrix: V[x, j] = x**j mod p for x in 0..N-1."""
    V = np.empty((N, K), dtype=np.int64)
    V[:, 0] = 1
    x = np.arange(N, dtype=np.int64) % p
    for j in range(1, K):
        V[:, j] = (V[:, j - 1] * x) % p
    return V


def encode(msgs: np.ndarray, vmat: np.ndarray, p: int) -> np.ndarray:
    """Evaluate each row of msgs (degree-<K coefficients) at the vmat points."""
    msgs = np.asarray(msgs, dtype=np.int64)
    single = msgs.ndim == 1
    if single:
        msgs = msgs[None, :]
    out = (msgs @ vmat.T) % p
    return out[0] if single else out


def _pow_mod(a: np.ndarray, e: int, p: int) -> np.ndarray:
    r = np.ones_like(a)
    b = a % p
    while e:
        if e & 1:
            r = (r * b) % p
        b = (b * b) % p
        e >>= 1
    return r


def interpolate(xs: np.ndarray, ys: np.ndarray, p: int) -> np.ndarray:
    """Coefficients of the unique degree-<K polynomial through (xs[i], ys[i]).

    Master-polynomial form: with M(x) = prod_i (x - x_i), the answer is
    sum_i y_i * (M / (x - x_i)) / M'(x_i); the per-i quotients come from one
    synthetic-division recurrence vectorized across i.
    """
    xs = np.asarray(xs, dtype=np.int64) % p
    ys = np.asarray(ys, dtype=np.int64) % p
    K = xs.shape[0]
    master = np.zeros(K + 1, dtype=np.int64)
    master[0] = 1
    for xi in xs:
        shifted = np.empty(K + 1, dtype=np.int64)
        shifted[0] = 0
        shifted[1:] = master[:-1]
        master = (shifted - xi * master) % p
    # derivative, evaluated at every x_i by Horner
    deriv = (np.arange(1, K + 1, dtype=np.int64) * master[1:]) % p
    denom = np.zeros(K, dtype=np.int64)
    for t in range(K - 1, -1, -1):
        denom = (denom * xs + deriv[t]) % p
    weights = (ys * _pow_mod(denom, p - 2, p)) % p
    # quotient coefficients Q_i = M / (x - x_i), one column per i
    quot = np.empty((K, K), dtype=np.int64)
    quot[K - 1, :] = master[K]
    for t in range(K - 1, 0, -1):
        quot[t - 1, :] = (master[t] + xs * quot[t, :]) % p
    return (quot @ weights) % p


def certify_loads(member: np.ndarray, subsets: np.ndarray, lo: int, hi: int):
    """Per sampled index set: count of out-of-window elements, min and max load."""
    S, k = subsets.shape
    _, n = member.shape
    bad = np.empty(S, dtype=np.int64)
    mn = np.empty(S, dtype=np.int64)
    mx = np.empty(S, dtype=np.int64)
    chunk = max(1, 4_000_000 // max(1, k * n))
    for a in range(0, S, chunk):
        idx = subsets[a : a + chunk]
        loads = member[idx].sum(axis=1, dtype=np.int64)
        bad[a : a + chunk] = ((loads < lo) | (loads > hi)).sum(axis=1)
        mn[a : a + chunk] = loads.min(axis=1)
        mx[a : a + chunk] = loads.max(axis=1)
    return bad, mn, mx
