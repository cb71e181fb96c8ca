"""Maximum-distance-separable erasure code over a small prime field.

A message of K symbols is the coefficient vector of a degree-<K polynomial;
its codeword is the N evaluations at points 0..N-1. Any K surviving
evaluations recover the message (Lagrange interpolation), so up to N-K
erasures are correctable. With K = floor((1-alpha)*n) - 1 the relative
distance (N-K+1)/N stays strictly above the crash budget fraction alpha.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .fields import smallest_prime_geq

BOTTOM = None


class CodecError(Exception):
    pass


class TooManyErasures(CodecError):
    """Fewer than K symbols survive. Impossible while the crash budget holds."""


@dataclass(frozen=True)
class CodecParams:
    p: int
    N: int
    K: int

    def __post_init__(self):
        if self.p < self.N:
            raise ValueError(f"field order {self.p} below codeword length {self.N}")
        if not 1 <= self.K <= self.N:
            raise ValueError(f"dimension {self.K} outside [1, {self.N}]")

    @property
    def distance(self) -> float:
        return (self.N - self.K + 1) / self.N


def codec_params_for(n: int, alpha: float) -> CodecParams:
    """Rate choice: largest K/n with K = floor((1-alpha)*n) - 1."""
    K = int((1 - alpha) * n) - 1
    if K < 1:
        raise ValueError(f"n={n}, alpha={alpha} leaves no room for a message symbol")
    params = CodecParams(p=smallest_prime_geq(n), N=n, K=K)
    if not params.distance > alpha:
        raise ValueError(f"distance {params.distance} does not clear alpha={alpha}")
    return params


class Codec:
    def __init__(self, params: CodecParams):
        self.params = params
        self._vmat = kernels.vander(params.p, params.N, params.K)

    def encode(self, message) -> np.ndarray:
        message = np.asarray(message, dtype=np.int64)
        if message.shape[-1] != self.params.K:
            raise ValueError(f"message length {message.shape[-1]} != K={self.params.K}")
        if message.min(initial=0) < 0 or message.max(initial=0) >= self.params.p:
            raise ValueError("message symbols outside field range")
        return kernels.encode(message, self._vmat, self.params.p)

    def decode(self, received) -> np.ndarray:
        """Recover the message from a length-N sequence with BOTTOM for erasures."""
        xs = [i for i, v in enumerate(received) if v is not BOTTOM]
        if len(received) != self.params.N:
            raise ValueError(f"received length {len(received)} != N={self.params.N}")
        if len(xs) < self.params.K:
            raise TooManyErasures(f"{len(xs)} survivors < K={self.params.K}")
        xs = xs[: self.params.K]
        ys = [received[i] for i in xs]
        return self.decode_points(np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64))

    def decode_points(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Recover the message from exactly K surviving (position, value) pairs."""
        if xs.shape[0] != self.params.K:
            raise ValueError(f"need exactly K={self.params.K} points, got {xs.shape[0]}")
        return kernels.interpolate(xs, ys, self.params.p)


# ---------------------------------------------------------------------------
# Blob framing
# ---------------------------------------------------------------------------
#
# A stored string must be a whole number of K-symbol parts; the first word of
# the framed string records how many padding zeros were appended, which is all
# the retriever needs to recover the exact payload.


def frame(payload, K: int) -> np.ndarray:
    payload = np.asarray(payload, dtype=np.int64)
    pad = (-(payload.shape[0] + 1)) % K
    framed = np.zeros(payload.shape[0] + 1 + pad, dtype=np.int64)
    framed[0] = pad
    framed[1 : 1 + payload.shape[0]] = payload
    return framed


def unframe(framed) -> np.ndarray:
    framed = np.asarray(framed, dtype=np.int64)
    pad = int(framed[0])
    if pad >= framed.shape[0]:
        raise ValueError(f"pad word {pad} exceeds framed length {framed.shape[0]}")
    return framed[1 : framed.shape[0] - pad]


def split_parts(symbols: np.ndarray, K: int) -> np.ndarray:
    """Split into ceil(len/K) rows of K symbols, zero-padding the last."""
    symbols = np.asarray(symbols, dtype=np.int64)
    parts = -(-symbols.shape[0] // K)
    out = np.zeros((parts, K), dtype=np.int64)
    out.flat[: symbols.shape[0]] = symbols
    return out


# ---------------------------------------------------------------------------
# Test-vector file: lines "p K N | message | codeword"
# ---------------------------------------------------------------------------


def load_vectors(path):
    vectors = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            head, msg, cw = (part.strip() for part in line.split("|"))
            p, K, N = (int(x) for x in head.split())
            vectors.append(
                (
                    CodecParams(p=p, N=N, K=K),
                    np.array([int(x) for x in msg.split()], dtype=np.int64),
                    np.array([int(x) for x in cw.split()], dtype=np.int64),
                )
            )
    return vectors
