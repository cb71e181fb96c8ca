"""Load-balancing covering families: seeded construction and verification.

A family is m subsets A_1..A_m of the node set [n]. Two properties matter:
every set's size lies in [nB/(2k), 2nB/k], and for a typical choice of k set
indices the per-node load (how many chosen sets contain the node) stays in
[(1-eps)B, (1+eps)B] for all but eps*n nodes. Size bounds are checked
exactly; the load property is certified empirically over sampled (or, when
feasible, all) k-subsets.

Construction draws 2m candidate sets by including each node independently
with probability B/k and keeps the first m candidates meeting the size
bounds, so a family is a pure function of its parameters.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels, rng
from .netsim import ConfigError

EXHAUSTIVE_LIMIT = 100_000


class ConstructionFailed(Exception):
    """Fewer than m of the 2m candidates met the size bounds; retry with seed+1."""


class IndexOutOfRange(ConfigError):
    pass


@dataclass(frozen=True)
class FamilyParams:
    n: int
    m: int
    k: int
    B: int
    epsilon: float
    seed: int

    def __post_init__(self):
        if self.m < 1 or self.m > self.n:
            raise ConfigError(f"m={self.m} outside [1, n={self.n}]")
        if self.B < 1:
            raise ConfigError(f"B={self.B} < 1")
        if not self.B <= self.k <= self.m:
            raise ConfigError(f"need B <= k <= m, got B={self.B} k={self.k} m={self.m}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon={self.epsilon} outside (0, 1)")


@dataclass
class CoveringFamily:
    params: FamilyParams
    member: np.ndarray  # bool [m, n]; member[i, j-1] means node j is in A_{i+1}

    def sizes(self) -> np.ndarray:
        return self.member.sum(axis=1)

    def set_members(self, i: int) -> list[int]:
        """1-based member ids of A_i."""
        if not 1 <= i <= self.params.m:
            raise IndexOutOfRange(f"set index {i} outside [1, {self.params.m}]")
        return [int(j) + 1 for j in np.flatnonzero(self.member[i - 1])]


def size_bounds_ok(sizes: np.ndarray, n: int, k: int, B: int) -> np.ndarray:
    # integer form of nB/(2k) <= |A| <= 2nB/k, exact in int64
    sizes = sizes.astype(np.int64)
    return (2 * k * sizes >= n * B) & (k * sizes <= 2 * n * B)


def generate(params: FamilyParams) -> CoveringFamily:
    p = params
    prob = min(1.0, p.B / p.k)
    stream = rng.stream("family", p.n, p.m, p.k, p.B, repr(float(p.epsilon)), p.seed)
    candidates = stream.random((2 * p.m, p.n)) < prob
    ok = size_bounds_ok(candidates.sum(axis=1), p.n, p.k, p.B)
    keep = np.flatnonzero(ok)
    if keep.shape[0] < p.m:
        raise ConstructionFailed(
            f"only {keep.shape[0]} of {2 * p.m} candidates met the size bounds "
            f"for {p}; retry with seed {p.seed + 1}")
    return CoveringFamily(params=p, member=candidates[keep[: p.m]])


def get_family(params: FamilyParams, retries: int = 8) -> CoveringFamily:
    """generate() with seed-increment retries, memoized on parameters."""
    cached = _family_cache.get(params)
    if cached is not None:
        return cached
    last = None
    for attempt in range(retries):
        trial = FamilyParams(params.n, params.m, params.k, params.B,
                             params.epsilon, params.seed + attempt)
        try:
            family = generate(trial)
        except ConstructionFailed as exc:
            last = exc
            continue
        _family_cache[params] = family
        return family
    raise ConstructionFailed(f"no family after {retries} seeds: {last}")


_family_cache: dict[FamilyParams, CoveringFamily] = {}


def load(j: int, index_set, family: CoveringFamily) -> int:
    """Number of sets among the indexed ones that contain node j."""
    p = family.params
    if not 1 <= j <= p.n:
        raise IndexOutOfRange(f"node {j} outside [1, {p.n}]")
    total = 0
    for i in index_set:
        if not 1 <= i <= p.m:
            raise IndexOutOfRange(f"set index {i} outside [1, {p.m}]")
        total += int(family.member[i - 1, j - 1])
    return total


@dataclass
class SizeReport:
    ok: bool
    violating: list[int]  # 1-based set indices
    sizes: np.ndarray


def verify_size_bounds(family: CoveringFamily) -> SizeReport:
    p = family.params
    sizes = family.sizes()
    good = size_bounds_ok(sizes, p.n, p.k, p.B)
    bad = [int(i) + 1 for i in np.flatnonzero(~good)]
    return SizeReport(ok=not bad, violating=bad, sizes=sizes)


@dataclass
class BalanceCertificate:
    samples: int
    exhaustive: bool
    worst_bad_fraction: float
    per_sample: list[tuple[int, int, int, int]]  # (index-set hash, |J|, min, max)
    n: int
    epsilon: float
    B: int

    @property
    def passes(self) -> bool:
        return all(j_size >= (1 - self.epsilon) * self.n
                   for _, j_size, _, _ in self.per_sample)

    @property
    def pass_fraction(self) -> float:
        good = sum(1 for _, j_size, _, _ in self.per_sample
                   if j_size >= (1 - self.epsilon) * self.n)
        return good / len(self.per_sample)


def _subset_hash(subset: np.ndarray) -> int:
    digest = hashlib.sha256(np.sort(subset).astype(np.int64).tobytes()).digest()
    return int.from_bytes(digest[:8], "big")


def certify_load_balance(family: CoveringFamily, k: int, samples: int,
                         rng_seed: int = 0) -> BalanceCertificate:
    p = family.params
    if not 1 <= k <= p.m:
        raise ConfigError(f"k={k} outside [1, m={p.m}]")
    if samples < 1:
        raise ConfigError(f"samples={samples} < 1")

    exhaustive = math.comb(p.m, k) <= EXHAUSTIVE_LIMIT
    if exhaustive:
        subsets = np.array(list(combinations(range(p.m), k)), dtype=np.int64)
        subsets = subsets.reshape(-1, k)  # C(m,m)=1 keeps its k columns
    else:
        stream = rng.stream("certify", p.n, p.m, p.k, p.B,
                            repr(float(p.epsilon)), p.seed, k, rng_seed)
        # k-subset = indices of the k smallest of m iid uniform keys
        subsets = np.empty((samples, k), dtype=np.int64)
        chunk = max(1, 4_000_000 // p.m)
        for s in range(0, samples, chunk):
            keys = stream.random((min(chunk, samples - s), p.m))
            subsets[s : s + keys.shape[0]] = np.argpartition(keys, k - 1, axis=1)[:, :k]

    lo = (1 - p.epsilon) * p.B
    hi = (1 + p.epsilon) * p.B
    bad, mn, mx = kernels.certify_loads(family.member, subsets, lo, hi)
    per_sample = [(_subset_hash(subsets[s]), p.n - int(bad[s]), int(mn[s]), int(mx[s]))
                  for s in range(subsets.shape[0])]
    worst = max(int(b) for b in bad) / p.n
    return BalanceCertificate(samples=subsets.shape[0], exhaustive=exhaustive,
                              worst_bad_fraction=worst, per_sample=per_sample,
                              n=p.n, epsilon=p.epsilon, B=p.B)


# ---------------------------------------------------------------------------
# Parameter derivation
# ---------------------------------------------------------------------------

PRACTICAL_B = (4, 64)
PRACTICAL_EPSILON = (0.05, 0.3)


def epsilon_for_alpha(alpha: float) -> float:
    """Equality solution of (1 - 4*eps - (1+eps)*alpha)/2 >= eps."""
    if not 0.0 <= alpha < 1.0:
        raise ConfigError(f"alpha={alpha} outside [0, 1)")
    return (1 - alpha) / (6 + alpha)


def constants_for_epsilon(epsilon: float) -> tuple[float, int]:
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon={epsilon} outside (0, 1)")
    c = epsilon ** 3 / 8
    return c, math.ceil(72 / c)


def derive_constants(alpha: float) -> tuple[float, float, int]:
    """Theory-mode (epsilon, c, B) for a crash fraction alpha."""
    epsilon = epsilon_for_alpha(alpha)
    c, B = constants_for_epsilon(epsilon)
    return epsilon, c, B


def validate_practical(B: int, epsilon: float) -> None:
    """Range check for the desk-scale parameter mode."""
    lo, hi = PRACTICAL_B
    if not lo <= B <= hi:
        raise ConfigError(f"practical B={B} outside [{lo}, {hi}]")
    lo, hi = PRACTICAL_EPSILON
    if not lo <= epsilon <= hi:
        raise ConfigError(f"practical epsilon={epsilon} outside [{lo}, {hi}]")


# ---------------------------------------------------------------------------
# Serialization: header "n m k B epsilon seed", one line of member ids per set
# ---------------------------------------------------------------------------


def save_family(family: CoveringFamily, path) -> None:
    p = family.params
    with open(path, "w") as fh:
        fh.write(f"{p.n} {p.m} {p.k} {p.B} {p.epsilon!r} {p.seed}\n")
        for i in range(p.m):
            ids = (str(int(j) + 1) for j in np.flatnonzero(family.member[i]))
            fh.write(" ".join(ids) + "\n")


def load_family(path) -> CoveringFamily:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ConfigError(f"{path}: bad family header")
        n, m, k, B = (int(x) for x in header[:4])
        params = FamilyParams(n=n, m=m, k=k, B=B,
                              epsilon=float(header[4]), seed=int(header[5]))
        member = np.zeros((m, n), dtype=bool)
        for i in range(m):
            line = fh.readline()
            if not line:
                raise ConfigError(f"{path}: expected {m} set lines, got {i}")
            for j in line.split():
                member[i, int(j) - 1] = True
    return CoveringFamily(params=params, member=member)
