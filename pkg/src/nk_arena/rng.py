"""Deterministic random-stream derivation and fast exact bit-flip sampling.

Every stream in the package is a counter-based Philox generator whose
128-bit key is derived by SHA-256 from a master seed plus purpose tags
(e.g. ``("nk-tables", n, k, seed)``).  Streams for different purposes are
therefore independent, reproducible, and never coupled through draw order.

``random_flip_masks`` draws packed mutation masks whose bits are
independent Bernoulli(u): it samples the flip count from the exact
binomial law, then places that many flips as a uniform random subset of
positions.  This is distribution-identical to per-bit coin flips but costs
roughly one variate per genotype instead of one per bit.
"""

from math import comb

import numpy as np
from numpy.random import Generator, Philox

import hashlib

# Identifies the table-generation scheme stored in landscape files:
# scheme 1 = uniform [0,1) doubles from Philox keyed by
# SHA-256("nk-tables" | n | k | seed | bump), low 128 bits.
GENERATOR_ID = 1


def derive_key(*parts) -> int:
    """128-bit stream key from an ordered tuple of ints/strings."""
    h = hashlib.sha256()
    for part in parts:
        h.update(str(part).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:16], "little")


def make_rng(*parts) -> Generator:
    """Philox generator keyed by `derive_key(*parts)`."""
    return Generator(Philox(key=derive_key(*parts)))


def derive_seed64(*parts) -> int:
    """64-bit value from the same derivation, for storage in file headers."""
    return derive_key(*parts) & 0xFFFFFFFFFFFFFFFF


_BINOM_CDF_CACHE: dict[tuple[int, float], np.ndarray] = {}


def _binomial_cdf(n: int, u: float) -> np.ndarray:
    key = (n, u)
    cdf = _BINOM_CDF_CACHE.get(key)
    if cdf is None:
        pmf = np.array([comb(n, k) * u**k * (1.0 - u) ** (n - k) for k in range(n + 1)])
        cdf = np.cumsum(pmf)
        cdf[-1] = 1.0
        _BINOM_CDF_CACHE[key] = cdf
    return cdf


def random_flip_masks(rng: Generator, count: int, n: int, u: float, dtype=np.uint64) -> np.ndarray:
    """`count` packed N-bit masks with independent Bernoulli(u) bits.

    Sampling order is fixed (counts, then single-flip positions, then
    multi-flip subsets), so results are reproducible for a given stream.
    """
    masks = np.zeros(count, dtype=np.uint64)
    if count == 0 or u == 0.0:
        return masks.astype(dtype)
    cdf = _binomial_cdf(n, u)
    q = rng.random(count)
    flips = np.searchsorted(cdf, q, side="right")

    ones = np.flatnonzero(flips == 1)
    if ones.size:
        pos = rng.integers(0, n, size=ones.size)
        masks[ones] = np.uint64(1) << pos.astype(np.uint64)

    multi = np.flatnonzero(flips >= 2)
    if multi.size:
        need = flips[multi].astype(np.int64)
        rnd = rng.random((multi.size, n), dtype=np.float32)
        sub = np.zeros(multi.size, dtype=np.uint64)
        for j in range(n):
            # uniform subset of size `need`: include site j w.p. need/(n-j)
            take = rnd[:, j] * (n - j) < need
            sub |= take.astype(np.uint64) << np.uint64(j)
            need -= take
        masks[multi] = sub
    return masks.astype(dtype)
