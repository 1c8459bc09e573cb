"""Bit-level helpers for packed genotypes.

A genotype of length N is stored as the low N bits of an unsigned integer,
with site i at bit position i.  All engines work on packed arrays; the
conversion helpers below map to/from explicit 0/1 bit arrays for the
user-facing API.
"""

import numpy as np

MAX_PACKED_BITS = 64


def packed_dtype(n: int):
    """Smallest unsigned dtype that holds an N-bit genotype."""
    if n <= 16:
        return np.uint16
    if n <= 32:
        return np.uint32
    if n <= MAX_PACKED_BITS:
        return np.uint64
    raise ValueError(f"genotypes longer than {MAX_PACKED_BITS} bits are not supported")


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack an (..., N) array of 0/1 values into integers (site i -> bit i)."""
    bits = np.asarray(bits)
    n = bits.shape[-1]
    weights = np.uint64(1) << np.arange(n, dtype=np.uint64)
    packed = (bits.astype(np.uint64) * weights).sum(axis=-1)
    return packed.astype(packed_dtype(n))


def unpack_bits(packed: np.ndarray, n: int) -> np.ndarray:
    """Expand packed genotypes into an (..., N) uint8 array of 0/1 values."""
    packed = np.asarray(packed, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    return ((packed[..., None] >> shifts) & np.uint64(1)).astype(np.uint8)


def popcount(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values)


def rotate_right(values: np.ndarray, shift: int, n: int) -> np.ndarray:
    """Cyclic right rotation of the low n bits: bit j of result = bit (j+shift) mod n."""
    values = np.asarray(values)
    shift %= n
    mask = values.dtype.type((1 << n) - 1)
    if shift == 0:
        return values & mask
    s = values.dtype.type(shift)
    ns = values.dtype.type(n - shift)
    return ((values >> s) | (values << ns)) & mask


# 256 x 8 table: _SELECT_BIT_LUT[b, r] = position of the r-th set bit of byte b.
_SELECT_BIT_LUT = np.zeros((256, 8), dtype=np.uint8)
for _b in range(256):
    for _r, _p in enumerate(j for j in range(8) if _b >> j & 1):
        _SELECT_BIT_LUT[_b, _r] = _p


def select_random_set_bit(values: np.ndarray, counts: np.ndarray, u01: np.ndarray) -> np.ndarray:
    """Position of a uniformly chosen set bit of each value.

    `counts` must equal popcount(values) and be >= 1; `u01` supplies one
    uniform [0,1) variate per value.  Scans byte lanes against a per-byte
    select table, so cost is O(itemsize) regardless of bit count.
    """
    values = np.asarray(values)
    rank = (u01 * counts).astype(np.int64)
    np.minimum(rank, counts - 1, out=rank)  # guard against u01*counts rounding up
    pos = np.zeros(values.shape, dtype=np.int64)
    remaining = rank
    done = np.zeros(values.shape, dtype=bool)
    for byte_idx in range(values.dtype.itemsize):
        byte = ((values >> values.dtype.type(8 * byte_idx)) & values.dtype.type(0xFF)).astype(np.uint8)
        c = np.bitwise_count(byte).astype(np.int64)
        here = ~done & (remaining < c)
        if here.any():
            pos[here] = 8 * byte_idx + _SELECT_BIT_LUT[byte[here], remaining[here]]
            done |= here
        remaining = remaining - np.where(done, 0, c)
    return pos
