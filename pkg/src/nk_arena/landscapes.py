"""NK and Ising fitness landscapes: generation, evaluation, exact analysis.

Genotypes are length-N binary strings.  The user-facing API represents them
as (N,) uint8 arrays of 0/1 values; vectorized code paths use packed
integers with site i at bit position i (see `bitops`).

An NK landscape assigns each site i a contribution table over the
2^(K+1) states of the window (x_i, x_{i+1}, ..., x_{i+K}), indices cyclic
modulo N, and the fitness of a genotype is the mean contribution over
sites.  Table entries are independent uniforms on [0,1), so fitness lies in
(0,1) and, almost surely, a unique genotype attains the global maximum.
Window states are encoded with x_i as the least significant bit.

Ising landscapes come in two variants on spin variables s_i = 2 x_i - 1:
`noninteracting` scores sum(s_i) + N + 1 (unique maximum at all ones) and
`ferromagnetic` scores sum(s_i * s_{i+1}) + N + 1 on the cyclic chain
(two degenerate maxima: all ones and all zeros).  The +N+1 shift keeps all
fitness values strictly positive so fitness-proportional selection is
always well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bitops import packed_dtype, pack_bits, popcount, rotate_right, unpack_bits
from .errors import CapabilityError, ParameterError
from .rng import make_rng

ENUM_LIMIT = 30  # hard cap for exhaustive 2^N operations
_CHUNK_BITS = 22  # enumeration chunk size for large N

MIN_N = 4
MAX_ISING_N = 64


def _as_bits(genotype, n: int) -> np.ndarray:
    bits = np.asarray(genotype, dtype=np.uint8)
    if bits.ndim != 1 or bits.shape[0] != n:
        raise ParameterError(f"genotype must have length {n}, got shape {bits.shape}")
    return bits


class NkLandscape:
    """An NK fitness landscape with adjacent (cyclic) neighborhoods.

    Instances are immutable after generation and safe to share read-only
    across concurrent searches.  Use `generate_nk` to create one.
    """

    kind = "nk"

    def __init__(self, n: int, k: int, seed: int, tables: np.ndarray, seed_bumps: int = 0):
        if tables.shape != (n, 2 ** (k + 1)):
            raise ParameterError(f"tables must have shape ({n}, {2 ** (k + 1)})")
        self.n = int(n)
        self.k = int(k)
        self.seed = int(seed)
        self.seed_bumps = int(seed_bumps)
        self.tables = tables
        self.tables.setflags(write=False)
        self._window_mask = (1 << (k + 1)) - 1
        self._full_table: np.ndarray | None = None
        packed, _, ties = _exact_maximum(tables, n, k)
        if ties != 1:
            # Callers generate via generate_nk, which re-draws on ties; reaching
            # here means a hand-built table set with a degenerate maximum.
            raise DegenerateMaximumError("NK landscape has a degenerate global maximum")
        self.global_max_packed = int(packed)
        self.global_max = unpack_bits(np.uint64(packed), n)
        # Canonical fitness of the argmax, so equality tests against any other
        # evaluation path (full table, per-genotype) hold bit-for-bit.
        self.global_max_fitness = float(self.fitness_packed(np.asarray(packed, dtype=packed_dtype(n))))

    @property
    def global_max_genotypes(self) -> list[np.ndarray]:
        return [self.global_max]

    def fitness(self, genotype) -> float:
        """Mean per-site contribution of one genotype, in (0,1)."""
        bits = _as_bits(genotype, self.n)
        return float(self.fitness_packed(pack_bits(bits)))

    def fitness_packed(self, packed: np.ndarray) -> np.ndarray:
        """Vectorized fitness of packed genotypes (any array shape)."""
        packed = np.asarray(packed)
        total = np.zeros(packed.shape, dtype=np.float64)
        for i in range(self.n):
            w = rotate_right(packed, i, self.n) & packed.dtype.type(self._window_mask)
            total += self.tables[i][w]
        return total / self.n

    def full_fitness_table(self) -> np.ndarray:
        """Fitness of every genotype, indexed by packed value (cached)."""
        if self._full_table is None:
            if self.n > ENUM_LIMIT:
                raise CapabilityError(f"2^{self.n} states exceed the enumeration limit")
            table = self.fitness_packed(np.arange(2**self.n, dtype=np.uint32))
            table.setflags(write=False)
            self._full_table = table
        return self._full_table


class IsingLandscape:
    """Spin-chain fitness landscape; see module docstring for the two variants."""

    VARIANTS = ("noninteracting", "ferromagnetic")
    kind = "ising"

    def __init__(self, n: int, variant: str):
        if variant not in self.VARIANTS:
            raise ParameterError(f"variant must be one of {self.VARIANTS}, got {variant!r}")
        if not 1 <= n <= MAX_ISING_N:
            raise ParameterError(f"Ising landscapes support 1 <= n <= {MAX_ISING_N}")
        self.n = int(n)
        self.variant = variant
        self.global_max_fitness = float(2 * n + 1)
        ones = np.ones(n, dtype=np.uint8)
        if variant == "noninteracting":
            self.global_max_genotypes = [ones]
        else:
            self.global_max_genotypes = [ones, np.zeros(n, dtype=np.uint8)]

    def fitness(self, genotype) -> float:
        bits = _as_bits(genotype, self.n)
        spins = 2 * bits.astype(np.int64) - 1
        if self.variant == "noninteracting":
            return float(spins.sum() + self.n + 1)
        return float((spins * np.roll(spins, -1)).sum() + self.n + 1)

    def fitness_packed(self, packed: np.ndarray) -> np.ndarray:
        packed = np.asarray(packed)
        if self.variant == "noninteracting":
            return 2.0 * popcount(packed) + 1.0
        disagree = packed ^ rotate_right(packed, 1, self.n)
        return 2.0 * self.n + 1.0 - 2.0 * popcount(disagree)

    def full_fitness_table(self) -> np.ndarray:
        if self.n > ENUM_LIMIT:
            raise CapabilityError(f"2^{self.n} states exceed the enumeration limit")
        return self.fitness_packed(np.arange(2**self.n, dtype=np.uint32))


Landscape = NkLandscape | IsingLandscape


class DegenerateMaximumError(ParameterError):
    """The drawn tables admit more than one global maximum (measure-zero event)."""


@dataclass
class LandscapeStats:
    """Exhaustive ruggedness statistics for one landscape."""

    local_maxima_count: int
    maxima_density: float
    alpha: float
    empirical_neighbor_correlation: float | None = None


def generate_nk(n: int, k: int, seed: int) -> NkLandscape:
    """Draw a fresh NK landscape from a deterministic stream keyed by seed.

    All N * 2^(K+1) table entries are independent uniforms on [0,1); the
    same (n, k, seed) always yields bit-identical tables.  The global
    maximum is computed and cached.  In the measure-zero event of a
    degenerate maximum the tables are re-drawn from a bumped stream and the
    bump count recorded, preserving the unique-maximum guarantee.
    """
    if n < MIN_N:
        raise ParameterError(f"n must be at least {MIN_N}, got {n}")
    if not 0 <= k <= n - 1:
        raise ParameterError(f"k must satisfy 0 <= k <= n-1, got k={k} for n={n}")
    for bump in range(64):
        tables = make_rng("nk-tables", n, k, seed, bump).random((n, 2 ** (k + 1)))
        try:
            return NkLandscape(n, k, seed, tables, seed_bumps=bump)
        except DegenerateMaximumError:
            continue
    raise ParameterError("could not draw a landscape with a unique maximum")  # pragma: no cover


def nk_fitness(landscape: NkLandscape, genotype) -> float:
    return landscape.fitness(genotype)


def ising_fitness(landscape: IsingLandscape, genotype) -> float:
    return landscape.fitness(genotype)


def _check_enumerable(n: int) -> None:
    if n > ENUM_LIMIT:
        raise CapabilityError(f"exhaustive analysis is limited to N <= {ENUM_LIMIT}, got N={n}")


def _enumerate_fitness(landscape: Landscape) -> np.ndarray:
    """Full fitness vector over all 2^N packed genotypes."""
    _check_enumerable(landscape.n)
    if landscape.n <= _CHUNK_BITS:
        return landscape.full_fitness_table()
    out = np.empty(2**landscape.n, dtype=np.float64)
    step = 2**_CHUNK_BITS
    for start in range(0, 2**landscape.n, step):
        chunk = np.arange(start, start + step, dtype=np.uint32)
        out[start : start + step] = landscape.fitness_packed(chunk)
    return out


def global_maximum_bruteforce(landscape: Landscape) -> tuple[list[np.ndarray], float]:
    """All genotypes attaining the maximal fitness, by full enumeration.

    Returns (genotypes, fitness); the set has size 1 for NK landscapes and
    size 2 for the ferromagnetic Ising chain.
    """
    fitness = _enumerate_fitness(landscape)
    best = float(fitness.max())
    winners = np.flatnonzero(fitness == best)
    return [unpack_bits(np.uint64(g), landscape.n) for g in winners], best


def count_local_maxima(landscape: Landscape) -> LandscapeStats:
    """Count genotypes strictly fitter than all N single-bit-flip neighbors."""
    fitness = _enumerate_fitness(landscape)
    n = landscape.n
    is_max = np.ones(fitness.shape, dtype=bool)
    for j in range(n):
        flipped = np.flip(fitness.reshape(-1, 2, 2**j), axis=1).reshape(-1)
        is_max &= fitness > flipped
    count = int(is_max.sum())
    alpha = landscape.k / n if isinstance(landscape, NkLandscape) else float("nan")
    return LandscapeStats(count, count / 2.0**n, alpha)


def neighbor_correlation(ensemble: list[NkLandscape], pairs: int = 200_000, seed: int = 0) -> float:
    """Empirical fitness correlation between single-flip neighbors.

    Samples uniformly random (genotype, flipped-neighbor) pairs spread
    evenly across the ensemble and returns the Pearson correlation of the
    two fitness samples.  Converges to 1 - (K+1)/N as the pair count grows.
    """
    if not ensemble:
        raise ParameterError("ensemble must contain at least one landscape")
    n, k = ensemble[0].n, ensemble[0].k
    if any(land.n != n or land.k != k for land in ensemble):
        raise ParameterError("ensemble landscapes must share (n, k)")
    rng = make_rng("neighbor-correlation", n, k, seed)
    per = -(-pairs // len(ensemble))
    left, right = [], []
    dtype = packed_dtype(n)
    for land in ensemble:
        g = rng.integers(0, 2**n, size=per, dtype=np.uint64).astype(dtype)
        flip = rng.integers(0, n, size=per).astype(np.uint64)
        left.append(land.fitness_packed(g))
        right.append(land.fitness_packed((g.astype(np.uint64) ^ (np.uint64(1) << flip)).astype(dtype)))
    return float(np.corrcoef(np.concatenate(left), np.concatenate(right))[0, 1])


def _exact_maximum(tables: np.ndarray, n: int, k: int) -> tuple[int, float, int]:
    """(packed argmax, max total contribution, tie count) for an NK table set.

    Picks whichever of full enumeration and the chain decomposition is
    cheaper for the given (n, k); both are exact.
    """
    enum_cost = n * 2**n
    dp_cost = (n - k + k + 2) * 4**k
    if n <= ENUM_LIMIT and enum_cost <= dp_cost:
        total = np.zeros(2**n, dtype=np.float64)
        g = np.arange(2**n, dtype=np.uint32)
        mask = np.uint32((1 << (k + 1)) - 1)
        for i in range(n):
            total += tables[i][rotate_right(g, i, n) & mask]
        best = total.max()
        ties = int((total == best).sum())
        return int(total.argmax()), float(best), ties
    return _dp_maximum(tables, n, k)


def _dp_maximum(tables: np.ndarray, n: int, k: int) -> tuple[int, float, int]:
    """Exact maximum by conditioning on the first K bits and sweeping the chain.

    For each of the 2^K boundary assignments, dynamic programming over the
    sliding window of the last K chosen bits maximizes the sum of the first
    N-K site contributions; the remaining K wrap-around contributions are a
    function of the final window and the boundary.  Cost is O(N * 4^K).
    """
    states = 2**k
    windows = np.arange(2 * states)
    prev_state = windows & (states - 1)
    next_state = windows >> 1
    best_total = -np.inf
    best_count = 0
    best_boundary = best_final = -1
    for boundary in range(states):
        value, count = _dp_sweep(tables, n, k, boundary, prev_state, next_state)
        total = value + _dp_tail(tables, n, k, boundary)
        top = total.max()
        if top > best_total:
            best_total = float(top)
            best_count = 0
            best_boundary = boundary
            best_final = int(total.argmax())
        if top == best_total:
            best_count += int(count[total == top].sum())
    packed = _dp_reconstruct(tables, n, k, best_boundary, best_final, prev_state, next_state)
    return packed, best_total, best_count


def _dp_sweep(tables, n, k, boundary, prev_state, next_state, trace=None):
    states = 2**k
    value = np.full(states, -np.inf)
    count = np.zeros(states, dtype=np.float64)
    value[boundary] = 0.0
    count[boundary] = 1.0
    for i in range(n - k):
        cand = value[prev_state] + tables[i][: 2 * states]
        pairs = cand.reshape(states, 2)  # windows 2s and 2s+1 both lead to state s
        new_value = pairs.max(axis=1)
        winner = cand == new_value[next_state]
        new_count = np.where(winner, count[prev_state], 0.0).reshape(states, 2).sum(axis=1)
        if trace is not None:
            trace.append(np.where(winner.reshape(states, 2)[:, 1], 2 * np.arange(states) + 1, 2 * np.arange(states)))
        value, count = new_value, new_count
    return value, count


def _dp_tail(tables, n, k, boundary):
    """Wrap-around contributions of sites N-K..N-1 as a function of the final window."""
    states = 2**k
    final = np.arange(states)
    tail = np.zeros(states, dtype=np.float64)
    for r in range(k):
        low = final >> r
        high = (boundary & ((1 << (r + 1)) - 1)) << (k - r)
        tail += tables[n - k + r][low | high]
    return tail


def _dp_reconstruct(tables, n, k, boundary, final_state, prev_state, next_state) -> int:
    trace: list[np.ndarray] = []
    _dp_sweep(tables, n, k, boundary, prev_state, next_state, trace=trace)
    bits_rev = []
    state = final_state
    for step in reversed(trace):
        window = int(step[state])
        bits_rev.append(window >> k)
        state = window & (2**k - 1)
    packed = boundary
    for offset, bit in enumerate(reversed(bits_rev)):
        packed |= bit << (k + offset)
    return packed


def global_maximum_dp(landscape: NkLandscape) -> tuple[np.ndarray, float]:
    """Exact global maximum of an adjacent-neighborhood NK landscape.

    Output matches `global_maximum_bruteforce` exactly wherever both run,
    at cost polynomial in N (exponential in K only).
    """
    if not isinstance(landscape, NkLandscape):
        raise ParameterError("the chain decomposition applies to NK landscapes only")
    packed, _, _ = _dp_maximum(landscape.tables, landscape.n, landscape.k)
    fitness = float(landscape.fitness_packed(np.asarray(packed, dtype=packed_dtype(landscape.n))))
    return unpack_bits(np.uint64(packed), landscape.n), fitness
