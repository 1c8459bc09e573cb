"""Population search algorithms and the single-agent adaptive walk.

Four synchronous population algorithms share one generation loop:

* ``il``  — imitative learning: every offspring copies one differing bit
  from the generation's fittest member (the model, chosen by deterministic
  argmax with lowest-index tie-break), then mutates.
* ``aga`` — asexual GA: fitness-proportional (roulette) selection of a
  parent, then mutation.
* ``sga`` — sexual GA: two parents drawn without replacement with
  probability proportional to fitness, one-point crossover, then mutation.
* ``bs``  — blind search: every offspring is a fresh uniform random
  genotype (distribution-identical to mutation with u = 1/2).

All M offspring of generation t+1 are produced reading only generation t.
Time accounting: the initial random population counts as t* = 1 when it
already contains a global maximum, and each synchronous update advances
the halting clock by one.  Best-fitness traces are indexed from t = 0 at
the initial population.  Runs that reach the step cap are censored, never
raised.

``raw`` is the single-agent random adaptive walk: per step, one uniformly
chosen bit flip among those that do not decrease fitness; a walk at a
strict local maximum is censored as "stuck".  One accepted move advances
the clock by one, so the accepted-move count is t* - 1.

Search cost is the number of agent updates over the state-space size:
M * t* / 2^N for the population algorithms.  For the walk the initial
draw is the starting state rather than an update, so its cost counts
accepted moves only, matching the greedy-walk baseline N/2^(N+1) on
additive landscapes.

Vectorized batches: independent runs of one (landscape, config) cell
advance in lockstep on packed genotypes, drawing from a single stream, so
a batch is reproducible from its seed regardless of how cells are
scheduled across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.random import Generator

from .bitops import packed_dtype, pack_bits, popcount, select_random_set_bit, unpack_bits
from .errors import InvariantError, ParameterError
from .landscapes import IsingLandscape, Landscape, NkLandscape
from .rng import make_rng, random_flip_masks

ALGORITHMS = ("il", "aga", "sga", "bs", "raw")

# NK landscapes up to this size are evaluated through a full fitness table
# (one gather per genotype); larger ones fall back to per-site evaluation.
FULL_TABLE_LIMIT = 22

CENSOR_NONE, CENSOR_T_MAX, CENSOR_STUCK = 0, 1, 2


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of one search run; `raw` forces the population size to 1."""

    algorithm: str
    m: int = 1
    u: float = 0.0
    t_max: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.algorithm == "raw" and self.m != 1:
            object.__setattr__(self, "m", 1)
        if self.m < 1:
            raise ParameterError("population size m must be >= 1")
        if not 0.0 <= self.u <= 0.5:
            raise ParameterError("mutation probability u must lie in [0, 1/2]")
        if self.t_max < 1:
            raise ParameterError("t_max must be >= 1")


@dataclass
class Population:
    """A synchronous generation: M genotypes plus their fitness cache.

    `fitnesses` is None until the population is first evaluated against a
    landscape (init_population cannot know the landscape); afterwards it
    always matches direct re-evaluation of `members`.
    """

    members: np.ndarray
    fitnesses: np.ndarray | None = None
    generation: int = 0

    @property
    def m(self) -> int:
        return self.members.shape[0]

    @property
    def n(self) -> int:
        return self.members.shape[1]


@dataclass
class RunResult:
    """Outcome of one search run.

    `best_trace` lists (t, best fitness seen up to t) at the times the
    running best improved, starting at t = 0; the value at any other t is
    the last entry at or before it.  `t_star` is None when the run was
    censored (step cap reached, or the walk got stuck).  `cost` counts
    agent updates over 2^N and is None for censored runs.
    """

    t_star: int | None
    success: bool
    best_trace: list[tuple[int, float]]
    cost: float | None
    censored: str | None = None
    moves: int | None = None


@dataclass
class BatchResult:
    """Vectorized results for a batch of independent runs on one landscape."""

    algorithm: str
    m: int
    u: float
    t_max: int
    n: int
    global_max_fitness: float
    t_star: np.ndarray  # int64; -1 where censored
    censor: np.ndarray  # uint8 codes: 0 ok, 1 t_max, 2 stuck
    moves: np.ndarray | None
    trace_runs: np.ndarray
    trace_times: np.ndarray
    trace_values: np.ndarray

    @property
    def runs(self) -> int:
        return self.t_star.shape[0]

    @property
    def success(self) -> np.ndarray:
        return self.censor == CENSOR_NONE

    def costs(self) -> np.ndarray:
        """Per-run cost; NaN where censored."""
        updates = self.t_star.astype(np.float64) * self.m
        if self.algorithm == "raw":
            updates = self.moves.astype(np.float64)
        return np.where(self.success, updates / 2.0**self.n, np.nan)

    def best_at(self, times: np.ndarray) -> np.ndarray:
        """(runs, len(times)) matrix of best-so-far fitness at each time."""
        out = np.full((self.runs, len(times)), -np.inf)
        slot = np.searchsorted(times, self.trace_times, side="left")
        keep = slot < len(times)
        np.maximum.at(out, (self.trace_runs[keep], slot[keep]), self.trace_values[keep])
        return np.maximum.accumulate(out, axis=1)

    def run_result(self, index: int) -> RunResult:
        sel = self.trace_runs == index
        trace = list(zip(self.trace_times[sel].tolist(), self.trace_values[sel].tolist()))
        code = int(self.censor[index])
        success = code == CENSOR_NONE
        t_star = int(self.t_star[index]) if success else None
        moves = int(self.moves[index]) if self.moves is not None else None
        cost = None
        if success:
            cost = (moves if self.algorithm == "raw" else self.m * t_star) / 2.0**self.n
        return RunResult(
            t_star=t_star,
            success=success,
            best_trace=trace,
            cost=cost,
            censored={CENSOR_NONE: None, CENSOR_T_MAX: "t_max", CENSOR_STUCK: "stuck"}[code],
            moves=moves,
        )


def _evaluator(landscape: Landscape):
    if isinstance(landscape, NkLandscape) and landscape.n <= FULL_TABLE_LIMIT:
        table = landscape.full_fitness_table()
        return lambda packed: table[packed]
    return landscape.fitness_packed


def _random_packed(rng: Generator, shape, n: int, dtype) -> np.ndarray:
    if n == 64:
        return rng.integers(0, 2**64 - 1, size=shape, dtype=np.uint64, endpoint=True)
    return rng.integers(0, 2**n, size=shape, dtype=np.uint64).astype(dtype)


# ---------------------------------------------------------------------------
# Public single-genotype operations (the contracts the engine vectorizes).


def init_population(m: int, n: int, rng: Generator) -> Population:
    """M genotypes with every bit independent uniform on {0, 1}."""
    if m < 1:
        raise ParameterError("population size m must be >= 1")
    return Population(members=rng.integers(0, 2, size=(m, n), dtype=np.uint8))


def mutate(genotype: np.ndarray, u: float, rng: Generator) -> np.ndarray:
    """Flip each bit independently with probability u."""
    if not 0.0 <= u <= 1.0:
        raise ParameterError("mutation probability u must lie in [0, 1]")
    bits = np.asarray(genotype, dtype=np.uint8)
    return bits ^ (rng.random(bits.shape) < u)


def roulette_select(population: Population, rng: Generator) -> int:
    """Index i chosen with probability fitness_i / sum(fitness)."""
    fit = population.fitnesses
    if fit is None:
        raise ParameterError("population has no fitness cache; evaluate it first")
    total = fit.sum()
    if not total > 0:
        raise InvariantError("roulette selection requires strictly positive total fitness")
    return int(np.searchsorted(np.cumsum(fit / total), rng.random(), side="left"))


def select_two_without_replacement(population: Population, rng: Generator) -> tuple[int, int]:
    """Two distinct parents, each drawn with probability proportional to fitness."""
    if population.m < 2:
        raise ParameterError("selecting two parents requires m >= 2")
    first = roulette_select(population, rng)
    weights = population.fitnesses.astype(np.float64).copy()
    weights[first] = 0.0
    cdf = np.cumsum(weights / weights.sum())
    second = int(np.searchsorted(cdf, rng.random(), side="left"))
    return first, second


def one_point_crossover(parent_a: np.ndarray, parent_b: np.ndarray, n_point: int) -> np.ndarray:
    """Offspring taking sites 1..n_point from parent_a and the rest from parent_b."""
    a = np.asarray(parent_a, dtype=np.uint8)
    b = np.asarray(parent_b, dtype=np.uint8)
    if a.shape != b.shape:
        raise ParameterError("parents must have equal length")
    if not 1 <= n_point <= a.shape[0] - 1:
        raise ParameterError(f"crossover point must lie in [1, {a.shape[0] - 1}], got {n_point}")
    return np.concatenate([a[:n_point], b[n_point:]])


def imitate(target: np.ndarray, model: np.ndarray, rng: Generator) -> np.ndarray:
    """Copy one uniformly chosen differing bit of `model` into `target`.

    Identical strings are returned unchanged (imitation does not occur);
    otherwise the Hamming distance to the model decreases by exactly 1.
    """
    t = np.asarray(target, dtype=np.uint8)
    m = np.asarray(model, dtype=np.uint8)
    if t.shape != m.shape:
        raise ParameterError("target and model must have equal length")
    differing = np.flatnonzero(t != m)
    if differing.size == 0:
        return t.copy()
    out = t.copy()
    pick = differing[rng.integers(0, differing.size)]
    out[pick] = m[pick]
    return out


# ---------------------------------------------------------------------------
# Vectorized synchronous generation kernel.


def _next_generation(packed, fit, config: SearchConfig, n: int, dtype, rng: Generator):
    """Offspring of each active run, reading only the current generation."""
    lanes, m = packed.shape
    one = dtype(1)
    algo = config.algorithm
    if algo == "bs":
        return _random_packed(rng, (lanes, m), n, dtype)
    rows = np.arange(lanes)[:, None]
    if algo == "il":
        model = packed[np.arange(lanes), fit.argmax(axis=1)]
        targets = rng.integers(0, m, size=(lanes, m))
        off = packed[rows, targets]
        diff = off ^ model[:, None]
        ham = popcount(diff).astype(np.int64)
        choice = rng.random((lanes, m), dtype=np.float32)
        pos = select_random_set_bit(diff, np.maximum(ham, 1), choice)
        off = off ^ np.where(ham > 0, one << pos.astype(dtype), dtype(0))
    elif algo == "aga":
        off = packed[rows, _roulette_rows(fit, rng.random((lanes, m)))]
    elif algo == "sga":
        first = _roulette_rows(fit, rng.random((lanes, m)))
        second = _roulette_rows(fit, rng.random((lanes, m)))
        for _ in range(100_000):
            clash = first == second
            if not clash.any():
                break
            redraw = rng.random(int(clash.sum()))
            second[clash] = _roulette_clash(fit, clash, redraw)
        else:  # pragma: no cover
            raise InvariantError("parent redraw did not terminate")
        point = rng.integers(1, n, size=(lanes, m)).astype(dtype)
        low = (one << point) - one
        off = (packed[rows, first] & low) | (packed[rows, second] & ~low)
    else:  # pragma: no cover
        raise ParameterError(f"unknown population algorithm {algo!r}")
    if config.u > 0.0:
        off = off ^ random_flip_masks(rng, off.size, n, config.u, dtype).reshape(off.shape)
    return off


def _roulette_rows(fit: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise fitness-proportional index for each uniform query in q."""
    lanes, m = fit.shape
    cdf = np.cumsum(fit, axis=1)
    cdf /= cdf[:, -1:]
    offset = np.arange(lanes, dtype=np.float64)[:, None]
    flat = np.searchsorted((cdf + offset).ravel(), (q + offset).ravel(), side="left")
    return (flat - np.arange(lanes).repeat(m) * m).reshape(lanes, m)


def _roulette_clash(fit: np.ndarray, clash: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Fresh roulette draws for the clashing (lane, slot) pairs only."""
    lane_idx = np.nonzero(clash)[0]
    cdf = np.cumsum(fit, axis=1)
    cdf /= cdf[:, -1:]
    m = fit.shape[1]
    flat = np.searchsorted((cdf + np.arange(fit.shape[0], dtype=np.float64)[:, None]).ravel(), q + lane_idx, side="left")
    return flat - lane_idx * m


def run_batch(
    landscape: Landscape,
    config: SearchConfig,
    runs: int,
    rng: Generator | None = None,
) -> BatchResult:
    """Execute `runs` independent searches in lockstep on one landscape."""
    if config.algorithm == "raw":
        return _run_raw_batch(landscape, config, runs, rng)
    n = landscape.n
    dtype = packed_dtype(n)
    if rng is None:
        rng = make_rng("search", config.algorithm, config.m, config.u, config.seed)
    evaluate = _evaluator(landscape)
    gmax = landscape.global_max_fitness
    m = config.m

    packed = _random_packed(rng, (runs, m), n, dtype)
    fit = evaluate(packed)
    best = fit.max(axis=1)

    t_star = np.full(runs, -1, dtype=np.int64)
    censor = np.full(runs, CENSOR_T_MAX, dtype=np.uint8)
    trace_runs = [np.arange(runs, dtype=np.int64)]
    trace_times = [np.zeros(runs, dtype=np.int64)]
    trace_values = [best.copy()]

    alive = np.arange(runs, dtype=np.int64)
    hit = best == gmax
    t_star[alive[hit]] = 1
    censor[alive[hit]] = CENSOR_NONE
    keep = ~hit
    alive, packed, fit, best = alive[keep], packed[keep], fit[keep], best[keep]

    for step_index in range(1, config.t_max):
        if alive.size == 0:
            break
        packed = _next_generation(packed, fit, config, n, dtype, rng)
        fit = evaluate(packed)
        gen_best = fit.max(axis=1)
        improved = gen_best > best
        if improved.any():
            trace_runs.append(alive[improved])
            trace_times.append(np.full(int(improved.sum()), step_index, dtype=np.int64))
            trace_values.append(gen_best[improved])
            best = np.where(improved, gen_best, best)
        hit = gen_best == gmax
        if hit.any():
            t_star[alive[hit]] = step_index + 1
            censor[alive[hit]] = CENSOR_NONE
            keep = ~hit
            alive, packed, fit, best = alive[keep], packed[keep], fit[keep], best[keep]

    return BatchResult(
        algorithm=config.algorithm,
        m=m,
        u=config.u,
        t_max=config.t_max,
        n=n,
        global_max_fitness=gmax,
        t_star=t_star,
        censor=censor,
        moves=None,
        trace_runs=np.concatenate(trace_runs),
        trace_times=np.concatenate(trace_times),
        trace_values=np.concatenate(trace_values),
    )


def _run_raw_batch(landscape: Landscape, config: SearchConfig, walks: int, rng: Generator | None) -> BatchResult:
    """Random adaptive walks advanced in lockstep.

    Each step enumerates the N single-flip neighbors, keeps those whose
    fitness change is >= 0, and applies one uniformly at random; a walker
    with no admissible flip is censored as stuck.
    """
    n = landscape.n
    dtype = packed_dtype(n)
    if rng is None:
        rng = make_rng("search", config.algorithm, config.m, config.u, config.seed)
    evaluate = _evaluator(landscape)
    gmax = landscape.global_max_fitness
    flips = (dtype(1) << np.arange(n, dtype=np.uint64).astype(dtype))[None, :]

    g = _random_packed(rng, walks, n, dtype)
    fit = evaluate(g)

    t_star = np.full(walks, -1, dtype=np.int64)
    censor = np.full(walks, CENSOR_T_MAX, dtype=np.uint8)
    moves = np.zeros(walks, dtype=np.int64)
    trace_runs = [np.arange(walks, dtype=np.int64)]
    trace_times = [np.zeros(walks, dtype=np.int64)]
    trace_values = [fit.copy()]

    alive = np.arange(walks, dtype=np.int64)
    hit = fit == gmax
    t_star[alive[hit]] = 1
    censor[alive[hit]] = CENSOR_NONE
    keep = ~hit
    alive, g, fit = alive[keep], g[keep], fit[keep]

    for step_index in range(1, config.t_max):
        if alive.size == 0:
            break
        neighbors = g[:, None] ^ flips
        nfit = evaluate(neighbors)
        admissible = nfit >= fit[:, None]
        count = admissible.sum(axis=1)
        stuck = count == 0
        if stuck.any():
            censor[alive[stuck]] = CENSOR_STUCK
            keep = ~stuck
            alive, g, fit, neighbors, nfit, admissible, count = (
                alive[keep], g[keep], fit[keep], neighbors[keep], nfit[keep], admissible[keep], count[keep],
            )
            if alive.size == 0:
                break
        rank = (rng.random(alive.size) * count).astype(np.int64)
        np.minimum(rank, count - 1, out=rank)
        chosen = (np.cumsum(admissible, axis=1) <= rank[:, None]).sum(axis=1)
        g = neighbors[np.arange(alive.size), chosen]
        new_fit = nfit[np.arange(alive.size), chosen]
        moves[alive] += 1
        improved = new_fit > fit
        if improved.any():
            trace_runs.append(alive[improved])
            trace_times.append(np.full(int(improved.sum()), step_index, dtype=np.int64))
            trace_values.append(new_fit[improved])
        fit = new_fit
        hit = fit == gmax
        if hit.any():
            t_star[alive[hit]] = step_index + 1
            censor[alive[hit]] = CENSOR_NONE
            keep = ~hit
            alive, g, fit = alive[keep], g[keep], fit[keep]

    return BatchResult(
        algorithm="raw",
        m=1,
        u=config.u,
        t_max=config.t_max,
        n=n,
        global_max_fitness=gmax,
        t_star=t_star,
        censor=censor,
        moves=moves,
        trace_runs=np.concatenate(trace_runs),
        trace_times=np.concatenate(trace_times),
        trace_values=np.concatenate(trace_values),
    )


def run_search(landscape: Landscape, config: SearchConfig) -> RunResult:
    """One search run; halts on exact equality with the cached global maximum."""
    batch = run_batch(landscape, config, runs=1)
    return batch.run_result(0)


def run_raw(landscape: Landscape, seed: int, t_max: int = 1_000_000) -> RunResult:
    """One random adaptive walk from a uniform random start."""
    config = SearchConfig(algorithm="raw", m=1, u=0.0, t_max=t_max, seed=seed)
    return run_search(landscape, config)


def step(population: Population, landscape: Landscape, config: SearchConfig, rng: Generator) -> Population:
    """One synchronous update of a population (single-run convenience path)."""
    if population.n != landscape.n:
        raise ParameterError("population genotype length does not match the landscape")
    dtype = packed_dtype(landscape.n)
    evaluate = _evaluator(landscape)
    packed = pack_bits(population.members).astype(dtype)[None, :]
    fit = population.fitnesses
    if fit is None:
        fit = evaluate(packed[0])
    new_packed = _next_generation(packed, np.asarray(fit)[None, :], config, landscape.n, dtype, rng)
    new_fit = evaluate(new_packed[0])
    return Population(
        members=unpack_bits(new_packed[0], landscape.n),
        fitnesses=new_fit,
        generation=population.generation + 1,
    )
