"""Simulation of the dice process for empirical checks of the kernel and its stationary law.

Random numbers come from numpy's counter-based Philox generator. Each
independent piece of work (one source state, one replica) gets its own
stream keyed by ``SeedSequence(seed, spawn_key=(purpose, index...))``, so
results do not depend on how work is split between processes. Binomial
variates are drawn by inverse CDF from float64 tables; the rethrow of the
free dice is sampled by conditioning, first the count on face one with
probability beta1, then face two among the rest with beta2 / (1 - beta1).
"""

from __future__ import annotations

import bisect
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chain import ChainParams, binomial_pmf, build_state_space

GENERATOR = "numpy.random.Philox keyed by SeedSequence(seed, spawn_key=(purpose, index...))"
BURN_IN_FRACTION = Fraction(1, 10)
KERNEL_PURPOSE = 0
CHAIN_PURPOSE = 1


@dataclass(frozen=True)
class SimConfig:
    seed: int
    replicas: int
    steps_per_replica: int
    params: ChainParams
    start: tuple = (0, 0)
    workers: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.replicas < 1 or self.steps_per_replica < 1:
            raise ValueError("replicas and steps_per_replica must be positive")
        i1, i2 = self.start
        if min(i1, i2) < 0 or i1 + i2 > self.params.N:
            raise ValueError(f"start state {self.start} is not in the state space")


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


class _Tables:
    """Cumulative binomial tables for every trial count 0..N."""

    def __init__(self, params: ChainParams):
        N = params.N
        b1 = params.beta1
        cond = params.beta2 / (1 - b1)
        self.N = N
        self.keep1 = self._cdfs(N, params.alpha1)
        self.keep2 = self._cdfs(N, params.alpha2)
        self.face1 = self._cdfs(N, b1)
        self.face2 = self._cdfs(N, cond)

    @staticmethod
    def _cdfs(N, p):
        out = []
        for M in range(N + 1):
            c = np.cumsum([float(binomial_pmf(k, M, p)) for k in range(M + 1)])
            c[-1] = np.inf  # guard against round-off below 1
            out.append(c)
        return out

    @staticmethod
    def draw(cdfs, M, u):
        return np.searchsorted(cdfs[M], u, side="right")


def _step_vector(tables: _Tables, i1: int, i2: int, U: np.ndarray):
    """Vectorized single steps from (i1, i2); U has shape (4, n)."""
    N = tables.N
    k1 = tables.draw(tables.keep1, i1, U[0])
    k2 = tables.draw(tables.keep2, i2, U[1])
    free = N - k1 - k2
    p1 = np.empty_like(free)
    for M in np.unique(free):
        sel = free == M
        p1[sel] = tables.draw(tables.face1, int(M), U[2][sel])
    rest = free - p1
    p2 = np.empty_like(rest)
    for M in np.unique(rest):
        sel = rest == M
        p2[sel] = tables.draw(tables.face2, int(M), U[3][sel])
    return k1 + p1, k2 + p2


def step_once(state, params: ChainParams, rng: np.random.Generator, tables: _Tables | None = None):
    """One round: keep binomially, then rethrow the free dice by conditioning."""
    tables = tables or _Tables(params)
    j1, j2 = _step_vector(tables, state[0], state[1], rng.random((4, 1)))
    return int(j1[0]), int(j2[0])


@dataclass
class EmpiricalKernel:
    states: tuple
    counts: np.ndarray  # [destination, source]
    totals: np.ndarray

    def estimates(self) -> np.ndarray:
        return self.counts / self.totals[None, :]


def _kernel_column(args):
    seed, params, c, replicas, steps = args
    space = build_state_space(params.N)
    tables = _Tables(params)
    i1, i2 = space.states[c]
    col = np.zeros(len(space), dtype=np.int64)
    for r in range(replicas):
        U = stream(seed, KERNEL_PURPOSE, c, r).random((4, steps))
        j1, j2 = _step_vector(tables, i1, i2, U)
        col += np.bincount(_index_vector(params.N, j1, j2), minlength=len(space))
    return col


def _index_vector(N, j1, j2):
    # lexicographic position of (j1, j2): rows before j1 hold sum_{i<j1} (N+1-i) states
    return j1 * (N + 1) - j1 * (j1 - 1) // 2 + j2


def _map(fn, jobs, workers):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def estimate_kernel(config: SimConfig) -> EmpiricalKernel:
    """Single-step counts from every source; replicas * steps_per_replica draws per source."""
    params = config.params
    space = build_state_space(params.N)
    jobs = [(config.seed, params, c, config.replicas, config.steps_per_replica) for c in range(len(space))]
    cols = _map(_kernel_column, jobs, config.workers)
    counts = np.stack(cols, axis=1)
    return EmpiricalKernel(space.states, counts, counts.sum(axis=0))


@dataclass
class ChainRun:
    states: tuple
    occupancy: np.ndarray  # visit counts after burn-in, summed over replicas
    burn_in: int  # steps discarded per replica
    checkpoints: list = field(default_factory=list)  # (steps kept so far, TV to reference)
    lag1_autocorrelation: float = float("nan")  # of i1 + i2 along the kept trajectory

    def frequencies(self) -> np.ndarray:
        return self.occupancy / self.occupancy.sum()


def _run_replica(args):
    seed, params, r, steps, start, n_checkpoints = args
    space = build_state_space(params.N)
    N = params.N
    tables = _Tables(params)
    keep1 = [c.tolist() for c in tables.keep1]
    keep2 = [c.tolist() for c in tables.keep2]
    face1 = [c.tolist() for c in tables.face1]
    face2 = [c.tolist() for c in tables.face2]
    rng = stream(seed, CHAIN_PURPOSE, r)
    burn = int(steps * BURN_IN_FRACTION)
    kept = steps - burn
    every = max(1, kept // n_checkpoints)
    counts = [0] * len(space)
    snapshots = []
    totals = np.empty(kept, dtype=np.int64)
    i1, i2 = start
    br = bisect.bisect_right
    block = 1 << 16
    done = 0
    while done < steps:
        n = min(block, steps - done)
        U = rng.random((n, 4)).tolist()
        for u1, u2, u3, u4 in U:
            k1 = br(keep1[i1], u1)
            k2 = br(keep2[i2], u2)
            M = N - k1 - k2
            p1 = br(face1[M], u3)
            p2 = br(face2[M - p1], u4)
            i1, i2 = k1 + p1, k2 + p2
            if done >= burn:
                pos = done - burn
                counts[i1 * (N + 1) - i1 * (i1 - 1) // 2 + i2] += 1
                totals[pos] = i1 + i2
                if (pos + 1) % every == 0:
                    snapshots.append((pos + 1, list(counts)))
            done += 1
    return counts, snapshots, totals, burn


def tv_distance(p, q) -> float:
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def _lag1(x: np.ndarray) -> float:
    x = x.astype(float)
    x = x - x.mean()
    den = float(x @ x)
    return float(x[:-1] @ x[1:]) / den if den else float("nan")


def run_chain(config: SimConfig, reference=None, n_checkpoints: int = 10) -> ChainRun:
    """Long-run occupancy of ``replicas`` independent chains from ``config.start``.

    The first 10% of each replica is discarded. If ``reference`` (a
    distribution over the states) is given, TV distances of the pooled
    occupancy to it are recorded at ``n_checkpoints`` points.
    """
    params = config.params
    space = build_state_space(params.N)
    jobs = [(config.seed, params, r, config.steps_per_replica, tuple(config.start), n_checkpoints)
            for r in range(config.replicas)]
    results = _map(_run_replica, jobs, config.workers)
    occupancy = np.sum([np.array(c, dtype=np.int64) for c, _, _, _ in results], axis=0)
    checkpoints = []
    if reference is not None:
        n_snap = min(len(s) for _, s, _, _ in results)
        for k in range(n_snap):
            pooled = np.sum([np.array(s[k][1], dtype=np.int64) for _, s, _, _ in results], axis=0)
            steps = sum(s[k][0] for _, s, _, _ in results)
            checkpoints.append((steps, tv_distance(pooled / pooled.sum(), reference)))
    lag = float(np.mean([_lag1(t) for _, _, t, _ in results]))
    return ChainRun(space.states, occupancy, results[0][3], checkpoints, lag)
