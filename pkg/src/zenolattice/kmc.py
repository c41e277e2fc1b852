"""Stochastic simulation of the pure-loss stage as a classical jump process.

With hopping switched off, Fock-diagonal states stay diagonal and the master
equation reduces to a classical Markov process: every doubly occupied
critical pair carries an independent exponential clock of rate gamma, and a
firing clock removes both bosons.  Trajectories are sampled exactly with the
Gillespie direct method; the active-pair set is updated incrementally so one
jump costs O(1).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import (
    ComplexKind,
    FockConfiguration,
    LatticeSpec,
    classify_complexes,
)

WORKERS_ENV = "ZENOLATTICE_WORKERS"
_CHUNK = 256  # fixed ensemble chunking keeps reductions deterministic


@dataclass(frozen=True)
class KmcRun:
    """One reproducible trajectory: the seed fully determines the jump record."""

    spec: LatticeSpec
    gamma: float
    initial: FockConfiguration
    seed: int
    t_max: float = math.inf


@dataclass(frozen=True)
class JumpRecord:
    time: float
    pair: tuple[int, int]


@dataclass(frozen=True)
class DensitySeries:
    times: np.ndarray
    p_mean: np.ndarray
    p_stderr: np.ndarray
    n_trajectories: int


@dataclass(frozen=True)
class StationaryStatistics:
    """Final-state census over an ensemble run to pair exhaustion."""

    species_fractions: dict
    size_distribution: dict
    species_counts: dict
    mean_density: float
    density_stderr: float
    n_trajectories: int


def _simulate(spec: LatticeSpec, gamma: float, bits: list, rng, t_max: float):
    """Gillespie direct method; returns (jump times, jump pairs, final bits)."""
    pairs = spec.pair_sites()
    occupied = list(bits)
    # pairs touching a given site, by operator index
    touching = [[] for _ in range(spec.n_sites)]
    for idx, (a, b) in enumerate(pairs):
        touching[a].append(idx)
        touching[b].append(idx)

    active = [i for i, (a, b) in enumerate(pairs) if occupied[a] and occupied[b]]
    slot = [-1] * len(pairs)
    for s, i in enumerate(active):
        slot[i] = s

    def deactivate(idx):
        s = slot[idx]
        if s < 0:
            return
        last = active[-1]
        active[s] = last
        slot[last] = s
        active.pop()
        slot[idx] = -1

    t = 0.0
    times, fired = [], []
    while active:
        rate = gamma * len(active)
        t += rng.exponential(1.0 / rate)
        if t > t_max:
            break
        idx = active[int(rng.integers(len(active)))]
        a, b = pairs[idx]
        times.append(t)
        fired.append((a, b))
        for site in (a, b):
            occupied[site] = 0
            for j in touching[site]:
                deactivate(j)
    return times, fired, occupied


def run_trajectory(run: KmcRun):
    """Simulate one trajectory; returns (list of JumpRecord, final configuration)."""
    if run.gamma <= 0:
        raise ValueError("gamma must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(run.seed))
    times, fired, bits = _simulate(
        run.spec, run.gamma, list(run.initial.bits), rng, run.t_max
    )
    jumps = [JumpRecord(t, p) for t, p in zip(times, fired)]
    return jumps, FockConfiguration(tuple(bits))


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _density_chunk(args):
    spec, gamma, bits, t_grid, seeds, t_max = args
    n0 = sum(bits)
    acc = np.zeros(len(t_grid))
    acc2 = np.zeros(len(t_grid))
    for ss in seeds:
        rng = np.random.default_rng(ss)
        times, _fired, _bits = _simulate(spec, gamma, list(bits), rng, t_max)
        lost = 2 * np.searchsorted(np.asarray(times), t_grid, side="right")
        p = (n0 - lost) / spec.n_sites
        acc += p
        acc2 += p * p
    return acc, acc2


def ensemble_density(
    spec: LatticeSpec,
    gamma: float,
    n_trajectories: int,
    t_grid,
    seed: int,
    initial: FockConfiguration | None = None,
    t_max: float = math.inf,
) -> DensitySeries:
    """Mean site-averaged density over an ensemble, with standard errors.

    Trajectory k gets an independent stream spawned from the master seed, so
    results are reproducible and independent of how work is chunked.
    """
    if n_trajectories < 1:
        raise ValueError("need at least one trajectory")
    if initial is None:
        initial = FockConfiguration.mott(spec.n_sites)
    t_grid = np.asarray(t_grid, dtype=float)
    seeds = np.random.SeedSequence(seed).spawn(n_trajectories)
    chunks = [
        (spec, gamma, initial.bits, t_grid, seeds[i : i + _CHUNK], t_max)
        for i in range(0, n_trajectories, _CHUNK)
    ]
    workers = _worker_count()
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_density_chunk, chunks))
    else:
        parts = [_density_chunk(c) for c in chunks]
    acc = sum(p[0] for p in parts)
    acc2 = sum(p[1] for p in parts)
    mean = acc / n_trajectories
    if n_trajectories > 1:
        var = (acc2 - n_trajectories * mean**2) / (n_trajectories - 1)
        stderr = np.sqrt(np.maximum(var, 0.0) / n_trajectories)
    else:
        stderr = np.zeros_like(mean)
    return DensitySeries(t_grid, mean, stderr, n_trajectories)


def _stats_chunk(args):
    spec, gamma, bits, seeds = args
    kind_counts = {k: 0 for k in ComplexKind}
    size_counts: dict = {}
    dens = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        _times, _fired, final = _simulate(spec, gamma, list(bits), rng, math.inf)
        cfg = FockConfiguration(tuple(final))
        dens.append(cfg.boson_count / spec.n_sites)
        for c in classify_complexes(cfg, spec):
            kind_counts[c.kind] += 1
            size_counts[c.boson_count] = size_counts.get(c.boson_count, 0) + 1
    return kind_counts, size_counts, dens


def stationary_statistics(
    spec: LatticeSpec,
    gamma: float,
    n_trajectories: int,
    seed: int,
    initial: FockConfiguration | None = None,
) -> StationaryStatistics:
    """Run every trajectory to pair exhaustion and classify the survivors."""
    if n_trajectories < 1:
        raise ValueError("need at least one trajectory")
    if initial is None:
        initial = FockConfiguration.mott(spec.n_sites)
    seeds = np.random.SeedSequence(seed).spawn(n_trajectories)
    chunks = [
        (spec, gamma, initial.bits, seeds[i : i + _CHUNK])
        for i in range(0, n_trajectories, _CHUNK)
    ]
    workers = _worker_count()
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_stats_chunk, chunks))
    else:
        parts = [_stats_chunk(c) for c in chunks]

    kind_counts = {k: 0 for k in ComplexKind}
    size_counts: dict = {}
    dens: list = []
    for kc, sc, d in parts:
        for k, v in kc.items():
            kind_counts[k] += v
        for s, v in sc.items():
            size_counts[s] = size_counts.get(s, 0) + v
        dens.extend(d)
    total = sum(kind_counts.values())
    fractions = {
        k.value: (kind_counts[k] / total if total else 0.0) for k in ComplexKind
    }
    sizes = {
        s: size_counts[s] / total for s in sorted(size_counts)
    } if total else {}
    dens_arr = np.asarray(dens)
    stderr = (
        float(dens_arr.std(ddof=1) / math.sqrt(n_trajectories))
        if n_trajectories > 1
        else 0.0
    )
    return StationaryStatistics(
        species_fractions=fractions,
        size_distribution=sizes,
        species_counts={k.value: kind_counts[k] for k in ComplexKind},
        mean_density=float(dens_arr.mean()),
        density_stderr=stderr,
        n_trajectories=n_trajectories,
    )
