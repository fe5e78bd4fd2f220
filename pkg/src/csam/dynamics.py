"""Iterative network dynamics: sum-of-sum, sum-of-max and the joint scheme."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .memory import CliqueMemory, NetworkConfig, encode

Dynamics = Literal["sum-of-sum", "sum-of-max"]


@dataclass(frozen=True)
class RetrievalParams:
    max_iterations: int = 10
    gamma: int = 1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gamma != 1:
            raise ValueError("only gamma = 1 is supported")


def individual_scores(mem: CliqueMemory, state: np.ndarray) -> np.ndarray:
    """Number of active neurons connected to each neuron, self included."""
    idx = np.flatnonzero(state)
    if idx.size == 0:
        return np.zeros(mem.n, dtype=np.int64)
    return mem.adjacency[idx].sum(axis=0, dtype=np.int64)


def clusterwise_scores(
    mem: CliqueMemory, state: np.ndarray, targets: np.ndarray | None = None
) -> np.ndarray:
    """Number of clusters holding at least one active neuron connected to
    each target (all neurons when ``targets`` is None)."""
    idx = np.flatnonzero(state)
    width = mem.n if targets is None else len(targets)
    if idx.size == 0:
        return np.zeros(width, dtype=np.int64)
    if targets is None:
        block = mem.adjacency[idx]
    elif 4 * len(targets) < mem.n:
        block = mem.adjacency[np.ix_(idx, targets)]
    else:
        block = mem.adjacency[idx][:, targets]
    clusters = idx // mem.config.neurons_per_cluster
    starts = np.flatnonzero(np.r_[True, clusters[1:] != clusters[:-1]])
    return np.logical_or.reduceat(block, starts, axis=0).sum(axis=0, dtype=np.int64)


def cluster_winners(scores: np.ndarray, config: NetworkConfig) -> np.ndarray:
    """Keep every neuron tying for its cluster's maximum score."""
    grid = scores.reshape(config.clusters, config.neurons_per_cluster)
    return (grid == grid.max(axis=1, keepdims=True)).ravel()


def sum_of_sum_step(mem: CliqueMemory, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = individual_scores(mem, state)
    return scores, cluster_winners(scores, mem.config)


def sum_of_max_step(mem: CliqueMemory, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # an active neuron survives only with support from every cluster; its own
    # cluster counts through the diagonal
    scores = clusterwise_scores(mem, state)
    return scores, np.asarray(state, dtype=bool) & (scores == mem.config.clusters)


def init_erasure(
    msg: Sequence[int | None],
    pattern: Iterable[int],
    config: NetworkConfig,
    scheme: Dynamics = "sum-of-max",
) -> np.ndarray:
    """Initial state for a partial probe whose missing cluster positions are known.

    Missing clusters start all-inactive for sum-of-sum and all-active for
    sum-of-max. Symbols at missing positions are ignored (may be None).
    """
    missing = set(pattern)
    if not missing <= set(range(config.clusters)):
        raise ValueError(f"erasure pattern {sorted(missing)} outside [0, {config.clusters})")
    filled = [0 if (c in missing or x is None) else x for c, x in enumerate(msg)]
    state = encode(filled, config)
    for c in missing:
        state[config.cluster_slice(c)] = scheme == "sum-of-max"
    return state


def run_until_fixed(
    mem: CliqueMemory,
    state: np.ndarray,
    params: RetrievalParams = RetrievalParams(),
    dynamics: Dynamics = "sum-of-sum",
) -> tuple[np.ndarray, int, bool]:
    """Iterate a step function until two consecutive states agree.

    Returns (final state, steps taken, converged). Sum-of-max shrinks the
    active set strictly until it stops, so it is run without the cap.
    """
    if dynamics == "sum-of-sum":
        step, cap = sum_of_sum_step, params.max_iterations
    elif dynamics == "sum-of-max":
        step, cap = sum_of_max_step, mem.n + 1
    else:
        raise ValueError(f"unknown dynamics {dynamics!r}")
    v = np.asarray(state, dtype=bool)
    for it in range(1, cap + 1):
        _, nxt = step(mem, v)
        if np.array_equal(nxt, v):
            return nxt, it, True
        v = nxt
    return v, cap, False


def missing_mask(pattern: Iterable[int], config: NetworkConfig) -> np.ndarray:
    mask = np.zeros(config.total_neurons, dtype=bool)
    for c in pattern:
        mask[config.cluster_slice(c)] = True
    return mask


def joint(
    mem: CliqueMemory,
    probe: np.ndarray,
    pattern: Iterable[int],
    clusterwise_first_pass: bool = False,
) -> np.ndarray:
    """One sum-of-sum pass to seed the missing clusters, then sum-of-max
    restricted to those clusters until nothing changes.

    Known clusters are never modified.
    """
    return joint_sweeps(mem, probe, pattern, clusterwise_first_pass)[0]


def joint_sweeps(
    mem: CliqueMemory,
    probe: np.ndarray,
    pattern: Iterable[int],
    clusterwise_first_pass: bool = False,
) -> tuple[np.ndarray, int]:
    """:func:`joint` that also reports how many sum-of-max sweeps ran."""
    P = sorted(set(pattern))
    v = np.array(probe, dtype=bool)
    if not P:
        return v, 0
    C = mem.config.clusters
    score = clusterwise_scores if clusterwise_first_pass else individual_scores
    s = score(mem, v)
    threshold = C - len(P)
    for p in P:
        sl = mem.config.cluster_slice(p)
        v[sl] = s[sl] == threshold

    mask = missing_mask(P, mem.config)
    sweeps = 0
    while True:
        sweeps += 1
        cand = np.flatnonzero(v & mask)
        if cand.size == 0:
            return v, sweeps
        dead = clusterwise_scores(mem, v, cand) < C
        if not dead.any():
            return v, sweeps
        v[cand[dead]] = False
