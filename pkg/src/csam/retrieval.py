"""Retrieval of messages from corrupt probes.

Five strategies share one return contract, :class:`RetrievalOutcome`:

* ``direct``: plain sum-of-sum with an iteration cap.
* ``direct-plus``: clusterwise scoring with winner-take-all, then clique search.
* ``construct``: grow an active set until a full clique appears in it.
* ``delegate``: one sum-of-sum pass decides which clusters to distrust, then
  the erasure machinery (joint + clique search) fills them in.
* ``cut-and-paste``: enumerate every clique inside the probe, rank them, and
  paste each back as a trusted partial message until one completes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cliques import enumerate_probe_cliques, find_clique, partition_state, rank_cliques
from .dynamics import (
    RetrievalParams,
    cluster_winners,
    clusterwise_scores,
    individual_scores,
    joint_sweeps,
    run_until_fixed,
)
from .memory import Clique, CliqueMemory, Message, try_decode

ALGORITHMS = ("direct", "direct-plus", "construct", "delegate", "cut-and-paste")


@dataclass
class RetrievalOutcome:
    result: Clique | None
    message: Message | None
    iterations: int
    elapsed: float
    algorithm: str
    converged: bool = True

    @property
    def found(self) -> bool:
        return self.message is not None


def _outcome(mem, clique, iterations, start, algorithm, converged=True) -> RetrievalOutcome:
    message = clique.to_message(mem.config) if clique is not None else None
    if message is None:
        clique = None
    return RetrievalOutcome(
        result=clique,
        message=message,
        iterations=iterations,
        elapsed=time.perf_counter() - start,
        algorithm=algorithm,
        converged=converged,
    )


def _state_clique(mem: CliqueMemory, state: np.ndarray) -> Clique | None:
    if try_decode(state, mem.config) is None:
        return None
    return Clique(tuple(np.flatnonzero(state).tolist()))


def retrieve_direct(
    mem: CliqueMemory, probe: np.ndarray, params: RetrievalParams = RetrievalParams()
) -> RetrievalOutcome:
    start = time.perf_counter()
    state, iterations, converged = run_until_fixed(mem, probe, params, "sum-of-sum")
    return _outcome(mem, _state_clique(mem, state), iterations, start, "direct", converged)


def retrieve_direct_plus(
    mem: CliqueMemory, probe: np.ndarray, max_iterations: int | None = None
) -> RetrievalOutcome:
    """Clusterwise scores with per-cluster winners until the state repeats,
    then a clique search over whatever the state settled on."""
    start = time.perf_counter()
    cap = mem.n if max_iterations is None else max_iterations
    v = np.asarray(probe, dtype=bool)
    converged = False
    iterations = 0
    for iterations in range(1, cap + 1):
        nxt = cluster_winners(clusterwise_scores(mem, v), mem.config)
        if np.array_equal(nxt, v):
            converged = True
            break
        v = nxt
    clique = find_clique(mem, partition_state(v, mem.config.neurons_per_cluster))
    return _outcome(mem, clique, iterations, start, "direct-plus", converged)


def retrieve_construct(
    mem: CliqueMemory,
    probe: np.ndarray,
    optimized: bool = True,
    multi_subjoin: bool = True,
) -> RetrievalOutcome:
    """Grow the active set until neurons with full clusterwise support hold a clique.

    ``optimized`` turns on the skip-saturated-scores and incremental
    effective-adjacency shortcuts; neither changes the answer.
    ``multi_subjoin`` adds every inactive neuron whose score is not below
    the running maximum of the scan (in global order) instead of a single
    argmax neuron per round.
    """
    start = time.perf_counter()
    C, L, n = mem.config.clusters, mem.config.neurons_per_cluster, mem.n
    W = mem.adjacency
    v = np.array(probe, dtype=bool)
    scores = np.zeros(n, dtype=np.int64)
    effective = np.zeros((n, n), dtype=bool)
    added = np.flatnonzero(v)
    rounds = 0
    while True:
        rounds += 1
        if optimized:
            # clusterwise scores only grow with the active set
            stale = np.flatnonzero(scores < C)
            scores[stale] = clusterwise_scores(mem, v, stale)
            effective[added] = W[added] & v
            effective[:, added] = W[:, added] & v[:, None]
        else:
            scores = clusterwise_scores(mem, v)
            effective = W & np.outer(v, v)

        full = scores == C
        clique = find_clique(mem, partition_state(full, L), adjacency=effective)
        if clique is not None:
            return _outcome(mem, clique, rounds, start, "construct")

        inactive = np.flatnonzero(~v)
        if inactive.size == 0:
            return _outcome(mem, None, rounds, start, "construct")
        s = scores[inactive]
        if multi_subjoin:
            added = inactive[s == np.maximum.accumulate(s)]
        else:
            added = inactive[[int(np.argmax(s))]]
        v[added] = True


def delegate_erasures(
    mem: CliqueMemory, probe: np.ndarray, clusterwise_first_pass: bool = False
) -> tuple[np.ndarray, list[int]]:
    """First pass of the delegate approach: zero every cluster whose winners
    differ from the probe and report those clusters as missing."""
    score = clusterwise_scores if clusterwise_first_pass else individual_scores
    v = np.array(probe, dtype=bool)
    winners = cluster_winners(score(mem, v), mem.config)
    missing = []
    for c in range(mem.config.clusters):
        sl = mem.config.cluster_slice(c)
        if not np.array_equal(winners[sl], v[sl]):
            v[sl] = False
            missing.append(c)
    return v, missing


def retrieve_delegate(
    mem: CliqueMemory, probe: np.ndarray, clusterwise_first_pass: bool = False
) -> RetrievalOutcome:
    start = time.perf_counter()
    L = mem.config.neurons_per_cluster
    v, P = delegate_erasures(mem, probe, clusterwise_first_pass)
    sweeps = 0
    if P:
        v, sweeps = joint_sweeps(mem, v, P)
        ambiguous = [c for c in P if v[mem.config.cluster_slice(c)].sum() >= 2]
        if ambiguous:
            picked = find_clique(mem, partition_state(v, L, ambiguous))
            if picked is None:
                return _outcome(mem, None, 1 + sweeps, start, "delegate")
            for c in ambiguous:
                v[mem.config.cluster_slice(c)] = False
            v[list(picked.members)] = True
    # known clusters are trusted as-is, so the result need not be a stored clique
    return _outcome(mem, _state_clique(mem, v), 1 + sweeps, start, "delegate")


def paste(
    mem: CliqueMemory, candidate: Clique, clusterwise_first_pass: bool = False
) -> np.ndarray:
    """State with ``candidate`` active and, in every uncovered cluster, the
    neurons connected to all of the candidate's members."""
    C, L = mem.config.clusters, mem.config.neurons_per_cluster
    v = np.zeros(mem.n, dtype=bool)
    v[list(candidate.members)] = True
    P = sorted(set(range(C)) - set(candidate.clusters(L)))
    score = clusterwise_scores if clusterwise_first_pass else individual_scores
    s = score(mem, v)
    for p in P:
        sl = mem.config.cluster_slice(p)
        v[sl] = s[sl] == C - len(P)
    return v


def retrieve_cut_and_paste(
    mem: CliqueMemory, probe: np.ndarray, clusterwise_first_pass: bool = False
) -> RetrievalOutcome:
    start = time.perf_counter()
    L = mem.config.neurons_per_cluster
    candidates = rank_cliques(enumerate_probe_cliques(mem, probe), mem.frequency)
    for tried, candidate in enumerate(candidates, 1):
        v = paste(mem, candidate, clusterwise_first_pass)
        clique = find_clique(mem, partition_state(v, L))
        if clique is not None:
            return _outcome(mem, clique, tried, start, "cut-and-paste")
    return _outcome(mem, None, len(candidates), start, "cut-and-paste")


RETRIEVERS: dict[str, Callable[[CliqueMemory, np.ndarray], RetrievalOutcome]] = {
    "direct": retrieve_direct,
    "direct-plus": retrieve_direct_plus,
    "construct": retrieve_construct,
    "delegate": retrieve_delegate,
    "cut-and-paste": retrieve_cut_and_paste,
}


def retrieve(mem: CliqueMemory, probe: np.ndarray, algorithm: str) -> RetrievalOutcome:
    try:
        fn = RETRIEVERS[algorithm]
    except KeyError:
        raise ValueError(
            f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}"
        ) from None
    return fn(mem, probe)
