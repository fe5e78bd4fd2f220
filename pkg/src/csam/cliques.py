"""Clique search on the C-partite graph.

``find_clique`` is a depth-first branch-and-bound that picks one neuron per
cluster, exploring low-frequency neurons first. ``enumerate_probe_cliques``
lists every clique (any size) among the active neurons of a probe.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .memory import Clique, CliqueMemory

Partition = Mapping[int, Sequence[int]] | Sequence[Sequence[int]]


def partition_state(state: np.ndarray, L: int, clusters: Iterable[int] | None = None) -> dict[int, np.ndarray]:
    """Split the active neurons of ``state`` by cluster."""
    state = np.asarray(state, dtype=bool)
    C = state.size // L
    grid = state.reshape(C, L)
    keep = range(C) if clusters is None else clusters
    return {c: np.flatnonzero(grid[c]) + c * L for c in keep}


def find_clique(
    mem: CliqueMemory,
    partition: Partition,
    adjacency: np.ndarray | None = None,
) -> Clique | None:
    """First clique taking one candidate from every cluster of ``partition``.

    Clusters are expanded in the given order; within a cluster, candidates go
    in ascending frequency (ties by index). After a pick, deeper candidate
    sets shrink to the pick's neighbours and are re-sorted by size (ties by
    cluster index). Returns None when no such clique exists.
    """
    W = mem.adjacency if adjacency is None else adjacency
    freq = mem.frequency
    items = sorted(partition.items()) if isinstance(partition, Mapping) else list(enumerate(partition))
    if not items:
        return None
    levels = [(int(c), np.asarray(cands, dtype=np.int64)) for c, cands in items]
    chosen: list[int] = []

    def search(U: list[tuple[int, np.ndarray]]) -> bool:
        if not U:
            return True
        _, here = U[0]
        deeper = U[1:]
        if any(s.size == 0 for _, s in deeper):
            return False
        order = here[np.lexsort((here, freq[here]))]
        for v in order:
            chosen.append(int(v))
            row = W[v]
            sub = [(c, s[row[s]]) for c, s in deeper]
            sub.sort(key=lambda t: (t[1].size, t[0]))
            if search(sub):
                return True
            chosen.pop()
        return False

    if levels[0][1].size == 0:
        return None
    if search(levels):
        return Clique(tuple(chosen))
    return None


def enumerate_probe_cliques(mem: CliqueMemory, state: np.ndarray) -> list[Clique]:
    """Every clique of size >= 1 whose members are all active in ``state``.

    Each clique is produced once by only extending with active neurons of a
    higher index than the current largest member.
    """
    active = np.flatnonzero(state)
    a = active.size
    if a == 0:
        return []
    sub = mem.adjacency[np.ix_(active, active)]
    higher = []
    for i in range(a):
        bits = 0
        for j in np.flatnonzero(sub[i, i + 1:]).tolist():
            bits |= 1 << (i + 1 + j)
        higher.append(bits)

    glob = active.tolist()
    found: list[tuple[int, ...]] = []

    def grow(members: tuple[int, ...], cand: int) -> None:
        found.append(members)
        while cand:
            low = cand & -cand
            j = low.bit_length() - 1
            cand ^= low
            grow(members + (glob[j],), cand & higher[j])

    for i in range(a):
        grow((glob[i],), higher[i])

    found.sort(key=lambda m: (len(m), m))
    return [Clique.from_sorted(m) for m in found]


def rank_cliques(cliques: Iterable[Clique], frequency: np.ndarray) -> list[Clique]:
    """Larger cliques first, then higher total frequency, then lexicographic members."""

    cliques = list(cliques)
    involved = sorted({k for q in cliques for k in q.members})
    f = dict(zip(involved, np.asarray(frequency)[involved].tolist()))

    def key(q: Clique):
        return (-len(q.members), -sum(f[k] for k in q.members), q.members)

    return sorted(cliques, key=key)
