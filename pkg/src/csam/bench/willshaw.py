"""Willshaw network baseline over the same one-neuron-per-cluster encoding."""

from __future__ import annotations

import numpy as np

from ..memory import NetworkConfig


class WillshawMemory:
    """Clipped Hebbian matrix; retrieval ignores the cluster structure apart
    from the final per-cluster read-out."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        n = config.total_neurons
        self.adjacency = np.zeros((n, n), dtype=bool)

    def store(self, state: np.ndarray) -> None:
        idx = np.flatnonzero(state)
        self.adjacency[np.ix_(idx, idx)] = True

    def store_many(self, states) -> None:
        for s in states:
            self.store(s)

    def retrieve(self, probe: np.ndarray, relax: int = 0) -> np.ndarray:
        """One-shot threshold at (number of active probe bits - ``relax``)."""
        idx = np.flatnonzero(probe)
        if idx.size == 0:
            return np.zeros(self.config.total_neurons, dtype=bool)
        dendrite = self.adjacency[idx].sum(axis=0)
        return dendrite >= idx.size - relax

    def read_out(self, state: np.ndarray) -> list[int | None]:
        """Per-cluster symbol when exactly one unit survives, else None."""
        grid = np.asarray(state, dtype=bool).reshape(
            self.config.clusters, self.config.neurons_per_cluster
        )
        counts = grid.sum(axis=1)
        winners = grid.argmax(axis=1)
        return [int(w) if k == 1 else None for w, k in zip(winners, counts)]
