"""Network topology, message encoding and clique storage.

Neurons are addressed globally as ``k = cluster * L + local`` (0-based).
The adjacency matrix keeps both triangles and an all-ones diagonal so that
row scans see self-excitation without special casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

Message = tuple[int, ...]

SNAPSHOT_MAGIC = "CSAM v1"


class InvalidMessageError(ValueError):
    """A message does not fit the network configuration."""


class NotAMessageError(ValueError):
    """An activation state does not hold exactly one neuron per cluster."""


class SnapshotError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkConfig:
    clusters: int
    neurons_per_cluster: int

    def __post_init__(self):
        if self.clusters < 2 or self.neurons_per_cluster < 2:
            raise ValueError(
                f"need at least 2 clusters of 2 neurons, got C={self.clusters}, "
                f"L={self.neurons_per_cluster}"
            )

    @property
    def total_neurons(self) -> int:
        return self.clusters * self.neurons_per_cluster

    def validate(self, msg: Sequence[int]) -> Message:
        msg = tuple(int(x) for x in msg)
        if len(msg) != self.clusters:
            raise InvalidMessageError(
                f"message has {len(msg)} symbols, expected {self.clusters}"
            )
        for c, x in enumerate(msg):
            if not 0 <= x < self.neurons_per_cluster:
                raise InvalidMessageError(
                    f"symbol {x} in cluster {c} outside [0, {self.neurons_per_cluster})"
                )
        return msg

    def global_index(self, cluster: int, local: int) -> int:
        return cluster * self.neurons_per_cluster + local

    def cluster_of(self, k: int) -> int:
        return k // self.neurons_per_cluster

    def cluster_slice(self, c: int) -> slice:
        L = self.neurons_per_cluster
        return slice(c * L, (c + 1) * L)

    def message_indices(self, msg: Sequence[int]) -> np.ndarray:
        msg = self.validate(msg)
        return np.arange(self.clusters) * self.neurons_per_cluster + np.asarray(msg)


class NeuronRef(NamedTuple):
    cluster: int
    local: int

    def index(self, L: int) -> int:
        return self.cluster * L + self.local

    @classmethod
    def from_index(cls, k: int, L: int) -> "NeuronRef":
        return cls(k // L, k % L)


@dataclass(frozen=True)
class Clique:
    """A set of neurons (global indices), at most one per cluster."""

    members: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(int(k) for k in self.members)))

    @classmethod
    def from_sorted(cls, members: tuple[int, ...]) -> "Clique":
        """Skip normalisation for members already sorted ascending."""
        q = object.__new__(cls)
        object.__setattr__(q, "members", members)
        return q

    @property
    def size(self) -> int:
        return len(self.members)

    def clusters(self, L: int) -> list[int]:
        return [k // L for k in self.members]

    def refs(self, L: int) -> list[NeuronRef]:
        return [NeuronRef.from_index(k, L) for k in self.members]

    def to_message(self, config: NetworkConfig) -> Message | None:
        """Symbols of a full clique, or None when some cluster is uncovered."""
        L = config.neurons_per_cluster
        if self.size != config.clusters or len(set(self.clusters(L))) != config.clusters:
            return None
        return tuple(k % L for k in self.members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def encode(msg: Sequence[int], config: NetworkConfig) -> np.ndarray:
    state = np.zeros(config.total_neurons, dtype=bool)
    state[config.message_indices(msg)] = True
    return state


def decode(state: np.ndarray, config: NetworkConfig) -> Message:
    """Inverse of :func:`encode`; raises NotAMessageError on empty or ambiguous clusters."""
    state = np.asarray(state, dtype=bool)
    if state.shape != (config.total_neurons,):
        raise NotAMessageError(f"state has shape {state.shape}")
    grid = state.reshape(config.clusters, config.neurons_per_cluster)
    counts = grid.sum(axis=1)
    bad = np.flatnonzero(counts != 1)
    if bad.size:
        c = int(bad[0])
        raise NotAMessageError(f"cluster {c} has {int(counts[c])} active neurons")
    return tuple(int(x) for x in grid.argmax(axis=1))


def try_decode(state: np.ndarray, config: NetworkConfig) -> Message | None:
    try:
        return decode(state, config)
    except NotAMessageError:
        return None


class CliqueMemory:
    """Binary C-partite graph storing messages as cliques, plus a per-neuron
    frequency counter of how many stored messages used each neuron."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        n = config.total_neurons
        self.adjacency = np.eye(n, dtype=bool)
        self.frequency = np.zeros(n, dtype=np.int64)
        self.stored_count = 0
        self._frozen = False

    @property
    def n(self) -> int:
        return self.config.total_neurons

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "CliqueMemory":
        """Mark the memory read-only; further stores raise."""
        self.adjacency.flags.writeable = False
        self.frequency.flags.writeable = False
        self._frozen = True
        return self

    def store(self, msg: Sequence[int]) -> "CliqueMemory":
        if self._frozen:
            raise RuntimeError("memory is frozen")
        idx = self.config.message_indices(msg)
        self.adjacency[np.ix_(idx, idx)] = True
        self.frequency[idx] += 1
        self.stored_count += 1
        return self

    def store_many(self, messages: Iterable[Sequence[int]]) -> "CliqueMemory":
        """Bulk store; same result as calling :meth:`store` in a loop."""
        if self._frozen:
            raise RuntimeError("memory is frozen")
        msgs = [self.config.validate(m) for m in messages]
        if not msgs:
            return self
        C, L = self.config.clusters, self.config.neurons_per_cluster
        idx = np.asarray(msgs, dtype=np.int64) + np.arange(C) * L
        for a in range(C):
            for b in range(a + 1, C):
                self.adjacency[idx[:, a], idx[:, b]] = True
                self.adjacency[idx[:, b], idx[:, a]] = True
        np.add.at(self.frequency, idx.ravel(), 1)
        self.stored_count += len(msgs)
        return self

    def contains_clique(self, msg: Sequence[int]) -> bool:
        idx = self.config.message_indices(msg)
        return bool(self.adjacency[np.ix_(idx, idx)].all())

    def is_clique(self, members: Iterable[int]) -> bool:
        """Pairwise adjacency of arbitrary neurons (distinct clusters required)."""
        idx = np.fromiter(members, dtype=np.int64)
        if len(set((idx // self.config.neurons_per_cluster).tolist())) != idx.size:
            return False
        return bool(self.adjacency[np.ix_(idx, idx)].all())

    def neighbors(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[k])

    def footprint_bits(self) -> tuple[int, int]:
        """(bits for the graph itself, upper bound on bits for the frequency counters)."""
        n = self.n
        core = n * (n - 1) // 2
        overhead = math.ceil(n * math.log2(self.stored_count + 1))
        return core, overhead

    def copy(self) -> "CliqueMemory":
        other = CliqueMemory(self.config)
        other.adjacency = self.adjacency.copy()
        other.frequency = self.frequency.copy()
        other.stored_count = self.stored_count
        return other

    # -- snapshot I/O -------------------------------------------------------

    def dumps(self) -> str:
        C, L = self.config.clusters, self.config.neurons_per_cluster
        iu = np.triu_indices(self.n, k=1)
        packed = np.packbits(self.adjacency[iu], bitorder="big")
        lines = [f"{SNAPSHOT_MAGIC} {C} {L} {self.stored_count}", packed.tobytes().hex()]
        lines.extend(str(int(x)) for x in self.frequency)
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="ascii")

    @classmethod
    def loads(cls, text: str) -> "CliqueMemory":
        lines = text.splitlines()
        if not lines or not lines[0].startswith(SNAPSHOT_MAGIC):
            raise SnapshotError("missing 'CSAM v1' header")
        try:
            C, L, m = (int(x) for x in lines[0][len(SNAPSHOT_MAGIC):].split())
        except ValueError as exc:
            raise SnapshotError(f"bad header {lines[0]!r}") from exc
        mem = cls(NetworkConfig(C, L))
        n = mem.n
        if len(lines) < 2 + n:
            raise SnapshotError(f"expected {2 + n} lines, got {len(lines)}")
        iu = np.triu_indices(n, k=1)
        try:
            raw = np.frombuffer(bytes.fromhex(lines[1].strip()), dtype=np.uint8)
        except ValueError as exc:
            raise SnapshotError("adjacency line is not hex") from exc
        bits = np.unpackbits(raw, bitorder="big")
        if bits.size < iu[0].size:
            raise SnapshotError("adjacency bit stream too short")
        upper = bits[: iu[0].size].astype(bool)
        mem.adjacency[iu] = upper
        mem.adjacency[iu[1], iu[0]] = upper
        try:
            mem.frequency[:] = [int(x) for x in lines[2 : 2 + n]]
        except ValueError as exc:
            raise SnapshotError("frequency lines must be integers") from exc
        mem.stored_count = m
        return mem

    @classmethod
    def load(cls, path: str | Path) -> "CliqueMemory":
        return cls.loads(Path(path).read_text(encoding="ascii"))

    def __repr__(self):
        C, L = self.config.clusters, self.config.neurons_per_cluster
        return f"CliqueMemory(C={C}, L={L}, stored={self.stored_count})"
