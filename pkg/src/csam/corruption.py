"""Seeded injection of retrieval errors into probes.

Three primitives, applied in this order to ``encode(msg)``:

1. shift: each affected symbol, with probability ``shift_p``, moves to a
   uniformly random *different* value;
2. omission: the whole cluster slice goes dark;
3. insertion: neurons light up unconditionally, either the first ``count``
   positions of the cluster (local index 0, 1, ...; a position that is
   already the symbol adds nothing) or the whole cluster (``"heavy"``).

Random streams
--------------
Every probe draws from its own ``numpy.random.Generator`` backed by
``PCG64(SeedSequence(seed, spawn_key=key))`` where ``key`` identifies the
trial (see :func:`trial_rng`). Per probe the stream is consumed as: first
``len(shift positions)`` doubles from ``random()`` deciding which symbols
shift, then the same number of integers from ``integers(1, L)`` used as
offsets ``new = (old + offset) % L``. When positions are sampled per probe
(``shift_random_positions``) a ``choice(C, k, replace=False)`` call comes
first. All draws happen whether or not a symbol actually shifts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .memory import NetworkConfig, encode

HEAVY = "heavy"
InsertionMode = Union[int, str]


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key...), stable across platforms."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ErrorSpec:
    insertions: tuple[tuple[int, InsertionMode], ...] = ()
    omissions: frozenset[int] = frozenset()
    shift_clusters: tuple[int, ...] | str = ()
    shift_p: float = 0.0
    shift_random_positions: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.shift_p <= 1.0:
            raise ValueError(f"shift probability {self.shift_p} outside [0, 1]")
        object.__setattr__(self, "omissions", frozenset(int(c) for c in self.omissions))
        ins = []
        for c, mode in self.insertions:
            if mode != HEAVY:
                mode = int(mode)
                if mode < 0:
                    raise ValueError(f"negative insertion count for cluster {c}")
            ins.append((int(c), mode))
        object.__setattr__(self, "insertions", tuple(ins))
        if self.shift_clusters != "all":
            object.__setattr__(self, "shift_clusters", tuple(int(c) for c in self.shift_clusters))

    def validate(self, config: NetworkConfig) -> "ErrorSpec":
        C, L = config.clusters, config.neurons_per_cluster
        clusters = [c for c, _ in self.insertions] + list(self.omissions)
        if self.shift_clusters != "all":
            clusters += list(self.shift_clusters)
        bad = [c for c in clusters if not 0 <= c < C]
        if bad:
            raise ValueError(f"cluster indices {bad} outside [0, {C})")
        for c, mode in self.insertions:
            if mode != HEAVY and mode >= L:
                raise ValueError(f"insertion count {mode} in cluster {c} must be < L={L}")
        return self

    def shift_positions(self, config: NetworkConfig) -> list[int]:
        if self.shift_clusters == "all":
            return list(range(config.clusters))
        return list(self.shift_clusters)

    # -- flat key/value form ------------------------------------------------

    def to_items(self) -> dict[str, str]:
        def join(xs):
            return ",".join(str(x) for x in xs)

        return {
            "insertions": join(f"{c}:{m}" for c, m in self.insertions),
            "omissions": join(sorted(self.omissions)),
            "shift_clusters": self.shift_clusters if self.shift_clusters == "all" else join(self.shift_clusters),
            "shift_p": repr(float(self.shift_p)),
            "shift_random_positions": str(int(self.shift_random_positions)),
            "seed": str(self.seed),
        }

    def to_text(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.to_items().items())

    @classmethod
    def from_items(cls, items: Mapping[str, str]) -> "ErrorSpec":
        def ints(s):
            return [int(x) for x in s.split(",") if x.strip()]

        insertions = []
        for tok in items.get("insertions", "").split(","):
            tok = tok.strip()
            if not tok:
                continue
            c, _, mode = tok.partition(":")
            mode = mode.strip() or "1"
            insertions.append((int(c), HEAVY if mode == HEAVY else int(mode)))
        shift = items.get("shift_clusters", "").strip()
        return cls(
            insertions=tuple(insertions),
            omissions=frozenset(ints(items.get("omissions", ""))),
            shift_clusters="all" if shift == "all" else tuple(ints(shift)),
            shift_p=float(items.get("shift_p", 0.0)),
            shift_random_positions=items.get("shift_random_positions", "0").strip().lower() in ("1", "true", "yes"),
            seed=int(items.get("seed", 0)),
        )

    @classmethod
    def from_text(cls, text: str) -> "ErrorSpec":
        return cls.from_items(dict(tok.split("=", 1) for tok in text.split()))


def shift_symbols(
    msg: Sequence[int], positions: Sequence[int], p: float, L: int, rng: np.random.Generator
) -> list[int]:
    out = list(msg)
    hits = rng.random(len(positions)) < p
    offsets = rng.integers(1, L, size=len(positions))
    for c, hit, off in zip(positions, hits, offsets):
        if hit:
            out[c] = (out[c] + int(off)) % L
    return out


def inject(
    msg: Sequence[int],
    spec: ErrorSpec,
    config: NetworkConfig,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Corrupt probe for ``msg``. Without ``rng`` the stream is ``trial_rng(spec.seed)``."""
    C, L = config.clusters, config.neurons_per_cluster
    msg = config.validate(msg)
    if rng is None:
        rng = trial_rng(spec.seed)
    positions = spec.shift_positions(config)
    if spec.shift_random_positions:
        positions = sorted(rng.choice(C, size=len(positions), replace=False).tolist())
    symbols = shift_symbols(msg, positions, spec.shift_p, L, rng)
    state = encode(symbols, config)
    for c in spec.omissions:
        state[config.cluster_slice(c)] = False
    for c, mode in spec.insertions:
        sl = config.cluster_slice(c)
        if mode == HEAVY:
            state[sl] = True
        else:
            state[c * L:c * L + mode] = True
    return state


def erase(msg: Sequence[int], pattern: Iterable[int]) -> tuple[tuple[int | None, ...], frozenset[int]]:
    """Blank out the listed positions; the positions themselves are returned
    because the erasure setting discloses them."""
    missing = frozenset(pattern)
    return tuple(None if c in missing else int(x) for c, x in enumerate(msg)), missing
