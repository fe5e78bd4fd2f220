"""USPS digits: loading, image <-> message conversion and the CSAM vs Willshaw run.

File format: one sample per line, the digit label followed by 256
grayscale values in row-major order, whitespace separated (the layout of
the ElemStatLearn ``zip.train``/``zip.test`` files, values in [-1, 1]).
Gzip-compressed files are read transparently.
"""

from __future__ import annotations

import gzip
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corruption import trial_rng
from ..memory import CliqueMemory, Message, NetworkConfig, encode
from ..retrieval import retrieve
from .sweep import TrialRecord, symbol_matches
from .willshaw import WillshawMemory

PIXELS = 256
SYMBOL_BITS = 8
USPS_NETWORK = NetworkConfig(clusters=16, neurons_per_cluster=256)
DEFAULT_RANGE = (-1.0, 1.0)


class UspsFormatError(ValueError):
    pass


def _open_text(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="ascii")
    return open(path, encoding="ascii")


def usps_load(
    path: str | Path, value_range: tuple[float, float] = DEFAULT_RANGE
) -> list[tuple[int, np.ndarray]]:
    """Read (label, 256 binary pixels) pairs; a pixel is 1 when its grayscale
    value lies above the midpoint of ``value_range``."""
    threshold = (value_range[0] + value_range[1]) / 2
    samples = []
    with _open_text(Path(path)) as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != PIXELS + 1:
                raise UspsFormatError(
                    f"{path}:{lineno}: expected {PIXELS + 1} fields, got {len(fields)}"
                )
            try:
                label = int(float(fields[0]))
                values = np.array(fields[1:], dtype=float)
            except ValueError as exc:
                raise UspsFormatError(f"{path}:{lineno}: {exc}") from None
            samples.append((label, (values > threshold).astype(np.uint8)))
    return samples


def usps_dump(samples: Sequence[tuple[int, np.ndarray]], path: str | Path,
              value_range: tuple[float, float] = DEFAULT_RANGE) -> None:
    """Write binary images back in the text format (1 -> high end of the range)."""
    lo, hi = value_range
    with open(path, "w", encoding="ascii") as fh:
        for label, image in samples:
            vals = np.where(np.asarray(image, dtype=bool), hi, lo)
            fh.write(f"{label} " + " ".join(format(v, ".4f") for v in vals) + "\n")


def usps_encode(image: np.ndarray) -> tuple[Message, Message]:
    """Two 16-symbol messages; each symbol packs 8 successive pixels, first pixel
    as the most significant bit."""
    bits = np.asarray(image, dtype=np.uint8).ravel()
    if bits.size != PIXELS:
        raise ValueError(f"expected {PIXELS} pixels, got {bits.size}")
    symbols = np.packbits(bits, bitorder="big").tolist()
    return tuple(symbols[:16]), tuple(symbols[16:])


def usps_decode(first: Sequence[int], second: Sequence[int]) -> np.ndarray:
    data = np.asarray(list(first) + list(second), dtype=np.uint8)
    return np.unpackbits(data, bitorder="big")


def corrupt_symbols(msg: Sequence[int], k: int, L: int, rng: np.random.Generator) -> list[int]:
    """Replace ``k`` distinct positions with uniformly random different values."""
    out = list(msg)
    positions = rng.choice(len(out), size=k, replace=False)
    offsets = rng.integers(1, L, size=k)
    for c, off in zip(positions.tolist(), offsets.tolist()):
        out[c] = (out[c] + off) % L
    return out


def run_usps(
    samples: Sequence[tuple[int, np.ndarray]],
    stored_images: int = 5000,
    probe_images: int = 1000,
    corrupt: int = 4,
    repetitions: int = 1,
    seed: int = 1,
    algorithms: Sequence[str] = ("cut-and-paste",),
    willshaw: bool = True,
    on_outcome=None,
) -> list[TrialRecord]:
    """Store random images as message pairs, query with corrupted stored ones.

    Records pool all repetitions; ``stored_count`` is the number of stored
    messages (two per image).
    """
    net = USPS_NETWORK
    if stored_images > len(samples):
        raise ValueError(f"only {len(samples)} images available, {stored_images} requested")
    results: dict[str, list] = {a: [] for a in algorithms}
    if willshaw:
        results["willshaw"] = []
    for rep in range(repetitions):
        rng = trial_rng(seed, 0, rep)
        chosen = rng.choice(len(samples), size=stored_images, replace=False)
        messages = [m for i in chosen.tolist() for m in usps_encode(samples[i][1])]
        mem = CliqueMemory(net).store_many(messages).freeze()
        wn = WillshawMemory(net) if willshaw else None
        if wn is not None:
            for msg in messages:
                wn.store(encode(msg, net))
        picks = trial_rng(seed, 1, rep).choice(stored_images, size=probe_images,
                                               replace=probe_images > stored_images)
        for t, img in enumerate(picks.tolist()):
            for half in (0, 1):
                msg = messages[2 * img + half]
                noisy = corrupt_symbols(msg, corrupt, net.neurons_per_cluster,
                                        trial_rng(seed, 2, rep, t, half))
                probe = encode(noisy, net)
                for alg in algorithms:
                    out = retrieve(mem, probe, alg)
                    if on_outcome is not None:
                        on_outcome(msg, out, mem)
                    results[alg].append((msg, out.message, out.elapsed))
                if wn is not None:
                    start = time.perf_counter()
                    got = wn.read_out(wn.retrieve(probe))
                    results["willshaw"].append((msg, got, time.perf_counter() - start))

    records = []
    for alg, rows in results.items():
        exact = sum(tuple(got) == msg if got is not None and None not in got else False
                    for msg, got, _ in rows)
        symbols = sum(symbol_matches(msg, got) for msg, got, _ in rows)
        records.append(TrialRecord(
            stored_count=2 * stored_images,
            algorithm=alg,
            message_retrieval_rate=exact / len(rows),
            symbol_retrieval_rate=symbols / (net.clusters * len(rows)),
            mean_time=float(np.mean([t for _, _, t in rows])),
            median_time=float(np.median([t for _, _, t in rows])),
            convergence_failures=0,
            trials=len(rows),
        ))
    return records
