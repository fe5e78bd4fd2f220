"""Simulated retrieval-rate sweeps and their CSV/JSON export."""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..corruption import ErrorSpec, inject, trial_rng
from ..dynamics import RetrievalParams
from ..memory import CliqueMemory, Message, NetworkConfig
from ..retrieval import ALGORITHMS, RetrievalOutcome, retrieve_direct, retrieve

CSV_COLUMNS = ("stored_count", "algorithm", "msg_rate", "sym_rate", "mean_time_s", "conv_failures")

# stream tags for trial_rng keys
_MESSAGES, _PICK, _PROBE = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    network: NetworkConfig
    stored_counts: list[int]
    test_count: int = 200
    error: ErrorSpec = field(default_factory=ErrorSpec)
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    seed: int = 1
    repetitions: int = 1
    max_iterations: int = 10
    timing: bool = True

    def __post_init__(self):
        if list(self.stored_counts) != sorted(self.stored_counts):
            raise ConfigError("stored_counts must be ascending")
        if any(m < 1 for m in self.stored_counts):
            raise ConfigError("stored_counts must be positive")
        if self.test_count < 1:
            raise ConfigError("test_count must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithms {unknown}; choose from {list(ALGORITHMS)}")
        try:
            self.error.validate(self.network)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_items(self) -> dict[str, str]:
        items = {
            "clusters": str(self.network.clusters),
            "neurons_per_cluster": str(self.network.neurons_per_cluster),
            "stored_counts": ",".join(map(str, self.stored_counts)),
            "test_count": str(self.test_count),
            "algorithms": ",".join(self.algorithms),
            "seed": str(self.seed),
            "repetitions": str(self.repetitions),
            "max_iterations": str(self.max_iterations),
            "timing": str(int(self.timing)),
        }
        err = self.error.to_items()
        err.pop("seed")
        items.update(err)
        return items

    def dumps(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_items().items())

    @classmethod
    def from_items(cls, items: dict[str, str]) -> "ExperimentConfig":
        known = {
            "clusters", "neurons_per_cluster", "stored_counts", "test_count", "algorithms",
            "seed", "repetitions", "max_iterations", "timing",
            "insertions", "omissions", "shift_clusters", "shift_p", "shift_random_positions",
        }
        extra = set(items) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            network = NetworkConfig(int(items["clusters"]), int(items["neurons_per_cluster"]))
            seed = int(items.get("seed", 1))
            error = ErrorSpec.from_items({**items, "seed": str(seed)})
            algorithms = [a.strip() for a in items.get("algorithms", ",".join(ALGORITHMS)).split(",") if a.strip()]
            return cls(
                network=network,
                stored_counts=[int(x) for x in items["stored_counts"].split(",") if x.strip()],
                test_count=int(items.get("test_count", 200)),
                error=error,
                algorithms=algorithms,
                seed=seed,
                repetitions=int(items.get("repetitions", 1)),
                max_iterations=int(items.get("max_iterations", 10)),
                timing=items.get("timing", "1").strip().lower() in ("1", "true", "yes", "on"),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc.args[0]!r}") from None
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        return cls.from_items(parse_key_values(text))

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.loads(Path(path).read_text())


def parse_key_values(text: str) -> dict[str, str]:
    """``key = value`` lines; blank lines and ``#`` comments ignored."""
    items = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        items[key.strip()] = value.strip()
    return items


@dataclass
class TrialRecord:
    stored_count: int
    algorithm: str
    message_retrieval_rate: float
    symbol_retrieval_rate: float
    mean_time: float
    convergence_failures: int
    median_time: float = 0.0
    trials: int = 0


def generate_messages(config: NetworkConfig, count: int, seed: int, *key: int) -> list[Message]:
    """``count`` i.i.d. uniform messages drawn from ``trial_rng(seed, *key)``."""
    if count == 0:
        return []
    rng = trial_rng(seed, *key)
    arr = rng.integers(0, config.neurons_per_cluster, size=(count, config.clusters))
    return [tuple(row) for row in arr.tolist()]


def symbol_matches(expected: Sequence[int], got: Sequence[int] | None) -> int:
    if got is None:
        return 0
    return sum(int(a == b) for a, b in zip(expected, got))


def summarize(
    stored_count: int,
    algorithm: str,
    outcomes: Sequence[tuple[Message, RetrievalOutcome]],
    timing: bool = True,
) -> TrialRecord:
    C = len(outcomes[0][0])
    exact = sum(o.message == msg for msg, o in outcomes)
    symbols = sum(symbol_matches(msg, o.message) for msg, o in outcomes)
    times = [o.elapsed for _, o in outcomes] if timing else [0.0]
    return TrialRecord(
        stored_count=stored_count,
        algorithm=algorithm,
        message_retrieval_rate=exact / len(outcomes),
        symbol_retrieval_rate=symbols / (C * len(outcomes)),
        mean_time=statistics.fmean(times),
        median_time=statistics.median(times),
        convergence_failures=sum(not o.converged for _, o in outcomes),
        trials=len(outcomes),
    )


def run_sweep(
    config: ExperimentConfig,
    on_outcome: Callable[[int, Message, RetrievalOutcome, CliqueMemory], None] | None = None,
) -> list[TrialRecord]:
    """One :class:`TrialRecord` per (stored_count, algorithm), in config order.

    Each repetition draws its own message pool and stores it incrementally,
    so every stored_count is a prefix of the same pool. Probes are stored
    messages picked per (repetition, stored_count) and corrupted with one
    generator per trial; all algorithms see the same probes.
    """
    net = config.network
    largest = config.stored_counts[-1]
    params = RetrievalParams(config.max_iterations)
    collected: dict[tuple[int, str], list] = {
        (m, a): [] for m in config.stored_counts for a in config.algorithms
    }
    for rep in range(config.repetitions):
        pool = generate_messages(net, largest, config.seed, _MESSAGES, rep)
        mem = CliqueMemory(net)
        stored = 0
        for m in config.stored_counts:
            mem.store_many(pool[stored:m])
            stored = m
            pick_rng = trial_rng(config.seed, _PICK, rep, m)
            picks = pick_rng.choice(m, size=config.test_count, replace=config.test_count > m)
            for t, i in enumerate(picks.tolist()):
                msg = pool[i]
                probe = inject(msg, config.error, net, trial_rng(config.seed, _PROBE, rep, m, t))
                for alg in config.algorithms:
                    if alg == "direct":
                        out = retrieve_direct(mem, probe, params)
                    else:
                        out = retrieve(mem, probe, alg)
                    if on_outcome is not None:
                        on_outcome(m, msg, out, mem)
                    collected[(m, alg)].append((msg, out))
    return [
        summarize(m, a, collected[(m, a)], config.timing)
        for m in config.stored_counts
        for a in config.algorithms
    ]


# -- export --------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def records_to_csv(records: Iterable[TrialRecord], metadata: dict[str, str] | None = None) -> str:
    buf = io.StringIO()
    for k, v in (metadata or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([
            r.stored_count,
            r.algorithm,
            _fmt(r.message_retrieval_rate),
            _fmt(r.symbol_retrieval_rate),
            _fmt(r.mean_time),
            r.convergence_failures,
        ])
    return buf.getvalue()


def records_to_json(records: Iterable[TrialRecord], metadata: dict[str, str] | None = None) -> str:
    return json.dumps(
        {"metadata": metadata or {}, "records": [asdict(r) for r in records]},
        indent=2,
        sort_keys=True,
    ) + "\n"


def emit(
    records: Iterable[TrialRecord],
    path: str | Path,
    fmt: str = "csv",
    metadata: dict[str, str] | None = None,
) -> Path:
    if fmt == "csv":
        text = records_to_csv(records, metadata)
    elif fmt == "json":
        text = records_to_json(records, metadata)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_csv(text: str) -> tuple[dict[str, str], list[TrialRecord]]:
    """Parse :func:`records_to_csv` output back into (metadata, records)."""
    metadata: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            metadata[key] = value
        elif line.strip():
            body.append(line)
    rows = list(csv.DictReader(body))
    records = [
        TrialRecord(
            stored_count=int(r["stored_count"]),
            algorithm=r["algorithm"],
            message_retrieval_rate=float(r["msg_rate"]),
            symbol_retrieval_rate=float(r["sym_rate"]),
            mean_time=float(r["mean_time_s"]),
            convergence_failures=int(r["conv_failures"]),
        )
        for r in rows
    ]
    return metadata, records
