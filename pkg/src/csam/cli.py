"""Command line entry point: ``csam {bench-sim,bench-usps,store,query}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bench.sweep import ConfigError, ExperimentConfig, emit, generate_messages, run_sweep
from .memory import CliqueMemory, InvalidMessageError, NetworkConfig, SnapshotError
from .retrieval import ALGORITHMS, retrieve


class UsageError(Exception):
    pass


def parse_probe(text: str, config: NetworkConfig) -> np.ndarray:
    """Probe syntax: one comma-separated field per cluster. A field is a
    symbol, several symbols joined by ``|``, ``?`` (or empty) for an empty
    cluster, or ``*`` for every neuron of the cluster."""
    fields = [f.strip() for f in text.split(",")]
    if len(fields) != config.clusters:
        raise UsageError(f"probe has {len(fields)} fields, expected {config.clusters}")
    L = config.neurons_per_cluster
    state = np.zeros(config.total_neurons, dtype=bool)
    for c, field in enumerate(fields):
        sl = config.cluster_slice(c)
        if field in ("", "?"):
            continue
        if field == "*":
            state[sl] = True
            continue
        for tok in field.split("|"):
            try:
                x = int(tok)
            except ValueError:
                raise UsageError(f"bad probe field {field!r}") from None
            if not 0 <= x < L:
                raise UsageError(f"symbol {x} outside [0, {L})")
            state[c * L + x] = True
    return state


def read_messages(source: str, config: NetworkConfig) -> list[tuple[int, ...]]:
    text = sys.stdin.read() if source == "-" else Path(source).read_text()
    msgs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        try:
            msgs.append(config.validate(int(x) for x in line.split()))
        except (ValueError, InvalidMessageError) as exc:
            raise UsageError(f"{source}:{lineno}: {exc}") from None
    return msgs


def cmd_bench_sim(args) -> int:
    config = ExperimentConfig.load(args.config)
    records = run_sweep(config)
    emit(records, args.out, args.format, metadata=config.to_items())
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_bench_usps(args) -> int:
    from .bench.usps import usps_load, run_usps

    samples = usps_load(args.data)
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    records = run_usps(
        samples,
        stored_images=args.stored,
        probe_images=args.probes,
        corrupt=args.corrupt_symbols,
        repetitions=args.repetitions,
        seed=args.seed,
        algorithms=algorithms,
    )
    metadata = {
        "data": str(args.data),
        "images": str(len(samples)),
        "stored_images": str(args.stored),
        "probe_images": str(args.probes),
        "corrupt_symbols": str(args.corrupt_symbols),
        "corruption": "symbol-level, uniform different byte",
        "binarize_threshold": "0 (midpoint of [-1, 1])",
        "willshaw_threshold": "active probe bits",
        "repetitions": str(args.repetitions),
        "seed": str(args.seed),
    }
    emit(records, args.out, args.format, metadata=metadata)
    for r in records:
        print(f"{r.algorithm:>14}  msg={r.message_retrieval_rate:.3f}  sym={r.symbol_retrieval_rate:.3f}")
    return 0


def cmd_store(args) -> int:
    path = Path(args.snapshot)
    if path.exists() and not args.new:
        mem = CliqueMemory.load(path)
    else:
        if args.clusters is None or args.neurons is None:
            raise UsageError("a new snapshot needs --clusters and --neurons")
        mem = CliqueMemory(NetworkConfig(args.clusters, args.neurons))
    msgs = []
    if args.messages:
        msgs += read_messages(args.messages, mem.config)
    if args.random:
        msgs += generate_messages(mem.config, args.random, args.seed)
    mem.store_many(msgs)
    mem.save(path)
    print(f"stored {len(msgs)} messages; {mem.stored_count} total in {path}")
    return 0


def cmd_query(args) -> int:
    mem = CliqueMemory.load(args.snapshot).freeze()
    probe = parse_probe(args.probe, mem.config)
    out = retrieve(mem, probe, args.algorithm)
    if out.message is None:
        print("none")
    else:
        print(",".join(map(str, out.message)))
    print(
        f"# algorithm={out.algorithm} iterations={out.iterations} "
        f"converged={int(out.converged)} elapsed_s={out.elapsed:.6g}",
        file=sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench-sim", help="simulated retrieval-rate sweep")
    p.add_argument("--config", required=True, help="key = value experiment file")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_bench_sim)

    p = sub.add_parser("bench-usps", help="CSAM vs Willshaw on USPS digits")
    p.add_argument("--data", required=True, help="USPS text file (optionally .gz)")
    p.add_argument("--stored", type=int, default=5000, help="images to store")
    p.add_argument("--probes", type=int, default=1000, help="images to query")
    p.add_argument("--corrupt-symbols", type=int, default=4)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--algorithms", default="cut-and-paste")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_bench_usps)

    p = sub.add_parser("store", help="create or extend a memory snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--clusters", type=int)
    p.add_argument("--neurons", type=int, help="neurons per cluster")
    p.add_argument("--messages", help="file with one message per line, or - for stdin")
    p.add_argument("--random", type=int, default=0, help="also store N uniform random messages")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--new", action="store_true", help="overwrite an existing snapshot")
    p.set_defaults(func=cmd_store)

    p = sub.add_parser("query", help="retrieve one probe from a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="cut-and-paste")
    p.add_argument("--probe", required=True, help="e.g. '2,3|0,?,0,1'")
    p.set_defaults(func=cmd_query)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SnapshotError, UsageError, InvalidMessageError, OSError, ValueError) as exc:
        print(f"csam: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
