import gzip
import json

import numpy as np
import pytest

from csam import CliqueMemory, ErrorSpec, NetworkConfig, encode
from csam.bench import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    TrialRecord,
    WillshawMemory,
    emit,
    generate_messages,
    read_csv,
    records_to_csv,
    run_sweep,
)
from csam.bench.usps import (
    UspsFormatError,
    corrupt_symbols,
    run_usps,
    usps_decode,
    usps_dump,
    usps_encode,
    usps_load,
)


def small_config(**kw):
    base = dict(
        network=NetworkConfig(6, 16),
        stored_counts=[10, 50],
        test_count=20,
        error=ErrorSpec(omissions=frozenset({5})),
        algorithms=["direct", "cut-and-paste"],
        seed=3,
        timing=False,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_generate_messages_uniform():
    stats = pytest.importorskip("scipy.stats")
    cfg = NetworkConfig(8, 16)
    msgs = np.array(generate_messages(cfg, 4000, 5))
    assert msgs.shape == (4000, 8)
    for c in range(8):
        counts = np.bincount(msgs[:, c], minlength=16)
        assert stats.chisquare(counts).pvalue > 1e-3
    assert generate_messages(cfg, 10, 5) == generate_messages(cfg, 10, 5)
    assert generate_messages(cfg, 0, 5) == []


def test_sweep_records_shape_and_order():
    recs = run_sweep(small_config())
    assert [(r.stored_count, r.algorithm) for r in recs] == [
        (10, "direct"), (10, "cut-and-paste"), (50, "direct"), (50, "cut-and-paste")
    ]
    assert all(r.trials == 20 for r in recs)
    assert all(r.mean_time == 0.0 for r in recs)


def test_low_load_retrieves_everything():
    recs = run_sweep(small_config(stored_counts=[50], algorithms=["cut-and-paste"]))
    assert recs[0].message_retrieval_rate == 1.0
    assert recs[0].symbol_retrieval_rate == 1.0


def test_sweep_deterministic():
    a = records_to_csv(run_sweep(small_config()))
    b = records_to_csv(run_sweep(small_config()))
    assert a == b


def test_repetitions_pool_trials():
    one = run_sweep(small_config(repetitions=1))
    two = run_sweep(small_config(repetitions=2))
    assert [r.trials for r in two] == [2 * r.trials for r in one]
    # repetition 0 is identical in both runs, so the pooled hit count is the
    # single-run count plus whatever repetition 1 adds (0..20)
    for a, b in zip(one, two):
        extra = round(b.message_retrieval_rate * 40) - round(a.message_retrieval_rate * 20)
        assert 0 <= extra <= 20


def test_on_outcome_sees_every_trial():
    seen = []
    run_sweep(small_config(), on_outcome=lambda m, msg, out, mem: seen.append((m, out.algorithm)))
    assert len(seen) == 2 * 20 * 2


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(stored_counts=[50, 10])
    with pytest.raises(ConfigError):
        small_config(algorithms=["nope"])
    with pytest.raises(ConfigError):
        small_config(error=ErrorSpec(omissions=frozenset({6})))


def test_config_file_round_trip(tmp_path):
    cfg = small_config(error=ErrorSpec(insertions=((0, 1),), shift_clusters="all", shift_p=0.5, seed=3))
    path = tmp_path / "exp.cfg"
    path.write_text("# comment\n" + cfg.dumps())
    back = ExperimentConfig.load(path)
    assert back == cfg


@pytest.mark.parametrize("text", ["clusters = 4\n", "clusters = 4\nneurons_per_cluster = 8\nstored_counts = 5\nbogus = 1\n", "junk\n"])
def test_config_file_errors(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.loads(text)


def test_csv_format_and_round_trip(tmp_path):
    recs = [TrialRecord(100, "direct", 1 / 3, 0.5, 1.23456789e-4, 2)]
    text = records_to_csv(recs, {"seed": "1"})
    lines = text.splitlines()
    assert lines[0] == "# seed=1"
    assert lines[1] == ",".join(CSV_COLUMNS)
    assert lines[2] == "100,direct,0.333333,0.5,0.000123457,2"
    path = emit(recs, tmp_path / "r.csv", metadata={"seed": "1"})
    meta, back = read_csv(path.read_text())
    assert meta == {"seed": "1"}
    assert back[0].message_retrieval_rate == pytest.approx(1 / 3, rel=1e-5)
    assert back[0].convergence_failures == 2


def test_csv_header_only():
    text = records_to_csv([])
    assert text == ",".join(CSV_COLUMNS) + "\n"
    assert read_csv(text) == ({}, [])


def test_json_emit(tmp_path):
    recs = [TrialRecord(10, "construct", 1.0, 1.0, 0.0, 0, 0.0, 5)]
    path = emit(recs, tmp_path / "r.json", "json", {"k": "v"})
    data = json.loads(path.read_text())
    assert data["metadata"] == {"k": "v"}
    assert data["records"][0]["algorithm"] == "construct"
    with pytest.raises(ValueError):
        emit(recs, tmp_path / "r.xml", "xml")


# -- Willshaw ------------------------------------------------------------------


def test_willshaw_matches_csam_off_diagonal():
    cfg = NetworkConfig(5, 8)
    msgs = generate_messages(cfg, 30, 2)
    csam = CliqueMemory(cfg).store_many(msgs)
    wn = WillshawMemory(cfg)
    wn.store_many(encode(m, cfg) for m in msgs)
    off = ~np.eye(cfg.total_neurons, dtype=bool)
    assert (wn.adjacency[off] == csam.adjacency[off]).all()


def test_willshaw_recall():
    cfg = NetworkConfig(5, 8)
    wn = WillshawMemory(cfg)
    msg = (1, 2, 3, 4, 5)
    wn.store(encode(msg, cfg))
    probe = encode(msg, cfg)
    probe[8 + 2] = False
    out = wn.retrieve(probe)
    assert wn.read_out(out) == list(msg)
    assert wn.read_out(np.zeros(40, dtype=bool)) == [None] * 5
    assert not wn.retrieve(np.zeros(40, dtype=bool)).any()


# -- USPS ----------------------------------------------------------------------


def fake_images(count, seed):
    rng = np.random.default_rng(seed)
    return [(int(rng.integers(0, 10)), (rng.random(256) < 0.3).astype(np.uint8)) for _ in range(count)]


def test_usps_encode_layout():
    image = np.zeros(256, dtype=np.uint8)
    image[0] = 1
    first, second = usps_encode(image)
    assert first[0] == 128 and sum(first) == 128
    assert second == (0,) * 16
    image[255] = 1
    assert usps_encode(image)[1][15] == 1
    assert (usps_decode(*usps_encode(image)) == image).all()
    with pytest.raises(ValueError):
        usps_encode(np.zeros(10))


def test_usps_load_round_trip(tmp_path):
    imgs = fake_images(5, 0)
    path = tmp_path / "zip.train"
    usps_dump(imgs, path)
    back = usps_load(path)
    assert [l for l, _ in back] == [l for l, _ in imgs]
    assert all((a == b).all() for (_, a), (_, b) in zip(back, imgs))
    gz = tmp_path / "zip.train.gz"
    with gzip.open(gz, "wt") as fh:
        fh.write(path.read_text())
    assert len(usps_load(gz)) == 5


def test_usps_threshold_is_midpoint(tmp_path):
    path = tmp_path / "z"
    vals = ["-1"] * 254 + ["0", "0.01"]
    path.write_text("3 " + " ".join(vals) + "\n")
    (label, img), = usps_load(path)
    assert label == 3
    assert img[-2] == 0 and img[-1] == 1


def test_usps_bad_line(tmp_path):
    path = tmp_path / "z"
    path.write_text("3 0 0 0\n")
    with pytest.raises(UspsFormatError, match=":1:"):
        usps_load(path)


def test_corrupt_symbols():
    rng = np.random.default_rng(0)
    msg = tuple(range(16))
    out = corrupt_symbols(msg, 4, 256, rng)
    assert sum(a != b for a, b in zip(out, msg)) == 4


def test_run_usps_small():
    imgs = fake_images(60, 1)
    recs = run_usps(imgs, stored_images=40, probe_images=10, corrupt=0, seed=2)
    by = {r.algorithm: r for r in recs}
    assert set(by) == {"cut-and-paste", "willshaw"}
    assert by["cut-and-paste"].stored_count == 80
    assert by["cut-and-paste"].trials == 20
    assert by["cut-and-paste"].message_retrieval_rate == 1.0
    with pytest.raises(ValueError):
        run_usps(imgs, stored_images=100)
