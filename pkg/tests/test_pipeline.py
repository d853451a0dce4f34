import csv
import json

import pytest

from decpauli.distributions import DistributionError, SparseDistribution
from decpauli.pipeline import (
    TIMESTAMP_KEY,
    ConfigError,
    ExperimentConfig,
    dumps_result,
    histogram_rows,
    ingest_counts,
    load_result,
    report,
    run_experiment,
)

SMALL = dict(family="ghz", params={"n": 3}, shots=20_000, n_rand=4, seed=3)


@pytest.fixture(scope="module")
def ghz_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    return run_experiment(ExperimentConfig(**SMALL, out_dir=str(out))), out


def test_config_defaults_and_validation():
    cfg = ExperimentConfig(family="ghz", params={"n": 4})
    assert (cfg.shots, cfg.n_rand, cfg.t_max, cfg.eps) == (200_000, 16, 15, 1e-12)
    assert (cfg.p1, cfg.p2, cfg.p_meas) == (0.001, 0.01, 0.0)
    assert not cfg.shared_twirls
    for bad in ({"shots": 0}, {"t_max": 0}, {"t_max": 21}, {"n_rand": 0}, {"p1": 2.0}):
        with pytest.raises((ConfigError, ValueError)):
            ExperimentConfig(family="ghz", params={"n": 4}, **bad)
    with pytest.raises(ConfigError):
        ExperimentConfig()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json({"family": "ghz", "bogus": 1})


def test_config_json_round_trip(tmp_path):
    cfg = ExperimentConfig(**SMALL, shared_twirls=True)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_json()))
    assert ExperimentConfig.load(path) == cfg


def test_run_improves_fidelity(ghz_result):
    r, _ = ghz_result
    assert 0 <= r.fidelity_raw < r.fidelity_corrected <= 1
    assert r.corrected.kind == "strict"
    assert r.nec_ideal_output == 0b001
    assert r.diagnostics["t"] == 3 and r.diagnostics["dropped_mass"] == 0
    assert r.gate_counts["cz"] == 2


def test_manifest_two_sampling_passes(ghz_result):
    r, _ = ghz_result
    passes = r.manifest["sampling_passes"]
    assert [p["circuit"] for p in passes] == ["payload", "nec"]
    assert all(p["instances"] == 4 and p["shots"] == 20_000 for p in passes)
    assert len(r.manifest["twirls"]) == 4
    assert sum(t["shots"] for t in r.manifest["twirls"]) == 20_000
    assert sum(r.raw_counts.values()) == sum(r.nec_counts.values()) == 20_000


def test_persisted_files(ghz_result):
    r, out = ghz_result
    names = {p.name for p in out.iterdir()}
    assert {f"{r.name}.json", f"{r.name}_histogram.csv",
            f"{r.name}_payload_counts.json", f"{r.name}_nec_counts.json"} <= names
    data = json.loads((out / f"{r.name}.json").read_text())
    assert TIMESTAMP_KEY in data
    assert data["manifest"]["twirls"][0]["payload"]["seed"] == r.seeds["payload_twirl"][0]


def test_result_round_trip(ghz_result):
    r, out = ghz_result
    back = load_result(out / f"{r.name}.json")
    assert dumps_result(back, timestamp=False) == dumps_result(r, timestamp=False)


def test_counts_file_ingests(ghz_result):
    r, out = ghz_result
    dist, meta = ingest_counts(out / f"{r.name}_payload_counts.json")
    assert dist.entries == pytest.approx(r.raw.entries, abs=1e-15)
    assert meta["n_qubits"] == 3 and meta["shots"] == 20_000 and meta["seed"] == 3
    assert meta["noise_model"] == {"p1": 0.001, "p2": 0.01, "p_meas": 0.0}


def test_determinism():
    a = run_experiment(ExperimentConfig(**SMALL))
    b = run_experiment(ExperimentConfig(**SMALL))
    assert dumps_result(a, timestamp=False) == dumps_result(b, timestamp=False)
    c = run_experiment(ExperimentConfig(**{**SMALL, "seed": 4}))
    assert dumps_result(c, timestamp=False) != dumps_result(a, timestamp=False)


def test_zero_noise_run():
    r = run_experiment(ExperimentConfig(**{**SMALL, "p1": 0.0, "p2": 0.0}))
    assert r.nec.entries == {r.nec_ideal_output: 1.0}
    assert r.corrected.entries == pytest.approx(r.raw.entries)
    assert r.fidelity_raw > 0.999


def test_shared_twirls_replay_payload_paulis():
    r = run_experiment(ExperimentConfig(**{**SMALL, "shared_twirls": True, "n_rand": 2}))
    assert r.manifest["twirl_mode"] == "shared"
    for t in r.manifest["twirls"]:
        assert t["payload"]["sites"] == t["nec"]["sites"]


def test_circuit_file_config(tmp_path):
    path = tmp_path / "bell.txt"
    path.write_text("qubits 2\nh q0\ncx q0,q1\n")
    r = run_experiment(ExperimentConfig(circuit_path=str(path), shots=5000, n_rand=2))
    assert r.name == "bell" and set(r.ideal.entries) == {0, 3}


# ---------------------------------------------------------------- report

def test_report_table_and_csv(ghz_result, tmp_path):
    r, _ = ghz_result
    text = report([r], tmp_path)
    lines = text.splitlines()
    assert lines[0].split("|")[1].strip() == r.name
    assert lines[2].startswith("Cor.") and lines[3].startswith("Raw")
    rows = list(csv.reader(open(tmp_path / "fidelity_table.csv")))
    assert [row[0] for row in rows] == ["", "Cor.", "Raw"]
    assert float(rows[1][1]) == r.fidelity_corrected
    hist = list(csv.DictReader(open(tmp_path / f"{r.name}_histogram.csv")))
    assert [h["index"] for h in hist] == ["0", "7", "rest"]
    shown = sum(float(h["corrected"]) for h in hist[:-1])
    assert float(hist[-1]["corrected"]) == pytest.approx(1 - shown, abs=1e-12)


def test_histogram_ghz2_noiseless():
    r = run_experiment(ExperimentConfig(family="ghz", params={"n": 2}, p1=0, p2=0,
                                        shots=1000, n_rand=1))
    rows = histogram_rows(r)
    assert [(row["index"], row["ideal"]) for row in rows[:2]] == [(0, pytest.approx(0.5)),
                                                                  (3, pytest.approx(0.5))]
    assert rows[-1]["index"] == "rest" and rows[-1]["ideal"] == pytest.approx(0.0, abs=1e-12)


def test_report_needs_results():
    with pytest.raises(ValueError):
        report([])


# ---------------------------------------------------------------- ingest

def _write(tmp_path, data):
    p = tmp_path / "counts.json"
    p.write_text(json.dumps(data))
    return p


def test_ingest_bare_map(tmp_path):
    dist, meta = ingest_counts(_write(tmp_path, {"00": 100, "11": 100}))
    assert dist.entries == {0: 0.5, 3: 0.5} and meta == {"n_qubits": 2}


def test_ingest_probabilities(tmp_path):
    dist, _ = ingest_counts(_write(tmp_path, {"counts": {"1": 0.25, "0": 0.75}}))
    assert isinstance(dist, SparseDistribution) and dist.get(1) == 0.25


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({"0": 0}, "zero total"),
        ({"0": 1, "10": 1}, "mixes bitstring widths"),
        ({"0x": 1}, "invalid bitstring"),
        ({"01": "many"}, "non-numeric"),
        ({"01": -1, "10": 2}, "negative"),
        ({}, "non-empty"),
        ([1, 2], "JSON object"),
        ({"counts": {"01": 1}, "metadata": {"n_qubits": 3}}, "n_qubits"),
    ],
)
def test_ingest_errors(tmp_path, data, fragment):
    with pytest.raises(DistributionError, match=fragment):
        ingest_counts(_write(tmp_path, data))
