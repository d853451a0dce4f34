"""Experiment orchestration: build, lower, twirl, NEC, sample both, correct, report."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .catalog import catalog
from .circuit_ir import Circuit, gate_counts, parse_circuit
from .dec_core import correct, fidelity
from .distributions import DistributionError, SparseDistribution, parse_bitstring_map
from .lowering import build_nec, lower_to_native, nec_ideal_output, pauli_twirl
from .noise_sim import NoiseModel, sample_counts, simulate_noiseless

log = logging.getLogger(__name__)

TIMESTAMP_KEY = "created"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    family: str | None = None
    params: dict = field(default_factory=dict)
    circuit_path: str | None = None
    name: str | None = None
    p1: float = 0.001
    p2: float = 0.01
    p_meas: float = 0.0
    shots: int = 200_000
    n_rand: int = 16
    t_max: int = 15
    eps: float = 1e-12
    seed: int = 0
    shared_twirls: bool = False
    shots_per_trajectory: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        if (self.family is None) == (self.circuit_path is None):
            raise ConfigError("give exactly one of family or circuit_path")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.n_rand < 1:
            raise ConfigError("n_rand must be >= 1")
        if not 1 <= self.t_max <= 20:
            raise ConfigError("t_max must lie in [1, 20]")
        if self.eps < 0:
            raise ConfigError("eps must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        NoiseModel(self.p1, self.p2, self.p_meas)

    @property
    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.p1, self.p2, self.p_meas)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.family:
            return self.family + "".join(f"_{k}{v}" for k, v in sorted(self.params.items()))
        return Path(self.circuit_path).stem

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class ExperimentResult:
    name: str
    n_qubits: int
    ideal: SparseDistribution
    raw: SparseDistribution
    nec: SparseDistribution
    nec_ideal_output: int
    corrected: SparseDistribution
    quasi: SparseDistribution
    fidelity_raw: float
    fidelity_corrected: float
    gate_counts: dict
    nec_gate_counts: dict
    diagnostics: dict
    config: dict
    seeds: dict
    manifest: dict
    raw_counts: dict = field(default_factory=dict)
    nec_counts: dict = field(default_factory=dict)

    def to_json(self, timestamp: bool = True) -> dict:
        out = {
            "name": self.name,
            "n_qubits": self.n_qubits,
            "fidelity_raw": self.fidelity_raw,
            "fidelity_corrected": self.fidelity_corrected,
            "nec_ideal_output": format(self.nec_ideal_output, f"0{self.n_qubits}b"),
            "ideal": self.ideal.to_bitstrings(),
            "raw": self.raw.to_bitstrings(),
            "nec": self.nec.to_bitstrings(),
            "corrected": self.corrected.to_bitstrings(),
            "quasi": self.quasi.to_bitstrings(),
            "raw_counts": _bitstring_counts(self.raw_counts, self.n_qubits),
            "nec_counts": _bitstring_counts(self.nec_counts, self.n_qubits),
            "gate_counts": self.gate_counts,
            "nec_gate_counts": self.nec_gate_counts,
            "diagnostics": self.diagnostics,
            "config": self.config,
            "seeds": self.seeds,
            "manifest": self.manifest,
        }
        if timestamp:
            out[TIMESTAMP_KEY] = datetime.now(timezone.utc).isoformat()
        return out

    @classmethod
    def from_json(cls, data: dict) -> ExperimentResult:
        n = data["n_qubits"]

        def dist(key, kind="strict"):
            _, entries = parse_bitstring_map(data[key], key)
            return SparseDistribution(n, entries, kind)

        def counts(key):
            return {int(k, 2): v for k, v in data.get(key, {}).items()}

        return cls(
            name=data["name"], n_qubits=n, ideal=dist("ideal"), raw=dist("raw"),
            nec=dist("nec"), nec_ideal_output=int(data["nec_ideal_output"], 2),
            corrected=dist("corrected"), quasi=dist("quasi", "quasi"),
            fidelity_raw=data["fidelity_raw"], fidelity_corrected=data["fidelity_corrected"],
            gate_counts=data["gate_counts"], nec_gate_counts=data["nec_gate_counts"],
            diagnostics=data["diagnostics"], config=data["config"], seeds=data["seeds"],
            manifest=data["manifest"], raw_counts=counts("raw_counts"),
            nec_counts=counts("nec_counts"),
        )


def _bitstring_counts(counts: dict, n: int) -> dict:
    return {format(k, f"0{n}b"): v for k, v in sorted(counts.items())}


def dumps_result(result: ExperimentResult, timestamp: bool = True) -> str:
    return json.dumps(result.to_json(timestamp), indent=1, sort_keys=True)


# ---------------------------------------------------------------- seeds

def derive_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=path).generate_state(1)[0])


def _split_shots(shots: int, parts: int) -> list[int]:
    base, extra = divmod(shots, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


# ---------------------------------------------------------------- run

def load_circuit(cfg: ExperimentConfig) -> Circuit:
    if cfg.family is not None:
        return catalog(cfg.family, **cfg.params)
    path = Path(cfg.circuit_path)
    return parse_circuit(path.read_text(), name=path.stem)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Sample the twirled payload and NEC, correct the payload, and score it."""
    circuit = load_circuit(cfg)
    payload = lower_to_native(circuit)
    nec = build_nec(payload)
    k = nec_ideal_output(nec)
    ideal = simulate_noiseless(payload)
    nm = cfg.noise_model
    n = payload.n_qubits

    shots = _split_shots(cfg.shots, cfg.n_rand)
    seeds = {
        "root": cfg.seed,
        "payload_twirl": [derive_seed(cfg.seed, 0, r) for r in range(cfg.n_rand)],
        "nec_twirl": [derive_seed(cfg.seed, 1, r) for r in range(cfg.n_rand)],
        "payload_sample": [derive_seed(cfg.seed, 2, r) for r in range(cfg.n_rand)],
        "nec_sample": [derive_seed(cfg.seed, 3, r) for r in range(cfg.n_rand)],
    }
    raw_counts: dict[int, int] = {}
    nec_counts: dict[int, int] = {}
    twirls = []
    for r in range(cfg.n_rand):
        if shots[r] == 0:
            continue
        tw_payload, rec = pauli_twirl(payload, seeds["payload_twirl"][r])
        if cfg.shared_twirls:
            tw_nec, nec_rec = pauli_twirl(nec, record=rec)
        else:
            tw_nec, nec_rec = pauli_twirl(nec, seeds["nec_twirl"][r])
        twirls.append({"payload": rec.to_json(), "nec": nec_rec.to_json(), "shots": shots[r]})
        _accumulate(raw_counts, sample_counts(
            tw_payload, nm, shots[r], seeds["payload_sample"][r], cfg.shots_per_trajectory))
        _accumulate(nec_counts, sample_counts(
            tw_nec, nm, shots[r], seeds["nec_sample"][r], cfg.shots_per_trajectory))
        log.debug("twirl %d/%d done", r + 1, cfg.n_rand)

    raw = SparseDistribution.from_counts(n, raw_counts)
    nec_dist = SparseDistribution.from_counts(n, nec_counts)
    corr = correct(raw, nec_dist, k, cfg.t_max, cfg.eps)
    diagnostics = dict(corr.diagnostics)
    f_raw = fidelity(raw, ideal)
    f_cor = fidelity(corr.corrected, ideal)
    diagnostics["fidelity_raw"] = f_raw
    diagnostics["fidelity_corrected"] = f_cor

    manifest = {
        "sampling_passes": [
            {"circuit": "payload", "instances": len(twirls), "shots": cfg.shots},
            {"circuit": "nec", "instances": len(twirls), "shots": cfg.shots},
        ],
        "noise_placement": "depolarizing after every gate on its qubits; no idle noise",
        "twirl_mode": "shared" if cfg.shared_twirls else "independent",
        "nec_source": "untwirled payload",
        "twirls": twirls,
    }
    result = ExperimentResult(
        name=cfg.label, n_qubits=n, ideal=ideal, raw=raw, nec=nec_dist,
        nec_ideal_output=k, corrected=corr.corrected, quasi=corr.quasi,
        fidelity_raw=f_raw, fidelity_corrected=f_cor,
        gate_counts=gate_counts(payload), nec_gate_counts=gate_counts(nec),
        diagnostics=diagnostics, config=cfg.to_json(), seeds=seeds, manifest=manifest,
        raw_counts=raw_counts, nec_counts=nec_counts,
    )
    if cfg.out_dir:
        save_result(result, cfg.out_dir)
    return result


def _accumulate(total: dict, counts: dict) -> None:
    for key, v in counts.items():
        total[key] = total.get(key, 0) + v


# ---------------------------------------------------------------- persistence

def counts_json(counts: dict[int, int], n: int, **metadata) -> dict:
    return {"counts": _bitstring_counts(counts, n), "metadata": {"n_qubits": n, **metadata}}


def save_result(result: ExperimentResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{result.name}.json"
    path.write_text(dumps_result(result))
    meta = {"shots": result.config["shots"], "seed": result.config["seed"],
            "noise_model": {k: result.config[k] for k in ("p1", "p2", "p_meas")}}
    (out / f"{result.name}_payload_counts.json").write_text(
        json.dumps(counts_json(result.raw_counts, result.n_qubits, **meta), indent=1))
    (out / f"{result.name}_nec_counts.json").write_text(
        json.dumps(counts_json(result.nec_counts, result.n_qubits, **meta), indent=1))
    write_histogram_csv(result, out / f"{result.name}_histogram.csv")
    return path


def load_result(path) -> ExperimentResult:
    return ExperimentResult.from_json(json.loads(Path(path).read_text()))


def ingest_counts(path) -> tuple[SparseDistribution, dict]:
    """Read a counts JSON file into a normalized distribution plus metadata.

    Accepts ``{"counts": {...}, "metadata": {...}}`` or a bare bitstring map.
    Values may be counts or probabilities.
    """
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise DistributionError("counts file must hold a JSON object")
    if "counts" in data:
        body, metadata = data["counts"], data.get("metadata", {})
    else:
        body, metadata = data, {}
    n, entries = parse_bitstring_map(body)
    if "n_qubits" in metadata and metadata["n_qubits"] != n:
        raise DistributionError(
            f"metadata n_qubits={metadata['n_qubits']} but bitstrings have width {n}"
        )
    if any(v < 0 for v in entries.values()):
        raise DistributionError("negative counts")
    total = math.fsum(entries.values())
    if total <= 0:
        raise DistributionError("zero total counts")
    dist = SparseDistribution(n, {k: v / total for k, v in entries.items() if v})
    return dist, {"n_qubits": n, **metadata}


# ---------------------------------------------------------------- report

def histogram_rows(result: ExperimentResult, cutoff: float = 1e-3) -> list[dict]:
    """Histogram rows over the ideal support (ideal >= cutoff) plus a "rest" row."""
    shown = sorted(k for k, v in result.ideal.entries.items() if v >= cutoff)
    rows = []
    for key in shown:
        rows.append({
            "index": key,
            "bitstring": format(key, f"0{result.n_qubits}b"),
            "ideal": result.ideal.get(key),
            "raw": result.raw.get(key),
            "corrected": result.corrected.get(key),
        })
    rest = {"index": "rest", "bitstring": ""}
    for col in ("ideal", "raw", "corrected"):
        rest[col] = max(0.0, 1.0 - math.fsum(r[col] for r in rows))
    rows.append(rest)
    return rows


def write_histogram_csv(result: ExperimentResult, path, cutoff: float = 1e-3) -> None:
    rows = histogram_rows(result, cutoff)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["index", "bitstring", "ideal", "raw", "corrected"])
        w.writeheader()
        w.writerows(rows)


def fidelity_table(results: list[ExperimentResult]) -> list[list]:
    """Rows ``[label, fid per experiment...]`` for corrected then raw."""
    header = [""] + [r.name for r in results]
    cor = ["Cor."] + [r.fidelity_corrected for r in results]
    raw = ["Raw"] + [r.fidelity_raw for r in results]
    return [header, cor, raw]


def format_table(table: list[list]) -> str:
    def cell(v):
        return f"{v:.3f}" if isinstance(v, float) else str(v)

    cells = [[cell(v) for v in row] for row in table]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cells[0]))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines)


def report(results: list[ExperimentResult], out_dir=None, cutoff: float = 1e-3) -> str:
    """Fidelity table text; with ``out_dir`` also writes the table CSV and one
    histogram CSV per experiment."""
    if not results:
        raise ValueError("report needs at least one result")
    table = fidelity_table(results)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "fidelity_table.csv", "w", newline="") as fh:
            csv.writer(fh).writerows(table)
        for r in results:
            write_histogram_csv(r, out / f"{r.name}_histogram.csv", cutoff)
    return format_table(table)
