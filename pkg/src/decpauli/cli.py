"""Command-line entry point: ``decpauli <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import checks
from .catalog import FAMILIES, catalog
from .circuit_ir import parse_circuit, serialize_circuit
from .dec_core import correct, fidelity
from .distributions import SparseDistribution
from .lowering import build_nec, lower_to_native, nec_ideal_output, pauli_twirl
from .noise_sim import NoiseModel, exact_noisy_distribution, sample_counts, simulate_noiseless
from .pipeline import (
    ExperimentConfig,
    counts_json,
    dumps_result,
    ingest_counts,
    load_result,
    report,
    run_experiment,
)

log = logging.getLogger("decpauli")


def resolve_seed(seed: int | None) -> int | None:
    """Explicit ``--seed`` wins, then ``DEC_SEED``, else None (fresh entropy)."""
    if seed is not None:
        return seed
    env = os.environ.get("DEC_SEED")
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise SystemExit(f"DEC_SEED must be an integer, got {env!r}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _read_circuit(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_circuit(text, name=Path(path).stem if path != "-" else "stdin")


def _family_params(args) -> dict:
    params = {}
    for key in ("n", "m", "theta", "iterations"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    return params


def _noise(args) -> NoiseModel:
    return NoiseModel(args.p1, args.p2, args.p_meas)


def _dist_json(d: SparseDistribution) -> dict:
    return d.to_bitstrings()


# ---------------------------------------------------------------- commands

def cmd_build(args):
    c = catalog(args.family, **_family_params(args))
    if args.lower:
        c = lower_to_native(c)
    _emit(serialize_circuit(c), args.out)


def cmd_lower(args):
    _emit(serialize_circuit(lower_to_native(_read_circuit(args.circuit))), args.out)


def cmd_twirl(args):
    c = _read_circuit(args.circuit)
    if not c.is_native:
        c = lower_to_native(c)
    tw, rec = pauli_twirl(c, resolve_seed(args.seed))
    _emit(serialize_circuit(tw), args.out)
    if args.record:
        Path(args.record).write_text(json.dumps(rec.to_json(), indent=1))


def cmd_nec(args):
    c = _read_circuit(args.circuit)
    if not c.is_native:
        c = lower_to_native(c)
    nec = build_nec(c)
    k = nec_ideal_output(nec)
    header = f"# ideal output {format(k, f'0{nec.n_qubits}b')}\n"
    _emit(header + serialize_circuit(nec), args.out)


def cmd_simulate(args):
    c = _read_circuit(args.circuit)
    if not c.is_native:
        c = lower_to_native(c)
    nm = _noise(args)
    seed = resolve_seed(args.seed)
    meta = {"shots": args.shots, "seed": seed, "noise_model": nm.to_json()}
    if args.exact or args.noiseless:
        dist = simulate_noiseless(c) if args.noiseless else exact_noisy_distribution(c, nm)
        meta["shots"] = None
        if args.noiseless:
            meta["noise_model"] = None
        data = {"counts": _dist_json(dist), "metadata": {"n_qubits": c.n_qubits, **meta}}
    else:
        counts = sample_counts(c, nm, args.shots, seed, args.shots_per_trajectory)
        data = counts_json(counts, c.n_qubits, **meta)
    _emit(json.dumps(data, indent=1), args.out)


def cmd_correct(args):
    z, zmeta = ingest_counts(args.payload)
    b, _ = ingest_counts(args.nec)
    if args.k is not None:
        k = int(args.k, 2)
    elif args.nec_circuit:
        k = nec_ideal_output(_read_circuit(args.nec_circuit))
    else:
        raise SystemExit("give --k or --nec-circuit to fix the NEC ideal output")
    res = correct(z, b, k, args.t_max, args.eps)
    diag = dict(res.diagnostics)
    diag["fidelity_raw"] = diag["fidelity_corrected"] = None
    if args.ideal:
        ideal, _ = ingest_counts(args.ideal)
        diag["fidelity_raw"] = fidelity(z, ideal)
        diag["fidelity_corrected"] = fidelity(res.corrected, ideal)
    data = {
        "corrected": _dist_json(res.corrected),
        "quasi": _dist_json(res.quasi),
        "diagnostics": diag,
        "metadata": zmeta,
    }
    _emit(json.dumps(data, indent=1, sort_keys=True), args.out)


def cmd_fidelity(args):
    p, _ = ingest_counts(args.first)
    q, _ = ingest_counts(args.second)
    print(repr(fidelity(p, q)))


def _config_from_args(args) -> ExperimentConfig:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.family:
        data["family"] = args.family
        data.pop("circuit_path", None)
    if args.circuit:
        data["circuit_path"] = args.circuit
        data.pop("family", None)
    params = _family_params(args)
    if params:
        data["params"] = {**data.get("params", {}), **params}
    overrides = {
        "shots": args.shots, "p1": args.p1, "p2": args.p2, "p_meas": args.p_meas,
        "t_max": args.t_max, "eps": args.eps, "n_rand": args.n_rand,
        "out_dir": args.out, "name": args.name,
        "shots_per_trajectory": args.shots_per_trajectory,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.shared_twirls:
        data["shared_twirls"] = True
    seed = resolve_seed(args.seed)
    if seed is not None:
        data["seed"] = seed
    elif "seed" not in data:
        data["seed"] = 0
    return ExperimentConfig.from_json(data)


def cmd_run(args):
    cfg = _config_from_args(args)
    result = run_experiment(cfg)
    if not cfg.out_dir:
        print(dumps_result(result))
    print(
        f"{result.name}: raw {result.fidelity_raw:.4f} corrected "
        f"{result.fidelity_corrected:.4f} (t={result.diagnostics['t']})",
        file=sys.stderr,
    )


def cmd_report(args):
    results = [load_result(p) for p in args.results]
    print(report(results, args.out, args.cutoff))


def cmd_validate(args):
    seed = resolve_seed(args.seed)
    results = checks.run_suites(0 if seed is None else seed, args.suite or None)
    for r in results:
        print(r.line())
    if not all(r.passed for r in results):
        raise SystemExit(1)


# ---------------------------------------------------------------- parser

def _add_noise(p, defaults=True):
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--p1", type=float, default=d(0.001), help="1q depolarizing probability")
    p.add_argument("--p2", type=float, default=d(0.01), help="2q depolarizing probability")
    p.add_argument("--p-meas", type=float, default=d(0.0), help="readout flip probability")


def _add_family_params(p):
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int, help="QPE counting qubits")
    p.add_argument("--theta", type=float, help="QPE phase")
    p.add_argument("--iterations", type=int, help="Grover iterations")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="decpauli", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="emit a catalog circuit")
    p.add_argument("family", choices=FAMILIES)
    _add_family_params(p)
    p.add_argument("--lower", action="store_true", help="lower to {cz, sx, rz, x}")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("lower", help="lower a circuit file to the native gate set")
    p.add_argument("circuit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lower)

    p = sub.add_parser("twirl", help="insert a random Pauli twirl around each CZ")
    p.add_argument("circuit")
    p.add_argument("--seed", type=int)
    p.add_argument("--record", help="write the TwirlRecord JSON here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_twirl)

    p = sub.add_parser("nec", help="build the noise estimation circuit")
    p.add_argument("circuit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_nec)

    p = sub.add_parser("simulate", help="sample noisy counts")
    p.add_argument("circuit")
    p.add_argument("--shots", type=int, default=200_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--shots-per-trajectory", type=int, default=1)
    _add_noise(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="density-matrix probabilities")
    g.add_argument("--noiseless", action="store_true", help="ideal probabilities")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("correct", help="correct payload counts with NEC counts")
    p.add_argument("--payload", required=True)
    p.add_argument("--nec", required=True)
    p.add_argument("--k", help="NEC ideal output bitstring")
    p.add_argument("--nec-circuit", help="derive the NEC ideal output from this circuit")
    p.add_argument("--ideal", help="ideal distribution for fidelity diagnostics")
    p.add_argument("--t-max", type=int, default=15)
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--out")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("fidelity", help="classical fidelity of two distributions")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("run", help="full experiment")
    p.add_argument("--config", help="ExperimentConfig JSON")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--family", choices=FAMILIES)
    g.add_argument("--circuit", help="circuit file instead of a catalog family")
    _add_family_params(p)
    p.add_argument("--name")
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--shots-per-trajectory", type=int)
    _add_noise(p, defaults=False)
    p.add_argument("--t-max", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--n-rand", type=int)
    p.add_argument("--shared-twirls", action="store_true")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="fidelity table and histogram CSVs")
    p.add_argument("results", nargs="+")
    p.add_argument("--cutoff", type=float, default=1e-3)
    p.add_argument("--out", help="output directory for CSVs")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("validate", help="run the property suites")
    p.add_argument("--seed", type=int)
    p.add_argument("--suite", action="append", choices=list(checks.SUITES))
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
