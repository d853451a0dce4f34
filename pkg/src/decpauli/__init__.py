"""Distribution-level correction of Pauli noise on measured bitstrings."""
from .catalog import analytic_ideal, catalog
from .circuit_ir import Circuit, GateKind, GateOp, parse_circuit, serialize_circuit
from .dec_core import correct, deconvolve, fidelity, fwht, ifwht, project_to_simplex
from .distributions import SparseDistribution
from .lowering import PauliString, TwirlRecord, build_nec, lower_to_native, pauli_twirl
from .noise_sim import NoiseModel, PauliChannel, sample_noisy, simulate_noiseless
from .pipeline import ExperimentConfig, ExperimentResult, ingest_counts, report, run_experiment

__version__ = "0.1.0"
