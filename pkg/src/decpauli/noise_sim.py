"""Noiseless and Pauli-noisy circuit simulation.

Noise placement: one depolarizing channel right after every gate on the gate's
own qubits (``p1`` for single-qubit gates, including RZ; ``p2`` for two-qubit
gates), no idle noise, plus optional independent readout bit flips.

:func:`sample_noisy` unravels this into Pauli trajectories; the density-matrix
routine :func:`exact_noisy_distribution` is its exact counterpart.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _kernels
from . import statevector as sv
from .circuit_ir import Circuit
from .dec_core import AssignmentColumn
from .distributions import SparseDistribution
from .lowering import PauliString

STATEVECTOR_CAP = 20
DENSITY_CAP = 8
BRUTE_FORCE_CAP = 6
TRAJECTORY_BLOCK = 2048


class CapacityError(ValueError):
    """Circuit is too wide for the requested simulation method."""


def _check_cap(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise CapacityError(f"{what} supports at most {cap} qubits, got {n}")


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    p_meas: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_meas"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def to_json(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "p_meas": self.p_meas}


@dataclass
class PauliChannel:
    """rho -> sum_i chi_i P_i rho P_i."""

    n: int
    terms: list[tuple[PauliString, float]] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for p, w in self.terms:
            if p.n != self.n:
                raise ValueError(f"Pauli on {p.n} qubits in a {self.n}-qubit channel")
            if w < 0:
                raise ValueError("channel weights must be non-negative")
            key = (p.x_mask, p.z_mask)
            if key in seen:
                raise ValueError(f"duplicate Pauli {p.label}")
            seen.add(key)
        total = math.fsum(w for _, w in self.terms)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"channel weights sum to {total}")

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, n_terms: int | None = None) -> PauliChannel:
        """Random channel on ``n_terms`` distinct Paulis with Dirichlet weights."""
        total = 4**n
        if n_terms is None:
            n_terms = int(rng.integers(1, min(total, 12) + 1))
        codes = rng.choice(total, size=min(n_terms, total), replace=False)
        weights = rng.dirichlet(np.ones(len(codes)))
        weights /= math.fsum(weights)
        terms = [
            (PauliString(n, int(c) & ((1 << n) - 1), int(c) >> n), float(w))
            for c, w in zip(codes, weights)
        ]
        # absorb the rounding residue so the weights sum to one within 1e-12
        residue = 1.0 - math.fsum(w for _, w in terms)
        p, w = terms[0]
        terms[0] = (p, w + residue)
        return cls(n, terms)


# ---------------------------------------------------------------- noiseless

def simulate_noiseless(c: Circuit, cap: int = STATEVECTOR_CAP) -> SparseDistribution:
    _check_cap(c.n_qubits, cap, "statevector simulation")
    probs = np.abs(sv.statevector(c)) ** 2
    probs[probs < 1e-14] = 0.0
    probs /= probs.sum()
    return SparseDistribution.from_dense(probs)


# ---------------------------------------------------------------- noise table

def _depolarizing_masks(qubits) -> np.ndarray:
    """(x_mask, z_mask) rows for every non-identity Pauli on ``qubits``."""
    per_qubit = [(0, 0), (1, 0), (1, 1), (0, 1)]  # I X Y Z
    rows = []
    for choice in product(range(4), repeat=len(qubits)):
        if not any(choice):
            continue
        xm = zm = 0
        for q, ci in zip(qubits, choice):
            xb, zb = per_qubit[ci]
            xm |= xb << q
            zm |= zb << q
        rows.append((xm, zm))
    return np.array(rows, dtype=np.int64)


def _noise_table(c: Circuit, nm: NoiseModel):
    probs = np.array([nm.p2 if len(op.qubits) == 2 else nm.p1 for op in c.ops])
    masks = [_depolarizing_masks(op.qubits) for op in c.ops]
    nchoices = np.array([len(m) for m in masks], dtype=np.int64)
    return probs, nchoices, masks


# ---------------------------------------------------------------- trajectories

def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, block)))


def _sample_block(probs, nchoices, row_shots: np.ndarray, seed: int, block: int):
    """Sample error patterns for one block of trajectories.

    Returns the shot count of error-free trajectories and a Counter mapping each
    pattern (bytes of int64 codes ``loc * 16 + pauli``) to its shot count.
    """
    rng = _block_rng(seed, block)
    n_rows = row_shots.size
    mult: Counter[bytes] = Counter()
    if probs.size == 0:
        return int(row_shots.sum()), mult
    hits = rng.random((n_rows, probs.size)) < probs
    rows, cols = np.nonzero(hits)
    choice = (rng.random(rows.size) * nchoices[cols]).astype(np.int64)
    codes = cols.astype(np.int64) * 16 + choice
    per_row = np.bincount(rows, minlength=n_rows)
    dirty = per_row > 0
    clean = int(row_shots[~dirty].sum())
    if codes.size:
        parts = np.split(codes, np.cumsum(per_row[dirty])[:-1])
        for part, w in zip(parts, row_shots[dirty].tolist()):
            mult[part.tobytes()] += w
    return clean, mult


ROW_CHUNK_AMPLITUDES = 1 << 22


def _pattern_events(keys: list[bytes], masks):
    """CSR event arrays (per row: location, x mask, z mask) for sorted patterns."""
    decoded = [np.frombuffer(k, dtype=np.int64) for k in keys]
    ptr = np.zeros(len(keys) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([d.size for d in decoded])
    codes = np.concatenate(decoded) if keys else np.zeros(0, dtype=np.int64)
    loc = codes >> 4
    choice = codes & 15
    ev_x = np.empty(codes.size, dtype=np.int64)
    ev_z = np.empty(codes.size, dtype=np.int64)
    for e, (g, ch) in enumerate(zip(loc.tolist(), choice.tolist())):
        ev_x[e], ev_z[e] = masks[g][ch]
    first = loc[ptr[:-1]] if keys else np.zeros(0, dtype=np.int64)
    return first, ptr, loc, ev_x, ev_z


def _simulate_patterns(c: Circuit, masks, keys: list[bytes]):
    """Yield (row slice, probability rows) per chunk, then the noiseless probabilities.

    ``keys`` must be sorted by first error location.
    """
    enc = _kernels.encode_ops(c.ops)
    dim = 1 << c.n_qubits
    psi = sv.zero_state(c.n_qubits)[0]
    pos = -1
    first, ptr, loc, ev_x, ev_z = _pattern_events(keys, masks)
    # fusing `dim` gates into one dim x dim mat-vec costs about the same as
    # stepping them, so fusion only pays off for narrow, deep circuits
    block = dim if len(c.ops) >= 4 * dim else 0
    if block:
        blocks = _kernels.block_unitaries(*enc, dim, block)
    else:
        blocks = np.zeros((0, dim, dim), dtype=np.complex128)
    chunk = max(1, ROW_CHUNK_AMPLITUDES // dim)
    for start in range(0, len(keys), chunk):
        stop = min(len(keys), start + chunk)
        out = np.empty((stop - start, dim))
        sub_ptr = ptr[start:stop + 1] - ptr[start]
        e0, e1 = ptr[start], ptr[stop]
        pos = _kernels.run_rows(
            psi, pos, *enc, blocks, block, first[start:stop], sub_ptr,
            loc[e0:e1], ev_x[e0:e1], ev_z[e0:e1], out,
        )
        yield slice(start, stop), out
    _kernels.advance(psi, pos, *enc, len(c.ops) - 1)
    yield None, np.abs(psi) ** 2


def _normalize_rows(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=-1, keepdims=True)


def sample_counts(
    c: Circuit,
    nm: NoiseModel,
    shots: int,
    seed: int | None = None,
    shots_per_trajectory: int = 1,
    workers: int = 1,
    cap: int = STATEVECTOR_CAP,
) -> dict[int, int]:
    """Histogram of ``shots`` noisy measurement outcomes (see :func:`sample_noisy`)."""
    _check_cap(c.n_qubits, cap, "statevector simulation")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if shots_per_trajectory < 1:
        raise ValueError("shots_per_trajectory must be >= 1")
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1)[0])
    n = c.n_qubits
    spt = shots_per_trajectory
    n_traj = -(-shots // spt)
    last_shots = shots - (n_traj - 1) * spt

    probs, nchoices, masks = _noise_table(c, nm)
    n_blocks = -(-n_traj // TRAJECTORY_BLOCK)

    def work(b):
        size = min(TRAJECTORY_BLOCK, n_traj - b * TRAJECTORY_BLOCK)
        row_shots = np.full(size, spt, dtype=np.int64)
        if b == n_blocks - 1:
            row_shots[-1] = last_shots
        return _sample_block(probs, nchoices, row_shots, seed, b)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(work, range(n_blocks)))
    else:
        results = [work(b) for b in range(n_blocks)]

    shot_mult: Counter[bytes] = Counter()
    clean_shots = 0
    for clean, mult in results:
        clean_shots += clean
        shot_mult.update(mult)

    # sort by first error location so the kernel can advance one noiseless prefix
    keys = sorted(shot_mult, key=lambda k: (int.from_bytes(k[:8], "little") >> 4, k))
    reps = np.array([shot_mult[k] for k in keys], dtype=np.int64)
    row_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, 0)))
    clean_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, 1)))
    total = np.zeros(1 << n, dtype=np.int64)
    for rows, probs_rows in _simulate_patterns(c, masks, keys):
        if rows is None:
            if clean_shots:
                total += clean_rng.multinomial(clean_shots, _normalize_rows(probs_rows))
        else:
            total += row_rng.multinomial(reps[rows], _normalize_rows(probs_rows)).sum(axis=0)

    if nm.p_meas > 0:
        total = _readout_flips(total, n, nm.p_meas, seed)
    return {int(k): int(v) for k, v in enumerate(total) if v}


def _readout_flips(counts: np.ndarray, n: int, p: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    outcomes = np.repeat(np.arange(counts.size, dtype=np.int64), counts)
    flips = rng.random((outcomes.size, n)) < p
    outcomes ^= flips.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))
    return np.bincount(outcomes, minlength=counts.size)


def sample_noisy(
    c: Circuit,
    nm: NoiseModel,
    shots: int,
    seed: int | None = None,
    shots_per_trajectory: int = 1,
    workers: int = 1,
    cap: int = STATEVECTOR_CAP,
) -> SparseDistribution:
    """Empirical distribution from Pauli-trajectory sampling.

    Each trajectory gets an independent X/Y/Z (prob p1/3 each) after every
    single-qubit gate and one of the 15 non-identity two-qubit Paulis (p2/15
    each) after every two-qubit gate. Identical error patterns are simulated
    once; outcomes are drawn per pattern with its shot multiplicity. Random
    streams are keyed on (seed, block) so ``workers`` does not change counts.
    """
    counts = sample_counts(c, nm, shots, seed, shots_per_trajectory, workers, cap)
    return SparseDistribution.from_counts(c.n_qubits, counts)


# ---------------------------------------------------------------- density matrix

def _conj_pauli(rho: np.ndarray, n: int, xm: int, zm: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    s = sv.pauli_signs(n, zm)
    m = rho * np.outer(s, s)
    perm = idx ^ xm
    return m[np.ix_(perm, perm)]


def _depolarize(rho: np.ndarray, n: int, masks: np.ndarray, p: float) -> np.ndarray:
    if p == 0:
        return rho
    acc = np.zeros_like(rho)
    for xm, zm in masks:
        acc += _conj_pauli(rho, n, int(xm), int(zm))
    return (1 - p) * rho + (p / len(masks)) * acc


def _apply_unitary_op(rho: np.ndarray, n: int, op) -> np.ndarray:
    t = np.ascontiguousarray(rho.T)
    sv.apply_op(t, n, op)  # (U rho)^T
    u_rho = np.ascontiguousarray(t.T)
    sv.apply_op(u_rho, n, op, conj=True)  # U rho U^dagger
    return u_rho


def evolve_density(c: Circuit, nm: NoiseModel, rho: np.ndarray) -> np.ndarray:
    n = c.n_qubits
    probs, _, masks = _noise_table(c, nm)
    for op, p, m in zip(c.ops, probs, masks):
        rho = _apply_unitary_op(rho, n, op)
        rho = _depolarize(rho, n, m, p)
        tr = np.trace(rho).real
        if abs(tr - 1) > 1e-12:
            raise RuntimeError(f"trace drifted to {tr!r} after {op}")
    return rho


def _readout_channel(diag: np.ndarray, n: int, p: float) -> np.ndarray:
    if p == 0:
        return diag
    idx = np.arange(1 << n)
    for q in range(n):
        diag = (1 - p) * diag + p * diag[idx ^ (1 << q)]
    return diag


def exact_noisy_probabilities(c: Circuit, nm: NoiseModel, initial: np.ndarray | None = None,
                              cap: int = DENSITY_CAP) -> np.ndarray:
    _check_cap(c.n_qubits, cap, "density-matrix simulation")
    psi = sv.zero_state(c.n_qubits)[0] if initial is None else np.asarray(initial, dtype=complex)
    rho = evolve_density(c, nm, np.outer(psi, psi.conj()))
    diag = np.clip(np.diagonal(rho).real, 0.0, None)
    diag = _readout_channel(diag, c.n_qubits, nm.p_meas)
    return diag / diag.sum()


def exact_noisy_distribution(c: Circuit, nm: NoiseModel, cap: int = DENSITY_CAP) -> SparseDistribution:
    """Exact output distribution under the same noise placement as :func:`sample_noisy`."""
    return SparseDistribution.from_dense(exact_noisy_probabilities(c, nm, cap=cap), cutoff=0.0)


def exact_column_oracle(c: Circuit, nm: NoiseModel, k: int, cap: int = DENSITY_CAP) -> AssignmentColumn:
    """Column ``k`` of the assignment matrix, relabeled to displacements.

    The input state is prepared as U^dagger|k> so the ideal output is exactly
    |k>; the noisy output is then XOR-shifted by ``k``. Exact when the composite
    noise is a Pauli channel (e.g. Clifford circuits with Pauli gate noise).
    """
    _check_cap(c.n_qubits, cap, "density-matrix simulation")
    u = sv.unitary(c)
    psi0 = u[k, :].conj()
    probs = exact_noisy_probabilities(c, nm, initial=psi0, cap=cap)
    idx = np.arange(1 << c.n_qubits)
    disp = probs[idx ^ k]
    disp[disp < 1e-14] = 0.0  # round-off from preparing U^dagger|k>
    disp /= disp.sum()
    nz = np.flatnonzero(disp)
    return AssignmentColumn(c.n_qubits, dict(zip(nz.tolist(), disp[nz].tolist())))


# ---------------------------------------------------------------- brute force

def brute_force_assignment(ch: PauliChannel, cap: int = BRUTE_FORCE_CAP) -> np.ndarray:
    """Dense assignment matrix A[j, l] = P(measure j | ideal basis state l).

    Built from the full Pauli matrices: A = sum_i chi_i |P_i|^2 elementwise.
    """
    _check_cap(ch.n, cap, "brute-force assignment")
    dim = 1 << ch.n
    a = np.zeros((dim, dim))
    for p, w in ch.terms:
        a += w * np.abs(p.matrix()) ** 2
    return a
