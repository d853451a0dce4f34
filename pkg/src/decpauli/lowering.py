"""Native-gate lowering, Pauli twirling and noise estimation circuits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .circuit_ir import Circuit, CircuitError, GateKind, GateOp, cx, cz, h, rz, sx, x

PAULI_LABELS = "IXYZ"
_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """n-qubit Pauli as X/Z bit masks (bit q = qubit q) with a +/-1 sign."""

    n: int
    x_mask: int = 0
    z_mask: int = 0
    sign: int = 1

    def __post_init__(self):
        limit = 1 << self.n
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError(f"mask has bits beyond qubit {self.n - 1}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def from_label(cls, label: str, sign: int = 1) -> PauliString:
        """``label[q]`` is the Pauli on qubit ``q``."""
        xm = zm = 0
        for q, ch in enumerate(label.upper()):
            xb, zb = _PAULI_BITS[ch]
            xm |= xb << q
            zm |= zb << q
        return cls(len(label), xm, zm, sign)

    @property
    def label(self) -> str:
        return "".join(self.qubit_label(q) for q in range(self.n))

    def qubit_label(self, q: int) -> str:
        bits = ((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)
        return {v: k for k, v in _PAULI_BITS.items()}[bits]

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def matrix(self) -> np.ndarray:
        m = np.array([[1]], dtype=complex)
        for q in reversed(range(self.n)):
            m = np.kron(m, _PAULI_MATS[self.qubit_label(q)])
        return self.sign * m


def _cz_conjugation_table() -> dict[str, tuple[str, int]]:
    czm = np.diag([1, 1, 1, -1]).astype(complex)
    table = {}
    for a, b in product(PAULI_LABELS, repeat=2):
        p = PauliString.from_label(a + b).matrix()
        q = czm @ p @ czm
        for c, d in product(PAULI_LABELS, repeat=2):
            r = PauliString.from_label(c + d).matrix()
            for s in (1, -1):
                if np.allclose(q, s * r):
                    table[a + b] = (c + d, s)
    return table


CZ_CONJUGATION = _cz_conjugation_table()


def conjugate_by_cz(label: str) -> tuple[str, int]:
    """CZ P CZ for a two-qubit label; returns (label, sign)."""
    return CZ_CONJUGATION[label.upper()]


@dataclass
class TwirlSite:
    op_index: int
    qubits: tuple[int, int]
    pre: str
    post: str


@dataclass
class TwirlRecord:
    seed: int | None
    sites: list[TwirlSite] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "sites": [[s.op_index, list(s.qubits), s.pre, s.post] for s in self.sites],
        }

    @classmethod
    def from_json(cls, data: dict) -> TwirlRecord:
        sites = [TwirlSite(i, tuple(q), pre, post) for i, q, pre, post in data["sites"]]
        return cls(data.get("seed"), sites)


# ---------------------------------------------------------------- lowering

def _is_zero_angle(theta: float) -> bool:
    r = math.remainder(theta, 2 * math.pi)
    return abs(r) <= 1e-12


def merge_rz(ops) -> list[GateOp]:
    """Fuse RZ runs on the same qubit and drop RZ(0 mod 2pi)."""
    out: list[GateOp | None] = []
    pending: dict[int, int] = {}
    for op in ops:
        if op.kind is GateKind.RZ:
            q = op.qubits[0]
            if q in pending:
                i = pending[q]
                out[i] = rz(out[i].angle + op.angle, q)
                continue
            pending[q] = len(out)
            out.append(op)
        else:
            for q in op.qubits:
                pending.pop(q, None)
            out.append(op)
    return [op for op in out if not (op.kind is GateKind.RZ and _is_zero_angle(op.angle))]


def zxzxz(theta: float, phi: float, lam: float, q: int) -> list[GateOp]:
    """U3(theta, phi, lam) as RZ.SX.RZ.SX.RZ in time order (global phase dropped)."""
    return [rz(lam, q), sx(q), rz(theta + math.pi, q), sx(q), rz(phi + math.pi, q)]


def _lower_op(op: GateOp) -> list[GateOp]:
    k = op.kind
    if op.is_native:
        return [op]
    if k is GateKind.H:
        q = op.qubits[0]
        return [rz(math.pi / 2, q), sx(q), rz(math.pi / 2, q)]
    if k is GateKind.RY:
        return zxzxz(op.angle, 0.0, 0.0, op.qubits[0])
    if k is GateKind.CX:
        c, t = op.qubits
        return [*_lower_op(h(t)), cz(c, t), *_lower_op(h(t))]
    if k is GateKind.CP:
        a, b = op.qubits
        half = op.angle / 2
        seq = [rz(half, a), rz(half, b), cx(a, b), rz(-half, b), cx(a, b)]
        return [g for s in seq for g in _lower_op(s)]
    raise CircuitError(f"cannot lower gate kind {k}")


def lower_to_native(c: Circuit) -> Circuit:
    """Rewrite ``c`` over {CZ, SX, RZ, X}, equal to ``c`` up to global phase."""
    ops = [g for op in c.ops for g in _lower_op(op)]
    return c.with_ops(merge_rz(ops))


# ---------------------------------------------------------------- twirling

def _pauli_gates(label: str, q: int) -> list[GateOp]:
    if label == "I":
        return []
    if label == "X":
        return [x(q)]
    if label == "Z":
        return [rz(math.pi, q)]
    if label == "Y":
        return [rz(math.pi, q), x(q)]
    raise ValueError(label)


def _require_native(c: Circuit, what: str) -> None:
    bad = sorted({op.kind.value for op in c.ops if not op.is_native})
    if bad:
        raise CircuitError(f"{what} needs a native circuit; found {bad}")


def pauli_twirl(
    c: Circuit, seed: int | None = None, record: TwirlRecord | None = None
) -> tuple[Circuit, TwirlRecord]:
    """Randomized compiling of every CZ in ``c``.

    A uniformly random two-qubit Pauli P goes before each CZ and CZ.P.CZ after
    it. Passing ``record`` replays its Paulis instead of sampling (shared twirls);
    it must have one site per CZ.
    """
    _require_native(c, "pauli_twirl")
    cz_sites = [i for i, op in enumerate(c.ops) if op.kind is GateKind.CZ]
    if record is not None:
        if len(record.sites) != len(cz_sites):
            raise ValueError(
                f"twirl record has {len(record.sites)} sites, circuit has {len(cz_sites)} CZ"
            )
        pres = [s.pre for s in record.sites]
        seed = record.seed
    else:
        rng = np.random.default_rng(seed)
        draws = rng.integers(0, 16, size=len(cz_sites))
        pres = [PAULI_LABELS[d % 4] + PAULI_LABELS[d // 4] for d in draws]

    ops: list[GateOp] = []
    sites = []
    it = iter(zip(cz_sites, pres))
    for i, op in enumerate(c.ops):
        if op.kind is not GateKind.CZ:
            ops.append(op)
            continue
        site_index, pre = next(it)
        post, _ = conjugate_by_cz(pre)
        a, b = op.qubits
        ops += _pauli_gates(pre[0], a) + _pauli_gates(pre[1], b)
        ops.append(op)
        ops += _pauli_gates(post[0], a) + _pauli_gates(post[1], b)
        sites.append(TwirlSite(site_index, (a, b), pre, post))
    return c.with_ops(merge_rz(ops)), TwirlRecord(seed, sites)


# ---------------------------------------------------------------- NEC

def build_nec(c: Circuit) -> Circuit:
    """Noise estimation circuit: every SX becomes X, all else unchanged."""
    _require_native(c, "build_nec")
    ops = [x(op.qubits[0]) if op.kind is GateKind.SX else op for op in c.ops]
    return c.with_ops(ops, name=f"{c.name}_nec" if c.name else "nec")


def nec_ideal_output(nec: Circuit) -> int:
    """Basis state reached from |0...0> by a superposition-free circuit."""
    k = 0
    for op in nec.ops:
        kind = op.kind
        if kind is GateKind.X:
            k ^= 1 << op.qubits[0]
        elif kind is GateKind.CX:
            c, t = op.qubits
            if (k >> c) & 1:
                k ^= 1 << t
        elif kind in (GateKind.CZ, GateKind.RZ, GateKind.CP):
            continue
        else:
            raise CircuitError(f"{kind.value} creates superposition; not a valid NEC")
    return k
