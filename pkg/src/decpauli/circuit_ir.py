"""Circuit data model and the line-based text format.

Format (one op per line, ``#`` starts a comment)::

    qubits 3
    sx q0
    rz(1.5707963267948966) q1
    cz q0,q1

Angles are written with ``repr`` so a parse/serialize round trip is bit-exact.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum


class GateKind(str, Enum):
    CZ = "cz"
    SX = "sx"
    RZ = "rz"
    X = "x"
    H = "h"
    CX = "cx"
    RY = "ry"
    CP = "cp"
    MEASURE_ALL = "measure_all"


NATIVE_KINDS = frozenset({GateKind.CZ, GateKind.SX, GateKind.RZ, GateKind.X})
PARAMETRIC_KINDS = frozenset({GateKind.RZ, GateKind.RY, GateKind.CP})
TWO_QUBIT_KINDS = frozenset({GateKind.CZ, GateKind.CX, GateKind.CP})

_ARITY = {k: (2 if k in TWO_QUBIT_KINDS else 1) for k in GateKind}
_ARITY[GateKind.MEASURE_ALL] = 0


class CircuitError(ValueError):
    """Invalid circuit structure (bad arity, qubit out of range, ...)."""


class CircuitParseError(CircuitError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != _ARITY[self.kind]:
            raise CircuitError(
                f"{self.kind.value} takes {_ARITY[self.kind]} qubit(s), got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.kind.value} has repeated qubits {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"negative qubit index in {self.qubits}")
        if self.kind in PARAMETRIC_KINDS:
            if self.angle is None:
                raise CircuitError(f"{self.kind.value} requires an angle")
            object.__setattr__(self, "angle", float(self.angle))
            if not math.isfinite(self.angle):
                raise CircuitError(f"non-finite angle {self.angle}")
        elif self.angle is not None:
            raise CircuitError(f"{self.kind.value} takes no angle")

    @property
    def is_native(self) -> bool:
        return self.kind in NATIVE_KINDS


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[GateOp, ...] = ()
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.n_qubits, int) or self.n_qubits < 1:
            raise CircuitError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if op.kind is GateKind.MEASURE_ALL:
                raise CircuitError("measurement is implicit at the end of the circuit")
            for q in op.qubits:
                if q >= self.n_qubits:
                    raise CircuitError(
                        f"qubit index {q} out of range for {self.n_qubits}-qubit circuit"
                    )

    @property
    def is_native(self) -> bool:
        return all(op.is_native for op in self.ops)

    def with_ops(self, ops, name: str | None = None) -> Circuit:
        return Circuit(self.n_qubits, tuple(ops), self.name if name is None else name)

    def __len__(self) -> int:
        return len(self.ops)


def cz(a, b):
    return GateOp(GateKind.CZ, (a, b))


def sx(q):
    return GateOp(GateKind.SX, (q,))


def x(q):
    return GateOp(GateKind.X, (q,))


def rz(theta, q):
    return GateOp(GateKind.RZ, (q,), theta)


def h(q):
    return GateOp(GateKind.H, (q,))


def cx(c, t):
    return GateOp(GateKind.CX, (c, t))


def ry(theta, q):
    return GateOp(GateKind.RY, (q,), theta)


def cp(lam, a, b):
    return GateOp(GateKind.CP, (a, b), lam)


_HEADER = re.compile(r"qubits\s+(\S+)\s*$")
_OP = re.compile(r"([A-Za-z_]+)\s*(?:\(([^)]*)\))?\s*(.*?)\s*$")
_QUBIT = re.compile(r"q(\d+)$")


def parse_circuit(text: str, name: str = "") -> Circuit:
    """Parse the text format into a validated :class:`Circuit`."""
    n_qubits = None
    ops: list[GateOp] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        col0 = len(line) - len(line.lstrip()) + 1
        if n_qubits is None:
            m = _HEADER.match(stripped)
            if not m:
                raise CircuitParseError("expected header 'qubits N'", lineno, col0)
            try:
                n_qubits = int(m.group(1))
            except ValueError:
                raise CircuitParseError(
                    f"invalid qubit count {m.group(1)!r}", lineno, col0 + m.start(1)
                ) from None
            if n_qubits < 1:
                raise CircuitParseError("qubit count must be positive", lineno, col0 + m.start(1))
            continue
        ops.append(_parse_op(stripped, n_qubits, lineno, col0))
    if n_qubits is None:
        raise CircuitParseError("missing header 'qubits N'", 1, 1)
    return Circuit(n_qubits, tuple(ops), name)


def _parse_op(text: str, n_qubits: int, lineno: int, col0: int) -> GateOp:
    m = _OP.match(text)
    if not m:
        raise CircuitParseError(f"cannot parse {text!r}", lineno, col0)
    gate_name, arg, operands = m.group(1).lower(), m.group(2), m.group(3)
    try:
        kind = GateKind(gate_name)
    except ValueError:
        raise CircuitParseError(f"unknown gate {gate_name!r}", lineno, col0) from None
    if kind is GateKind.MEASURE_ALL:
        raise CircuitParseError("explicit measurement is not supported", lineno, col0)

    angle = None
    if kind in PARAMETRIC_KINDS:
        if arg is None:
            raise CircuitParseError(f"{gate_name} requires an angle", lineno, col0 + m.end(1))
        try:
            angle = float(arg)
        except ValueError:
            raise CircuitParseError(
                f"invalid angle {arg!r}", lineno, col0 + m.start(2)
            ) from None
        if not math.isfinite(angle):
            raise CircuitParseError(f"non-finite angle {arg!r}", lineno, col0 + m.start(2))
    elif arg is not None:
        raise CircuitParseError(f"{gate_name} takes no angle", lineno, col0 + m.start(2))

    qubits = []
    ocol = col0 + m.start(3)
    if not operands:
        raise CircuitParseError(f"{gate_name} has no operands", lineno, ocol)
    for token in operands.split(","):
        tok = token.strip()
        qm = _QUBIT.match(tok)
        if not qm:
            raise CircuitParseError(f"invalid qubit operand {tok!r}", lineno, ocol)
        q = int(qm.group(1))
        if q >= n_qubits:
            raise CircuitParseError(
                f"qubit index {q} out of range for {n_qubits}-qubit circuit", lineno, ocol
            )
        qubits.append(q)
        ocol += len(token) + 1
    if len(qubits) != _ARITY[kind]:
        raise CircuitParseError(
            f"{gate_name} takes {_ARITY[kind]} qubit(s), got {len(qubits)}", lineno, col0
        )
    try:
        return GateOp(kind, tuple(qubits), angle)
    except CircuitError as exc:
        raise CircuitParseError(str(exc), lineno, col0) from None


def serialize_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}"]
    for op in c.ops:
        operands = ",".join(f"q{q}" for q in op.qubits)
        if op.angle is not None:
            lines.append(f"{op.kind.value}({op.angle!r}) {operands}")
        else:
            lines.append(f"{op.kind.value} {operands}")
    return "\n".join(lines)


def gate_counts(c: Circuit) -> dict[str, int]:
    """Per-kind gate counts, with zeros for kinds that do not appear."""
    counts = Counter(op.kind for op in c.ops)
    return {k.value: counts.get(k, 0) for k in GateKind if k is not GateKind.MEASURE_ALL}
