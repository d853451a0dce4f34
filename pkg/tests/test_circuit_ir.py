import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import native_circuits, random_native
from decpauli.circuit_ir import (
    Circuit,
    CircuitError,
    CircuitParseError,
    GateKind,
    GateOp,
    cz,
    gate_counts,
    parse_circuit,
    rz,
    serialize_circuit,
    sx,
    x,
)


def test_parse_simple():
    c = parse_circuit("qubits 2\nsx q0\ncz q0,q1")
    assert c.n_qubits == 2
    assert c.ops == (sx(0), cz(0, 1))


def test_parse_angle():
    c = parse_circuit("qubits 1\nrz(1.5707963267948966) q0")
    assert c.ops == (rz(math.pi / 2, 0),)


def test_comments_and_blank_lines():
    text = "# header comment\n\nqubits 2  # two\n  x q1\n\n# done\n"
    assert parse_circuit(text).ops == (x(1),)


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("qubits 2\ncz q0,q5", 2, "out of range"),
        ("qubits 2\ncz q0", 2, "takes 2 qubit"),
        ("qubits 2\nfoo q0", 2, "unknown gate"),
        ("qubits 1\nrz q0", 2, "requires an angle"),
        ("qubits 1\nrz(abc) q0", 2, "invalid angle"),
        ("qubits 1\nx(0.5) q0", 2, "takes no angle"),
        ("qubits 1\nx p0", 2, "invalid qubit"),
        ("sx q0", 1, "header"),
        ("", 1, "missing header"),
        ("qubits 0", 1, "positive"),
        ("qubits 2\ncz q1,q1", 2, "repeated qubits"),
        ("qubits 1\nmeasure_all q0", 2, "measurement"),
    ],
)
def test_parse_errors(text, line, fragment):
    with pytest.raises(CircuitParseError) as exc:
        parse_circuit(text)
    assert exc.value.line == line
    assert fragment in str(exc.value)


def test_error_column_points_at_operand():
    with pytest.raises(CircuitParseError) as exc:
        parse_circuit("qubits 3\n  cz q0,q7")
    assert exc.value.column == 9


def test_serialize_examples():
    assert serialize_circuit(Circuit(1, (x(0),))) == "qubits 1\nx q0"
    assert serialize_circuit(Circuit(2, ())) == "qubits 2"


def test_round_trip_100_gates():
    c = random_native(np.random.default_rng(7), 4, 100)
    assert parse_circuit(serialize_circuit(c)).ops == c.ops


@settings(max_examples=200, deadline=None)
@given(native_circuits())
def test_round_trip_property(c):
    back = parse_circuit(serialize_circuit(c))
    assert back.n_qubits == c.n_qubits
    assert back.ops == c.ops  # angles are bit-exact


def test_op_validation():
    with pytest.raises(CircuitError):
        GateOp(GateKind.CZ, (0,))
    with pytest.raises(CircuitError):
        GateOp(GateKind.RZ, (0,))  # missing angle
    with pytest.raises(CircuitError):
        GateOp(GateKind.X, (0,), 1.0)
    with pytest.raises(CircuitError):
        Circuit(2, (cz(0, 2),))
    with pytest.raises(CircuitError):
        Circuit(0, ())


def test_native_flag():
    assert Circuit(2, (sx(0), cz(0, 1), rz(0.1, 1), x(0))).is_native
    assert not parse_circuit("qubits 1\nh q0").is_native


def test_gate_counts():
    counts = gate_counts(Circuit(1, (x(0), x(0), sx(0))))
    assert counts["x"] == 2 and counts["sx"] == 1
    assert counts["cz"] == 0 and counts["rz"] == 0
    assert set(gate_counts(Circuit(3, ())).values()) == {0}
