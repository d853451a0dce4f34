"""Batched statevector kernels.

States are 2-D arrays of shape ``(batch, 2**n)``. Qubit ``q`` is bit ``q`` of the
basis index (little endian), so the bitstring ``format(i, f"0{n}b")`` has the
highest qubit first. All kernels mutate their input in place.
"""
from __future__ import annotations

import numpy as np

from .circuit_ir import Circuit, GateKind, GateOp

_S2 = 1 / np.sqrt(2)
SX_MATRIX = np.array([[1, -1j], [-1j, 1]], dtype=complex) * _S2
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * _S2
X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def gate_matrix(op: GateOp) -> np.ndarray:
    """Dense matrix of ``op``; for two-qubit gates the first listed qubit is the
    low bit of the 4x4 index."""
    k = op.kind
    if k is GateKind.SX:
        return SX_MATRIX.copy()
    if k is GateKind.H:
        return H_MATRIX.copy()
    if k is GateKind.X:
        return X_MATRIX.copy()
    if k is GateKind.RZ:
        return rz_matrix(op.angle)
    if k is GateKind.RY:
        return ry_matrix(op.angle)
    if k is GateKind.CZ:
        return np.diag([1, 1, 1, -1]).astype(complex)
    if k is GateKind.CP:
        return np.diag([1, 1, 1, np.exp(1j * op.angle)])
    if k is GateKind.CX:
        # control = qubits[0] (low bit), target = qubits[1]
        m = np.eye(4, dtype=complex)
        m[[1, 3]] = m[[3, 1]]
        return m
    raise ValueError(f"no matrix for {k}")


def _view1(states: np.ndarray, n: int, q: int) -> np.ndarray:
    return states.reshape(states.shape[0], 1 << (n - 1 - q), 2, 1 << q)


def _view2(states: np.ndarray, n: int, a: int, b: int):
    """View with the higher qubit on axis 2 and the lower on axis 4."""
    lo, hi = (a, b) if a < b else (b, a)
    v = states.reshape(
        states.shape[0], 1 << (n - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo
    )
    return v, lo, hi


def _sel2(v, bit_hi: int, bit_lo: int):
    return v[:, :, bit_hi, :, bit_lo, :]


def apply_1q(states: np.ndarray, n: int, q: int, m: np.ndarray) -> None:
    v = _view1(states, n, q)
    a0 = v[:, :, 0, :].copy()
    a1 = v[:, :, 1, :]
    if m[0, 1] == 0 and m[1, 0] == 0:
        if m[0, 0] != 1:
            v[:, :, 0, :] *= m[0, 0]
        if m[1, 1] != 1:
            a1 *= m[1, 1]
        return
    v[:, :, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    v[:, :, 1, :] = m[1, 0] * a0 + m[1, 1] * v[:, :, 1, :]


def apply_op(states: np.ndarray, n: int, op: GateOp, conj: bool = False) -> None:
    """Apply ``op`` (or its elementwise complex conjugate) to every row."""
    if not states.flags.c_contiguous:
        raise ValueError("state array must be C-contiguous (kernels work on reshaped views)")
    k = op.kind
    if k is GateKind.X:
        v = _view1(states, n, op.qubits[0])
        v[...] = v[:, :, ::-1, :].copy()
    elif k in (GateKind.SX, GateKind.H, GateKind.RZ, GateKind.RY):
        m = gate_matrix(op)
        apply_1q(states, n, op.qubits[0], m.conj() if conj else m)
    elif k is GateKind.CZ:
        v, _, _ = _view2(states, n, *op.qubits)
        _sel2(v, 1, 1)[...] *= -1
    elif k is GateKind.CP:
        v, _, _ = _view2(states, n, *op.qubits)
        phase = np.exp(1j * op.angle)
        _sel2(v, 1, 1)[...] *= phase.conjugate() if conj else phase
    elif k is GateKind.CX:
        c, t = op.qubits
        v, lo, _ = _view2(states, n, c, t)
        if c == lo:
            a, b = _sel2(v, 0, 1), _sel2(v, 1, 1)
        else:
            a, b = _sel2(v, 1, 0), _sel2(v, 1, 1)
        tmp = a.copy()
        a[...] = b
        b[...] = tmp
    else:
        raise ValueError(f"cannot apply {k}")


def pauli_signs(n: int, z_mask: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return 1 - 2 * (np.bitwise_count(idx & z_mask) & 1).astype(np.int64)


def apply_pauli(states: np.ndarray, n: int, x_mask: int, z_mask: int) -> np.ndarray:
    """Return ``P @ row`` for each row, up to the global phase ``i**(#Y)``."""
    idx = np.arange(1 << n, dtype=np.int64)
    out = states
    if z_mask:
        out = out * pauli_signs(n, z_mask)
    if x_mask:
        out = out[:, idx ^ x_mask]
    return out


def zero_state(n: int, batch: int = 1) -> np.ndarray:
    s = np.zeros((batch, 1 << n), dtype=complex)
    s[:, 0] = 1.0
    return s


def run(c: Circuit, states: np.ndarray | None = None) -> np.ndarray:
    """Evolve ``states`` (default ``|0...0>``) through ``c``; returns the array."""
    if states is None:
        states = zero_state(c.n_qubits)
    for op in c.ops:
        apply_op(states, c.n_qubits, op)
    return states


def statevector(c: Circuit) -> np.ndarray:
    return run(c)[0]


def unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of ``c`` (column j is the image of basis state j)."""
    rows = np.eye(1 << c.n_qubits, dtype=complex)
    return run(c, rows).T


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-10) -> bool:
    """True when ``u = e^{i phi} v`` elementwise within ``atol``."""
    u = np.asarray(u).ravel()
    v = np.asarray(v).ravel()
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) < atol:
        return bool(np.allclose(u, 0, atol=atol))
    phase = u[k] / v[k]
    if abs(abs(phase) - 1) > 1e-6:
        return False
    return bool(np.max(np.abs(u - phase * v)) <= atol)
