"""Compiled per-trajectory statevector loop used by the noisy sampler."""
from __future__ import annotations

import numpy as np
from numba import njit

from .circuit_ir import GateKind
from .statevector import gate_matrix

DENSE_1Q, DIAG_1Q, FLIP, PHASE_11, CNOT = 0, 1, 2, 3, 4


def encode_ops(ops):
    """Flatten gate ops into kernel arrays (kind, q0, q1, 2x2 matrix, phase)."""
    L = len(ops)
    kinds = np.zeros(L, dtype=np.int64)
    q0 = np.zeros(L, dtype=np.int64)
    q1 = np.zeros(L, dtype=np.int64)
    mats = np.zeros((L, 2, 2), dtype=np.complex128)
    phases = np.ones(L, dtype=np.complex128)
    for i, op in enumerate(ops):
        k = op.kind
        q0[i] = op.qubits[0]
        if len(op.qubits) == 2:
            q1[i] = op.qubits[1]
        if k is GateKind.X:
            kinds[i] = FLIP
        elif k is GateKind.CZ:
            kinds[i], phases[i] = PHASE_11, -1.0
        elif k is GateKind.CP:
            kinds[i], phases[i] = PHASE_11, np.exp(1j * op.angle)
        elif k is GateKind.CX:
            kinds[i] = CNOT
        else:
            m = gate_matrix(op)
            mats[i] = m
            kinds[i] = DIAG_1Q if m[0, 1] == 0 and m[1, 0] == 0 else DENSE_1Q
    return kinds, q0, q1, mats, phases


@njit(cache=True, nogil=True)
def _apply(state, kind, qa, qb, m, ph):
    dim = state.size
    if kind == DENSE_1Q:
        step = 1 << qa
        for i in range(dim):
            if i & step:
                continue
            a0 = state[i]
            a1 = state[i | step]
            state[i] = m[0, 0] * a0 + m[0, 1] * a1
            state[i | step] = m[1, 0] * a0 + m[1, 1] * a1
    elif kind == DIAG_1Q:
        step = 1 << qa
        for i in range(dim):
            if i & step:
                state[i] *= m[1, 1]
            else:
                state[i] *= m[0, 0]
    elif kind == FLIP:
        step = 1 << qa
        for i in range(dim):
            if not i & step:
                tmp = state[i]
                state[i] = state[i | step]
                state[i | step] = tmp
    elif kind == PHASE_11:
        mask = (1 << qa) | (1 << qb)
        for i in range(dim):
            if i & mask == mask:
                state[i] *= ph
    else:
        c = 1 << qa
        t = 1 << qb
        for i in range(dim):
            if (i & c) and not (i & t):
                tmp = state[i]
                state[i] = state[i | t]
                state[i | t] = tmp


@njit(cache=True, nogil=True)
def _pauli(state, out, xm, zm):
    for i in range(state.size):
        v = i & zm
        odd = 0
        while v:
            v &= v - 1
            odd ^= 1
        out[i ^ xm] = -state[i] if odd else state[i]
    state[:] = out


@njit(cache=True, nogil=True)
def block_unitaries(kinds, q0, q1, mats, phases, dim, block):
    """Dense unitary of each aligned run of ``block`` ops (full runs only)."""
    n_blocks = kinds.size // block
    out = np.zeros((n_blocks, dim, dim), dtype=np.complex128)
    col = np.empty(dim, dtype=np.complex128)
    for b in range(n_blocks):
        for j in range(dim):
            col[:] = 0
            col[j] = 1
            for g in range(b * block, (b + 1) * block):
                _apply(col, kinds[g], q0[g], q1[g], mats[g], phases[g])
            out[b, :, j] = col
    return out


@njit(cache=True, nogil=True)
def _evolve(state, scratch, a, b, kinds, q0, q1, mats, phases, blocks, block):
    """Apply ops a+1..b, using fused blocks for whole aligned runs."""
    i = a + 1
    if block > 0:
        while i <= b and i % block != 0:
            _apply(state, kinds[i], q0[i], q1[i], mats[i], phases[i])
            i += 1
        while i + block - 1 <= b:
            m = blocks[i // block]
            for r in range(state.size):
                acc = 0j
                for c in range(state.size):
                    acc += m[r, c] * state[c]
                scratch[r] = acc
            state[:] = scratch
            i += block
    while i <= b:
        _apply(state, kinds[i], q0[i], q1[i], mats[i], phases[i])
        i += 1


@njit(cache=True, nogil=True)
def run_rows(psi, psi_pos, kinds, q0, q1, mats, phases, blocks, block,
             first, ev_ptr, ev_loc, ev_x, ev_z, out_probs):
    """Simulate error-pattern rows sorted by first error location.

    ``psi`` is the noiseless state after op ``psi_pos`` (-1 = initial); it is
    advanced in place and the new position returned, so calls can be chained
    over consecutive row chunks.
    """
    n_ops = kinds.size
    dim = psi.size
    state = np.empty(dim, dtype=np.complex128)
    scratch = np.empty(dim, dtype=np.complex128)
    for r in range(first.size):
        g0 = first[r]
        while psi_pos < g0:
            psi_pos += 1
            _apply(psi, kinds[psi_pos], q0[psi_pos], q1[psi_pos], mats[psi_pos], phases[psi_pos])
        state[:] = psi
        cur = g0
        for e in range(ev_ptr[r], ev_ptr[r + 1]):
            _evolve(state, scratch, cur, ev_loc[e], kinds, q0, q1, mats, phases, blocks, block)
            cur = ev_loc[e]
            _pauli(state, scratch, ev_x[e], ev_z[e])
        _evolve(state, scratch, cur, n_ops - 1, kinds, q0, q1, mats, phases, blocks, block)
        for i in range(dim):
            out_probs[r, i] = state[i].real ** 2 + state[i].imag ** 2
    return psi_pos


@njit(cache=True, nogil=True)
def advance(psi, psi_pos, kinds, q0, q1, mats, phases, stop):
    while psi_pos < stop:
        psi_pos += 1
        _apply(psi, kinds[psi_pos], q0[psi_pos], q1[psi_pos], mats[psi_pos], phases[psi_pos])
    return psi_pos
