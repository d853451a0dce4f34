"""Benchmark circuit families and their analytic ideal output distributions.

Circuits are returned before lowering (they may contain H, CX, RY, CP).
"""
from __future__ import annotations

import math

import numpy as np

from .circuit_ir import Circuit, CircuitError, GateOp, cp, cx, h, rz, ry, x

FAMILIES = ("ghz", "dicke_n1", "qpe", "grover")


def ghz(n: int) -> Circuit:
    _check_n(n, 2)
    ops = [h(0)] + [cx(i, i + 1) for i in range(n - 1)]
    return Circuit(n, tuple(ops), f"ghz{n}")


def dicke_n1(n: int) -> Circuit:
    """Equal superposition of the n one-hot strings (W state).

    Amplitude is moved down the register with controlled-RY steps, each
    followed by a CX back onto the control.
    """
    _check_n(n, 2)
    ops: list[GateOp] = [x(0)]
    for i in range(n - 1):
        theta = 2 * math.acos(math.sqrt(1 / (n - i)))
        ops += [ry(theta / 2, i + 1), cx(i, i + 1), ry(-theta / 2, i + 1), cx(i, i + 1)]
        ops.append(cx(i + 1, i))
    return Circuit(n, tuple(ops), f"dicke{n}_1")


def mc_phase(qubits, lam: float) -> list[GateOp]:
    """Phase ``exp(i lam)`` on the all-ones state of ``qubits`` (global phase dropped).

    Uses the parity expansion prod(x_i) = 2^{1-n} sum_S (-1)^{|S|+1} parity_S,
    with Gray-code CX walks so each parity costs one CX (2^n - 2 in total).
    """
    qubits = list(qubits)
    n = len(qubits)
    scale = lam / 2 ** (n - 1)
    ops = [rz(scale, qubits[0])]
    for k in range(1, n):
        target, controls = qubits[k], qubits[:k]
        prev = 0
        for i in range(1 << k):
            g = i ^ (i >> 1)
            diff = g ^ prev
            if diff:
                ops.append(cx(controls[diff.bit_length() - 1], target))
            size = bin(g).count("1") + 1
            ops.append(rz(scale * (-1) ** (size + 1), target))
            prev = g
        ops.append(cx(controls[prev.bit_length() - 1], target))
    return ops


def qpe(m: int, theta: float) -> Circuit:
    """Phase estimation of P(2 pi theta) on its |1> eigenstate.

    Counting qubits are 0..m-1 (value read little endian), the eigenstate
    qubit is m and is included in the output.
    """
    _check_n(m, 1)
    n = m + 1
    target = m
    ops: list[GateOp] = [x(target)] + [h(q) for q in range(m)]
    # qubit m-1-j holds the 2^j power so the inverse QFT needs no swaps
    for j in range(m):
        ops.append(cp(2 * math.pi * theta * 2**j, m - 1 - j, target))
    ops += _inverse_qft_no_swap(m)
    return Circuit(n, tuple(ops), f"qpe{n}")


def _inverse_qft_no_swap(m: int) -> list[GateOp]:
    forward: list[GateOp] = []
    for j in reversed(range(m)):
        forward.append(h(j))
        for k in reversed(range(j)):
            forward.append(cp(math.pi / 2 ** (j - k), k, j))
    inverse = []
    for op in reversed(forward):
        inverse.append(op if op.angle is None else cp(-op.angle, *op.qubits))
    return inverse


def grover_optimal_iterations(n: int) -> int:
    return math.floor(math.pi / 4 * math.sqrt(2**n))


def grover(n: int, iterations: int | None = None) -> Circuit:
    """Grover search for the all-ones string."""
    _check_n(n, 2)
    if iterations is None:
        iterations = grover_optimal_iterations(n)
    if iterations < 0:
        raise CircuitError("iterations must be non-negative")
    qs = list(range(n))
    ops: list[GateOp] = [h(q) for q in qs]
    for _ in range(iterations):
        ops += mc_phase(qs, math.pi)
        ops += [h(q) for q in qs] + [x(q) for q in qs]
        ops += mc_phase(qs, math.pi)
        ops += [x(q) for q in qs] + [h(q) for q in qs]
    return Circuit(n, tuple(ops), f"grover{n}")


def catalog(name: str, **params) -> Circuit:
    """Build a catalog circuit: ghz(n), dicke_n1(n), qpe(m, theta), grover(n, iterations)."""
    builders = {"ghz": ghz, "dicke_n1": dicke_n1, "qpe": qpe, "grover": grover}
    if name not in builders:
        raise CircuitError(f"unsupported circuit family {name!r}; choose from {FAMILIES}")
    try:
        return builders[name](**params)
    except TypeError as exc:
        raise CircuitError(f"invalid parameters for {name}: {exc}") from None


def analytic_ideal(name: str, **params) -> dict[int, float]:
    """Closed-form noiseless output distribution of a catalog circuit."""
    if name == "ghz":
        n = params["n"]
        return {0: 0.5, (1 << n) - 1: 0.5}
    if name == "dicke_n1":
        n = params["n"]
        return {1 << q: 1 / n for q in range(n)}
    if name == "qpe":
        m, theta = params["m"], params["theta"]
        N = 1 << m
        y = np.arange(N)
        out = {}
        for xv in range(N):
            amp = np.exp(2j * np.pi * y * (theta - xv / N)).sum() / N
            p = float(abs(amp) ** 2)
            if p > 1e-14:
                out[xv | (1 << m)] = p
        return out
    if name == "grover":
        n = params["n"]
        k = params.get("iterations")
        if k is None:
            k = grover_optimal_iterations(n)
        N = 1 << n
        p_marked = math.sin((2 * k + 1) * math.asin(N**-0.5)) ** 2
        rest = (1 - p_marked) / (N - 1)
        out = {i: rest for i in range(N - 1) if rest > 1e-14}
        out[N - 1] = p_marked
        return out
    raise CircuitError(f"unsupported circuit family {name!r}")


def _check_n(n, minimum: int) -> None:
    if not isinstance(n, int) or n < minimum:
        raise CircuitError(f"qubit count must be an integer >= {minimum}, got {n!r}")
