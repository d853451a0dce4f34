import math

import numpy as np
from hypothesis import strategies as st

from decpauli.circuit_ir import Circuit, cz, rz, sx, x


@st.composite
def native_circuits(draw, max_qubits=5, max_ops=40):
    n = draw(st.integers(1, max_qubits))
    n_ops = draw(st.integers(0, max_ops))
    ops = []
    for _ in range(n_ops):
        kind = draw(st.sampled_from(["cz", "sx", "rz", "x"] if n > 1 else ["sx", "rz", "x"]))
        if kind == "cz":
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            ops.append(cz(a, b))
        elif kind == "rz":
            theta = draw(st.floats(-4 * math.pi, 4 * math.pi, allow_nan=False))
            ops.append(rz(theta, draw(st.integers(0, n - 1))))
        else:
            ops.append({"sx": sx, "x": x}[kind](draw(st.integers(0, n - 1))))
    return Circuit(n, tuple(ops), "random")


def random_native(rng: np.random.Generator, n: int, n_ops: int) -> Circuit:
    ops = []
    for _ in range(n_ops):
        r = rng.integers(4) if n > 1 else rng.integers(1, 4)
        q = int(rng.integers(n))
        if r == 0:
            a, b = rng.choice(n, 2, replace=False)
            ops.append(cz(int(a), int(b)))
        elif r == 1:
            ops.append(sx(q))
        elif r == 2:
            ops.append(rz(float(rng.uniform(-np.pi, np.pi)), q))
        else:
            ops.append(x(q))
    return Circuit(n, tuple(ops), "random")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
