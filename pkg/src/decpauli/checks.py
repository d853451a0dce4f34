"""Independent oracles and the property suites behind ``decpauli validate``.

The oracles here deliberately avoid the fast paths in :mod:`decpauli.dec_core`:
Hadamard matrices are built by Kronecker products, XOR convolution is a double
loop, and simplex projection enumerates supports.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from . import statevector as sv
from .catalog import catalog
from .dec_core import correct, fwht, ifwht, project_to_simplex
from .distributions import SparseDistribution
from .lowering import lower_to_native, pauli_twirl
from .noise_sim import PauliChannel, brute_force_assignment


# ---------------------------------------------------------------- oracles

def naive_hadamard(t: int) -> np.ndarray:
    h = np.array([[1.0]])
    for _ in range(t):
        h = np.kron(np.array([[1.0, 1.0], [1.0, -1.0]]), h)
    return h


def naive_xor_convolve(a, x) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros(a.size)
    for s in range(a.size):
        for d in range(a.size):
            out[s] += a[d] * x[s ^ d]
    return out


def brute_force_simplex(v) -> np.ndarray:
    """Closest point of the simplex by trying every support set.

    On a fixed support S the nearest point of the affine slice is
    ``v_S - (sum v_S - 1)/|S|``; the projection is the feasible candidate
    with the smallest distance.
    """
    v = np.asarray(v, dtype=float)
    best, best_d = None, np.inf
    for r in range(1, v.size + 1):
        for support in itertools.combinations(range(v.size), r):
            s = list(support)
            cand = np.zeros_like(v)
            cand[s] = v[s] - (v[s].sum() - 1) / len(s)
            if cand.min() < -1e-15:
                continue
            d = np.sum((cand - v) ** 2)
            if d < best_d - 1e-15:
                best, best_d = np.clip(cand, 0, None), d
    return best


def is_symmetric(m, tol=1e-12) -> bool:
    return bool(np.max(np.abs(m - m.T)) <= tol)


def is_doubly_stochastic(m, tol=1e-12) -> bool:
    return bool(
        m.min() >= -tol
        and np.max(np.abs(m.sum(axis=0) - 1)) <= tol
        and np.max(np.abs(m.sum(axis=1) - 1)) <= tol
    )


def is_xor_shift_invariant(m, tol=1e-12) -> bool:
    """m[j ^ s, l ^ s] == m[j, l] for every shift s."""
    dim = m.shape[0]
    idx = np.arange(dim)
    return all(
        np.max(np.abs(m[np.ix_(idx ^ s, idx ^ s)] - m)) <= tol for s in range(dim)
    )


def is_recursive_block_circulant(m, tol=1e-12) -> bool:
    """[[B, C], [C, B]] at every level of halving."""
    if m.shape[0] == 1:
        return True
    h = m.shape[0] // 2
    b, c = m[:h, :h], m[:h, h:]
    if np.max(np.abs(m[h:, h:] - b)) > tol or np.max(np.abs(m[h:, :h] - c)) > tol:
        return False
    return is_recursive_block_circulant(b, tol) and is_recursive_block_circulant(c, tol)


# ---------------------------------------------------------------- suites

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(name, fn, *args) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = fn(*args)
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def circulant_suite(rng: np.random.Generator, n_channels: int = 100, tol: float = 1e-12):
    failures = 0
    for i in range(n_channels):
        n = 1 + i % 4
        a = brute_force_assignment(PauliChannel.random(n, rng))
        ok = (
            is_symmetric(a, tol)
            and is_doubly_stochastic(a, tol)
            and is_xor_shift_invariant(a, tol)
            and is_recursive_block_circulant(a, tol)
        )
        failures += not ok
    return failures == 0, f"{n_channels - failures}/{n_channels} channels structured"


def fwht_suite(rng: np.random.Generator, t_max: int = 10, tol: float = 1e-10):
    worst_rt = worst_naive = worst_conv = 0.0
    for t in range(t_max + 1):
        v = rng.normal(size=1 << t)
        w = fwht(v)
        worst_rt = max(worst_rt, np.max(np.abs(ifwht(w) - v)))
        worst_naive = max(worst_naive, np.max(np.abs(w - naive_hadamard(t) @ v)))
        if t <= 7:
            a, x = rng.random(1 << t), rng.random(1 << t)
            conv = naive_xor_convolve(a, x)
            worst_conv = max(worst_conv, np.max(np.abs(fwht(conv) - fwht(a) * fwht(x))))
    worst = max(worst_rt, worst_naive, worst_conv)
    return worst <= tol, (
        f"round trip {worst_rt:.1e}, naive {worst_naive:.1e}, convolution {worst_conv:.1e}"
    )


def recovery_suite(rng: np.random.Generator, trials: int = 60, tol: float = 1e-9):
    worst, used = 0.0, 0
    for i in range(trials):
        n = 1 + i % 6
        ch = PauliChannel.random(n, rng)
        spectrum = fwht(brute_force_assignment(ch)[:, 0])
        if np.min(np.abs(spectrum)) <= 1e-12:
            continue
        x = rng.dirichlet(np.ones(1 << n))
        z = brute_force_assignment(ch) @ x
        k = int(rng.integers(1 << n))
        col = brute_force_assignment(ch)[:, k]
        res = correct(
            SparseDistribution.from_dense(z), SparseDistribution.from_dense(col), k, t_max=n
        )
        worst = max(worst, np.max(np.abs(res.corrected.to_dense() - x)))
        used += 1
    return used > 0 and worst <= tol, f"{used} invertible instances, max error {worst:.1e}"


def projection_suite(rng: np.random.Generator, trials: int = 200, tol: float = 1e-6):
    worst = 0.0
    idem = True
    for _ in range(trials):
        v = rng.normal(scale=0.6, size=int(rng.integers(1, 6)))
        p = project_to_simplex(v)
        worst = max(worst, np.max(np.abs(p - brute_force_simplex(v))))
        idem &= bool(np.max(np.abs(project_to_simplex(p) - p)) <= 1e-12)
        idem &= bool(p.min() >= 0 and abs(p.sum() - 1) <= 1e-12)
    return worst <= tol and idem, f"max deviation {worst:.1e}, strict+idempotent {idem}"


DEFAULT_TWIRL_CIRCUITS = (
    ("ghz", {"n": 5}),
    ("dicke_n1", {"n": 4}),
    ("qpe", {"m": 3, "theta": 0.3}),
    ("grover", {"n": 3}),
)


def twirl_suite(rng: np.random.Generator, instances: int = 50, tol: float = 1e-10,
                circuits=DEFAULT_TWIRL_CIRCUITS):
    bad = 0
    total = 0
    for fam, params in circuits:
        base = lower_to_native(catalog(fam, **params))
        ref = sv.statevector(base)
        for _ in range(instances):
            tw, _ = pauli_twirl(base, int(rng.integers(2**32)))
            bad += not sv.equal_up_to_phase(sv.statevector(tw), ref, tol)
            total += 1
    return bad == 0, f"{total - bad}/{total} twirled instances match"


SUITES = {
    "circulant": circulant_suite,
    "fwht": fwht_suite,
    "recovery": recovery_suite,
    "projection": projection_suite,
    "twirl": twirl_suite,
}


def run_suites(seed: int = 0, names=None) -> list[CheckResult]:
    names = list(SUITES) if names is None else list(names)
    out = []
    for i, name in enumerate(names):
        rng = np.random.default_rng([seed, i])
        out.append(_timed(name, SUITES[name], rng))
    return out
