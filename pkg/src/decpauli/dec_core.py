"""Distribution correction for Pauli noise.

Under a Pauli channel the noisy distribution is the XOR convolution of the
ideal one with a single displacement distribution ``a``::

    z[s] = sum_d a[d] * x[s ^ d]

so ``x`` is recovered by dividing Walsh-Hadamard spectra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import QUASI, STRICT, DistributionError, SparseDistribution


@dataclass
class AssignmentColumn:
    """Displacement distribution: ``entries[d]`` is the probability that the
    measured outcome differs from the ideal one by XOR mask ``d``."""

    n: int
    entries: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        self.entries = {int(k): float(v) for k, v in self.entries.items()}
        if any(v < 0 for v in self.entries.values()):
            raise DistributionError("assignment column has negative weights")
        total = math.fsum(self.entries.values())
        if abs(total - 1) > 1e-9:
            raise DistributionError(f"assignment column sums to {total}")

    def to_dense(self) -> np.ndarray:
        out = np.zeros(1 << self.n)
        for k, v in self.entries.items():
            out[k] = v
        return out


# ---------------------------------------------------------------- FWHT

def _check_pow2(size: int) -> int:
    t = size.bit_length() - 1
    if size < 1 or 1 << t != size:
        raise ValueError(f"length must be a power of two, got {size}")
    return t


def fwht(v) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform W[u] = sum_v (-1)^{popcount(u & v)} f[v].

    Butterflies are done one bit at a time on a reshaped copy; O(t 2^t).
    """
    a = np.array(v, dtype=float if not np.iscomplexobj(v) else complex)
    t = _check_pow2(a.size)
    a = a.reshape(-1)
    for bit in range(t):
        view = a.reshape(-1, 2, 1 << bit)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :]
        view[:, 0, :] = lo + hi
        view[:, 1, :] = lo - hi
    return a


def ifwht(v) -> np.ndarray:
    a = fwht(v)
    return a / a.size


def xor_convolve(a, x) -> np.ndarray:
    """(a * x)[s] = sum_d a[d] x[s ^ d], via the transform."""
    return ifwht(fwht(a) * fwht(x))


# ---------------------------------------------------------------- relabel

def relabel_column(b: SparseDistribution, k: int) -> AssignmentColumn:
    """Displacement column from an NEC distribution with ideal outcome ``k``."""
    return AssignmentColumn(b.n, {d ^ k: w for d, w in b.entries.items()})


# ---------------------------------------------------------------- GF(2) compaction

@dataclass
class ReducedIndexMap:
    """Bijection between outcomes ``reference ^ v`` (v in span(basis)) and
    compact indices 0..2^t-1 given by v's coordinates in ``basis``.

    ``basis`` is kept in reduced echelon form: ``pivots[i]`` is set only in
    ``basis[i]``, so the coordinates are read straight off the pivot bits.
    """

    n: int
    reference: int
    basis: list[int]
    pivots: list[int]

    @property
    def t(self) -> int:
        return len(self.basis)

    def vectors(self) -> np.ndarray:
        """Subspace element for every compact index (a GF(2) group isomorphism)."""
        table = np.zeros(1, dtype=np.int64)
        for b in self.basis:
            table = np.concatenate([table, table ^ b])
        return table

    def coords(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(compact index, in-subspace flag) for subspace candidates ``v``."""
        v = np.asarray(v, dtype=np.int64)
        idx = np.zeros_like(v)
        recon = np.zeros_like(v)
        for i, (b, p) in enumerate(zip(self.basis, self.pivots)):
            bit = (v >> p) & 1
            idx |= bit << i
            recon ^= np.where(bit == 1, b, 0)
        return idx, recon == v

    def outcomes(self) -> np.ndarray:
        return self.vectors() ^ self.reference


class _Span:
    """Incremental GF(2) row reduction over int bit vectors."""

    def __init__(self):
        self.basis: list[int] = []
        self.pivots: list[int] = []

    def reduce(self, v: int) -> int:
        for b, p in zip(self.basis, self.pivots):
            if (v >> p) & 1:
                v ^= b
        return v

    def add(self, v: int) -> bool:
        r = self.reduce(v)
        if r == 0:
            return False
        p = r.bit_length() - 1
        for i, (b, q) in enumerate(zip(self.basis, self.pivots)):
            if (b >> p) & 1:
                self.basis[i] = b ^ r
        self.basis.append(r)
        self.pivots.append(p)
        return True


def gf2_rank(vectors) -> int:
    s = _Span()
    return sum(s.add(int(v)) for v in vectors)


@dataclass
class CompactResult:
    index_map: ReducedIndexMap
    z: np.ndarray
    a: np.ndarray
    dropped_mass_z: float
    dropped_mass_a: float

    @property
    def dropped_mass(self) -> float:
        return self.dropped_mass_z + self.dropped_mass_a


def compact_subspace(z: SparseDistribution, a: AssignmentColumn, t_max: int = 15) -> CompactResult:
    """Pack ``z`` and ``a`` into dense arrays over a common GF(2) subspace.

    With z0 = argmax z, the subspace is spanned by the displacements in supp(a)
    and by s ^ z0 for s in supp(z). If its dimension exceeds ``t_max``, the
    lowest-weight support elements are dropped until it fits: the span is that
    of the longest weight-ordered prefix with dimension <= t_max. Every support
    element inside the final span is kept; the rest is reported as dropped mass
    and the kept arrays are renormalized.
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    if not z.entries or not a.entries:
        raise DistributionError("cannot compact an empty distribution")
    if z.n != a.n:
        raise DistributionError(f"qubit counts differ: {z.n} vs {a.n}")
    z0 = z.argmax()

    # merged union, heaviest first; ties broken by vector value for determinism
    weights: dict[int, float] = {}
    for s, w in z.entries.items():
        if w > 0:
            weights[s ^ z0] = max(weights.get(s ^ z0, 0.0), w)
    for d, w in a.entries.items():
        if w > 0:
            weights[d] = max(weights.get(d, 0.0), w)
    span = _Span()
    for v in sorted(weights, key=lambda v: (-weights[v], v)):
        r = span.reduce(v)
        if r == 0:
            continue
        if len(span.basis) == t_max:
            break
        span.add(v)

    order = np.argsort(span.pivots)
    imap = ReducedIndexMap(
        z.n, z0, [span.basis[i] for i in order], [span.pivots[i] for i in order]
    )
    size = 1 << imap.t

    def pack(vectors, values):
        idx, inside = imap.coords(vectors)
        dense = np.zeros(size)
        np.add.at(dense, idx[inside], values[inside])
        kept = math.fsum(values[inside])
        dropped = math.fsum(values[~inside])
        if kept <= 0:
            raise DistributionError("truncation removed the entire support; raise t_max")
        return dense / kept, dropped

    zk = np.fromiter(z.entries, dtype=np.int64, count=len(z.entries))
    zv = np.fromiter(z.entries.values(), dtype=float, count=len(z.entries))
    ak = np.fromiter(a.entries, dtype=np.int64, count=len(a.entries))
    av = np.fromiter(a.entries.values(), dtype=float, count=len(a.entries))
    z_dense, dz = pack(zk ^ z0, zv)
    a_dense, da = pack(ak, av)
    return CompactResult(imap, z_dense, a_dense, dz, da)


# ---------------------------------------------------------------- deconvolution

@dataclass
class DeconvolveResult:
    x: np.ndarray
    zeroed_bins: int


def deconvolve(z, a, eps: float = 1e-12) -> DeconvolveResult:
    """Solve a (*) x = z by spectral division.

    Bins with ``|FWHT(a)[u]| <= eps * |FWHT(a)[0]|`` get quotient zero, which is
    the pseudo-inverse on that bin.
    """
    z = np.asarray(z, dtype=float)
    a = np.asarray(a, dtype=float)
    if z.shape != a.shape:
        raise ValueError(f"length mismatch: {z.size} vs {a.size}")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    zs = fwht(z)
    as_ = fwht(a)
    keep = np.abs(as_) > eps * abs(as_[0])
    q = np.zeros_like(zs)
    q[keep] = zs[keep] / as_[keep]
    return DeconvolveResult(ifwht(q), int(np.count_nonzero(~keep)))


# ---------------------------------------------------------------- projection

def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and shift)."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project non-finite entries")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = np.nonzero(u - (css - 1) / j > 0)[0][-1]
    shift = (css[rho] - 1) / (rho + 1)
    out = np.maximum(v - shift, 0.0)
    return out / math.fsum(out)


def project_distribution(x: SparseDistribution) -> SparseDistribution:
    keys = list(x.entries)
    proj = project_to_simplex([x.entries[k] for k in keys])
    return SparseDistribution(x.n, {k: p for k, p in zip(keys, proj) if p > 0}, STRICT)


# ---------------------------------------------------------------- fidelity

def fidelity(p: SparseDistribution, q: SparseDistribution) -> float:
    """(sum_i sqrt(p_i q_i))^2."""
    if p.kind != STRICT or q.kind != STRICT:
        raise DistributionError("fidelity needs strict distributions")
    if p.n != q.n:
        raise DistributionError(f"qubit counts differ: {p.n} vs {q.n}")
    small, large = (p, q) if len(p) <= len(q) else (q, p)
    bc = math.fsum(math.sqrt(w * large.get(k)) for k, w in small.entries.items())
    return min(1.0, bc * bc)


# ---------------------------------------------------------------- pipeline

@dataclass
class Correction:
    corrected: SparseDistribution
    quasi: SparseDistribution
    diagnostics: dict


def correct(
    z: SparseDistribution,
    b: SparseDistribution,
    k: int,
    t_max: int = 15,
    eps: float = 1e-12,
) -> Correction:
    """Correct the payload distribution ``z`` using an NEC distribution ``b``
    whose ideal outcome is ``k``."""
    if z.n != b.n:
        raise DistributionError(f"qubit counts differ: {z.n} vs {b.n}")
    a = relabel_column(b, k)
    packed = compact_subspace(z, a, t_max)
    dec = deconvolve(packed.z, packed.a, eps)
    outcomes = packed.index_map.outcomes()
    x = dec.x
    nz = np.flatnonzero(x != 0)
    quasi = SparseDistribution(z.n, dict(zip(outcomes[nz].tolist(), x[nz].tolist())), QUASI)
    corrected = project_distribution(quasi)
    diagnostics = {
        "t": packed.index_map.t,
        "dropped_mass": packed.dropped_mass,
        "dropped_mass_z": packed.dropped_mass_z,
        "dropped_mass_a": packed.dropped_mass_a,
        "zeroed_bins": dec.zeroed_bins,
        "negative_mass": float(-x[x < 0].sum()),
        "reference": packed.index_map.reference,
        "truncation": "gf2_subspace",
    }
    return Correction(corrected, quasi, diagnostics)
