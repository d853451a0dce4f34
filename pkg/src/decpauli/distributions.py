"""Sparse outcome distributions keyed by integer basis index."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STRICT = "strict"
QUASI = "quasi"


class DistributionError(ValueError):
    pass


@dataclass
class SparseDistribution:
    """Map from n-bit outcome index to weight.

    ``strict`` distributions are non-negative and sum to one; ``quasi`` ones may
    carry negative weights. Bitstrings print with the highest qubit first.
    """

    n: int
    entries: dict[int, float] = field(default_factory=dict)
    kind: str = STRICT

    def __post_init__(self):
        if self.kind not in (STRICT, QUASI):
            raise DistributionError(f"unknown kind {self.kind!r}")
        self.entries = {int(k): float(v) for k, v in self.entries.items()}
        limit = 1 << self.n
        for k, v in self.entries.items():
            if not 0 <= k < limit:
                raise DistributionError(f"outcome {k} out of range for {self.n} qubits")
            if not math.isfinite(v):
                raise DistributionError(f"non-finite weight at outcome {k}")
        if self.kind == STRICT:
            if any(v < 0 for v in self.entries.values()):
                raise DistributionError("strict distribution has negative weights")
        total = math.fsum(self.entries.values())
        if abs(total - 1) > 1e-9:
            raise DistributionError(f"{self.kind} distribution sums to {total}")

    @classmethod
    def from_counts(cls, n: int, counts: dict[int, int]) -> SparseDistribution:
        total = sum(counts.values())
        if total <= 0:
            raise DistributionError("zero total counts")
        return cls(n, {k: c / total for k, c in counts.items() if c})

    @classmethod
    def from_dense(cls, vec, kind: str = STRICT, cutoff: float = 0.0) -> SparseDistribution:
        vec = np.asarray(vec, dtype=float)
        n = int(vec.size).bit_length() - 1
        if 1 << n != vec.size:
            raise DistributionError("dense vector length must be a power of two")
        idx = np.flatnonzero(np.abs(vec) > cutoff)
        return cls(n, dict(zip(idx.tolist(), vec[idx].tolist())), kind)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(1 << self.n)
        for k, v in self.entries.items():
            out[k] = v
        return out

    def bitstring(self, k: int) -> str:
        return format(k, f"0{self.n}b")

    def to_bitstrings(self) -> dict[str, float]:
        return {self.bitstring(k): v for k, v in sorted(self.entries.items())}

    def argmax(self) -> int:
        """Most likely outcome; ties go to the smallest index."""
        if not self.entries:
            raise DistributionError("empty distribution")
        return min(self.entries, key=lambda k: (-self.entries[k], k))

    def total(self) -> float:
        return math.fsum(self.entries.values())

    def get(self, k: int) -> float:
        return self.entries.get(k, 0.0)

    def __len__(self) -> int:
        return len(self.entries)


def parse_bitstring_map(data: dict, what: str = "counts") -> tuple[int, dict[int, float]]:
    """Decode ``{"0101": w, ...}`` (highest qubit first); all keys must share a width."""
    if not isinstance(data, dict) or not data:
        raise DistributionError(f"{what} must be a non-empty object of bitstrings")
    widths = {len(k) for k in data}
    if len(widths) != 1:
        raise DistributionError(f"{what} mixes bitstring widths {sorted(widths)}")
    n = widths.pop()
    out = {}
    for key, val in data.items():
        if n == 0 or set(key) - {"0", "1"}:
            raise DistributionError(f"invalid bitstring {key!r} in {what}")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise DistributionError(f"non-numeric weight for {key!r} in {what}")
        out[int(key, 2)] = val
    return n, out
