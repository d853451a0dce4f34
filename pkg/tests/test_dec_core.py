import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from decpauli.catalog import analytic_ideal, catalog
from decpauli.checks import (
    brute_force_simplex,
    is_doubly_stochastic,
    is_recursive_block_circulant,
    is_symmetric,
    is_xor_shift_invariant,
    naive_hadamard,
    naive_xor_convolve,
)
from decpauli.dec_core import (
    AssignmentColumn,
    compact_subspace,
    correct,
    deconvolve,
    fidelity,
    fwht,
    gf2_rank,
    ifwht,
    project_to_simplex,
    relabel_column,
    xor_convolve,
)
from decpauli.distributions import QUASI, DistributionError, SparseDistribution
from decpauli.lowering import build_nec, lower_to_native, nec_ideal_output
from decpauli.noise_sim import (
    NoiseModel,
    PauliChannel,
    brute_force_assignment,
    exact_column_oracle,
    exact_noisy_distribution,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def dist(n, entries, kind="strict"):
    return SparseDistribution(n, entries, kind)


# ---------------------------------------------------------------- FWHT

def test_fwht_delta_and_uniform():
    d = np.zeros(8)
    d[0] = 1
    assert np.array_equal(fwht(d), np.ones(8))
    assert np.allclose(fwht(np.full(8, 1 / 8)), [1, 0, 0, 0, 0, 0, 0, 0], atol=1e-15)


def test_fwht_length_1024_matches_naive():
    v = np.random.default_rng(0).normal(size=1024)
    assert np.max(np.abs(fwht(v) - naive_hadamard(10) @ v)) < 1e-10


def test_fwht_rejects_bad_length():
    with pytest.raises(ValueError):
        fwht(np.ones(6))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 16).flatmap(lambda t: arrays(float, 1 << t, elements=finite)))
def test_fwht_round_trip(v):
    assert np.max(np.abs(ifwht(fwht(v)) - v), initial=0) <= 1e-12 * max(1, np.abs(v).max())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 6), st.integers(0, 2**32 - 1))
def test_convolution_theorem(t, seed):
    rng = np.random.default_rng(seed)
    a, x = rng.random(1 << t), rng.random(1 << t)
    conv = naive_xor_convolve(a, x)
    assert np.max(np.abs(fwht(conv) - fwht(a) * fwht(x))) <= 1e-10
    assert np.max(np.abs(xor_convolve(a, x) - conv)) <= 1e-12


def test_fwht_zero_bin_is_total_mass():
    a = AssignmentColumn(3, {0: 0.7, 5: 0.2, 6: 0.1})
    assert fwht(a.to_dense())[0] == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------- circulant oracles

@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_assignment_structure(n, seed):
    a = brute_force_assignment(PauliChannel.random(n, np.random.default_rng(seed)))
    assert is_symmetric(a) and is_doubly_stochastic(a)
    assert is_xor_shift_invariant(a) and is_recursive_block_circulant(a)


def test_structure_predicates_reject():
    m = np.array([[0.9, 0.2], [0.1, 0.8]])
    assert not is_symmetric(m)
    assert not is_doubly_stochastic(m)
    assert not is_recursive_block_circulant(m)
    assert not is_xor_shift_invariant(m)


def test_hadamard_diagonalizes_assignment():
    rng = np.random.default_rng(5)
    a = brute_force_assignment(PauliChannel.random(3, rng))
    h = naive_hadamard(3)
    d = h @ a @ h / 8
    assert np.max(np.abs(d - np.diag(np.diag(d)))) < 1e-12
    assert np.allclose(np.diag(d), fwht(a[:, 0]), atol=1e-12)


# ---------------------------------------------------------------- relabel

def test_relabel_examples():
    b = dist(2, {0b11: 0.9, 0b10: 0.1})
    assert relabel_column(b, 0b11).entries == {0b00: 0.9, 0b01: 0.1}
    assert relabel_column(b, 0).entries == b.entries
    once = relabel_column(b, 0b10)
    twice = relabel_column(dist(2, once.entries), 0b10)
    assert twice.entries == b.entries


# ---------------------------------------------------------------- compaction

def test_compact_ghz20():
    n = 20
    z = dist(n, {0: 0.5, (1 << n) - 1: 0.5})
    a = AssignmentColumn(n, {0: 0.95, 1: 0.05})
    res = compact_subspace(z, a, t_max=15)
    assert res.index_map.t == 2 and res.z.size == 4 and res.dropped_mass == 0


def test_compact_noiseless():
    res = compact_subspace(dist(3, {5: 1.0}), AssignmentColumn(3, {0: 1.0}))
    assert res.index_map.t == 0 and res.z.tolist() == [1.0] and res.a.tolist() == [1.0]


def test_compact_dense_lossless():
    rng = np.random.default_rng(2)
    z = SparseDistribution.from_dense(rng.dirichlet(np.ones(16)))
    a = AssignmentColumn(4, dict(enumerate(rng.dirichlet(np.ones(16)))))
    res = compact_subspace(z, a, t_max=15)
    assert res.index_map.t == 4 and res.dropped_mass == 0
    # compact indices are a relabeling of the full outcome set
    assert sorted(res.index_map.outcomes().tolist()) == list(range(16))


def test_compact_truncates_lightest():
    n = 6
    z = dist(n, {0: 0.9, 1: 0.06, 2: 0.03, 4: 0.01})
    a = AssignmentColumn(n, {0: 1.0})
    res = compact_subspace(z, a, t_max=2)
    assert res.index_map.t == 2
    assert res.dropped_mass_z == pytest.approx(0.01)
    assert res.z.sum() == pytest.approx(1.0)


def test_compact_errors():
    with pytest.raises(DistributionError):
        compact_subspace(dist(2, {0: 1.0}), AssignmentColumn(3, {0: 1.0}))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_index_map_is_group_isomorphism(n, seed, t_max):
    rng = np.random.default_rng(seed)
    keys = rng.choice(1 << n, size=min(1 << n, 8), replace=False)
    z = SparseDistribution(n, dict(zip(keys.tolist(), rng.dirichlet(np.ones(keys.size)))))
    a = AssignmentColumn(n, {0: 0.9, int(rng.integers(1, 1 << n)): 0.1})
    res = compact_subspace(z, a, t_max)
    imap = res.index_map
    assert imap.t <= t_max and gf2_rank(imap.basis) == imap.t
    vec = imap.vectors()
    i, j = rng.integers(vec.size, size=2)
    assert vec[i] ^ vec[j] == vec[i ^ j]
    idx, inside = imap.coords(vec)
    assert inside.all() and np.array_equal(idx, np.arange(vec.size))


# ---------------------------------------------------------------- deconvolution

def test_deconvolve_identity_channel():
    z = np.array([0.1, 0.2, 0.3, 0.4])
    assert np.allclose(deconvolve(z, [1, 0, 0, 0]).x, z, atol=1e-15)


def test_deconvolve_bit_flip():
    res = deconvolve([0.9, 0.1], [0.9, 0.1])
    assert np.allclose(res.x, [1, 0], atol=1e-15) and res.zeroed_bins == 0


def test_deconvolve_zeroes_singular_bins():
    res = deconvolve([0.5, 0.5], [0.5, 0.5])
    assert res.zeroed_bins == 1
    assert np.allclose(res.x, [0.5, 0.5])


def test_deconvolve_length_mismatch():
    with pytest.raises(ValueError):
        deconvolve([1, 0], [1, 0, 0, 0])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_deconvolve_inverts_convolve(t, seed):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(1 << t))
    assume(np.abs(fwht(a)).min() > 1e-6)
    x = rng.dirichlet(np.ones(1 << t))
    assert np.max(np.abs(deconvolve(naive_xor_convolve(a, x), a).x - x)) <= 1e-9


# ---------------------------------------------------------------- projection

@pytest.mark.parametrize(
    "v, expected",
    [([0.2, 0.3, 0.5], [0.2, 0.3, 0.5]), ([1.2, -0.2], [1.0, 0.0]), ([0.6, 0.6], [0.5, 0.5])],
)
def test_projection_examples(v, expected):
    assert np.allclose(project_to_simplex(v), expected, atol=1e-15)


def test_projection_rejects_nonfinite():
    with pytest.raises(ValueError):
        project_to_simplex([np.nan, 1.0])


@settings(max_examples=300, deadline=None)
@given(st.lists(finite, min_size=1, max_size=5))
def test_projection_matches_brute_force(v):
    p = project_to_simplex(v)
    assert np.max(np.abs(p - brute_force_simplex(v))) <= 1e-6
    assert p.min() >= 0 and math.fsum(p) == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(project_to_simplex(p), p, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=2, max_size=8), st.integers(0, 2**32 - 1))
def test_projection_is_nearest(v, seed):
    v = np.array(v)
    p = project_to_simplex(v)
    other = np.random.default_rng(seed).dirichlet(np.ones(v.size))
    assert np.linalg.norm(p - v) <= np.linalg.norm(other - v) + 1e-12


# ---------------------------------------------------------------- fidelity

def test_fidelity_examples():
    p = dist(1, {0: 0.5, 1: 0.5})
    assert fidelity(p, p) == pytest.approx(1.0)
    assert fidelity(dist(1, {0: 1.0}), dist(1, {1: 1.0})) == 0.0
    assert fidelity(p, dist(1, {0: 1.0})) == pytest.approx(0.5)
    q = dist(2, {0: 0.3, 1: 0.7})
    r = dist(2, {1: 0.2, 3: 0.8})
    assert fidelity(q, r) == fidelity(r, q)


def test_fidelity_requires_strict():
    with pytest.raises(DistributionError):
        fidelity(dist(1, {0: 1.2, 1: -0.2}, QUASI), dist(1, {0: 1.0}))


# ---------------------------------------------------------------- correct

def test_correct_noiseless():
    z = dist(3, {1: 0.25, 6: 0.75})
    res = correct(z, dist(3, {5: 1.0}), k=5)
    assert res.corrected.entries == pytest.approx(z.entries)
    assert res.diagnostics["dropped_mass"] == 0 and res.diagnostics["negative_mass"] == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_correct_exact_recovery(n, seed):
    rng = np.random.default_rng(seed)
    ch = PauliChannel.random(n, rng)
    big_a = brute_force_assignment(ch)
    assume(np.abs(fwht(big_a[:, 0])).min() > 1e-12)
    x = rng.dirichlet(np.ones(1 << n))
    k = int(rng.integers(1 << n))
    z = SparseDistribution.from_dense(big_a @ x)
    b = SparseDistribution.from_dense(big_a[:, k])
    res = correct(z, b, k, t_max=15)
    assert np.max(np.abs(res.corrected.to_dense() - x)) <= 1e-9


def test_correct_ghz6_exact_pipeline():
    payload = lower_to_native(catalog("ghz", n=6))
    nm = NoiseModel(0.001, 0.01)
    z = exact_noisy_distribution(payload, nm)
    k = nec_ideal_output(build_nec(payload))
    col = exact_column_oracle(payload, nm, k)
    b = SparseDistribution(6, {d ^ k: w for d, w in col.entries.items()})
    ideal = SparseDistribution(6, analytic_ideal("ghz", n=6))
    res = correct(z, b, k)
    assert fidelity(res.corrected, ideal) == pytest.approx(1.0, abs=1e-8)
    assert fidelity(z, ideal) < 0.95
