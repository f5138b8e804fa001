"""Truncated evolution, beta overlaps, the Gram estimator, and sampling."""

import math

import numpy as np
import pytest

from orbitdim import (
    EvolutionConfig,
    GeneratorDescriptor,
    Group,
    LeakageError,
    Picture,
    SparseKet,
    TruncatedBasis,
    apply_group_word,
    basis_ket,
    beta,
    beta_sample,
    dense_hamiltonian,
    estimate_gram_entry,
    estimate_gram_matrix,
    evolve_density,
    gram_mixed,
    inner,
    lie_basis,
    mixture,
    normalize,
    orbit_dimension,
    outer,
    perturb_state,
    sample_sphere_state,
)
from _helpers import assert_entries_close


# ----------------------------------------------------------- TruncatedBasis


def test_truncated_basis_lexicographic_and_bijective():
    basis = TruncatedBasis.build(2, 2)
    assert basis.states == ((0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0))
    assert basis.size == math.comb(2 + 2, 2)
    assert all(basis.index[occ] == i for i, occ in enumerate(basis.states))


# --------------------------------------------------------- dense_hamiltonian


def test_dense_number_operator_is_diagonal():
    basis = TruncatedBasis.build(1, 3)
    h = dense_hamiltonian(GeneratorDescriptor("N", (1,)), basis)
    assert np.allclose(h, np.diag([0.0, 1.0, 2.0, 3.0]))


def test_dense_beam_splitter_single_photon_block():
    basis = TruncatedBasis.build(2, 1)
    h = dense_hamiltonian(GeneratorDescriptor("e", (1, 2)), basis)
    expected = np.zeros((3, 3), dtype=complex)
    i01, i10 = basis.index[(0, 1)], basis.index[(1, 0)]
    expected[i01, i10] = expected[i10, i01] = 0.5
    assert np.array_equal(h, expected)


def test_dense_position_displacement_tridiagonal():
    basis = TruncatedBasis.build(1, 2)
    h = dense_hamiltonian(GeneratorDescriptor("q", (1,)), basis)
    assert abs(h[1, 0] - 1 / math.sqrt(2)) < 1e-15
    assert abs(h[2, 1] - 1.0) < 1e-15
    assert h[2, 0] == 0


def test_dense_hamiltonians_hermitian_for_all_kinds():
    basis = TruncatedBasis.build(2, 4)
    for g in lie_basis(Group.GO, 2).elements:
        h = dense_hamiltonian(g, basis)
        assert np.array_equal(h, h.conj().T), g.label


# ------------------------------------------------------------ evolve_density


def test_evolve_zero_time_returns_input_unchanged():
    rho = outer(basis_ket((1,)))
    assert evolve_density(rho, GeneratorDescriptor("q", (1,)), 0.0) is rho


def test_evolve_number_operator_fixes_fock_projector():
    rho = outer(basis_ket((1,)))
    out = evolve_density(rho, GeneratorDescriptor("N", (1,)), 0.7)
    assert_entries_close(out.op.entries, rho.op.entries, tol=1e-12)


def test_evolve_displacement_keeps_trace():
    rho = outer(basis_ket((0,)))
    out = evolve_density(rho, GeneratorDescriptor("q", (1,)), 1e-2)
    assert out.trace_residual <= 1e-10


def test_evolve_detects_leakage_with_tiny_buffer():
    rho = outer(basis_ket((0,)))
    cfg = EvolutionConfig(buffer=2, leakage_tolerance=1e-10)
    with pytest.raises(LeakageError):
        evolve_density(rho, GeneratorDescriptor("s", (1,)), 0.5, cfg)


def test_active_evolution_leakage_within_tolerance_at_default_buffer():
    rho = outer(basis_ket((1,)))
    for kind in ("s", "q"):
        out = evolve_density(rho, GeneratorDescriptor(kind, (1,)), 0.1)
        assert out.trace_residual <= 1e-6


def test_number_preserving_evolution_exact_at_long_times():
    rho = outer(normalize(SparseKet(2, {(1, 0): 1.0, (0, 1): 0.5j})))
    for kind, modes in (("e", (1, 2)), ("N", (1,))):
        out = evolve_density(rho, GeneratorDescriptor(kind, modes), 50.0)
        assert out.trace_residual <= 1e-10
        assert out.hermiticity_residual <= 1e-12


# -------------------------------------------------------------------- beta


def test_beta_at_zero_time_is_purity():
    rho = mixture([(0.5, basis_ket((0,))), (0.5, basis_ket((1,)))])
    value = beta(rho, 1, 2, 0.0, Group.GO)
    assert abs(value - 0.5) < 1e-12


def test_beta_constant_for_commuting_generator():
    rho = outer(basis_ket((1,)))
    basis = lie_basis(Group.GO, 1)
    n_idx = basis.index_of("N[1]") + 1
    for t in (0.05, 0.2):
        assert abs(beta(rho, n_idx, 0, t, Group.GO) - 1.0) < 1e-10


def test_beta_symmetric_in_indices():
    rho = outer(normalize(SparseKet(1, {(0,): 1.0, (1,): 0.5j})))
    for t in (1e-3, 5e-2):
        a = beta(rho, 2, 3, t, Group.GO)
        b = beta(rho, 3, 2, t, Group.GO)
        assert abs(a - b) < 1e-12


def test_beta_index_validation():
    rho = outer(basis_ket((0,)))
    with pytest.raises(ValueError):
        beta(rho, 0, 99, 1e-3, Group.PLO)


def test_beta_sample_record():
    rho = outer(basis_ket((0,)))
    sample = beta_sample(rho, 0, 0, 0.0, Group.PLO)
    assert sample.value == pytest.approx(1.0)
    assert (sample.i, sample.j, sample.t) == (0, 0, 0.0)


# --------------------------------------------------------------- estimation


def test_estimate_identity_pair_is_zero():
    rho = outer(basis_ket((1,)))
    basis = lie_basis(Group.GO, 1)
    idx = basis.index_of("id") + 1
    est = estimate_gram_entry(rho, idx, idx, Group.GO)
    assert abs(est.value) < 1e-12
    assert abs(est.coarse) < 1e-12


def test_estimate_matches_direct_gram():
    rho = outer(normalize(SparseKet(1, {(0,): 1.0, (2,): 1.0})))
    est = estimate_gram_matrix(rho, Group.GO)
    direct = gram_mixed(Group.GO, rho).values
    dev = np.abs(est.values - direct)
    assert np.all(dev <= 1e-4 + 1e-3 * np.abs(direct))
    assert np.array_equal(est.values, est.values.T)


def test_estimate_second_order_convergence():
    rho = outer(basis_ket((1,)))
    est = estimate_gram_matrix(rho, Group.GO)
    direct = gram_mixed(Group.GO, rho).values
    err_coarse = np.abs(est.coarse - direct).max()
    err_fine = np.abs(est.fine - direct).max()
    assert err_coarse > 1e-12
    assert err_coarse / err_fine >= 2.8


def test_estimate_index_validation():
    rho = outer(basis_ket((0,)))
    with pytest.raises(ValueError):
        estimate_gram_entry(rho, 0, 1, Group.PLO)


# ----------------------------------------------------------------- sampling


def test_sample_norm_and_support():
    psi = sample_sphere_state(2, 2, seed=3)
    assert abs(psi.norm() - 1.0) < 1e-12
    assert psi.max_total() <= 2
    assert len(psi.terms) == math.comb(2 + 2, 2)


def test_sample_deterministic_under_seed():
    a = sample_sphere_state(2, 3, seed=11)
    b = sample_sphere_state(2, 3, seed=11)
    assert a.terms == b.terms


def test_sample_distinct_seeds_differ():
    a = sample_sphere_state(2, 2, seed=0)
    b = sample_sphere_state(2, 2, seed=1)
    assert abs(inner(a, b)) < 0.99


def test_sampled_states_attain_generic_dimension():
    for seed in range(3):
        psi = sample_sphere_state(2, 2, seed)
        assert orbit_dimension(Group.GO, psi, Picture.KET).rank == 15


# ------------------------------------------------------------- group words


def test_empty_word_is_identity():
    psi = basis_ket((1, 1))
    assert apply_group_word(psi, []) is psi


def test_plo_word_preserves_norm_exactly():
    rng = np.random.default_rng(23)
    psi = basis_ket((1, 1))
    basis = lie_basis(Group.PLO, 2)
    word = [
        (basis.elements[int(rng.integers(len(basis)))], float(rng.uniform(-1, 1)))
        for _ in range(5)
    ]
    out = apply_group_word(psi, word)
    assert abs(out.norm() - 1.0) < 1e-10
    assert out.max_total() == 2  # photon-number sectors are closed


def test_plo_word_preserves_orbit_dimension():
    rng = np.random.default_rng(29)
    psi = normalize(SparseKet(2, {(1, 1): 1.0, (0, 2): 1.0j}))
    basis = lie_basis(Group.PLO, 2)
    word = [
        (basis.elements[int(rng.integers(len(basis)))], float(rng.uniform(-1, 1)))
        for _ in range(5)
    ]
    out = apply_group_word(psi, word)
    for group in (Group.PLO, Group.GO):
        before = orbit_dimension(group, psi, Picture.KET).rank
        after = orbit_dimension(group, out, Picture.KET).rank
        assert before == after


def test_squeezing_word_with_tiny_buffer_raises():
    cfg = EvolutionConfig(buffer=2, leakage_tolerance=1e-10)
    with pytest.raises(LeakageError):
        apply_group_word(basis_ket((0,)), [(GeneratorDescriptor("s", (1,)), 0.5)], cfg)


# ------------------------------------------------------------ perturb_state


def test_perturb_zero_epsilon_is_identity():
    psi = basis_ket((1, 0))
    assert perturb_state(psi, 0.0, 2, seed=0) is psi


def test_perturb_returns_normalized_state():
    psi = basis_ket((1, 0))
    out = perturb_state(psi, 1e-3, 2, seed=4)
    assert abs(out.norm() - 1.0) < 1e-12


def test_perturb_mode_mismatch_rejected():
    with pytest.raises(ValueError):
        perturb_state(basis_ket((1, 0)), 1e-3, 2, seed=0, m=3)
