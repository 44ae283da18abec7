import numpy as np
import pytest
from scipy.linalg import expm

from gaspst.errors import InvalidParameter, InvalidState, SizeLimit
from gaspst.fullspace import (build_full_hamiltonian, closed_form_sector, conservation_residuals,
                              evolve, full_transfer_check, gell_mann, hermitian_residual,
                              identity_shift, local_sector_matrix, oracle_report,
                              restrict_single_excitation, sector_residual)
from gaspst.pst import synthesize_couplings

from conftest import scheme

PI = np.pi
X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1])


def d8_plan():
    return synthesize_couplings(scheme("D8"), 2, 1.0, PI, (-3, 1, -2, 2, 0))


def paired(s, J):
    """Average J over i and i* so the coupling matrix is symmetric."""
    J = np.asarray(J, dtype=float)
    return (J + J[[s.inverse_class(i) for i in range(len(s))]]) / 2


@pytest.mark.parametrize("D", [2, 3, 4])
def test_gell_mann_normalization(D):
    g = gell_mann(D)
    assert g.shape == (D * D - 1, D, D)
    assert np.allclose(np.einsum("aij,bji->ab", g, g), 2 * np.eye(D * D - 1))
    assert np.allclose(np.einsum("aii->a", g), 0)
    assert np.allclose(g, g.conj().transpose(0, 2, 1))
    casimir = np.einsum("aij,ajk->ik", g, g)
    assert np.allclose(casimir, 2 * (D * D - 1) / D * np.eye(D))


def test_pauli_at_two_levels():
    assert np.allclose(gell_mann(2), [X, Y, Z])


def test_z2_hand_expansion():
    s = scheme("Z2")
    plan = synthesize_couplings(s, 1, 1.0)
    h = build_full_hamiltonian(s, plan, 2)
    assert h.matrix.shape == (4, 4)
    J0, J1 = plan.physical().couplings
    # 2 J0 I + 2 J1 X + (N-4)/2 (J0 + J1) I with N = 2, up to the documented shift
    expect = 2 * J0 * np.eye(2) + 2 * J1 * X - (J0 + J1) * np.eye(2)
    got = restrict_single_excitation(h)
    shift = identity_shift(s, plan, 2)
    assert np.max(np.abs(got - expect - shift * np.eye(2))) < 1e-12
    # direct Pauli build of J1 (sigma.sigma) + J0 * 3 (I + I)
    ss = sum(np.kron(p, p) for p in (X, Y, Z))
    direct = J1 * ss + J0 * 2 * 3 * np.eye(4)
    assert np.max(np.abs(h.matrix - direct)) < 1e-12


def test_d8_qubits():
    s = scheme("D8")
    h = build_full_hamiltonian(s, d8_plan(), 2)
    assert h.dimension == 256
    assert hermitian_residual(h) < 1e-12
    assert max(conservation_residuals(h)) < 1e-10
    assert sector_residual(h, s, d8_plan()) < 1e-10


def test_restriction_against_local_oracle(rng):
    for name in ("D8", "Z5", "CL3"):
        s = scheme(name)
        plan = d8_plan().with_couplings(paired(s, rng.normal(size=len(s))))
        for D in (2, 3):
            block, leak = local_sector_matrix(s, plan, D)
            assert leak == 0
            expect = closed_form_sector(s, plan, D) + identity_shift(s, plan, D) * np.eye(s.order)
            assert np.max(np.abs(block - expect)) < 1e-10
            if D**s.order <= 2**13:
                h = build_full_hamiltonian(s, plan, D)
                assert np.max(np.abs(restrict_single_excitation(h) - block)) < 1e-12


def test_shift_vanishes_for_qubits_without_identity_coupling():
    s = scheme("D8")
    assert identity_shift(s, d8_plan(), 2) == 0


def test_size_limit_and_bad_levels():
    s = scheme("CL3")
    plan = synthesize_couplings(s, 1)
    with pytest.raises(SizeLimit):
        build_full_hamiltonian(s, plan, 2)
    with pytest.raises(InvalidParameter):
        build_full_hamiltonian(scheme("Z2"), synthesize_couplings(scheme("Z2"), 1), 1)
    h = build_full_hamiltonian(scheme("Z2"), synthesize_couplings(scheme("Z2"), 1), 2)
    with pytest.raises(InvalidParameter):
        restrict_single_excitation(h, 2)


def test_asymmetric_couplings_rejected():
    s = scheme("Z3")
    plan = d8_plan().with_couplings([0, 1, 0])
    with pytest.raises(InvalidParameter):
        build_full_hamiltonian(s, plan, 2)


def test_zero_excitation_state_is_stationary():
    s = scheme("D8")
    h = build_full_hamiltonian(s, d8_plan(), 2)
    rep = full_transfer_check(h, 1.0, 0.0, 0, 2, 1.0)
    assert rep.leakage < 1e-10 and abs(abs(rep.alpha_out) - 1) < 1e-10


def test_d8_superposition_transfer():
    s = scheme("D8")
    h = build_full_hamiltonian(s, d8_plan(), 2)
    rep = full_transfer_check(h, 2**-0.5, 2**-0.5, 0, s.representative(2), 1.0)
    assert rep.passed
    report = oracle_report(h, s, d8_plan(), rep)
    assert report["transfer"]["passed"] and report["dimension"] == 256


def test_invalid_state():
    h = build_full_hamiltonian(scheme("Z2"), synthesize_couplings(scheme("Z2"), 1), 2)
    with pytest.raises(InvalidState):
        full_transfer_check(h, 1.0, 1.0, 0, 1, 1.0)


def test_evolution_paths_agree(rng):
    s = scheme("Z4")
    plan = d8_plan().with_couplings(paired(s, rng.normal(size=4)))
    h = build_full_hamiltonian(s, plan, 3)  # 81 states, eigh path
    psi = rng.normal(size=81) + 1j * rng.normal(size=81)
    psi /= np.linalg.norm(psi)
    ref = expm(-0.7j * h.matrix) @ psi
    assert np.max(np.abs(evolve(h, psi, 0.7) - ref)) < 1e-10
