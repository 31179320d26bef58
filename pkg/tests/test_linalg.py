"""Core state/operator primitives: constructors, gates, channels, PVMs, traces."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkdsim import linalg
from qkdsim.circuits import CNOT, H, I2, PHI_PLUS, PSI_PLUS, SX, SY, SZ
from qkdsim.linalg import ImpossibleOutcomeError

ATOL = 1e-10

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


class FixedRng:
    """Feeds a predetermined uniform into measure_pvm."""

    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


# --- constructors ---


def test_state_vector_checks_norm():
    with pytest.raises(ValueError):
        linalg.state_vector([1, 1])
    out = linalg.state_vector(PLUS)
    assert out is not PLUS  # defensive copy


def test_state_vector_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        linalg.state_vector(np.ones(3) / np.sqrt(3))


def test_density_matrix_checks():
    linalg.density_matrix(np.eye(2) / 2)
    with pytest.raises(ValueError):
        linalg.density_matrix(np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        linalg.density_matrix(np.array([[0.5, 0.5j], [0.5j, 0.5]]))  # not Hermitian
    with pytest.raises(ValueError):
        linalg.density_matrix(np.ones((2, 3)))


def test_unitary_validator():
    linalg.unitary(H)
    with pytest.raises(ValueError):
        linalg.unitary(np.array([[1, 1], [0, 1]]))


# --- tensor ---


def test_tensor_basis_examples():
    got = linalg.tensor(KET0, PHI_PLUS)
    want = np.zeros(8, dtype=complex)
    want[0] = want[3] = 1 / np.sqrt(2)  # |000> + |011>
    np.testing.assert_allclose(got, want, atol=ATOL)

    got = linalg.tensor(KET1, PHI_PLUS)
    want = np.zeros(8, dtype=complex)
    want[4] = want[7] = 1 / np.sqrt(2)  # |100> + |111>
    np.testing.assert_allclose(got, want, atol=ATOL)

    got = linalg.tensor(PLUS, PLUS)
    np.testing.assert_allclose(got, np.full(4, 0.5), atol=ATOL)


def test_tensor_left_factor_most_significant():
    got = linalg.tensor(KET1, KET0)  # |10>
    np.testing.assert_allclose(got, [0, 0, 1, 0], atol=ATOL)


# --- apply_gate ---


def test_apply_gate_cnot_examples():
    np.testing.assert_allclose(
        linalg.apply_gate(linalg.tensor(KET0, KET0), CNOT, [1, 2]), [1, 0, 0, 0], atol=ATOL
    )
    np.testing.assert_allclose(
        linalg.apply_gate(linalg.tensor(KET1, KET0), CNOT, [1, 2]), [0, 0, 0, 1], atol=ATOL
    )


def test_apply_gate_h_example():
    np.testing.assert_allclose(linalg.apply_gate(KET0, H, [1]), PLUS, atol=ATOL)


def test_apply_gate_target_order_matters():
    # control on qubit 2: |01> -> |11>
    got = linalg.apply_gate(linalg.tensor(KET0, KET1), CNOT, [2, 1])
    np.testing.assert_allclose(got, [0, 0, 0, 1], atol=ATOL)


def test_apply_gate_on_density_matrix():
    rho = linalg.pure_density(linalg.tensor(KET1, KET0))
    got = linalg.apply_gate(rho, CNOT, [1, 2])
    np.testing.assert_allclose(got, linalg.pure_density([0, 0, 0, 1]), atol=ATOL)


def test_apply_gate_errors():
    with pytest.raises(ValueError):
        linalg.apply_gate(PHI_PLUS, CNOT, [1])  # dimension mismatch
    with pytest.raises(ValueError):
        linalg.apply_gate(PHI_PLUS, CNOT, [1, 1])  # duplicate target
    with pytest.raises(ValueError):
        linalg.apply_gate(PHI_PLUS, CNOT, [1, 3])  # out of range


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_apply_gate_preserves_norm(seed, n):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    psi /= np.linalg.norm(psi)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    target = int(rng.integers(1, n + 1))
    out = linalg.apply_gate(psi, u, [target])
    assert abs(np.linalg.norm(out) - 1.0) < ATOL


# --- apply_channel ---


def test_apply_channel_identity():
    rho = linalg.pure_density(PHI_PLUS)
    got = linalg.apply_channel(rho, [I2], [1])
    np.testing.assert_allclose(got, rho, atol=ATOL)


def test_apply_channel_full_depolarizing_mixes_marginal():
    from qkdsim.adversary import depolarizing_kraus

    rho = linalg.apply_channel(linalg.pure_density(PHI_PLUS), depolarizing_kraus(1.0), [2])
    marg = linalg.partial_trace(rho, [2])
    np.testing.assert_allclose(marg, I2 / 2, atol=ATOL)


def test_apply_channel_depolarizing_scales_zz():
    from qkdsim.adversary import depolarizing_kraus

    rho = linalg.apply_channel(linalg.pure_density(PHI_PLUS), depolarizing_kraus(0.1), [2])
    zz = linalg.expectation(rho, linalg.tensor(SZ, SZ))
    assert abs(zz - 0.9) < ATOL


def test_apply_channel_preserves_trace():
    from qkdsim.adversary import dephasing_kraus, depolarizing_kraus

    rho = linalg.pure_density(PSI_PLUS)
    for kraus in (depolarizing_kraus(0.3), dephasing_kraus(0.7)):
        out = linalg.apply_channel(rho, kraus, [1])
        assert abs(np.trace(out).real - 1.0) < ATOL


def test_apply_channel_rejects_non_trace_preserving():
    with pytest.raises(ValueError, match="not trace preserving"):
        linalg.apply_channel(linalg.pure_density(PHI_PLUS), [0.5 * I2], [1])


# --- measure_pvm ---

P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def test_measure_eigenstate_is_certain():
    out = linalg.measure_pvm(KET0, [P0, P1], FixedRng(0.7))
    assert out.outcome == 0
    assert abs(out.probability - 1.0) < ATOL
    np.testing.assert_allclose(out.post_state, KET0, atol=ATOL)


def test_measure_half_of_bell_pair_collapses_both():
    lo = linalg.measure_pvm(PHI_PLUS, [P0, P1], FixedRng(0.2), targets=[1])
    hi = linalg.measure_pvm(PHI_PLUS, [P0, P1], FixedRng(0.8), targets=[1])
    assert (lo.outcome, hi.outcome) == (0, 1)
    assert abs(lo.probability - 0.5) < ATOL and abs(hi.probability - 0.5) < ATOL
    np.testing.assert_allclose(lo.post_state, [1, 0, 0, 0], atol=ATOL)
    np.testing.assert_allclose(hi.post_state, [0, 0, 0, 1], atol=ATOL)


def test_measure_plus_state_is_fair():
    lo = linalg.measure_pvm(PLUS, [P0, P1], FixedRng(0.4999))
    hi = linalg.measure_pvm(PLUS, [P0, P1], FixedRng(0.5001))
    assert lo.outcome == 0 and hi.outcome == 1
    assert abs(lo.probability - 0.5) < ATOL


def test_measure_rejects_incomplete_projectors():
    with pytest.raises(ValueError, match="incomplete projector set"):
        linalg.measure_pvm(KET0, [P0], FixedRng(0.1))


def test_measure_rejects_non_idempotent():
    with pytest.raises(ValueError, match="non-idempotent"):
        linalg.measure_pvm(KET0, [0.5 * I2, 0.5 * I2], FixedRng(0.1))


def test_measure_guards_impossible_branch():
    eps = 1e-7  # branch probability 1e-14 is below the renormalization guard
    psi = np.array([np.sqrt(1 - eps**2), eps], dtype=complex)
    with pytest.raises(ImpossibleOutcomeError):
        linalg.measure_pvm(psi, [P0, P1], FixedRng(np.nextafter(1.0, 0.0)))


def test_born_completeness():
    rng = np.random.default_rng(123)
    for _ in range(50):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        p0 = float(np.vdot(psi[:2], psi[:2]).real)
        out = linalg.measure_pvm(psi, [P0, P1], FixedRng(0.0), targets=[1])
        # the two branch probabilities must sum to 1
        assert abs(out.probability - p0) < ATOL


def test_measure_sampling_matches_born_probabilities():
    # frequency of outcome 0 on a biased state over 10^5 seeded draws
    theta = 0.8
    psi = np.array([np.cos(theta), np.sin(theta)], dtype=complex)
    p = np.cos(theta) ** 2
    m = 100_000
    rng = np.random.default_rng(2024)
    us = rng.random(m)
    hits = sum(linalg.measure_pvm(psi, [P0, P1], FixedRng(u)).outcome == 0 for u in us)
    band = 4 * np.sqrt(p * (1 - p) / m)
    assert abs(hits / m - p) < band


# --- partial_trace ---


def test_partial_trace_bell_marginal():
    rho = linalg.pure_density(PHI_PLUS)
    np.testing.assert_allclose(linalg.partial_trace(rho, [1]), I2 / 2, atol=ATOL)
    np.testing.assert_allclose(linalg.partial_trace(rho, [2]), I2 / 2, atol=ATOL)


def test_partial_trace_equal_mixture_of_bell_states():
    # (1/sqrt2)(|0>|phi+> + |1>|psi+>) traced over the first qubit
    psi = (linalg.tensor(KET0, PHI_PLUS) + linalg.tensor(KET1, PSI_PLUS)) / np.sqrt(2)
    rho_ab = linalg.partial_trace(linalg.pure_density(psi), [2, 3])
    want = 0.5 * (linalg.pure_density(PHI_PLUS) + linalg.pure_density(PSI_PLUS))
    np.testing.assert_allclose(rho_ab, want, atol=ATOL)


def test_partial_trace_product_state():
    rho = linalg.pure_density(linalg.tensor(KET0, KET1))
    np.testing.assert_allclose(linalg.partial_trace(rho, [2]), linalg.pure_density(KET1), atol=ATOL)


def test_partial_trace_keep_order_reorders():
    rho = linalg.pure_density(linalg.tensor(KET0, KET1))
    swapped = linalg.partial_trace(rho, [2, 1])
    np.testing.assert_allclose(
        swapped, linalg.pure_density(linalg.tensor(KET1, KET0)), atol=ATOL
    )


def test_partial_trace_empty_keep_raises():
    with pytest.raises(ValueError, match="keep list must not be empty"):
        linalg.partial_trace(linalg.pure_density(PHI_PLUS), [])


def test_partial_trace_result_is_density_matrix():
    rng = np.random.default_rng(5)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    red = linalg.partial_trace(linalg.pure_density(psi), [1, 3])
    linalg.density_matrix(red)  # Hermitian, unit trace
    evals = np.linalg.eigvalsh(red)
    assert evals.min() > -linalg.EIG_ATOL


# --- expectation / fidelity / purity ---


def test_expectation_examples():
    assert abs(linalg.expectation(linalg.pure_density(KET0), SZ) - 1.0) < ATOL
    xx = linalg.tensor(SX, SX)
    assert abs(linalg.expectation(linalg.pure_density(PHI_PLUS), xx) - 1.0) < ATOL
    assert abs(linalg.expectation(I2 / 2, SZ)) < ATOL


def test_expectation_accepts_pure_state():
    assert abs(linalg.expectation(KET0, SZ) - 1.0) < ATOL


def test_expectation_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        linalg.expectation(I2 / 2, np.array([[0, 1], [0, 0]]))


def test_fidelity_phase_invariance():
    assert abs(linalg.fidelity(KET0, np.exp(1j * 0.9) * KET0) - 1.0) < ATOL
    assert linalg.states_equal(PHI_PLUS, -PHI_PLUS)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_purity_bound(seed, n):
    rng = np.random.default_rng(seed)
    dim = 2**n
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    p = linalg.purity(rho)
    assert 2**-n - 1e-9 <= p <= 1 + 1e-9


def test_embed_on_middle_qubit():
    # X on qubit 2 of three: |000> -> |010>
    psi = np.zeros(8, dtype=complex)
    psi[0] = 1
    got = linalg.apply_gate(psi, SX, [2])
    want = np.zeros(8, dtype=complex)
    want[2] = 1
    np.testing.assert_allclose(got, want, atol=ATOL)
    full = linalg.embed(SX, [2], 3)
    np.testing.assert_allclose(full @ psi, want, atol=ATOL)


def test_pauli_y_hermitian_unitary():
    linalg.unitary(SY)
    np.testing.assert_allclose(SY @ SY, I2, atol=ATOL)
