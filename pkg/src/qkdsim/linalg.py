"""Dense state-vector and density-matrix primitives for small qubit registers.

Conventions used by the whole package:

  - The leftmost symbol of a ket labels qubit 1, which is the most
    significant bit of the flat array index. So for two qubits the
    amplitude order is |00>, |01>, |10>, |11>.
  - Qubit positions in public signatures are 1-based.
  - Registers stay small (the protocol never needs more than five
    qubits), so everything is dense and exact. No sparse or stabilizer
    shortcuts.

Tolerances: 1e-10 for algebraic identities, 1e-9 for eigenvalue
positivity checks, and a 1e-12 guard before renormalizing a projected
state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-10
EIG_ATOL = 1e-9
RENORM_GUARD = 1e-12


class ImpossibleOutcomeError(RuntimeError):
    """Raised when a measurement would select an outcome of probability < 1e-12."""


def n_qubits(dim: int) -> int:
    """Number of qubits for a dimension that must be a power of two."""
    n = dim.bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def state_vector(values) -> np.ndarray:
    """Validate and return a normalized pure state as a complex array.

    The norm must already be 1 within 1e-10; this constructor checks, it
    does not renormalize.
    """
    psi = np.asarray(values, dtype=complex).reshape(-1)
    n_qubits(psi.size)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > ATOL:
        raise ValueError(f"state vector norm {norm} deviates from 1 by more than {ATOL}")
    return psi.copy()


def density_matrix(values) -> np.ndarray:
    """Validate a density matrix: square, Hermitian and unit trace within 1e-10.

    Positivity is not eigendecomposed here (that would dominate the cost of
    every channel application); eigenvalue checks down to -1e-9 live in the
    test suite and in the callers that need them.
    """
    rho = np.asarray(values, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    n_qubits(rho.shape[0])
    if not np.allclose(rho, rho.conj().T, atol=ATOL, rtol=0):
        raise ValueError("density matrix is not Hermitian within 1e-10")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > ATOL:
        raise ValueError(f"density matrix trace {tr} deviates from 1 by more than {ATOL}")
    return rho.copy()


def unitary(values) -> np.ndarray:
    """Validate U U^dagger = I within 1e-10 and return the matrix."""
    u = np.asarray(values, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got shape {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=ATOL, rtol=0):
        raise ValueError("matrix is not unitary within 1e-10")
    return u.copy()


def pure_density(psi) -> np.ndarray:
    """|psi><psi| for a validated state vector."""
    psi = state_vector(psi)
    return np.outer(psi, psi.conj())


def tensor(*factors) -> np.ndarray:
    """Kronecker product of states or operators, left factor most significant."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def _targets_zero_based(targets, n: int) -> list:
    ts = [int(t) - 1 for t in targets]
    if len(set(ts)) != len(ts):
        raise ValueError(f"target positions must be distinct, got {list(targets)}")
    for t in ts:
        if t < 0 or t >= n:
            raise ValueError(f"target position {t + 1} outside register of {n} qubits")
    return ts


def _apply_matrix_to_vector(psi: np.ndarray, op: np.ndarray, targets0, n: int) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to the given axes of a length-2^n vector."""
    k = len(targets0)
    t = psi.reshape([2] * n)
    t = np.moveaxis(t, targets0, range(k))
    shaped = t.shape
    t = op @ t.reshape(2**k, -1)
    t = np.moveaxis(t.reshape(shaped), range(k), targets0)
    return t.reshape(-1)


def embed(op, targets, n: int) -> np.ndarray:
    """Lift a k-qubit operator onto qubit positions `targets` of an n-qubit register.

    Target order matters: embed(CNOT, [2, 1], 2) makes qubit 2 the control.
    """
    op = np.asarray(op, dtype=complex)
    targets0 = _targets_zero_based(targets, n)
    k = n_qubits(op.shape[0])
    if k != len(targets0):
        raise ValueError(f"operator acts on {k} qubits but {len(targets0)} targets given")
    full = np.kron(op, np.eye(2 ** (n - k), dtype=complex)).reshape([2] * (2 * n))
    order = targets0 + [q for q in range(n) if q not in targets0]
    perm = [0] * n
    for axis, q in enumerate(order):
        perm[q] = axis
    full = full.transpose(perm + [n + p for p in perm])
    return full.reshape(2**n, 2**n)


def apply_gate(state, gate, targets) -> np.ndarray:
    """Apply a unitary to selected qubits of a state vector or density matrix."""
    gate = np.asarray(gate, dtype=complex)
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        n = n_qubits(state.size)
        targets0 = _targets_zero_based(targets, n)
        if 2 ** len(targets0) != gate.shape[0]:
            raise ValueError(
                f"gate of dimension {gate.shape[0]} does not fit {len(targets0)} targets"
            )
        return _apply_matrix_to_vector(state, gate, targets0, n)
    n = n_qubits(state.shape[0])
    u = embed(gate, targets, n)
    return u @ state @ u.conj().T


def apply_channel(rho, kraus_ops, targets) -> np.ndarray:
    """Apply sum_i K_i rho K_i^dagger on the selected qubits.

    The Kraus set must be trace preserving: sum_i K_i^dagger K_i = I
    within 1e-10.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits(rho.shape[0])
    ks = [np.asarray(k, dtype=complex) for k in kraus_ops]
    dim = ks[0].shape[0]
    comp = sum(k.conj().T @ k for k in ks)
    if not np.allclose(comp, np.eye(dim), atol=ATOL, rtol=0):
        raise ValueError("Kraus set is not trace preserving within 1e-10")
    out = np.zeros_like(rho)
    for k in ks:
        kk = embed(k, targets, n)
        out += kk @ rho @ kk.conj().T
    return out


@dataclass(frozen=True)
class PvmOutcome:
    """Result of a projective measurement: index, Born probability, post state."""

    outcome: int
    probability: float
    post_state: np.ndarray


def measure_pvm(state, projectors, rng, targets=None) -> PvmOutcome:
    """Sample a projective measurement outcome with Born probabilities.

    `projectors` must be a complete orthogonal set. When their dimension is
    smaller than the state's, `targets` names the measured qubits
    (default: the leading qubits 1..k). The selected branch is renormalized;
    selecting a branch of probability below 1e-12 raises
    ImpossibleOutcomeError instead of dividing by near-zero.
    """
    psi = np.asarray(state, dtype=complex).reshape(-1)
    n = n_qubits(psi.size)
    projs = [np.asarray(p, dtype=complex) for p in projectors]
    k = n_qubits(projs[0].shape[0])
    if targets is None:
        targets = list(range(1, k + 1))
    targets0 = _targets_zero_based(targets, n)
    dim = projs[0].shape[0]
    total = sum(projs)
    if not np.allclose(total, np.eye(dim), atol=ATOL, rtol=0):
        raise ValueError("incomplete projector set: projectors do not sum to identity")
    for p in projs:
        if not np.allclose(p @ p, p, atol=ATOL, rtol=0):
            raise ValueError("projector set contains a non-idempotent element")

    branches = [_apply_matrix_to_vector(psi, p, targets0, n) for p in projs]
    probs = np.array([float(np.real(np.vdot(b, b))) for b in branches])
    if abs(probs.sum() - 1.0) > ATOL:
        raise ValueError("Born probabilities do not sum to 1 within 1e-10")

    u = float(rng.random())
    cum = 0.0
    outcome = len(probs) - 1
    for i, p in enumerate(probs):
        cum += p
        if u < cum:
            outcome = i
            break
    p_sel = probs[outcome]
    if p_sel < RENORM_GUARD:
        raise ImpossibleOutcomeError(
            f"selected outcome {outcome} has probability {p_sel:.3e} < 1e-12"
        )
    post = branches[outcome] / np.sqrt(p_sel)
    return PvmOutcome(outcome=outcome, probability=float(p_sel), post_state=post)


def partial_trace(rho, keep) -> np.ndarray:
    """Trace out every qubit not listed in `keep`.

    The result's qubit order follows the keep list, so keep=[2, 1] also
    reorders the two kept qubits.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits(rho.shape[0])
    if len(list(keep)) == 0:
        raise ValueError("keep list must not be empty")
    keep0 = _targets_zero_based(keep, n)
    t = rho.reshape([2] * (2 * n))
    drop = [q for q in range(n) if q not in keep0]
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + t.ndim // 2)
    # trace left the kept axes in ascending order; restore the asked order
    asc = sorted(keep0)
    perm = [asc.index(q) for q in keep0]
    m = len(keep0)
    t = t.transpose(perm + [m + p for p in perm])
    return t.reshape(2**m, 2**m)


def expectation(rho, observable) -> float:
    """tr(A rho) for Hermitian A; accepts a pure state in place of rho.

    The imaginary residue must be below 1e-10; it is asserted and then
    discarded.
    """
    a = np.asarray(observable, dtype=complex)
    if not np.allclose(a, a.conj().T, atol=ATOL, rtol=0):
        raise ValueError("observable is not Hermitian within 1e-10")
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        val = complex(np.vdot(rho, a @ rho))
    else:
        val = complex(np.trace(a @ rho))
    if abs(val.imag) >= ATOL:
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def fidelity(a, b) -> float:
    """|<a|b>|^2 between two pure states; global phase drops out."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    return float(abs(np.vdot(a, b)) ** 2)


def states_equal(a, b, tol: float = ATOL) -> bool:
    """Pure-state equality up to global phase, via fidelity >= 1 - tol."""
    return fidelity(a, b) >= 1.0 - tol


def purity(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.trace(rho @ rho)))
