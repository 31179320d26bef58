"""Gates, Bell states and the fixed measurement observables of the protocol.

The two-qubit encoder (here `sigma_gate`) maps the computational basis onto
the Bell basis; composing it with itself on overlapping qubit pairs gives the
three-qubit relay unitary (`omega_gate`) that moves a qubit state across an
entangled pair. Operator products are written right to left, so the rightmost
factor is applied first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

_s = 1 / np.sqrt(2)
PHI_PLUS = np.array([_s, 0, 0, _s], dtype=complex)
PHI_MINUS = np.array([_s, 0, 0, -_s], dtype=complex)
PSI_PLUS = np.array([0, _s, _s, 0], dtype=complex)
PSI_MINUS = np.array([0, _s, -_s, 0], dtype=complex)


@dataclass(frozen=True)
class BellState:
    label: str
    vector: np.ndarray = field(repr=False)


BELL_STATES = {
    "phi+": BellState("phi+", PHI_PLUS),
    "phi-": BellState("phi-", PHI_MINUS),
    "psi+": BellState("psi+", PSI_PLUS),
    "psi-": BellState("psi-", PSI_MINUS),
}


@dataclass(frozen=True)
class Observable:
    """A +1/-1 valued qubit observable n . sigma given by a unit Bloch vector.

    Keeping the Bloch vector rather than the raw matrix gives the projectors
    the closed form (I +- n.sigma)/2, so no eigensolver is ever needed.
    """

    name: str
    bloch: tuple

    def __post_init__(self):
        norm = float(np.linalg.norm(self.bloch))
        if abs(norm - 1.0) > 1e-12 or len(self.bloch) != 3:
            raise ValueError(f"Bloch vector {self.bloch} is not a unit 3-vector")

    @property
    def matrix(self) -> np.ndarray:
        nx, ny, nz = self.bloch
        return nx * SX + ny * SY + nz * SZ

    def projectors(self):
        """(P_plus, P_minus) for eigenvalues +1 and -1."""
        m = self.matrix
        return (I2 + m) / 2, (I2 - m) / 2


def sigma_gate() -> np.ndarray:
    """The Bell-basis encoder: |00>->phi+, |01>->psi-, |10>->psi+, |11>->phi-.

    Built as the circuit SWAP, CNOT, H on qubit 1, CNOT (application order),
    which reproduces that basis table exactly.
    """
    return CNOT @ np.kron(H, I2) @ CNOT @ SWAP


def bell_pair_gate() -> np.ndarray:
    """H on qubit 1 then CNOT: |00>->phi+, |01>->psi+, |10>->phi-, |11>->psi-."""
    return CNOT @ np.kron(H, I2)


def omega_gate() -> np.ndarray:
    """Three-qubit relay: (I x Sigma)(Sigma x I).

    For any single-qubit |psi>, Omega(|psi> x |phi+>) = |phi+> x |psi>: the
    first qubit's state reappears on qubit 3 while qubits 1 and 2 are left
    maximally entangled.
    """
    sig = sigma_gate()
    return np.kron(I2, sig) @ np.kron(sig, I2)


def encoded_state(x: int) -> np.ndarray:
    """The tripartite state (Sigma x I)(|x> x |phi+>) for a key bit x."""
    if x not in (0, 1):
        raise ValueError(f"x must be 0 or 1, got {x!r}")
    ket = np.zeros(2, dtype=complex)
    ket[x] = 1.0
    psi = linalg.tensor(ket, PHI_PLUS)
    return linalg.apply_gate(psi, sigma_gate(), [1, 2])


_OBSERVABLES = {
    "A1": Observable("A1", (1.0, 0.0, 0.0)),
    "A2": Observable("A2", (_s, 0.0, _s)),
    "A3": Observable("A3", (0.0, 0.0, 1.0)),
    "B1": Observable("B1", (_s, 0.0, _s)),
    "B2": Observable("B2", (0.0, 0.0, 1.0)),
    "B3": Observable("B3", (-_s, 0.0, _s)),
}

ALICE_LABELS = ("A1", "A2", "A3")
BOB_LABELS = ("B1", "B2", "B3")


def protocol_observables() -> dict:
    """The six fixed measurement settings, keyed by label.

    A2 and B1 are the same operator, as are A3 and B2; those two coincidences
    are what makes basis reconciliation possible.
    """
    return dict(_OBSERVABLES)
