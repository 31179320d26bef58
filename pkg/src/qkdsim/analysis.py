"""Scalar figures of merit: CHSH statistic, QBER, entropies, key rates,
plus the hyperdeterminant-based tripartite classifier and a concurrence
utility.

All logarithms are base 2; rates and information are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .circuits import SY, protocol_observables

TSIRELSON = 2 * math.sqrt(2)

# The test statistic combines the four correlators below with a minus sign on
# (A1, B3). With the protocol's fixed observables this is the unique
# two-settings-per-side combination whose clean-state value is 2*sqrt(2).
CHSH_PAIRS = (("A1", "B1"), ("A1", "B3"), ("A3", "B1"), ("A3", "B3"))
CHSH_SIGNS = {
    ("A1", "B1"): 1.0,
    ("A1", "B3"): -1.0,
    ("A3", "B1"): 1.0,
    ("A3", "B3"): 1.0,
}

QBER_WEIGHTS = (1 / 8, 1 / 8, 3 / 4)


class EstimatorUndefinedError(ValueError):
    """An empirical estimator lacks the rounds it needs (e.g. a basis pair)."""


@dataclass(frozen=True)
class ChshEstimate:
    """The CHSH statistic with its four correlators.

    counts is None in exact mode and maps pair -> sample count in
    empirical mode.
    """

    s_value: float
    correlators: dict
    counts: dict
    mode: str


@dataclass(frozen=True)
class RateReport:
    """Key-rate chain: QBER, mutual information, Holevo bound, rates.

    dw_rate_raw may be negative; dw_rate is clamped at zero and feeds the
    throughput.
    """

    qber: float
    i_ab: float
    holevo_bound: float
    dw_rate_raw: float
    dw_rate: float
    throughput_R: float


def chsh_combination(correlators: dict) -> float:
    """|E(A1,B1) - E(A1,B3) + E(A3,B1) + E(A3,B3)| from a pair -> value map."""
    total = 0.0
    for pair in CHSH_PAIRS:
        if pair not in correlators:
            raise EstimatorUndefinedError(
                f"basis pair ({pair[0]},{pair[1]}) is missing from the correlator set"
            )
        total += CHSH_SIGNS[pair] * correlators[pair]
    return abs(total)


def chsh_exact(rho_ab) -> ChshEstimate:
    """Exact CHSH statistic of a two-qubit state, Alice's qubit first."""
    rho = linalg.density_matrix(rho_ab)
    if rho.shape[0] != 4:
        raise ValueError(f"need a 2-qubit density matrix, got dimension {rho.shape[0]}")
    obs = protocol_observables()
    correlators = {
        pair: linalg.expectation(rho, linalg.tensor(obs[pair[0]].matrix, obs[pair[1]].matrix))
        for pair in CHSH_PAIRS
    }
    return ChshEstimate(
        s_value=chsh_combination(correlators),
        correlators=correlators,
        counts=None,
        mode="exact",
    )


def chsh_empirical(correlators, counts=None) -> ChshEstimate:
    """Plug empirical correlators into the CHSH combination.

    Accepts either a pair -> value dict plus counts, or an object carrying
    .correlators and .counts (the shape protocol.chsh_rounds returns).
    """
    if hasattr(correlators, "correlators"):
        counts = dict(correlators.counts)
        correlators = dict(correlators.correlators)
    else:
        correlators = dict(correlators)
        counts = dict(counts) if counts else {pair: None for pair in CHSH_PAIRS}
    return ChshEstimate(
        s_value=chsh_combination(correlators),
        correlators=correlators,
        counts=counts,
        mode="empirical",
    )


def qber(p_a2_b1_mismatch: float, p_a3_b2_mismatch: float, p_x_mismatch: float) -> float:
    """Weighted error rate (1/8) p(a2 != b1) + (1/8) p(a3 != b2) + (3/4) p(x != x_b)."""
    probs = (p_a2_b1_mismatch, p_a3_b2_mismatch, p_x_mismatch)
    names = ("p_a2_b1_mismatch", "p_a3_b2_mismatch", "p_x_mismatch")
    for name, p in zip(names, probs):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return sum(w * p for w, p in zip(QBER_WEIGHTS, probs))


def qber_baseline(p_a2_b1_mismatch: float, p_a3_b2_mismatch: float) -> float:
    """Error rate over matched-basis bits only, for transcripts with no x stream."""
    for p in (p_a2_b1_mismatch, p_a3_b2_mismatch):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"mismatch probability must lie in [0, 1], got {p}")
    return 0.5 * (p_a2_b1_mismatch + p_a3_b2_mismatch)


def binary_entropy(p: float) -> float:
    """-p log2 p - (1-p) log2 (1-p), with H(0) = H(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary entropy needs p in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def holevo_bound(s: float) -> float:
    """Eavesdropper information ceiling as a function of the CHSH value.

    H((1 + sqrt((s/2)^2 - 1)) / 2) for s in [2, 2*sqrt(2)]. Below 2 there is
    no Bell violation and the bound clamps to 1 (Eve unconstrained); above
    2*sqrt(2) the squared argument is clipped, which absorbs both sampling
    overshoot and the one-ulp excess of float (sqrt(2))^2.
    """
    if s < 0:
        raise ValueError(f"CHSH value must be non-negative, got {s}")
    if s < 2.0:
        return 1.0
    t = min(1.0, max(0.0, (s / 2.0) ** 2 - 1.0))
    return binary_entropy((1.0 + math.sqrt(t)) / 2.0)


def devetak_winter(q: float, s: float) -> RateReport:
    """Lower bound on the distillable key rate from (QBER, CHSH value).

    r = 1 - H(q) - chi(s), reported raw and clamped at zero; the throughput
    R = (2/3) r uses the clamped rate.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"QBER must lie in [0, 1], got {q}")
    if s < 0:
        raise ValueError(f"CHSH value must be non-negative, got {s}")
    i_ab = 1.0 - binary_entropy(q)
    chi = holevo_bound(s)
    raw = i_ab - chi
    clamped = max(0.0, raw)
    return RateReport(
        qber=q,
        i_ab=i_ab,
        holevo_bound=chi,
        dw_rate_raw=raw,
        dw_rate=clamped,
        throughput_R=(2.0 / 3.0) * clamped,
    )


def hypermatrix_coefficients(psi) -> np.ndarray:
    """The 2x2x2 coefficient array a_ijk of a normalized 3-qubit state."""
    a = linalg.state_vector(psi)
    if a.size != 8:
        raise ValueError(f"need a 3-qubit state, got dimension {a.size}")
    return a.reshape(2, 2, 2)


def hyperdeterminant(coeffs) -> complex:
    """Cayley's hyperdeterminant of a 2x2x2 coefficient array.

    Degree-4 polynomial, invariant (up to phase) under local SL(2) action;
    nonzero exactly on the GHZ entanglement class. Note that the normalized
    GHZ state itself gives 1/4 and the protocol's encoded states give
    magnitude 1/4 as well (claims of magnitude 1 correspond to unnormalized
    coefficients; only nonzero-ness feeds the classification).
    """
    a = np.asarray(coeffs, dtype=complex).reshape(-1)
    if a.size != 8:
        raise ValueError(f"need 8 coefficients, got {a.size}")
    a000, a001, a010, a011, a100, a101, a110, a111 = a
    quad = (
        a000**2 * a111**2
        + a001**2 * a110**2
        + a010**2 * a101**2
        + a100**2 * a011**2
    )
    pairs = (
        a000 * a001 * a110 * a111
        + a000 * a010 * a101 * a111
        + a000 * a100 * a011 * a111
        + a001 * a010 * a101 * a110
        + a001 * a100 * a011 * a110
        + a010 * a100 * a011 * a101
    )
    quartets = a000 * a011 * a101 * a110 + a001 * a010 * a100 * a111
    return complex(quad - 2 * pairs + 4 * quartets)


GHZ_DET_THRESHOLD = 1e-8
PURITY_THRESHOLD = 1.0 - 1e-8


def classify_tripartite(psi) -> str:
    """Entanglement class label of a normalized 3-qubit pure state.

    "GHZ-class" when |Det| > 1e-8; otherwise marginal purities separate
    "separable", the three biseparable splits, and "W-class".
    """
    a = linalg.state_vector(psi)
    if a.size != 8:
        raise ValueError(f"need a 3-qubit state, got dimension {a.size}")
    if abs(hyperdeterminant(a)) > GHZ_DET_THRESHOLD:
        return "GHZ-class"
    rho = linalg.pure_density(a)
    pure = [
        linalg.purity(linalg.partial_trace(rho, [q])) > PURITY_THRESHOLD
        for q in (1, 2, 3)
    ]
    if sum(pure) >= 2:
        return "separable"
    if pure[0]:
        return "biseparable:a-bc"
    if pure[1]:
        return "biseparable:b-ac"
    if pure[2]:
        return "biseparable:c-ab"
    return "W-class"


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix via the spin flip."""
    rho = linalg.density_matrix(rho)
    if rho.shape[0] != 4:
        raise ValueError(f"need a 2-qubit density matrix, got dimension {rho.shape[0]}")
    yy = linalg.tensor(SY, SY)
    rho_tilde = yy @ rho.conj() @ yy
    evals = np.linalg.eigvals(rho @ rho_tilde)
    lams = np.sort(np.sqrt(np.clip(evals.real, 0.0, None)))[::-1]
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


def mutual_information(joint) -> float:
    """MI in bits from a {(a_value, b_value): weight} table; weights need not sum to 1."""
    total = float(sum(joint.values()))
    if total <= 0:
        return 0.0
    pa = {}
    pb = {}
    for (a, b), w in joint.items():
        pa[a] = pa.get(a, 0.0) + w / total
        pb[b] = pb.get(b, 0.0) + w / total
    mi = 0.0
    for (a, b), w in joint.items():
        p = w / total
        if p > 0:
            mi += p * math.log2(p / (pa[a] * pb[b]))
    return max(0.0, mi)
