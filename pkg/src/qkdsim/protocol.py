"""Round state machines for the two-way relay protocol and the E91 baseline.

Both protocols run in two numeric modes that share one pipeline definition:

  sample mode  - a vectorized state-vector Monte Carlo over all rounds at
                 once, producing a SessionTranscript of per-round records;
  exact mode   - density-matrix evolution of the same step sequence through
                 the channel operations, producing the exact correlators,
                 mismatch probabilities and Eve information tables with no
                 randomness at all.

Two-way round, in order: the second party prepares a Bell pair (b, c) and
sends b (leg 1); the first party draws a key bit x, sets a = |x>, applies the
Bell encoder to (a, b) and returns b (leg 2); the second party applies the
encoder to (b, c), then both measure their drawn observables on a and b while
qubit c is read in the computational basis to recover x. Channel noise acts
first on each leg, the attack acts at the leg's receiving end.

Randomness contract: round i consumes row i of a (rounds, 14) uniform matrix
drawn once from numpy's default_rng(seed), so each round's stream is a pure
function of (seed, round index) and transcripts reproduce bit for bit. Slot
layout (column indices): 0 x, 1 Alice basis, 2 Bob basis, 3 leg-1
depolarizing branch, 4 leg-1 dephasing branch, 5 leg-1 attack outcome,
6/7/8 the same three for leg 2, 9 Alice's outcome, 10 Bob's outcome, 11 the
x-recovery outcome, 12 leg-1 probe readout, 13 leg-2 probe readout. Unused
slots are still drawn, which keeps the layout stable across configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import analysis, linalg
from .adversary import (
    AttackModel,
    NoiseModel,
    dephasing_kraus,
    depolarizing_kraus,
    intercept_record_kraus,
    pauli_branch_thresholds,
)
from .circuits import (
    ALICE_LABELS,
    BOB_LABELS,
    CNOT,
    I2,
    PAULIS,
    SZ,
    bell_pair_gate,
    protocol_observables,
    sigma_gate,
)

MATCHED_PAIRS = (("A2", "B1"), ("A3", "B2"))

SLOT_X = 0
SLOT_ALICE_BASIS = 1
SLOT_BOB_BASIS = 2
SLOT_LEG1_DEPOL = 3
SLOT_LEG1_DEPHASE = 4
SLOT_LEG1_ATTACK = 5
SLOT_LEG2_DEPOL = 6
SLOT_LEG2_DEPHASE = 7
SLOT_LEG2_ATTACK = 8
SLOT_ALICE_OUTCOME = 9
SLOT_BOB_OUTCOME = 10
SLOT_XB_OUTCOME = 11
SLOT_PROBE1 = 12
SLOT_PROBE2 = 13
N_SLOTS = 14

_NOISE_SLOTS = {1: (SLOT_LEG1_DEPOL, SLOT_LEG1_DEPHASE), 2: (SLOT_LEG2_DEPOL, SLOT_LEG2_DEPHASE)}
_ATTACK_SLOTS = {1: SLOT_LEG1_ATTACK, 2: SLOT_LEG2_ATTACK}
_PROBE_SLOTS = {1: SLOT_PROBE1, 2: SLOT_PROBE2}

_Z_BLOCH = (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class RoundRecord:
    """One protocol round. Outcomes are the +1/-1 eigenvalues; x and x_b are
    bits and stay None for E91. attack_annotations maps record labels
    (e_leg1, e_leg2, probe_leg1, probe_leg2) to Eve's bits."""

    round_id: int
    x: int
    alice_basis: str
    bob_basis: str
    alice_outcome: int
    bob_outcome: int
    x_b: int
    attack_annotations: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SessionTranscript:
    protocol: str
    rounds: tuple
    rng_seed: int
    noise: NoiseModel
    attack: AttackModel


@dataclass(frozen=True)
class SiftedKey:
    """Aligned key bits with per-bit provenance tags ("x-bit" or
    "matched-basis-bit")."""

    alice_bits: str
    bob_bits: str
    source_tags: tuple

    def __post_init__(self):
        if not (len(self.alice_bits) == len(self.bob_bits) == len(self.source_tags)):
            raise ValueError("key strings and tags must have equal lengths")


@dataclass(frozen=True)
class CorrelatorEstimates:
    """Empirical per-pair correlators (mean of outcome products) with counts."""

    correlators: dict
    counts: dict


@dataclass(frozen=True)
class ExactFigures:
    """Exact-mode output: the full correlator table, the CHSH statistic,
    mismatch probabilities, QBER, the post-protocol pair state (Alice first)
    and Eve's exact information. p_x_mismatch and eve_mi_x are None for E91,
    where qber is the baseline matched-only figure."""

    protocol: str
    correlators: dict
    s_value: float
    p_a2_b1_mismatch: float
    p_a3_b2_mismatch: float
    p_x_mismatch: float
    qber: float
    baseline_mode: bool
    rho_ab: np.ndarray
    eve_mi_x: float
    eve_mi_matched: float
    n_eve_systems: int


def round_uniforms(n_rounds: int, seed: int) -> np.ndarray:
    """The (n_rounds, 14) uniform matrix; row i is round i's random stream."""
    return np.random.default_rng(int(seed)).random((int(n_rounds), N_SLOTS))


# ---------------------------------------------------------------------------
# vectorized sample-mode kernel


def _batch_apply(states, op, targets0):
    """Apply one fixed 2^k x 2^k unitary to 0-based qubit axes of every row."""
    b = states.shape[0]
    n = states.shape[1].bit_length() - 1
    k = len(targets0)
    t = states.reshape([b] + [2] * n)
    t = np.moveaxis(t, [1 + q for q in targets0], range(1, 1 + k))
    shaped = t.shape
    t = np.einsum("ij,bjr->bir", op, t.reshape(b, 2**k, -1))
    t = np.moveaxis(t.reshape(shaped), range(1, 1 + k), [1 + q for q in targets0])
    return t.reshape(b, -1)


def _batch_apply_each(states, mats, q0):
    """Apply a per-row 2x2 operator (mats has shape (rows, 2, 2)) to qubit q0."""
    b = states.shape[0]
    n = states.shape[1].bit_length() - 1
    t = states.reshape([b] + [2] * n)
    t = np.moveaxis(t, 1 + q0, 1)
    shaped = t.shape
    t = np.einsum("bij,bjr->bir", mats, t.reshape(b, 2, -1))
    t = np.moveaxis(t.reshape(shaped), 1, 1 + q0)
    return t.reshape(b, -1)


def _batch_measure(states, blochs, q0, u):
    """Projective readout of qubit q0 along per-row Bloch axes.

    Returns (bits, post_states) with bit 0 for the +1 eigenvalue. The
    uniform u selects the +1 branch when u < p_plus; since u < 1, a branch
    of probability zero is never selected and the selected branch's norm is
    always positive.
    """
    b = states.shape[0]
    proj = np.empty((b, 2, 2), dtype=complex)
    nx, ny, nz = blochs[:, 0], blochs[:, 1], blochs[:, 2]
    proj[:, 0, 0] = 0.5 * (1 + nz)
    proj[:, 0, 1] = 0.5 * (nx - 1j * ny)
    proj[:, 1, 0] = 0.5 * (nx + 1j * ny)
    proj[:, 1, 1] = 0.5 * (1 - nz)
    v_plus = _batch_apply_each(states, proj, q0)
    p_plus = np.einsum("bi,bi->b", v_plus.conj(), v_plus).real
    bits = (u >= p_plus).astype(np.int64)
    selected = np.where((bits == 0)[:, None], v_plus, states - v_plus)
    denom = np.where(bits == 0, p_plus, 1.0 - p_plus)
    return bits, selected / np.sqrt(denom)[:, None]


def _batch_noise(states, q0, leg, noise, uniforms):
    p_dep, p_deph = noise.for_leg(leg)
    dep_slot, deph_slot = _NOISE_SLOTS[leg]
    if p_dep > 0:
        thresholds = np.array(pauli_branch_thresholds(p_dep))
        idx = np.searchsorted(thresholds, uniforms[:, dep_slot], side="right")
        states = _batch_apply_each(states, np.stack(PAULIS)[idx], q0)
    if p_deph > 0:
        flip = uniforms[:, deph_slot] >= 1 - p_deph / 2
        mats = np.where(flip[:, None, None], SZ[None, :, :], I2[None, :, :])
        states = _batch_apply_each(states, mats, q0)
    return states


def _batch_transit(states, q0, leg, noise, attack, uniforms, eve_bits, probe_positions):
    """One leg of transmission: channel noise, then the attack at the
    receiving end. May grow the register by a probe qubit."""
    b = states.shape[0]
    states = _batch_noise(states, q0, leg, noise, uniforms)
    if attack.kind == "intercept_z" and leg in attack.legs:
        z = np.tile(np.array(_Z_BLOCH), (b, 1))
        bits, states = _batch_measure(states, z, q0, uniforms[:, _ATTACK_SLOTS[leg]])
        eve_bits[f"e_leg{leg}"] = bits
    elif attack.kind == "entangling_probe" and leg in attack.legs:
        out = np.zeros((b, 2 * states.shape[1]), dtype=complex)
        out[:, 0::2] = states  # fresh |0> probe appended at the least significant end
        states = out
        n = states.shape[1].bit_length() - 1
        states = _batch_apply(states, CNOT, [q0, n - 1])
        probe_positions[f"probe_leg{leg}"] = n - 1
    return states


def _measure_probes(states, attack, uniforms, eve_bits, probe_positions):
    if not probe_positions:
        return states
    b = states.shape[0]
    bloch = np.tile(np.array(protocol_observables()[attack.probe_measurement].bloch), (b, 1))
    for label in sorted(probe_positions):
        leg = int(label[-1])
        bits, states = _batch_measure(
            states, bloch, probe_positions[label], uniforms[:, _PROBE_SLOTS[leg]]
        )
        eve_bits[label] = bits
    return states


def _assemble_records(n_rounds, a_idx, b_idx, a_bits, b_bits, x, x_b, eve_bits):
    ann_labels = sorted(eve_bits)
    rounds = []
    for i in range(n_rounds):
        rounds.append(
            RoundRecord(
                round_id=i,
                x=None if x is None else int(x[i]),
                alice_basis=ALICE_LABELS[a_idx[i]],
                bob_basis=BOB_LABELS[b_idx[i]],
                alice_outcome=int(1 - 2 * a_bits[i]),
                bob_outcome=int(1 - 2 * b_bits[i]),
                x_b=None if x_b is None else int(x_b[i]),
                attack_annotations={lab: int(eve_bits[lab][i]) for lab in ann_labels},
            )
        )
    return tuple(rounds)


def _validate_run_args(n_rounds, noise, attack):
    if int(n_rounds) < 1:
        raise ValueError(f"n_rounds must be at least 1, got {n_rounds}")
    return int(n_rounds), noise or NoiseModel(), attack or AttackModel()


def run_two_way(n_rounds, noise=None, attack=None, seed=0) -> SessionTranscript:
    """Simulate n_rounds of the two-way protocol and return the transcript."""
    n_rounds, noise, attack = _validate_run_args(n_rounds, noise, attack)
    obs = protocol_observables()
    u = round_uniforms(n_rounds, seed)
    x = (u[:, SLOT_X] >= 0.5).astype(np.int64)
    a_idx = (u[:, SLOT_ALICE_BASIS] * 3).astype(np.int64)
    b_idx = (u[:, SLOT_BOB_BASIS] * 3).astype(np.int64)
    alice_blochs = np.array([obs[lab].bloch for lab in ALICE_LABELS])[a_idx]
    bob_blochs = np.array([obs[lab].bloch for lab in BOB_LABELS])[b_idx]

    eve_bits = {}
    probe_positions = {}
    states = np.zeros((n_rounds, 4), dtype=complex)
    states[:, 0] = 1.0
    states = _batch_apply(states, bell_pair_gate(), [0, 1])  # pair (b, c)
    states = _batch_transit(states, 0, 1, noise, attack, u, eve_bits, probe_positions)

    # Alice prepends a = |x> at the most significant position
    dim = states.shape[1]
    grown = np.zeros((n_rounds, 2 * dim), dtype=complex)
    zero = x == 0
    grown[zero, :dim] = states[zero]
    grown[~zero, dim:] = states[~zero]
    states = grown
    probe_positions = {k: v + 1 for k, v in probe_positions.items()}

    states = _batch_apply(states, sigma_gate(), [0, 1])  # encode (a, b)
    states = _batch_transit(states, 1, 2, noise, attack, u, eve_bits, probe_positions)
    states = _batch_apply(states, sigma_gate(), [1, 2])  # decode (b, c)

    a_bits, states = _batch_measure(states, alice_blochs, 0, u[:, SLOT_ALICE_OUTCOME])
    b_bits, states = _batch_measure(states, bob_blochs, 1, u[:, SLOT_BOB_OUTCOME])
    z = np.tile(np.array(_Z_BLOCH), (n_rounds, 1))
    xb_bits, states = _batch_measure(states, z, 2, u[:, SLOT_XB_OUTCOME])
    _measure_probes(states, attack, u, eve_bits, probe_positions)

    rounds = _assemble_records(n_rounds, a_idx, b_idx, a_bits, b_bits, x, xb_bits, eve_bits)
    return SessionTranscript(
        protocol="two_way", rounds=rounds, rng_seed=int(seed), noise=noise, attack=attack
    )


def run_e91(n_rounds, noise=None, attack=None, seed=0) -> SessionTranscript:
    """Simulate the baseline: a Bell pair per round, qubit 2 routed to Alice.

    Only leg 1 exists here; a leg-2 attack or leg-2 noise entry is never
    exercised. Bases are drawn exactly as in the two-way run.
    """
    n_rounds, noise, attack = _validate_run_args(n_rounds, noise, attack)
    obs = protocol_observables()
    u = round_uniforms(n_rounds, seed)
    a_idx = (u[:, SLOT_ALICE_BASIS] * 3).astype(np.int64)
    b_idx = (u[:, SLOT_BOB_BASIS] * 3).astype(np.int64)
    alice_blochs = np.array([obs[lab].bloch for lab in ALICE_LABELS])[a_idx]
    bob_blochs = np.array([obs[lab].bloch for lab in BOB_LABELS])[b_idx]

    eve_bits = {}
    probe_positions = {}
    states = np.zeros((n_rounds, 4), dtype=complex)
    states[:, 0] = 1.0
    states = _batch_apply(states, bell_pair_gate(), [0, 1])  # (kept, transit)
    states = _batch_transit(states, 1, 1, noise, attack, u, eve_bits, probe_positions)

    a_bits, states = _batch_measure(states, alice_blochs, 1, u[:, SLOT_ALICE_OUTCOME])
    b_bits, states = _batch_measure(states, bob_blochs, 0, u[:, SLOT_BOB_OUTCOME])
    _measure_probes(states, attack, u, eve_bits, probe_positions)

    rounds = _assemble_records(n_rounds, a_idx, b_idx, a_bits, b_bits, None, None, eve_bits)
    return SessionTranscript(
        protocol="e91", rounds=rounds, rng_seed=int(seed), noise=noise, attack=attack
    )


# ---------------------------------------------------------------------------
# classical post-processing


def sift(transcript: SessionTranscript) -> SiftedKey:
    """Extract the aligned key bits, ordered by round id.

    Two-way rounds always contribute the (x, x_b) pair; rounds whose basis
    pair matches additionally contribute the measurement outcomes mapped
    +1 -> 0, -1 -> 1 (x bit first within a round). E91 rounds contribute
    matched-basis outcomes only.
    """
    if not transcript.rounds:
        raise ValueError("transcript has no rounds")
    alice = []
    bob = []
    tags = []
    for r in sorted(transcript.rounds, key=lambda rr: rr.round_id):
        if transcript.protocol == "two_way":
            alice.append(str(r.x))
            bob.append(str(r.x_b))
            tags.append("x-bit")
        if (r.alice_basis, r.bob_basis) in MATCHED_PAIRS:
            alice.append(str((1 - r.alice_outcome) // 2))
            bob.append(str((1 - r.bob_outcome) // 2))
            tags.append("matched-basis-bit")
    return SiftedKey(alice_bits="".join(alice), bob_bits="".join(bob), source_tags=tuple(tags))


def chsh_rounds(transcript: SessionTranscript) -> CorrelatorEstimates:
    """Empirical correlators for the four test pairs, with sample counts.

    Every test pair must appear in the transcript; a missing pair raises an
    estimator-undefined error naming it.
    """
    sums = {pair: 0.0 for pair in analysis.CHSH_PAIRS}
    counts = {pair: 0 for pair in analysis.CHSH_PAIRS}
    for r in transcript.rounds:
        pair = (r.alice_basis, r.bob_basis)
        if pair in sums:
            sums[pair] += r.alice_outcome * r.bob_outcome
            counts[pair] += 1
    for pair, c in counts.items():
        if c == 0:
            raise analysis.EstimatorUndefinedError(
                f"basis pair ({pair[0]},{pair[1]}) has no rounds; the test statistic "
                "needs all four pairs. Each covers about 1/9 of rounds under uniform "
                "basis choice, so run at least a few hundred rounds."
            )
    return CorrelatorEstimates(
        correlators={pair: sums[pair] / counts[pair] for pair in sums},
        counts=counts,
    )


def empirical_mismatch_rates(transcript: SessionTranscript) -> dict:
    """Observed mismatch frequencies feeding the QBER.

    Returns {"p_a2_b1_mismatch", "p_a3_b2_mismatch", "p_x_mismatch"}; the x
    entry is None for E91. Matched pairs with no rounds raise the same
    estimator-undefined error as the test statistic.
    """
    mism = {pair: 0 for pair in MATCHED_PAIRS}
    counts = {pair: 0 for pair in MATCHED_PAIRS}
    x_mism = 0
    for r in transcript.rounds:
        pair = (r.alice_basis, r.bob_basis)
        if pair in mism:
            counts[pair] += 1
            if r.alice_outcome != r.bob_outcome:
                mism[pair] += 1
        if r.x is not None and r.x != r.x_b:
            x_mism += 1
    for pair, c in counts.items():
        if c == 0:
            raise analysis.EstimatorUndefinedError(
                f"matched basis pair ({pair[0]},{pair[1]}) has no rounds; the error "
                "rate needs both matched pairs. Run more rounds (each matched pair "
                "covers about 1/9 of rounds)."
            )
    two_way = transcript.protocol == "two_way"
    return {
        "p_a2_b1_mismatch": mism[("A2", "B1")] / counts[("A2", "B1")],
        "p_a3_b2_mismatch": mism[("A3", "B2")] / counts[("A3", "B2")],
        "p_x_mismatch": (x_mism / len(transcript.rounds)) if two_way else None,
    }


# ---------------------------------------------------------------------------
# exact-mode engine: the same pipeline over density matrices


def _exact_transit(rho, labels, transit_label, leg, noise, attack):
    pos = labels.index(transit_label) + 1
    p_dep, p_deph = noise.for_leg(leg)
    if p_dep > 0:
        rho = linalg.apply_channel(rho, depolarizing_kraus(p_dep), [pos])
    if p_deph > 0:
        rho = linalg.apply_channel(rho, dephasing_kraus(p_deph), [pos])
    if attack.kind == "intercept_z" and leg in attack.legs:
        rho = linalg.tensor(rho, np.diag([1.0, 0.0]).astype(complex))
        labels.append(f"e_leg{leg}")
        rho = linalg.apply_channel(rho, intercept_record_kraus(), [pos, len(labels)])
    elif attack.kind == "entangling_probe" and leg in attack.legs:
        rho = linalg.tensor(rho, np.diag([1.0, 0.0]).astype(complex))
        labels.append(f"probe_leg{leg}")
        rho = linalg.apply_gate(rho, CNOT, [pos, len(labels)])
    return rho, labels


def _eve_projector_sets(labels, attack):
    """Per-ancilla projector pairs indexed by register position (1-based)."""
    obs = protocol_observables()
    sets = {}
    for i, lab in enumerate(labels):
        if lab.startswith("e_leg"):
            sets[i + 1] = (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex))
        elif lab.startswith("probe_leg"):
            sets[i + 1] = obs[attack.probe_measurement].projectors()
    return sets


def _joint_table(rho, n, position_projectors):
    """Joint Born probabilities over one outcome per listed position.

    position_projectors: ordered list of (position, (P0, P1)). Returns a dict
    mapping the outcome-bit tuple to its probability.
    """
    import itertools

    table = {}
    for combo in itertools.product((0, 1), repeat=len(position_projectors)):
        ops = [I2] * n
        for (pos, projs), bit in zip(position_projectors, combo):
            ops[pos - 1] = projs[bit]
        table[combo] = linalg.expectation(rho, linalg.tensor(*ops))
    return table


def _exact_eve_information(rho_by_branch, labels, attack, alice_pos, bob_pos, has_x):
    """Exact MI(E; x) and MI(E; matched outcome pair) from Born tables.

    rho_by_branch maps branch keys (x values, or a single None) to the final
    register states; branches are equiprobable.
    """
    eve_sets = _eve_projector_sets(labels, attack)
    if not eve_sets:
        return (0.0 if has_x else None), 0.0, 0
    n = len(labels)
    eve_list = sorted(eve_sets.items())
    obs = protocol_observables()
    weight = 1.0 / len(rho_by_branch)

    mi_x = None
    if has_x:
        joint = {}
        for x, rho in rho_by_branch.items():
            for combo, p in _joint_table(rho, n, eve_list).items():
                joint[(combo, x)] = joint.get((combo, x), 0.0) + weight * p
        mi_x = analysis.mutual_information(joint)

    per_pair = []
    for a_lab, b_lab in MATCHED_PAIRS:
        specs = [
            (alice_pos, obs[a_lab].projectors()),
            (bob_pos, obs[b_lab].projectors()),
        ] + eve_list
        joint = {}
        for rho in rho_by_branch.values():
            for combo, p in _joint_table(rho, n, specs).items():
                key = (combo[2:], combo[:2])  # (eve bits, (alice bit, bob bit))
                joint[key] = joint.get(key, 0.0) + weight * p
        per_pair.append(analysis.mutual_information(joint))
    return mi_x, float(np.mean(per_pair)), len(eve_sets)


def _correlator_table(rho_ab):
    obs = protocol_observables()
    return {
        (a, b): linalg.expectation(rho_ab, linalg.tensor(obs[a].matrix, obs[b].matrix))
        for a in ALICE_LABELS
        for b in BOB_LABELS
    }


def exact_two_way(noise=None, attack=None) -> ExactFigures:
    """Exact density-matrix pass over the two-way pipeline.

    Runs the two x branches (x is uniform), averages, and reads off every
    reported probability from traces. Seeds play no role here; sample-mode
    frequencies converge to these numbers.
    """
    noise = noise or NoiseModel()
    attack = attack or AttackModel()
    rho_by_x = {}
    labels_final = None
    for x in (0, 1):
        rho = linalg.pure_density(np.array([1, 0, 0, 0], dtype=complex))
        rho = linalg.apply_gate(rho, bell_pair_gate(), [1, 2])
        labels = ["b", "c"]
        rho, labels = _exact_transit(rho, labels, "b", 1, noise, attack)
        ket = np.diag([1.0, 0.0]) if x == 0 else np.diag([0.0, 1.0])
        rho = linalg.tensor(ket.astype(complex), rho)
        labels = ["a"] + labels
        rho = linalg.apply_gate(rho, sigma_gate(), [1, 2])
        rho, labels = _exact_transit(rho, labels, "b", 2, noise, attack)
        rho = linalg.apply_gate(rho, sigma_gate(), [labels.index("b") + 1, labels.index("c") + 1])
        rho_by_x[x] = rho
        labels_final = labels

    n = len(labels_final)
    rho_avg = 0.5 * (rho_by_x[0] + rho_by_x[1])
    rho_ab = linalg.partial_trace(rho_avg, [1, 2])
    correlators = _correlator_table(rho_ab)
    s_value = analysis.chsh_combination(correlators)
    p21 = (1.0 - correlators[("A2", "B1")]) / 2.0
    p32 = (1.0 - correlators[("A3", "B2")]) / 2.0

    c_pos = labels_final.index("c") + 1
    p_match = 0.0
    for x in (0, 1):
        rho_c = linalg.partial_trace(rho_by_x[x], [c_pos])
        p_match += 0.5 * float(np.real(rho_c[x, x]))
    p_x_mismatch = 1.0 - p_match

    mi_x, mi_matched, n_eve = _exact_eve_information(
        rho_by_x, labels_final, attack, alice_pos=1, bob_pos=2, has_x=True
    )
    return ExactFigures(
        protocol="two_way",
        correlators=correlators,
        s_value=s_value,
        p_a2_b1_mismatch=p21,
        p_a3_b2_mismatch=p32,
        p_x_mismatch=p_x_mismatch,
        qber=analysis.qber(_clip01(p21), _clip01(p32), _clip01(p_x_mismatch)),
        baseline_mode=False,
        rho_ab=rho_ab,
        eve_mi_x=mi_x,
        eve_mi_matched=mi_matched,
        n_eve_systems=n_eve,
    )


def exact_e91(noise=None, attack=None) -> ExactFigures:
    """Exact pass over the baseline pipeline; QBER is the matched-only figure."""
    noise = noise or NoiseModel()
    attack = attack or AttackModel()
    rho = linalg.pure_density(np.array([1, 0, 0, 0], dtype=complex))
    rho = linalg.apply_gate(rho, bell_pair_gate(), [1, 2])
    labels = ["keep", "transit"]
    rho, labels = _exact_transit(rho, labels, "transit", 1, noise, attack)

    # reorder to (alice, bob) = (transit, keep)
    rho_ab = linalg.partial_trace(rho, [2, 1])
    correlators = _correlator_table(rho_ab)
    s_value = analysis.chsh_combination(correlators)
    p21 = (1.0 - correlators[("A2", "B1")]) / 2.0
    p32 = (1.0 - correlators[("A3", "B2")]) / 2.0

    mi_x, mi_matched, n_eve = _exact_eve_information(
        {None: rho}, labels, attack, alice_pos=2, bob_pos=1, has_x=False
    )
    return ExactFigures(
        protocol="e91",
        correlators=correlators,
        s_value=s_value,
        p_a2_b1_mismatch=p21,
        p_a3_b2_mismatch=p32,
        p_x_mismatch=None,
        qber=analysis.qber_baseline(_clip01(p21), _clip01(p32)),
        baseline_mode=True,
        rho_ab=rho_ab,
        eve_mi_x=None,
        eve_mi_matched=mi_matched,
        n_eve_systems=n_eve,
    )


def _clip01(p: float) -> float:
    # traces can land an ulp outside [0, 1]
    return min(1.0, max(0.0, float(p)))
