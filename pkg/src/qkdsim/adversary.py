"""Attack and channel-noise models for the transmitted qubits.

Two attack families are modeled. Intercept-resend measures the transiting
qubit in the computational basis and forwards the collapsed eigenstate (no
re-preparation strategy). The entangling probe couples the transiting qubit
to a fresh ancilla with a CNOT; the ancilla stays in Eve's register, is traced
out of every Alice/Bob statistic, and is measured at the end of the round.

Noise channels: depolarizing with parameter p meaning "a uniformly random
Pauli error is applied with probability p" (the white-noise convention, since
several parameterizations circulate), and pure dephasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import analysis, linalg
from .circuits import CNOT, I2, SX, SY, SZ, protocol_observables

ATTACK_KINDS = ("none", "intercept_z", "entangling_probe")
LEGS = (1, 2)

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class AttackModel:
    """Configuration of the eavesdropper.

    legs: which transmissions are attacked (1: first party to second,
    2: the return leg). Must be non-empty unless kind is "none".
    probe_measurement: observable label Eve uses on her probe. The default
    is A1 (sigma_x): a sigma_z-measured CNOT probe carries exactly zero
    information about the matched-basis outcomes, so sigma_x is the reading
    that actually exercises the information/disturbance trade-off.
    """

    kind: str = "none"
    legs: frozenset = frozenset()
    probe_measurement: str = "A1"

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        legs = frozenset(int(l) for l in self.legs)
        object.__setattr__(self, "legs", legs)
        if not legs <= set(LEGS):
            raise ValueError(f"attack legs must be within {{1, 2}}, got {sorted(legs)}")
        if self.kind != "none" and not legs:
            raise ValueError(f"attack kind {self.kind!r} needs at least one leg")
        if self.kind == "none" and legs:
            raise ValueError("attack kind 'none' must not list legs")
        if self.probe_measurement not in protocol_observables():
            raise ValueError(f"unknown probe observable {self.probe_measurement!r}")

    @classmethod
    def parse(cls, text: str) -> "AttackModel":
        """Parse CLI-style attack names.

        Accepted: none, intercept-z:leg1, intercept-z:leg2, intercept-z:both,
        probe-cnot:leg1.
        """
        t = text.strip().lower()
        if t == "none":
            return cls()
        try:
            kind_s, legs_s = t.split(":", 1)
        except ValueError:
            raise ValueError(f"malformed attack spec {text!r}") from None
        kinds = {"intercept-z": "intercept_z", "probe-cnot": "entangling_probe"}
        if kind_s not in kinds:
            raise ValueError(f"unknown attack {text!r}")
        legmap = {"leg1": {1}, "leg2": {2}, "both": {1, 2}}
        if legs_s not in legmap:
            raise ValueError(f"unknown attack leg {legs_s!r} in {text!r}")
        if kind_s == "probe-cnot" and legs_s != "leg1":
            raise ValueError("probe-cnot supports leg1 only")
        return cls(kind=kinds[kind_s], legs=frozenset(legmap[legs_s]))

    def to_string(self) -> str:
        if self.kind == "none":
            return "none"
        names = {"intercept_z": "intercept-z", "entangling_probe": "probe-cnot"}
        leg = "both" if self.legs == {1, 2} else f"leg{min(self.legs)}"
        return f"{names[self.kind]}:{leg}"


@dataclass(frozen=True)
class NoiseModel:
    """Per-leg depolarizing and dephasing probabilities.

    Scalars apply to both legs; pairs give (leg1, leg2) individually.
    """

    depolarizing_p: tuple = (0.0, 0.0)
    dephasing_p: tuple = (0.0, 0.0)

    def __post_init__(self):
        for name in ("depolarizing_p", "dephasing_p"):
            v = getattr(self, name)
            pair = (float(v), float(v)) if np.isscalar(v) else tuple(float(p) for p in v)
            if len(pair) != 2:
                raise ValueError(f"{name} needs a scalar or a (leg1, leg2) pair")
            for p in pair:
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"{name} must lie in [0, 1], got {p}")
            object.__setattr__(self, name, pair)

    def for_leg(self, leg: int):
        """(depolarizing_p, dephasing_p) for the given leg."""
        return self.depolarizing_p[leg - 1], self.dephasing_p[leg - 1]

    @property
    def is_trivial(self) -> bool:
        return all(p == 0.0 for p in self.depolarizing_p + self.dephasing_p)


@dataclass(frozen=True)
class EveRecord:
    """Eve's classical bookkeeping for one round; populated only for attacked legs."""

    round_id: int
    intercept_outcomes: tuple = ()
    probe_outcomes: tuple = ()


def depolarizing_kraus(p: float):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    return [
        np.sqrt(1 - 3 * p / 4) * I2,
        np.sqrt(p / 4) * SX,
        np.sqrt(p / 4) * SY,
        np.sqrt(p / 4) * SZ,
    ]


def dephasing_kraus(p: float):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"dephasing probability {p} outside [0, 1]")
    return [np.sqrt(1 - p / 2) * I2, np.sqrt(p / 2) * SZ]


def pauli_branch_thresholds(p: float):
    """Cumulative thresholds for sampling the depolarizing branch I, X, Y, Z.

    A uniform u picks I when u < 1-3p/4, then X, Y, Z on the successive
    quarters. Branch probabilities are state independent.
    """
    return (1 - 3 * p / 4, 1 - p / 2, 1 - p / 4)


def intercept_record_kraus():
    """Exact-mode intercept channel on (transit, fresh record qubit in |0>).

    The record qubit copies the computational-basis value, which is exactly
    Eve's classical knowledge after the measurement.
    """
    return [linalg.tensor(_P0, I2), linalg.tensor(_P1, SX)]


def apply_noise(state, transit: int, leg: int, model: NoiseModel, rng=None):
    """Send one qubit through the leg's noise.

    Exact route: `state` is a density matrix and rng is None, the Kraus
    channels are applied. Sampled route: `state` is a state vector and a
    Pauli branch is drawn from rng for each channel.
    """
    p_dep, p_deph = model.for_leg(leg)
    state = np.asarray(state, dtype=complex)
    if state.ndim == 2:
        if p_dep > 0:
            state = linalg.apply_channel(state, depolarizing_kraus(p_dep), [transit])
        if p_deph > 0:
            state = linalg.apply_channel(state, dephasing_kraus(p_deph), [transit])
        return state
    if p_dep > 0:
        u = float(rng.random())
        thresholds = pauli_branch_thresholds(p_dep)
        branch = 3
        for i, t in enumerate(thresholds):
            if u < t:
                branch = i
                break
        op = (I2, SX, SY, SZ)[branch]
        if branch:
            state = linalg.apply_gate(state, op, [transit])
    if p_deph > 0:
        u = float(rng.random())
        if u >= 1 - p_deph / 2:
            state = linalg.apply_gate(state, SZ, [transit])
    return state


def apply_attack(state, transit: int, leg: int, model: AttackModel, rng):
    """Act on the transiting qubit at position `transit` during leg `leg`.

    Returns (state, fragment) where fragment is None for a no-op,
    {"kind": "intercept", "leg": leg, "bit": b} for intercept-resend, or
    {"kind": "probe", "leg": leg, "position": q} after appending a probe
    qubit (its measurement happens at the end of the round).
    """
    if leg not in LEGS:
        raise ValueError(f"unknown leg {leg!r}")
    if model.kind == "none" or leg not in model.legs:
        return state, None
    state = np.asarray(state, dtype=complex)
    if model.kind == "intercept_z":
        out = linalg.measure_pvm(state, [_P0, _P1], rng, targets=[transit])
        return out.post_state, {"kind": "intercept", "leg": leg, "bit": out.outcome}
    # entangling probe: fresh |0> ancilla, CNOT from the transit qubit
    n = linalg.n_qubits(state.size)
    state = linalg.tensor(state, np.array([1, 0], dtype=complex))
    state = linalg.apply_gate(state, CNOT, [transit, n + 1])
    return state, {"kind": "probe", "leg": leg, "position": n + 1}


def eve_information(transcript, target: str = "x") -> float:
    """Plug-in mutual information between Eve's records and protocol data.

    target="x": MI between the per-round record tuple and Alice's x bit,
    in bits per attacked round. target="matched": per matched basis pair,
    MI between the record tuple and the (alice, bob) outcome-bit pair,
    averaged over the pairs present. Returns 0.0 when no round carries
    records.
    """
    if target not in ("x", "matched"):
        raise ValueError(f"unknown target {target!r}")
    attacked = [r for r in transcript.rounds if r.attack_annotations]
    if not attacked:
        return 0.0

    def record_tuple(r):
        return tuple(sorted(r.attack_annotations.items()))

    if target == "x":
        if any(r.x is None for r in attacked):
            raise ValueError("transcript has no x stream; target='x' needs the two-way protocol")
        joint = {}
        for r in attacked:
            key = (record_tuple(r), r.x)
            joint[key] = joint.get(key, 0) + 1
        return analysis.mutual_information(joint)

    from .protocol import MATCHED_PAIRS  # local import, avoids a module cycle

    values = []
    for pair in sorted(MATCHED_PAIRS):
        joint = {}
        for r in attacked:
            if (r.alice_basis, r.bob_basis) != pair:
                continue
            bits = ((1 - r.alice_outcome) // 2, (1 - r.bob_outcome) // 2)
            key = (record_tuple(r), bits)
            joint[key] = joint.get(key, 0) + 1
        if joint:
            values.append(analysis.mutual_information(joint))
    return float(np.mean(values)) if values else 0.0
