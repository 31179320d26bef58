"""Deterministic simulator and analysis toolkit for a two-way
entanglement-based QKD protocol, with an E91 baseline.

Everything is reproducible from a single integer seed: sampled sessions
draw a fixed block of uniforms per round, and the exact engine evolves
density matrices through the same pipeline with no randomness at all.
"""

__version__ = "0.1.0"

from .adversary import (
    ATTACK_KINDS,
    AttackModel,
    EveRecord,
    NoiseModel,
    apply_attack,
    apply_noise,
    dephasing_kraus,
    depolarizing_kraus,
    eve_information,
    intercept_record_kraus,
)
from .analysis import (
    CHSH_PAIRS,
    TSIRELSON,
    ChshEstimate,
    EstimatorUndefinedError,
    RateReport,
    binary_entropy,
    chsh_combination,
    chsh_empirical,
    chsh_exact,
    classify_tripartite,
    concurrence,
    devetak_winter,
    holevo_bound,
    hyperdeterminant,
    hypermatrix_coefficients,
    mutual_information,
    qber,
    qber_baseline,
)
from .circuits import (
    BELL_STATES,
    PHI_MINUS,
    PHI_PLUS,
    PSI_MINUS,
    PSI_PLUS,
    Observable,
    bell_pair_gate,
    encoded_state,
    omega_gate,
    protocol_observables,
    sigma_gate,
)
from .linalg import (
    ImpossibleOutcomeError,
    PvmOutcome,
    apply_channel,
    apply_gate,
    density_matrix,
    expectation,
    fidelity,
    measure_pvm,
    partial_trace,
    pure_density,
    purity,
    state_vector,
    states_equal,
    tensor,
)
from .protocol import (
    MATCHED_PAIRS,
    CorrelatorEstimates,
    ExactFigures,
    RoundRecord,
    SessionTranscript,
    SiftedKey,
    chsh_rounds,
    empirical_mismatch_rates,
    exact_e91,
    exact_two_way,
    round_uniforms,
    run_e91,
    run_two_way,
    sift,
)

__all__ = [
    "__version__",
    "ATTACK_KINDS",
    "AttackModel",
    "EveRecord",
    "NoiseModel",
    "apply_attack",
    "apply_noise",
    "dephasing_kraus",
    "depolarizing_kraus",
    "eve_information",
    "intercept_record_kraus",
    "CHSH_PAIRS",
    "TSIRELSON",
    "ChshEstimate",
    "EstimatorUndefinedError",
    "RateReport",
    "binary_entropy",
    "chsh_combination",
    "chsh_empirical",
    "chsh_exact",
    "classify_tripartite",
    "concurrence",
    "devetak_winter",
    "holevo_bound",
    "hyperdeterminant",
    "hypermatrix_coefficients",
    "mutual_information",
    "qber",
    "qber_baseline",
    "BELL_STATES",
    "PHI_MINUS",
    "PHI_PLUS",
    "PSI_MINUS",
    "PSI_PLUS",
    "Observable",
    "bell_pair_gate",
    "encoded_state",
    "omega_gate",
    "protocol_observables",
    "sigma_gate",
    "ImpossibleOutcomeError",
    "PvmOutcome",
    "apply_channel",
    "apply_gate",
    "density_matrix",
    "expectation",
    "fidelity",
    "measure_pvm",
    "partial_trace",
    "pure_density",
    "purity",
    "state_vector",
    "states_equal",
    "tensor",
    "MATCHED_PAIRS",
    "CorrelatorEstimates",
    "ExactFigures",
    "RoundRecord",
    "SessionTranscript",
    "SiftedKey",
    "chsh_rounds",
    "empirical_mismatch_rates",
    "exact_e91",
    "exact_two_way",
    "round_uniforms",
    "run_e91",
    "run_two_way",
    "sift",
]
