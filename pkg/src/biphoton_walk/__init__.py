"""Two-photon discrete-time quantum walks under binary phase disorder.

Simulates a coined walk on the line for an indistinguishable photon pair,
computes coincidence and Cauchy-Schwarz violation matrices, searches the
space of {0, pi} phase maps for configurations that enhance the violations,
averages over p-diluted disorder, and emulates Poissonian coincidence
counting with propagated errors.
"""

__version__ = "0.1.0"

from .correlations import (
    DEFAULT_INPUT,
    ORACLE_MAX_STEP,
    BiphotonInput,
    CoincidenceMatrix,
    gamma_distinguishable,
    gamma_indistinguishable,
    gamma_partial,
    two_particle_oracle,
)
from .disorder import (
    DisorderAverage,
    DisorderModel,
    average_over_disorder,
    derive_seed,
    enumerate_phase_maps,
    realization_map,
    sample_phase_map,
)
from .lattice import COINS, Mode, ModeIndexing, enumerate_modes, mode_index
from .measurement import (
    PAPER_PRESET,
    CountMatrix,
    ExperimentPreset,
    ExperimentRun,
    ViolationEstimate,
    reproduce_experiment,
    sample_counts,
    step6_enhancing_map,
    violation_from_counts,
)
from .search import (
    SearchResult,
    TrendRecord,
    evaluate_map,
    exhaustive_search,
    hill_climb,
    mav_trend,
    random_search,
    search_candidates,
    violation_landscape,
)
from .violation import (
    PairDecomposition,
    ViolationMatrix,
    pair_decomposition,
    similarity,
    violation_matrix,
    violation_values,
)
from .walk import (
    BALANCED_COIN,
    CoinSpec,
    PhaseMap,
    SingleParticleUnitary,
    build_unitary,
    coin_matrix,
    site_count,
)

__all__ = [
    "__version__",
    "COINS", "Mode", "ModeIndexing", "enumerate_modes", "mode_index",
    "BALANCED_COIN", "CoinSpec", "PhaseMap", "SingleParticleUnitary",
    "build_unitary", "coin_matrix", "site_count",
    "DEFAULT_INPUT", "ORACLE_MAX_STEP", "BiphotonInput", "CoincidenceMatrix",
    "gamma_distinguishable", "gamma_indistinguishable", "gamma_partial",
    "two_particle_oracle",
    "PairDecomposition", "ViolationMatrix", "pair_decomposition",
    "similarity", "violation_matrix", "violation_values",
    "DisorderAverage", "DisorderModel", "average_over_disorder",
    "derive_seed", "enumerate_phase_maps", "realization_map",
    "sample_phase_map",
    "SearchResult", "TrendRecord", "evaluate_map", "exhaustive_search",
    "hill_climb", "mav_trend", "random_search", "search_candidates",
    "violation_landscape",
    "PAPER_PRESET", "CountMatrix", "ExperimentPreset", "ExperimentRun",
    "ViolationEstimate", "reproduce_experiment", "sample_counts",
    "step6_enhancing_map", "violation_from_counts",
]
