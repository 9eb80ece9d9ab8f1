"""Belief tracking and information-gain action selection for object property estimation."""

__version__ = "0.1.0"

from .beliefs import (
    CategoricalBelief,
    ContinuousBelief,
    GaussianMixture,
    Grid,
    IncompatibleMeasurement,
    differential_entropy,
    discrete_entropy,
    discretize,
    mixture_from_pmf,
    multiply_likelihood,
    uniform_categorical,
)
from .reference import (
    ActionSpec,
    EdgeTranslation,
    GroundTruthObject,
    ReferenceTables,
    ValidationError,
    build_default_confusion,
    load_action_specs,
    load_edge_translations,
    load_object_catalog,
    load_reference_data,
    load_reference_tables,
)
from .network import (
    NetworkState,
    apply_categorical_measurement,
    apply_continuous_measurement,
    estimate_mixture_weights,
    init_network,
    network_entropy,
    propagate_messages,
)
from .infogain import (
    ActionEvaluation,
    emulate_continuous_posterior,
    expected_categorical_entropy,
    expected_information_gain,
    experimental_information_gain,
    sample_entropy_vector,
)
from .actions import (
    MeasurementOutcome,
    default_action_set,
    outcome_to_update,
    simulate_measurement,
)
from .planner import (
    ACTSEL,
    RAND,
    TERMINATE,
    EpisodeConfig,
    EpisodeTrace,
    cross_entropy,
    run_episode,
    select_action,
)
