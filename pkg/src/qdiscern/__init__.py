"""Discriminating two pure states from the mean of an n-sample."""
from .discrimination import (
    DiscriminationStats,
    SaturatingFamilySpec,
    SaturationReport,
    build_onb,
    check_qmie,
    check_saturation,
    detection_prob,
    discernability,
    family_operator,
    fleming_bound,
    min_error_prob,
    qmie_gap,
    saturating_observable,
    simple_optimal,
    unambiguous_max,
)
from .linalg import (
    SpectralDecomposition,
    StatePair,
    angle_between,
    eigendecompose,
    expectation,
    inner,
    make_state_pair,
    standard_pair,
    uncertainty,
)
from .optimizer import SearchConfig, SearchResult, maximize_delta, maximize_detection
from .sampling import (
    OutcomeDistribution,
    ThresholdRule,
    TrialReport,
    chebyshev_bound,
    chebyshev_check,
    identify,
    outcome_distribution,
    run_experiment,
    sample_mean,
    threshold,
)
from .tolerances import DEFAULT as DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
