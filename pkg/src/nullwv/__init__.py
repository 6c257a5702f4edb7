"""Weak values and null weak values of n-level systems, with a Monte Carlo oracle."""

from .errors import *  # noqa: F401,F403  (re-export the exception hierarchy)
from .hilbert import (
    Observable,
    StateVector,
    Unitary,
    apply_unitary,
    expectation,
    inner,
    normalize,
    qubit_rotation,
)
from .nwv_protocol import (
    NwvResult,
    ProtocolProbabilities,
    discrimination_signal,
    nwv_exact,
    nwv_weak_limit_qubit,
    run_analytic,
)
from .partial_collapse import (
    Calibration,
    DominantState,
    PartialCollapseConfig,
    Subspace,
    backaction,
    calibration_for,
    click_probability,
    mw_observable,
    probabilities_from_rates,
)
from .pointer_wv import (
    GaussianPointer,
    WeakValueResult,
    pointer_mean_exact,
    pointer_mean_linear,
    standard_wv,
    weak_value,
)
from .trajectory_oracle import (
    EstimateWithError,
    TrajectoryOutcome,
    estimate_conditional,
    estimate_nwv,
    sample_trajectory,
)

__version__ = "0.1.0"
