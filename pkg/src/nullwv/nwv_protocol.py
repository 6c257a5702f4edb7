"""Analytic null-weak-value protocol.

Run: partial-collapse measurement (click M_w / null), unitary U on the
surviving state, strong measurement of |m~><m~| (click M_s / null). Runs
that click in the second step are discarded; a system destroyed by the
first click can never click again, so P(null_s | M_w) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    NwvError,
    OrthogonalPostselectionError,
    PostselectionAnnihilatedError,
)
from .hilbert import StateVector, Unitary, apply_unitary, expectation
from .partial_collapse import (
    DESTROYED_TOL,
    Calibration,
    PartialCollapseConfig,
    backaction,
    click_probability,
    mw_observable,
)
from .pointer_wv import OVERLAP_FLOOR

POSTSELECT_TOL = 1e-14
ROUTE_TOL = 1e-10


@dataclass(frozen=True)
class ProtocolProbabilities:
    p_click1: float
    p_null1: float
    p_nofail_given_null: float
    p_postselect_total: float
    p_click1_given_postselect: float


@dataclass(frozen=True)
class NwvResult:
    probabilities: ProtocolProbabilities
    nwv_exact: float
    nwv_weak_limit: float | None = None


def _validate(cfg: PartialCollapseConfig, i: StateVector, U: Unitary, m: int) -> None:
    if not (cfg.dim == i.dim == U.dim):
        raise DimensionError(f"dims disagree: config {cfg.dim}, state {i.dim}, unitary {U.dim}")
    if not 0 <= m < cfg.dim:
        raise DimensionError(f"postselect index {m} out of range for dim {cfg.dim}")


def run_analytic(
    cfg: PartialCollapseConfig, i: StateVector, U: Unitary, postselect_index: int
) -> ProtocolProbabilities:
    _validate(cfg, i, U, postselect_index)
    p_click = click_probability(cfg, i)
    p_null = 1.0 - p_click
    if p_null <= DESTROYED_TOL:
        # Certain destruction: every run ends with a null second outcome and
        # the null-branch conditional is vacuous. Report it as 1 by convention.
        p_click, p_null, p_nofail = 1.0, 0.0, 1.0
    else:
        evolved = apply_unitary(U, backaction(cfg, i)).probabilities()
        p_nofail = float(evolved.sum() - evolved[postselect_index])
        p_nofail = min(max(p_nofail, 0.0), 1.0)
    p_post = p_click + p_null * p_nofail
    if p_post <= POSTSELECT_TOL:
        raise PostselectionAnnihilatedError(
            f"P(null second outcome) = {p_post:.3e}; the conditional is undefined"
        )
    return ProtocolProbabilities(
        p_click1=p_click,
        p_null1=p_null,
        p_nofail_given_null=p_nofail,
        p_postselect_total=p_post,
        p_click1_given_postselect=min(p_click / p_post, 1.0),
    )


def nwv_weak_limit_qubit(
    i: StateVector, f: StateVector, overlap_floor: float = OVERLAP_FLOOR
) -> float:
    """<i|n1|i> / |<f|i>|^2, the small-p limit of the qubit NWV of n1 = |1><1|."""
    if i.dim != 2 or f.dim != 2:
        raise DimensionError("the weak-limit formula is defined for qubits only")
    overlap2 = abs(np.vdot(f.amplitudes, i.amplitudes)) ** 2
    if overlap2 <= overlap_floor:
        raise OrthogonalPostselectionError(float(np.sqrt(overlap2)), overlap_floor)
    return float(abs(i.amplitudes[1]) ** 2 / overlap2)


def qubit_postselected_state(U: Unitary, postselect_index: int) -> StateVector:
    """|f> = U^dagger |1 - m~>: the state a null second outcome selects, pulled back through U."""
    target = np.zeros(2, dtype=complex)
    target[1 - postselect_index] = 1.0
    return StateVector(U.matrix.conj().T @ target)


def nwv_exact(
    cfg: PartialCollapseConfig,
    cal: Calibration,
    i: StateVector,
    U: Unitary,
    postselect_index: int,
) -> NwvResult:
    probs = run_analytic(cfg, i, U, postselect_index)
    value = cal.apply(probs.p_click1_given_postselect)
    if cal.offset == 0.0:
        # Second route: calibrated unconditional average over P(null_s).
        alt = expectation(mw_observable(cfg), i) / cal.scale / probs.p_postselect_total
        if abs(alt - value) > ROUTE_TOL * max(1.0, abs(value)):
            raise NwvError(f"Bayes route {value!r} and expectation route {alt!r} disagree")
    weak = None
    if cfg.dim == 2:
        try:
            weak = nwv_weak_limit_qubit(i, qubit_postselected_state(U, postselect_index))
        except OrthogonalPostselectionError:
            weak = None
    return NwvResult(probabilities=probs, nwv_exact=value, nwv_weak_limit=weak)


def discrimination_signal(
    cfg: PartialCollapseConfig,
    cal: Calibration,
    i0: StateVector,
    i_delta: StateVector,
    U: Unitary,
    postselect_index: int,
    calibrated: bool = False,
) -> float:
    """S = P(M_w | null_s) for i_delta minus the same for i0.

    With ``calibrated=True`` the difference is divided by the calibration scale.
    """
    p0 = run_analytic(cfg, i0, U, postselect_index).p_click1_given_postselect
    pd = run_analytic(cfg, i_delta, U, postselect_index).p_click1_given_postselect
    signal = pd - p0
    return signal / cal.scale if calibrated else signal
