"""Weak partial-collapse measurement on an n-level system.

Each level |m> leaks into the detector with probability p_m during the
tunneling window. A click destroys the system; a null outcome rescales the
amplitudes by ``sqrt(1 - p_m) exp(i phi_m)`` and renormalizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CalibrationError, DimensionError, DomainError, StateDestroyedError
from .hilbert import Observable, StateVector

DESTROYED_TOL = 1e-14
STRUCTURE_TOL = 1e-12


def probabilities_from_rates(rates: Sequence[float], t: float) -> np.ndarray:
    """p_m = 1 - exp(-rate_m t)."""
    rates = np.asarray(rates, dtype=float)
    if t < 0 or not np.isfinite(t):
        raise DomainError(f"tunneling time must be a nonnegative number, got {t}")
    if np.any(rates < 0) or not np.all(np.isfinite(rates)):
        raise DomainError(f"tunneling rates must be nonnegative and finite, got {rates.tolist()}")
    return -np.expm1(-rates * t)


@dataclass(frozen=True)
class PartialCollapseConfig:
    probs: tuple[float, ...]
    phases: tuple[float, ...] = field(default=())

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if len(probs) < 2:
            raise DimensionError("need at least two levels")
        for m, p in enumerate(probs):
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"probs[{m}] = {p} is outside [0, 1]")
        phases = tuple(float(x) for x in self.phases) if self.phases else (0.0,) * len(probs)
        if len(phases) != len(probs):
            raise DimensionError(f"{len(phases)} phases for {len(probs)} levels")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "phases", phases)

    @property
    def dim(self) -> int:
        return len(self.probs)

    @classmethod
    def from_rates(cls, rates: Sequence[float], t: float, phases: Sequence[float] = ()):
        return cls(tuple(probabilities_from_rates(rates, t)), tuple(phases))

    def null_kraus_diagonal(self) -> np.ndarray:
        """Diagonal of the (unnormalized) null-outcome operator."""
        p = np.asarray(self.probs)
        return np.sqrt(1.0 - p) * np.exp(1j * np.asarray(self.phases))


def _check(cfg: PartialCollapseConfig, s: StateVector) -> None:
    if cfg.dim != s.dim:
        raise DimensionError(f"config has {cfg.dim} levels, state has dim {s.dim}")


def click_probability(cfg: PartialCollapseConfig, s: StateVector) -> float:
    """P(M_w) = sum_m p_m |alpha_m|^2."""
    _check(cfg, s)
    return float(np.dot(cfg.probs, s.probabilities()))


def backaction(cfg: PartialCollapseConfig, s: StateVector) -> StateVector:
    """State left behind by a null outcome of the first measurement."""
    _check(cfg, s)
    p_null = 1.0 - click_probability(cfg, s)
    if p_null <= DESTROYED_TOL:
        raise StateDestroyedError(f"null outcome probability {p_null:.3e} is zero")
    out = s.amplitudes * cfg.null_kraus_diagonal()
    # Renormalize with the computed norm: dividing by sqrt(p_null) alone drifts
    # past the 1e-12 norm check when p_null is tiny.
    return StateVector(out / np.linalg.norm(out))


def mw_observable(cfg: PartialCollapseConfig) -> Observable:
    """M_w = sum_l p_l |l><l|, the detector-dependent click observable."""
    return Observable.diagonal(cfg.probs)


@dataclass(frozen=True)
class Calibration:
    """Affine map ``A = (M_w - offset) / scale`` onto a system observable."""

    scale: float
    offset: float = 0.0

    def __post_init__(self):
        if self.scale == 0 or not np.isfinite(self.scale):
            raise CalibrationError(f"calibration scale must be finite and nonzero, got {self.scale}")

    def apply(self, value: float) -> float:
        return (value - self.offset) / self.scale

    def observable(self, cfg: PartialCollapseConfig) -> Observable:
        return Observable.diagonal((np.asarray(cfg.probs) - self.offset) / self.scale)


@dataclass(frozen=True)
class DominantState:
    """Population of a single level whose tunneling probability dominates."""

    index: int


@dataclass(frozen=True)
class Subspace:
    """Population of levels 0..k, which share one tunneling probability."""

    k: int


def calibration_for(cfg: PartialCollapseConfig, mode: DominantState | Subspace) -> Calibration:
    probs = cfg.probs
    if isinstance(mode, DominantState):
        m = mode.index
        if not 0 <= m < cfg.dim:
            raise CalibrationError(f"level {m} out of range for dim {cfg.dim}", index=m)
        if probs[m] <= 0:
            raise CalibrationError(f"dominant level {m} has zero tunneling probability", index=m)
        return Calibration(scale=probs[m], offset=0.0)
    if isinstance(mode, Subspace):
        k = mode.k
        if not 0 <= k < cfg.dim - 1:
            raise CalibrationError(f"subspace bound k={k} must lie in [0, {cfg.dim - 2}]", index=k)
        p, p_rest = probs[0], probs[k + 1]
        for j in range(cfg.dim):
            ref = p if j <= k else p_rest
            if abs(probs[j] - ref) > STRUCTURE_TOL:
                raise CalibrationError(
                    f"probs[{j}] = {probs[j]} breaks the two-valued subspace structure", index=j
                )
        if abs(p - p_rest) <= STRUCTURE_TOL:
            raise CalibrationError("subspace and complement share one tunneling probability", index=k + 1)
        return Calibration(scale=p - p_rest, offset=p_rest)
    raise TypeError(f"unknown calibration mode {mode!r}")
