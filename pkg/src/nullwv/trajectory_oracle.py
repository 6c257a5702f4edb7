"""Monte Carlo event-tree sampler used as a brute-force check on the analytic chain.

Every trajectory walks the tree: first measurement (click destroys the
system, null applies the null Kraus operator), unitary, second measurement
of |m~><m~|. Branch weights come from Kraus-operator norms computed here,
not from :mod:`nullwv.partial_collapse`, so the two routes stay independent.

Random streams: sample ``k`` of a run is drawn from chunk ``k // CHUNK``,
and each chunk owns a generator seeded by ``SeedSequence(seed,
spawn_key=stream + (chunk,))``. Counts are therefore identical for any
number of worker threads.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InsufficientStatisticsError
from .hilbert import StateVector, Unitary
from .partial_collapse import Calibration, PartialCollapseConfig

log = logging.getLogger(__name__)

CHUNK = 1 << 16
FEW_EVENTS = 100


@dataclass(frozen=True)
class TrajectoryOutcome:
    first_click: bool
    # A destroyed system is recorded as a definite no-click.
    second_click: bool

    def __post_init__(self):
        if self.first_click and self.second_click:
            raise ValueError("a destroyed system cannot click in the second measurement")


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n_samples: int
    n_conditioning: int


@dataclass(frozen=True)
class TrajectoryCounts:
    n_samples: int
    n_first_click: int
    n_second_null: int  # includes every destroyed run
    n_joint: int  # first click and second null

    def __add__(self, other: "TrajectoryCounts") -> "TrajectoryCounts":
        return TrajectoryCounts(
            self.n_samples + other.n_samples,
            self.n_first_click + other.n_first_click,
            self.n_second_null + other.n_second_null,
            self.n_joint + other.n_joint,
        )

    def click_probability(self) -> EstimateWithError:
        return _binomial(self.n_first_click, self.n_samples, self.n_samples)

    def postselect_probability(self) -> EstimateWithError:
        return _binomial(self.n_second_null, self.n_samples, self.n_samples)

    def conditional(self) -> EstimateWithError:
        """Empirical P(M_w | second null)."""
        if self.n_second_null == 0:
            raise InsufficientStatisticsError(self.n_samples, 0)
        if self.n_second_null < FEW_EVENTS:
            warnings.warn(
                f"only {self.n_second_null} conditioning events; normal-approximation "
                "error bars are unreliable",
                RuntimeWarning,
                stacklevel=2,
            )
        return _binomial(self.n_joint, self.n_second_null, self.n_samples)


def _binomial(hits: int, trials: int, n_samples: int) -> EstimateWithError:
    v = hits / trials
    return EstimateWithError(v, math.sqrt(v * (1.0 - v) / trials), n_samples, trials)


def branch_probabilities(
    cfg: PartialCollapseConfig, i: StateVector, U: Unitary, postselect_index: int
) -> tuple[float, float]:
    """(P(first click), P(second click | first null)) from Kraus norms."""
    if not (cfg.dim == i.dim == U.dim):
        raise DimensionError(f"dims disagree: config {cfg.dim}, state {i.dim}, unitary {U.dim}")
    if not 0 <= postselect_index < cfg.dim:
        raise DimensionError(f"postselect index {postselect_index} out of range")
    k_null = np.diag(np.sqrt(1.0 - np.asarray(cfg.probs)) * np.exp(1j * np.asarray(cfg.phases)))
    survived = k_null @ i.amplitudes
    p_null = float(np.vdot(survived, survived).real)
    p_click = min(max(1.0 - p_null, 0.0), 1.0)
    if p_null == 0.0:
        return p_click, 0.0
    evolved = U.matrix @ (survived / math.sqrt(p_null))
    projector = np.zeros((cfg.dim, cfg.dim))
    projector[postselect_index, postselect_index] = 1.0
    hit = projector @ evolved
    return p_click, min(float(np.vdot(hit, hit).real), 1.0)


def sample_trajectory(
    cfg: PartialCollapseConfig,
    i: StateVector,
    U: Unitary,
    postselect_index: int,
    rng: np.random.Generator,
) -> TrajectoryOutcome:
    p_click, p_second = branch_probabilities(cfg, i, U, postselect_index)
    if rng.random() < p_click:
        return TrajectoryOutcome(True, False)
    return TrajectoryOutcome(False, bool(rng.random() < p_second))


def _chunk_rng(seed: int, stream: tuple[int, ...], chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(*stream, chunk)))


def _sample_chunk(p_click: float, p_second: float, n: int, rng: np.random.Generator):
    u = rng.random((2, n))
    first = u[0] < p_click
    second = ~first & (u[1] < p_second)
    return first, second


def _chunks(n_samples: int) -> list[tuple[int, int]]:
    return [(k, min(CHUNK, n_samples - k * CHUNK)) for k in range(-(-n_samples // CHUNK))]


def sample_trajectories(
    cfg: PartialCollapseConfig,
    i: StateVector,
    U: Unitary,
    postselect_index: int,
    n_samples: int,
    seed: int,
    stream: tuple[int, ...] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Boolean arrays (first_click, second_click) for ``n_samples`` trajectories."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    p_click, p_second = branch_probabilities(cfg, i, U, postselect_index)
    parts = [_sample_chunk(p_click, p_second, n, _chunk_rng(seed, stream, k)) for k, n in _chunks(n_samples)]
    return np.concatenate([a for a, _ in parts]), np.concatenate([b for _, b in parts])


def count_outcomes(
    cfg: PartialCollapseConfig,
    i: StateVector,
    U: Unitary,
    postselect_index: int,
    n_samples: int,
    seed: int,
    jobs: int = 1,
    stream: tuple[int, ...] = (),
) -> TrajectoryCounts:
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    p_click, p_second = branch_probabilities(cfg, i, U, postselect_index)

    def work(chunk: tuple[int, int]) -> TrajectoryCounts:
        k, n = chunk
        first, second = _sample_chunk(p_click, p_second, n, _chunk_rng(seed, stream, k))
        n_first = int(first.sum())
        return TrajectoryCounts(n, n_first, n - int(second.sum()), n_first)

    chunks = _chunks(n_samples)
    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    total = TrajectoryCounts(0, 0, 0, 0)
    for part in parts:
        total = total + part
    log.debug("sampled %d trajectories in %d chunks (stream %s)", n_samples, len(chunks), stream)
    return total


def estimate_conditional(
    cfg: PartialCollapseConfig,
    i: StateVector,
    U: Unitary,
    postselect_index: int,
    n_samples: int,
    seed: int,
    jobs: int = 1,
    stream: tuple[int, ...] = (),
) -> EstimateWithError:
    """Empirical P(M_w | second null) with its binomial standard error."""
    counts = count_outcomes(cfg, i, U, postselect_index, n_samples, seed, jobs, stream)
    return counts.conditional()


def calibrate_estimate(est: EstimateWithError, cal: Calibration) -> EstimateWithError:
    return EstimateWithError(
        cal.apply(est.value), est.std_error / abs(cal.scale), est.n_samples, est.n_conditioning
    )


def estimate_nwv(
    cfg: PartialCollapseConfig,
    cal: Calibration,
    i: StateVector,
    U: Unitary,
    postselect_index: int,
    n_samples: int,
    seed: int,
    jobs: int = 1,
    stream: tuple[int, ...] = (),
) -> EstimateWithError:
    est = estimate_conditional(cfg, i, U, postselect_index, n_samples, seed, jobs, stream)
    return calibrate_estimate(est, cal)
