"""Sweeps, discrimination reports and Monte Carlo runs driven by an ExperimentConfig."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigMismatchError, InsufficientStatisticsError, NwvError
from .hilbert import StateVector
from .nwv_protocol import (
    ProtocolProbabilities,
    nwv_exact,
    nwv_weak_limit_qubit,
    qubit_postselected_state,
    run_analytic,
)
from .pointer_wv import standard_wv
from .trajectory_oracle import (
    EstimateWithError,
    TrajectoryCounts,
    calibrate_estimate,
    count_outcomes,
)

log = logging.getLogger(__name__)

DIVERGENCE_TOL = 1e-9
DEFAULT_MC_SAMPLES = 100_000

SWEEP_HEADER = (
    "gamma",
    "wv_re",
    "wv_im",
    "nwv_weak_limit",
    "nwv_exact",
    "p_click1",
    "p_postselect_total",
    "mc_estimate",
    "mc_std_error",
    "diverged",
)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    wv_re: float | None
    wv_im: float | None
    nwv_weak_limit: float | None
    nwv_exact: float | None
    p_click1: float
    p_postselect_total: float
    mc_estimate: float | None = None
    mc_std_error: float | None = None
    diverged: bool = False


def _sweep_point(config: ExperimentConfig, gamma: float, row: int, mc: tuple[int, int] | None, jobs: int) -> SweepRow:
    cfg = config.collapse_config()
    cal = config.calibration()
    i = config.state()
    U = config.unitary(gamma)
    m = config.postselect_index
    probs = run_analytic(cfg, i, U, m)
    f = qubit_postselected_state(U, m)
    if abs(np.vdot(f.amplitudes, i.amplitudes)) < DIVERGENCE_TOL:
        return SweepRow(gamma, None, None, None, None, probs.p_click1, probs.p_postselect_total, diverged=True)
    wv = standard_wv(cal.observable(cfg), i, f)
    result = nwv_exact(cfg, cal, i, U, m)
    est = None
    if mc is not None:
        n_samples, seed = mc
        try:
            counts = count_outcomes(cfg, i, U, m, n_samples, seed, jobs=jobs, stream=(row,))
            est = calibrate_estimate(counts.conditional(), cal)
        except InsufficientStatisticsError as exc:
            log.warning("gamma=%r: %s", gamma, exc)
    return SweepRow(
        gamma=gamma,
        wv_re=wv.real,
        wv_im=wv.imag,
        nwv_weak_limit=nwv_weak_limit_qubit(i, f),
        nwv_exact=result.nwv_exact,
        p_click1=probs.p_click1,
        p_postselect_total=probs.p_postselect_total,
        mc_estimate=None if est is None else est.value,
        mc_std_error=None if est is None else est.std_error,
    )


def run_sweep(
    config: ExperimentConfig,
    montecarlo: bool | None = None,
    seed: int | None = None,
    jobs: int = 1,
) -> list[SweepRow]:
    """One row per gamma grid point.

    Monte Carlo columns are filled when ``montecarlo`` is true, or when it is
    ``None`` and the config carries a montecarlo block. Row ``k`` samples from
    its own stream, so output does not depend on ``jobs``.
    """
    if config.sweep is None:
        raise NwvError("config has no sweep block")
    if config.dim != 2:
        raise NwvError("gamma sweeps are defined for qubits only")
    use_mc = config.montecarlo is not None if montecarlo is None else montecarlo
    mc = None
    if use_mc:
        spec = config.montecarlo
        n = spec.n_samples if spec else DEFAULT_MC_SAMPLES
        mc = (n, seed if seed is not None else (spec.seed if spec else 0))
    grid = config.sweep.grid()
    tasks = [(float(g), k) for k, g in enumerate(grid)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda t: _sweep_point(config, t[0], t[1], mc, 1), tasks))
    return [_sweep_point(config, g, k, mc, 1) for g, k in tasks]


# -- single-point Monte Carlo --------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryReport:
    seed: int
    counts: TrajectoryCounts
    analytic: ProtocolProbabilities
    nwv_analytic: float
    click: EstimateWithError
    postselect: EstimateWithError
    conditional: EstimateWithError | None
    nwv: EstimateWithError | None

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "n_samples": self.counts.n_samples,
            "seed": self.seed,
            "n_first_click": self.counts.n_first_click,
            "n_second_null": self.counts.n_second_null,
            "n_joint": self.counts.n_joint,
            "p_click1": self.analytic.p_click1,
            "p_click1_mc": self.click.value,
            "p_click1_mc_std_error": self.click.std_error,
            "p_postselect_total": self.analytic.p_postselect_total,
            "p_postselect_total_mc": self.postselect.value,
            "p_postselect_total_mc_std_error": self.postselect.std_error,
            "p_click1_given_postselect": self.analytic.p_click1_given_postselect,
            "p_click1_given_postselect_mc": None,
            "p_click1_given_postselect_mc_std_error": None,
            "nwv_exact": self.nwv_analytic,
            "nwv_mc": None,
            "nwv_mc_std_error": None,
        }
        if self.conditional is not None:
            rec["p_click1_given_postselect_mc"] = self.conditional.value
            rec["p_click1_given_postselect_mc_std_error"] = self.conditional.std_error
            rec["nwv_mc"] = self.nwv.value
            rec["nwv_mc_std_error"] = self.nwv.std_error
        return rec


def run_trajectories(
    config: ExperimentConfig,
    state: StateVector | None = None,
    seed: int | None = None,
    jobs: int = 1,
    stream: tuple[int, ...] = (),
) -> TrajectoryReport:
    cfg = config.collapse_config()
    cal = config.calibration()
    i = config.state() if state is None else state
    U = config.unitary()
    m = config.postselect_index
    spec = config.montecarlo
    n = spec.n_samples if spec else DEFAULT_MC_SAMPLES
    seed = seed if seed is not None else (spec.seed if spec else 0)
    analytic = nwv_exact(cfg, cal, i, U, m)
    counts = count_outcomes(cfg, i, U, m, n, seed, jobs=jobs, stream=stream)
    conditional = nwv = None
    try:
        conditional = counts.conditional()
        nwv = calibrate_estimate(conditional, cal)
    except InsufficientStatisticsError as exc:
        log.warning("%s", exc)
    return TrajectoryReport(
        seed=seed,
        counts=counts,
        analytic=analytic.probabilities,
        nwv_analytic=analytic.nwv_exact,
        click=counts.click_probability(),
        postselect=counts.postselect_probability(),
        conditional=conditional,
        nwv=nwv,
    )


# -- state discrimination -------------------------------------------------------------

_SHARED_FIELDS = (
    "dim",
    "probs",
    "rates",
    "time",
    "phases",
    "qubit_gamma",
    "matrix",
    "postselect_index",
    "calibration_mode",
    "calibration_params",
)


@dataclass(frozen=True)
class DiscriminationReport:
    signal: float
    signal_calibrated: float
    probabilities_0: ProtocolProbabilities
    probabilities_delta: ProtocolProbabilities
    mc_0: EstimateWithError | None = None
    mc_delta: EstimateWithError | None = None
    mc_signal: float | None = None
    mc_std_error: float | None = None

    def to_record(self) -> dict[str, Any]:
        rec = asdict(self)
        return rec


def run_discrimination(
    config0: ExperimentConfig,
    config_delta: ExperimentConfig,
    montecarlo: bool | None = None,
    seed: int | None = None,
    jobs: int = 1,
) -> DiscriminationReport:
    """Signal S = P(M_w | null_s) for the delta state minus that for state 0."""
    differing = [name for name in _SHARED_FIELDS if getattr(config0, name) != getattr(config_delta, name)]
    if differing:
        raise ConfigMismatchError(differing)
    cfg = config0.collapse_config()
    cal = config0.calibration()
    U = config0.unitary()
    m = config0.postselect_index
    p0 = run_analytic(cfg, config0.state(), U, m)
    pd = run_analytic(cfg, config_delta.state(), U, m)
    signal = pd.p_click1_given_postselect - p0.p_click1_given_postselect
    report = DiscriminationReport(signal, signal / cal.scale, p0, pd)
    use_mc = config0.montecarlo is not None if montecarlo is None else montecarlo
    if not use_mc:
        return report
    r0 = run_trajectories(config0, seed=seed, jobs=jobs, stream=(0,))
    rd = run_trajectories(config_delta, seed=seed if seed is not None else r0.seed, jobs=jobs, stream=(1,))
    if r0.conditional is None or rd.conditional is None:
        raise InsufficientStatisticsError(
            r0.counts.n_samples + rd.counts.n_samples,
            r0.counts.n_second_null + rd.counts.n_second_null,
        )
    return DiscriminationReport(
        signal,
        signal / cal.scale,
        p0,
        pd,
        mc_0=r0.conditional,
        mc_delta=rd.conditional,
        mc_signal=rd.conditional.value - r0.conditional.value,
        mc_std_error=math.hypot(r0.conditional.std_error, rd.conditional.std_error),
    )


# -- output ---------------------------------------------------------------------------


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _json_safe(x: Any) -> Any:
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _rows_to_records(rows: Sequence[SweepRow]) -> list[dict[str, Any]]:
    return [{name: getattr(r, name) for name in SWEEP_HEADER} for r in rows]


def render(obj: Sequence[SweepRow] | TrajectoryReport | DiscriminationReport, fmt: str) -> str:
    """Serialize sweep rows or a report to CSV or JSON text."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown output format {fmt!r}")
    if isinstance(obj, (TrajectoryReport, DiscriminationReport)):
        record = obj.to_record()
        if fmt == "json":
            return json.dumps(_json_safe(record), indent=2) + "\n"
        flat = _flatten(record)
        header, records = list(flat), [flat]
    else:
        if fmt == "json":
            return json.dumps(_json_safe(_rows_to_records(obj)), indent=2) + "\n"
        header, records = list(SWEEP_HEADER), _rows_to_records(obj)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rec in records:
        writer.writerow([_fmt(rec[h]) for h in header])
    return buf.getvalue()


def _flatten(record: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, val in record.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, name + "."))
        else:
            out[name] = val
    return out


def emit(obj, fmt: str, path: str | Path | None) -> str:
    """Write ``obj`` to ``path`` (or just return the text when path is None).

    I/O failures are re-raised as ``OSError`` naming the path.
    """
    text = render(obj, fmt)
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write output file {path}: {exc.strerror}") from exc
    return text


def parse_sweep_csv(text: str) -> list[SweepRow]:
    """Inverse of :func:`render` for sweep CSV; used to round-trip files."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
        raise ValueError(f"unexpected header {reader.fieldnames}")
    rows = []
    for rec in reader:
        kw: dict[str, Any] = {}
        for f in fields(SweepRow):
            raw = rec[f.name]
            if f.name == "diverged":
                kw[f.name] = raw == "true"
            else:
                kw[f.name] = None if raw == "" else float(raw)
        rows.append(SweepRow(**kw))
    return rows
