import dataclasses
import json
import math

import numpy as np
import pytest

from conftest import THETA
from pathlib import Path

from nullwv.config import SweepSpec, load_config, qubit_sweep_config
from nullwv.errors import ConfigMismatchError
from nullwv.experiments import (
    SWEEP_HEADER,
    SweepRow,
    emit,
    parse_sweep_csv,
    render,
    run_discrimination,
    run_sweep,
    run_trajectories,
)

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def sweep_rows():
    return run_sweep(qubit_sweep_config())


def test_sweep_shape(sweep_rows):
    assert len(sweep_rows) == 721
    gammas = [r.gamma for r in sweep_rows]
    assert np.all(np.diff(gammas) > 0)
    assert gammas[0] == -np.pi / 2 and gammas[-1] == np.pi / 2


def test_sweep_point_values(sweep_rows):
    at_zero = sweep_rows[360]
    assert at_zero.gamma == 0.0
    assert abs(at_zero.wv_re) < 1e-12
    assert at_zero.nwv_weak_limit == pytest.approx(1 / 3, abs=1e-12)
    at_i = sweep_rows[240]
    assert at_i.gamma == pytest.approx(-np.pi / 6, abs=1e-15)
    assert at_i.wv_re == pytest.approx(0.25, abs=1e-12)
    assert at_i.nwv_weak_limit == pytest.approx(0.25, abs=1e-12)


def test_sweep_divergence_flag(sweep_rows):
    flagged = [k for k, r in enumerate(sweep_rows) if r.diverged]
    assert flagged == [600]
    row = sweep_rows[600]
    assert row.wv_re is None and row.nwv_exact is None
    assert math.isfinite(row.p_click1)


def test_sweep_near_divergence_matches_closed_form():
    eps = 1e-3
    gamma = np.pi / 3 - eps
    cfg = dataclasses.replace(qubit_sweep_config(), sweep=SweepSpec(gamma, gamma, 1))
    (row,) = run_sweep(cfg)
    ov = np.cos(gamma + THETA)
    assert row.wv_re == pytest.approx(-np.sin(gamma) * np.sin(THETA) / ov, rel=1e-9)
    assert row.nwv_weak_limit == pytest.approx(np.sin(THETA) ** 2 / ov**2, rel=1e-9)
    # ratio scales as 1/eps: (sin^2 theta / ov^2) / (sin gamma sin theta / ov)
    ratio = row.nwv_weak_limit / abs(row.wv_re)
    assert ratio == pytest.approx(np.sin(THETA) / (np.sin(gamma) * ov), rel=1e-9)
    assert ratio * eps == pytest.approx(0.5 / np.sin(np.pi / 3), rel=1e-2)


def test_sweep_with_montecarlo_is_parallel_invariant():
    cfg = dataclasses.replace(qubit_sweep_config(p1=0.2), sweep=SweepSpec(-0.5, 0.5, 9))
    a = run_sweep(cfg, montecarlo=True, seed=3, jobs=1)
    b = run_sweep(cfg, montecarlo=True, seed=3, jobs=4)
    assert a == b
    for row in a:
        assert abs(row.mc_estimate - row.nwv_exact) < 5 * row.mc_std_error


def test_emit_empty_and_round_trip(tmp_path):
    assert render([], "csv") == ",".join(SWEEP_HEADER) + "\n"
    row = SweepRow(0.1, 1 / 3, -2e-300, math.pi, 0.1 + 0.2, 0.05, 0.8, 0.0625, 1e-4, False)
    path = tmp_path / "one.csv"
    emit([row], "csv", path)
    assert parse_sweep_csv(path.read_text()) == [row]
    emit([row], "json", tmp_path / "one.json")
    (back,) = json.loads((tmp_path / "one.json").read_text())
    assert SweepRow(**back) == row


def test_emit_diverged_row_and_io_error(tmp_path):
    row = SweepRow(1.0, None, None, None, None, 0.1, 0.2, diverged=True)
    text = render([row], "csv")
    assert text.splitlines()[1] == "1,,,,,0.10000000000000001,0.20000000000000001,,,true"
    with pytest.raises(OSError, match="missing"):
        emit([row], "csv", tmp_path / "missing" / "x.csv")


def test_sweep_file_rows(tmp_path, sweep_rows):
    path = tmp_path / "qubit_sweep.csv"
    emit(sweep_rows, "csv", path)
    lines = path.read_text().splitlines()
    assert len(lines) == 722
    assert lines[601].endswith(",true")


def test_discrimination_benchmark():
    c0 = load_config(DATA / "benchmark.json")
    cd = load_config(DATA / "benchmark_delta.json")
    report = run_discrimination(c0, cd, montecarlo=False)
    assert report.signal == pytest.approx(-0.0625, abs=1e-14)
    assert report.signal_calibrated == pytest.approx(-0.3125, abs=1e-13)
    assert run_discrimination(c0, c0, montecarlo=False).signal == 0.0
    mc = run_discrimination(c0, cd)
    assert abs(mc.mc_signal - report.signal) < 3 * mc.mc_std_error
    assert mc.mc_std_error == pytest.approx(math.hypot(mc.mc_0.std_error, mc.mc_delta.std_error))


def test_discrimination_mismatch():
    c0 = load_config(DATA / "benchmark.json")
    other = dataclasses.replace(c0, probs=(0.0, 0.3), postselect_index=0)
    with pytest.raises(ConfigMismatchError) as info:
        run_discrimination(c0, other)
    assert info.value.fields == ["probs", "postselect_index"]


def test_trajectory_report():
    cfg = load_config(DATA / "benchmark.json")
    rep = run_trajectories(cfg)
    rec = rep.to_record()
    assert rec["n_samples"] == 10**6
    for key in ("p_click1", "p_postselect_total", "p_click1_given_postselect"):
        assert abs(rec[key + "_mc"] - rec[key]) < 3 * rec[key + "_mc_std_error"]
    assert abs(rec["nwv_mc"] - 0.3125) < 3 * rec["nwv_mc_std_error"]
    assert render(rep, "csv") == render(run_trajectories(cfg, jobs=3), "csv")
