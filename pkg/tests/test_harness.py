import csv
from dataclasses import replace

import numpy as np
import pytest

from netrvene.config import ExperimentConfig, Sweep
from netrvene.harness import RESULT_COLUMNS, run_experiment, run_trajectory
from netrvene.model import ModelParams
from netrvene.netgen import GenConfig
from netrvene.policies import PolicySpec


def _cfg(**kw):
    base = dict(generator=GenConfig(N=60, m=2), model=ModelParams(horizon=4), seeds=1, base_seed=11)
    base.update(kw)
    return ExperimentConfig(**base)


def test_frozen_control_objective():
    cfg = _cfg(generator=GenConfig(N=60, m=2, lambda_range=(0.0, 0.0)))
    traj, row = run_trajectory(cfg, PolicySpec("control"), 0)
    x0 = traj.health[0, traj.target].sum()
    assert row.objective == pytest.approx(4 * x0, abs=1e-12)


def test_rerun_is_identical_except_wall_time():
    cfg = _cfg()
    for kind in ("heuristic_lookahead", "gradient_based", "perpetual_random"):
        spec = PolicySpec(kind, n=2, L=2)
        ta, a = run_trajectory(cfg, spec, 3)
        tb, b = run_trajectory(cfg, spec, 3)
        assert np.array_equal(ta.health, tb.health)
        assert replace(a, wall_time_ms=0.0) == replace(b, wall_time_ms=0.0)


def test_policies_share_the_network_but_not_decisions():
    cfg = _cfg()
    rec_c, rec_r = [], []
    tc, _ = run_trajectory(cfg, PolicySpec("control"), 0, records=rec_c)
    tr, _ = run_trajectory(cfg, PolicySpec("perpetual_random"), 0, records=rec_r)
    assert np.array_equal(tc.health[0], tr.health[0])
    dc = [r["edges"] for r in rec_c if r["type"] == "decision"]
    dr = [r["edges"] for r in rec_r if r["type"] == "decision"]
    assert dc != dr


def test_one_cell_gives_one_row(tmp_path):
    cfg = _cfg(policies=(PolicySpec("heuristic_myopic"),))
    rows = run_experiment(cfg, tmp_path, jobs=1)
    assert len(rows) == 1
    with open(tmp_path / "results.csv") as fh:
        data = list(csv.reader(fh))
    assert tuple(data[0]) == RESULT_COLUMNS
    assert len(data) == 2


def test_normalisation_per_axis():
    cfg = _cfg(policies=(PolicySpec("control"),),
               sweeps=(Sweep("nodes", (60,)), Sweep("horizon", (3,)), Sweep("edges_per_arrival", (2,))))
    rows = {r.axis: r for r in run_experiment(cfg, jobs=1)}
    assert rows["nodes"].objective_normalized == pytest.approx(rows["nodes"].objective / 60)
    assert rows["horizon"].objective_normalized == pytest.approx(rows["horizon"].objective / 3)
    assert rows["edges_per_arrival"].objective_normalized == rows["edges_per_arrival"].objective


def test_failed_cell_is_recorded_not_fatal(tmp_path):
    cfg = _cfg(policies=(PolicySpec("control"),), sweeps=(Sweep("nodes", (2, 40)),))
    rows = run_experiment(cfg, tmp_path, jobs=1)
    bad = [r for r in rows if r.error]
    assert len(bad) == 1 and bad[0].axis_value == 2 and "ConfigError" in bad[0].error
    assert any(not r.error for r in rows)


def test_plot_files(tmp_path):
    cfg = _cfg(policies=(PolicySpec("control"), PolicySpec("heuristic_myopic")), seeds=2,
               sweeps=(Sweep("horizon", (2, 3)),))
    run_experiment(cfg, tmp_path, jobs=1)
    for fig in ("fig1", "fig2"):
        lines = (tmp_path / f"{fig}_horizon.tsv").read_text().splitlines()
        assert lines[0].split("\t") == ["policy", "x", "mean", "stddev"]
        assert len(lines) == 1 + 2 * 2


def test_parallel_matches_serial():
    cfg = _cfg(policies=(PolicySpec("perpetual_random"), PolicySpec("heuristic_myopic")), seeds=2)
    a = run_experiment(cfg, jobs=1)
    b = run_experiment(cfg, jobs=2)
    strip = lambda rows: [replace(r, wall_time_ms=0.0) for r in rows]  # noqa: E731
    assert strip(a) == strip(b)
