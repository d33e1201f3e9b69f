"""Seeded trajectory runs, policy comparisons and parameter sweeps."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .dynamics import step
from .netgen import generate_network
from .objectives import TrajectoryLog, evaluate_objective
from .policies import PolicySpec, decide

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("policy", "axis", "axis_value", "seed", "objective_kind", "objective",
                  "objective_normalized", "wall_time_ms", "error")


def _label(s) -> int:
    return zlib.crc32(str(s).encode())


def stream(base_seed: int, label: str, axis=None, axis_value=0, replicate=0, policy=None):
    """Independent generator keyed by (base seed, cell, replicate, label)."""
    key = (_label(axis), int(axis_value), int(replicate), _label(label), _label(policy))
    return np.random.default_rng(np.random.SeedSequence(entropy=int(base_seed), spawn_key=key))


@dataclass
class ResultRow:
    policy: str
    axis: str
    axis_value: int
    seed: int
    objective_kind: str
    objective: float
    objective_normalized: float
    wall_time_ms: float
    error: str = ""

    def as_tuple(self):
        return tuple(getattr(self, c) for c in RESULT_COLUMNS)


def normalizer(axis: str | None, gen, model) -> float:
    if axis == "nodes":
        return float(gen.N)
    if axis == "horizon":
        return float(model.horizon)
    return 1.0


def run_trajectory(config: ExperimentConfig, policy: PolicySpec, seed: int,
                   axis: str | None = None, axis_value=None, records: list | None = None):
    """Build the cell's network, roll the policy forward and score it.

    Returns ``(TrajectoryLog, ResultRow)``.  ``records`` collects JSON-ready
    decision/transition entries when given.
    """
    gen, model = config.cell(axis, axis_value)
    key = dict(axis=axis, axis_value=axis_value or 0, replicate=seed)
    net_rng = stream(config.base_seed, "network", **key)
    dyn_rng = stream(config.base_seed, "removals", policy=policy.kind, **key)
    pol_rng = stream(config.base_seed, "policy", policy=policy.kind, **key)

    state, _ = generate_network(gen, net_rng)
    T = model.horizon
    health = np.empty((T + 1, state.n))
    health[0] = state.health
    sizes = np.zeros(T, dtype=np.int64)
    wall = 0.0
    for t in range(T):
        t0 = time.perf_counter()
        dec = decide(policy, state, model, pol_rng)
        wall += time.perf_counter() - t0
        sizes[t] = dec.edges.shape[0]
        if records is not None:
            rec = {"type": "decision", "t": t, "policy": policy.kind, "edges": dec.edges.tolist()}
            if dec.scores is not None:
                rec["scores"] = [float(s) for s in dec.scores]
            records.append(rec)
            records.extend(dec.diagnostics or [])
        state, tr = step(state, dec.edges, dyn_rng, model)
        health[t + 1] = state.health
        if records is not None:
            records.append(tr.to_json())
    traj = TrajectoryLog(health, sizes, model, state.target)
    value = evaluate_objective(traj)
    row = ResultRow(policy.kind, axis or "", int(axis_value or 0), int(seed), model.objective_kind,
                    value, value / normalizer(axis, gen, model), wall * 1e3)
    return traj, row


_WARM = False


def warmup() -> None:
    """Run every policy once on a tiny network so JIT compilation is not timed."""
    global _WARM
    if _WARM:
        return
    from .model import ModelParams
    from .netgen import GenConfig

    rng = np.random.default_rng(0)
    model = ModelParams(horizon=2)
    state, _ = generate_network(GenConfig(N=12, m=2), rng)
    for kind in ("perpetual_random", "heuristic_myopic", "heuristic_lookahead", "gradient_based"):
        s = state
        for _ in range(model.horizon):
            dec = decide(PolicySpec(kind, n=1, L=1), s, model, rng)
            s, _ = step(s, dec.edges, rng, model)
    _WARM = True


def _run_cell(args):
    config, policy, seed, axis, value = args
    try:
        _, row = run_trajectory(config, policy, seed, axis, value)
    except Exception as exc:  # a failed cell must not sink the sweep
        log.exception("cell failed: %s %s=%s seed=%s", policy.kind, axis, value, seed)
        row = ResultRow(policy.kind, axis or "", int(value or 0), int(seed),
                        config.model.objective_kind, math.nan, math.nan, math.nan,
                        f"{type(exc).__name__}: {exc}")
    return row


def cell_jobs(config: ExperimentConfig):
    sweeps = config.sweeps or ((None, (0,)),)
    for sw in sweeps:
        axis, values = (sw.axis, sw.values) if hasattr(sw, "axis") else sw
        for value in values:
            for pol in config.policies:
                for seed in range(config.seeds):
                    yield (config, pol, seed, axis, value)


def run_experiment(config: ExperimentConfig, out_dir=None, jobs: int | None = None,
                   progress=None) -> list[ResultRow]:
    tasks = list(cell_jobs(config))
    jobs = jobs or os.cpu_count() or 1
    rows = []
    if jobs <= 1:
        warmup()
        for i, task in enumerate(tasks):
            rows.append(_run_cell(task))
            if progress:
                progress(i + 1, len(tasks), rows[-1])
    else:
        with ProcessPoolExecutor(max_workers=jobs, initializer=warmup) as pool:
            for i, row in enumerate(pool.map(_run_cell, tasks, chunksize=1)):
                rows.append(row)
                if progress:
                    progress(i + 1, len(tasks), row)
    order = {p.kind: i for i, p in enumerate(config.policies)}
    rows.sort(key=lambda r: (r.axis, r.axis_value, order.get(r.policy, 99), r.seed))
    if out_dir is not None:
        write_outputs(rows, config, out_dir)
    return rows


def aggregate(rows, field="objective_normalized"):
    """``{(axis, policy, axis_value): (mean, std, count)}`` over finite rows."""
    cells: dict = {}
    for r in rows:
        val = getattr(r, field)
        if r.error or not math.isfinite(val):
            continue
        cells.setdefault((r.axis, r.policy, r.axis_value), []).append(val)
    return {k: (float(np.mean(v)), float(np.std(v, ddof=1)) if len(v) > 1 else 0.0, len(v))
            for k, v in cells.items()}


def write_outputs(rows, config: ExperimentConfig, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in r.as_tuple()])
    objective = aggregate(rows, "objective_normalized")
    timing = aggregate(rows, "wall_time_ms")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("axis", "axis_value", "policy", "n", "objective_mean", "objective_std",
                    "wall_time_ms_mean", "wall_time_ms_std"))
        for key in sorted(objective):
            axis, pol, val = key
            om, osd, n = objective[key]
            tm, tsd, _ = timing.get(key, (math.nan, math.nan, 0))
            w.writerow([axis, val, pol, n, _fmt(om), _fmt(osd), _fmt(tm), _fmt(tsd)])
    axes = sorted({r.axis for r in rows})
    for axis in axes:
        name = axis or "single"
        for fig, table in (("fig1", objective), ("fig2", timing)):
            with open(out / f"{fig}_{name}.tsv", "w") as fh:
                fh.write("policy\tx\tmean\tstddev\n")
                for p in config.policies:
                    for (ax, pol, val), (m, s, _) in sorted(table.items()):
                        if ax == axis and pol == p.kind:
                            fh.write(f"{pol}\t{val}\t{_fmt(m)}\t{_fmt(s)}\n")
    (out / "config.json").write_text(json.dumps(_config_doc(config), indent=1) + "\n")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _config_doc(config: ExperimentConfig) -> dict:
    from dataclasses import asdict

    return {
        "generator": asdict(config.generator),
        "model": asdict(config.model),
        "policies": [asdict(p) for p in config.policies],
        "sweeps": [{"axis": s.axis, "values": list(s.values)} for s in config.sweeps],
        "seeds": config.seeds,
        "base_seed": config.base_seed,
    }
