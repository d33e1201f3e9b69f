"""``netrvene`` command line: generate, simulate, experiment, validate."""

from __future__ import annotations

import argparse
import json
import logging
import os
import secrets
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_config
from .model import DomainError, save_snapshot
from .netgen import ConfigError, DistributionError, generate_network
from .policies import POLICY_KINDS, PolicySpec

log = logging.getLogger("netrvene")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (JSON); default is the shipped one")
    common.add_argument("--seed", type=int, help="base seed (falls back to $NETRVENE_SEED, else drawn)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: logical cores)")
    common.add_argument("--quiet", action="store_true", help="only print warnings and errors")

    p = argparse.ArgumentParser(prog="netrvene", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write a network snapshot")
    sim = sub.add_parser("simulate", parents=[common], help="run one trajectory")
    sim.add_argument("--policy", choices=POLICY_KINDS, default="heuristic_lookahead")
    sub.add_parser("experiment", parents=[common], help="run the configured sweep")
    val = sub.add_parser("validate", parents=[common], help="run the oracle gate suites")
    val.add_argument("--suite", action="append", help="run only the named suite(s)")
    return p


def resolve_seed(arg: int | None) -> tuple[int, str]:
    if arg is not None:
        return arg, "flag"
    env = os.environ.get("NETRVENE_SEED")
    if env:
        try:
            return int(env), "env"
        except ValueError:
            raise ConfigError(f"NETRVENE_SEED={env!r} is not an integer") from None
    return secrets.randbits(63), "drawn"


def _check_seed(seed: int) -> int:
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def cmd_generate(args, config, seed) -> int:
    from .harness import stream

    args.out.mkdir(parents=True, exist_ok=True)
    state, _ = generate_network(config.generator, stream(seed, "network"))
    path = args.out / "network.json"
    save_snapshot(state, path)
    print(f"wrote {path} ({state.n} nodes, {state.src.size} edges, "
          f"|S|={state.target.size}, |H|={state.healthy.size})")
    return EXIT_OK


def cmd_simulate(args, config, seed) -> int:
    from .harness import run_trajectory, warmup

    spec = next((p for p in config.policies if p.kind == args.policy), PolicySpec(args.policy))
    warmup()
    records: list = []
    traj, row = run_trajectory(config, spec, 0, records=records)
    args.out.mkdir(parents=True, exist_ok=True)
    head = {"type": "run", "policy": spec.kind, "seed": seed, "horizon": config.model.horizon,
            "objective_kind": config.model.objective_kind}
    with open(args.out / "trajectory.jsonl", "w") as fh:
        fh.write(json.dumps(head) + "\n")
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
        for t, x in enumerate(traj.health):
            fh.write(json.dumps({"type": "health", "t": t, "x": x.tolist()}) + "\n")
    summary = {"policy": spec.kind, "seed": seed, "objective_kind": row.objective_kind,
               "objective": row.objective, "decision_sizes": traj.decision_sizes.tolist(),
               "wall_time_ms": row.wall_time_ms}
    (args.out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(f"{spec.kind}: {row.objective_kind} objective {row.objective:.6g} "
          f"(policy time {row.wall_time_ms:.1f} ms)")
    return EXIT_OK


def cmd_experiment(args, config, seed) -> int:
    from .harness import run_experiment

    def progress(i, total, row):
        if row.error:
            log.warning("cell failed: %s %s=%s seed=%s: %s", row.policy, row.axis,
                        row.axis_value, row.seed, row.error)
        elif i % 20 == 0 or i == total:
            log.info("%d/%d cells", i, total)

    rows = run_experiment(config, args.out, jobs=args.jobs, progress=progress)
    failed = sum(1 for r in rows if r.error)
    print(f"wrote {args.out / 'results.csv'} ({len(rows)} rows, {failed} failed)")
    return EXIT_OK


def cmd_validate(args, config, seed) -> int:
    from .validation import SUITES, run_all

    names = args.suite or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    results = run_all(names, report=lambda r: print(r.line(), flush=True))
    bad = [r for r in results if not r.passed]
    for r in bad:
        for msg in r.failures[:10]:
            print(f"  {r.name}: {msg}")
    print(f"{len(results) - len(bad)}/{len(results)} suites passed")
    return EXIT_VALIDATION if bad else EXIT_OK


COMMANDS = {"generate": cmd_generate, "simulate": cmd_simulate,
            "experiment": cmd_experiment, "validate": cmd_validate}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        config = load_config(args.config)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        seed = None
        if args.command != "validate":
            seed, source = resolve_seed(args.seed)
            seed = _check_seed(seed)
            if source == "drawn":
                print(f"seed: {seed}", file=sys.stderr)
            log.info("seed %d (%s)", seed, source)
            config = replace(config, base_seed=seed)
        return COMMANDS[args.command](args, config, seed)
    except (ConfigError, DistributionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
