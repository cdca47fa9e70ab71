"""Command line entry point: plan, topology, run, sweep, verify."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .analysis import PlanInfeasibleError, hub_plan, singleton_plan
from .assignment import BlockRandomness, Topology
from .core import SystemParams
from .harness.config import ExperimentConfig, load_config


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load(args) -> ExperimentConfig:
    if not args.config:
        raise SystemExit("--config is required for this command")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    if getattr(args, "trials", None) is not None:
        cfg = cfg.with_(trials=args.trials)
    return cfg


def cmd_plan(args) -> int:
    try:
        if args.q is None:
            plan = singleton_plan(args.n, args.c, args.p_h, args.p_d, args.paths)
        else:
            plan = hub_plan(args.n, args.q, args.k, args.t, p=args.p_d,
                            target_success=args.target, paths_per_block=args.paths)
    except PlanInfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    _emit(json.dumps(plan.as_dict(), indent=2), args.out)
    return 0


def cmd_topology(args) -> int:
    if args.config:
        params = load_config(args.config).params
    else:
        params = SystemParams(n=args.n, q=args.q, t=args.t, k=args.k)
    params = params.validate(bft=False)
    seed = args.seed if args.seed is not None else 0
    top = Topology(BlockRandomness.derive(seed, args.block), params)
    ids = range(params.paths_per_block) if args.path is None else [args.path]
    rows = [{"path": p, "hubs": [list(h.members) for h in top.path(p).hubs]} for p in ids]
    _emit(json.dumps({"seed": seed, "block": args.block, "randomness": top.rand.seed.hex(),
                      "paths": rows}, indent=1), args.out)
    return 0


def cmd_run(args) -> int:
    from .harness.experiment import run, simulate, trial_metrics

    cfg = _load(args)
    if args.trace:
        # a trace covers a single trial at the root seed
        with open(args.trace, "w") as fh:
            sim = simulate(cfg, trace=fh)
        _emit(json.dumps(trial_metrics(sim), indent=2, sort_keys=True), args.out)
        return 0
    report = run(cfg, args.workers)
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    _emit(report.to_json(), args.out)
    return 0


def cmd_sweep(args) -> int:
    from .harness.complexity import complexity_sweep, rows_to_csv, scaling_fit
    from .harness.experiment import sweep, sweep_csv

    if args.complexity:
        ns = [int(x) for x in args.complexity.split(",")]
        rows = complexity_sweep(ns)
        for fit in scaling_fit(rows):
            print(f"{fit.mode}: slope={fit.slope:.3f} R2={fit.r2:.5f}", file=sys.stderr)
        _emit(rows_to_csv(rows), args.out)
        return 0
    cfg = _load(args)
    grid = {}
    for item in args.grid:
        key, _, values = item.partition("=")
        grid[key] = [json.loads(v) for v in values.split(",")]
    _emit(sweep_csv(sweep(cfg, grid, args.workers)), args.out)
    return 0


def cmd_verify(args) -> int:
    from .harness.acceptance import CRITERIA, run_all

    names = args.only.split(",") if args.only else list(CRITERIA)
    unknown = [n for n in names if n not in CRITERIA]
    if unknown:
        raise SystemExit(f"unknown criteria: {unknown}")
    verdicts = run_all(names)
    if args.out:
        Path(args.out).write_text(json.dumps([asdict(v) for v in verdicts], indent=2,
                                             default=str))
    return 0 if all(v.passed for v in verdicts) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathfair", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=False):
        p.add_argument("--config", help="experiment TOML file")
        p.add_argument("--seed", type=int, help="root seed override")
        p.add_argument("--out", help="write output here instead of stdout")
        if trials:
            p.add_argument("--trials", type=int, help="trial count override")
            p.add_argument("--workers", type=int, help="worker processes")

    p = sub.add_parser("plan", help="path length, retries and success probability")
    common(p)
    p.add_argument("-n", type=int, default=200)
    p.add_argument("-c", type=float, default=1.2)
    p.add_argument("--p-h", type=float, default=2 / 3)
    p.add_argument("--p-d", type=float, default=1 / 3)
    p.add_argument("-q", type=int, help="hub size; omit for single-node hubs")
    p.add_argument("-k", type=int, default=2)
    p.add_argument("-t", type=int)
    p.add_argument("--target", type=float, default=0.9)
    p.add_argument("--paths", type=int, help="paths per block")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("topology", help="dump hub members for one block")
    common(p)
    p.add_argument("-n", type=int, default=64)
    p.add_argument("-q", type=int, default=4)
    p.add_argument("-t", type=int, default=3)
    p.add_argument("-k", type=int, default=2)
    p.add_argument("--block", type=int, default=0)
    p.add_argument("--path", type=int)
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("run", help="run an experiment config")
    common(p, trials=True)
    p.add_argument("--trace", help="JSON-lines event trace of one trial")
    p.add_argument("--csv", help="also write per-trial CSV")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter grid")
    common(p, trials=True)
    p.add_argument("--grid", action="append", default=[],
                   help="dotted key and values, e.g. params.n=64,128")
    p.add_argument("--complexity", help="comma-separated n values for the traffic sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance checks")
    common(p)
    p.add_argument("--only", help="comma-separated criteria, e.g. A1,A7")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
