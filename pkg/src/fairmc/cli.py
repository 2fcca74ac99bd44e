"""Command-line entry points.

    fairmc validate                       run the oracle self-checks
    fairmc gen-instances  --config CFG    build + filter a k-SAT instance set
    fairmc optimize-qaoa  --config CFG    per-instance linear schedules
    fairmc train-made     --config CFG    train proposal networks
    fairmc run-chains     --config CFG    neural / hybrid sampler chains
    fairmc run-baselines  --config CFG    PT-ICM and WalkSAT runs
    fairmc metrics        --config CFG    fairness + counting summaries
    fairmc fig1 .. fig7                   preset end-to-end experiments

Common flags: --config FILE, --out DIR, --seed N, --threads N.
Exit codes: 0 success, 1 validation failure, 2 configuration/usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from fairmc.experiments import (
    ConfigError,
    ExperimentConfig,
    StageError,
    run_anneal_sweep,
    run_ksat,
    run_small_instances,
    run_validation,
    stage_baselines,
    stage_chains,
    stage_instances,
    stage_metrics,
    stage_nets,
    stage_schedules,
    write_resolved_config,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2

FIG_KINDS = {
    "fig1": "SMALL_INSTANCES",
    "fig2": "ANNEAL_SWEEP",
    "fig3": "KSAT_FAIRNESS",
    "fig4": "KSAT_FAIRNESS",
    "fig5": "KSAT_FAIRNESS",
    "fig6": "KSAT_COUNTING",
    "fig7": "KSAT_COUNTING",
}

STAGE_COMMANDS = ("gen-instances", "optimize-qaoa", "train-made",
                  "run-chains", "run-baselines", "metrics")


def load_preset(name: str) -> dict:
    path = resources.files("fairmc").joinpath(f"presets/{name}.json")
    with path.open() as f:
        return json.load(f)


def _load_config(args, preset: str | None = None) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif preset:
        cfg = ExperimentConfig.from_dict(load_preset(preset))
    else:
        raise ConfigError("--config is required for this command")
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def cmd_validate(args) -> int:
    results = run_validation()
    width = max(len(r["check"]) for r in results)
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"{status}  {r['check']:<{width}}  {r['detail']}")
    n_fail = sum(not r["passed"] for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "validation.json", "w") as f:
            json.dump(results, f, indent=1)
    return EXIT_OK if n_fail == 0 else EXIT_VALIDATION


def cmd_stage(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    write_resolved_config(cfg, out)
    threads = args.threads
    stage = args.command
    if stage == "gen-instances":
        stage_instances(cfg, out)
    elif stage == "optimize-qaoa":
        stage_schedules(cfg, out, threads)
    elif stage == "train-made":
        stage_nets(cfg, out, threads)
    elif stage == "run-chains":
        stage_chains(cfg, out, threads)
    elif stage == "run-baselines":
        stage_baselines(cfg, out, threads)
    elif stage == "metrics":
        stage_metrics(cfg, out)
    print(f"{stage}: done -> {out}")
    return EXIT_OK


def cmd_fig(args) -> int:
    name = args.command
    cfg = _load_config(args, preset=name)
    out = Path(args.out)
    if name == "fig1":
        run_small_instances(cfg, out)
    elif name == "fig2":
        run_anneal_sweep(cfg, out)
    elif name == "fig3":
        # degeneracy scatter needs both clause widths
        for k in (2, 3):
            sub = ExperimentConfig.from_dict(
                {**{kk: v for kk, v in cfg.resolved().items()
                    if kk in ExperimentConfig.__dataclass_fields__},
                 "k": k, "alpha_c": None}
            )
            write_resolved_config(sub, out / f"k{k}")
            stage_instances(sub, out / f"k{k}")
    else:
        run_ksat(cfg, out, args.threads)
    print(f"{name}: done -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairmc",
        description="Fair-sampling experiments for degenerate ground states",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, need_out=True):
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="override seed")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel workers (1 = fully sequential)")
        if need_out:
            p.add_argument("--out", required=True, help="output directory")

    pv = sub.add_parser("validate", help="run the oracle self-check suite")
    pv.add_argument("--out", default=None, help="also write validation.json here")
    pv.set_defaults(fn=cmd_validate)

    for stage in STAGE_COMMANDS:
        ps = sub.add_parser(stage, help=f"pipeline stage: {stage}")
        add_common(ps)
        ps.set_defaults(fn=cmd_stage)

    for fig in FIG_KINDS:
        pf = sub.add_parser(fig, help=f"preset experiment {fig}")
        add_common(pf)
        pf.set_defaults(fn=cmd_fig)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"stage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
