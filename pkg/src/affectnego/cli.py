"""Command-line entry points: core building, policy pre-training, seeded
negotiation experiments, the mood replay study, report comparison, and the
live session service.

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .affect import Conditioning, PersonalityConfig, TimePerception
from .config import ConfigError, HarnessConfig, load_config
from .cores import build_social_core, build_time_core, default_conditioning_frames, save_core
from .harness import compare_reports, dump_report, replay_mood_study, run_experiment, study_quantiles_csv
from .policy import curves_to_csv, pretrain, save_policy
from .stimuli import load_trace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="flat TOML config file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")


def _load(args: argparse.Namespace) -> HarnessConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_build_core(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if args.kind == "time":
        tau = {"patient": cfg.patient_tau, "impatient": cfg.impatient_tau}.get(args.flavor)
        if tau is None:
            tau = float(args.flavor)
        core = build_time_core(tau, steps=cfg.time_core_steps)
    else:
        mode = Conditioning(args.flavor)
        frames = default_conditioning_frames(mode, cfg.seed, n=cfg.conditioning_stimulus_count)
        core = build_social_core(frames, mode)
    save_core(core, args.out)
    print(f"wrote {args.kind} core ({args.flavor}) to {args.out}")
    return EXIT_OK


def cmd_pretrain(args: argparse.Namespace) -> int:
    cfg = _load(args)
    traces = [load_trace(p).points() for p in args.trace]
    agent, curves = pretrain(cfg.train_config(), cfg.game_config(),
                             extra_traces=traces,
                             affect_params=cfg.respondent_params(),
                             progress=not args.quiet)
    save_policy(agent, args.out)
    if args.curves:
        _write(args.curves, curves_to_csv(curves))
    print(f"wrote policy snapshot to {args.out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    if args.policy:
        cfg.policy_snapshot = args.policy
    report = run_experiment(cfg)
    _write(args.out, dump_report(report))
    return EXIT_OK


def cmd_replay_mood(args: argparse.Namespace) -> int:
    cfg = _load(args)
    stimulus = load_trace(args.stimulus) if args.stimulus else None
    personalities = None
    if args.condition:
        personalities = []
        for label in args.condition:
            tp, cond = label.split("/")
            personalities.append(PersonalityConfig(TimePerception(tp), Conditioning(cond)))
    study = replay_mood_study(cfg, personalities, stimulus)
    _write(args.out, dump_report(study))
    if args.quantiles:
        _write(args.quantiles, study_quantiles_csv(study))
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    with open(args.report_a, encoding="utf-8") as fh:
        a = json.load(fh)
    with open(args.report_b, encoding="utf-8") as fh:
        b = json.load(fh)
    _write(args.out, dump_report(compare_reports(a, b)))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    cfg = _load(args)
    app = create_app(policies_dir=args.policies, config=cfg, log_dir=args.log_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affectnego",
        description="Personality-driven Ultimatum Game negotiation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-core", help="build and persist a frozen personality core")
    _add_common(p)
    p.add_argument("--kind", choices=["time", "social"], required=True)
    p.add_argument("--flavor", required=True,
                   help="time: patient|impatient|<tau>; social: excitatory|inhibitory")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build_core)

    p = sub.add_parser("pretrain", help="pre-train the negotiation policy")
    _add_common(p)
    p.add_argument("--out", required=True, help="policy snapshot path")
    p.add_argument("--curves", default=None, help="learning-curve CSV path")
    p.add_argument("--trace", action="append", default=[],
                   help="extra affect trace CSVs for the replay pool (repeatable)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_pretrain)

    p = sub.add_parser("simulate", help="run a seeded negotiation experiment")
    _add_common(p)
    p.add_argument("--policy", default=None, help="policy snapshot (overrides config)")
    p.add_argument("--out", default="-", help="report JSON path (default stdout)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("replay-mood", help="mood-bias replay study")
    _add_common(p)
    p.add_argument("--stimulus", default=None, help="stimulus trace CSV (default synthetic)")
    p.add_argument("--condition", action="append", default=[],
                   help="personality label time/conditioning, e.g. patient/excitatory")
    p.add_argument("--out", default="-")
    p.add_argument("--quantiles", default=None, help="box-plot quantile CSV path")
    p.set_defaults(fn=cmd_replay_mood)

    p = sub.add_parser("analyze", help="compare two experiment reports")
    _add_common(p)
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("serve", help="HTTP session service for live negotiation")
    _add_common(p)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--policies", required=True, help="directory of policy snapshots")
    p.add_argument("--log-dir", default=None, help="JSONL session log directory")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced with context, mapped to exit code 3
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
