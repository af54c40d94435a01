"""Command-line experiment runner.

Subcommands: train, phase-sweep, transfer, reachability, metrics, plot.
The output root defaults to $CHROMAMIX_OUT (falling back to ./runs).
"""

from __future__ import annotations

import argparse
import sys

from .harness import (cmd_metrics, cmd_phase_sweep, cmd_plot, cmd_reachability,
                      cmd_train, cmd_transfer, default_out_root)
from .metrics import EVAL_TARGETS
from .mixing import DYNAMICS_MODELS
from .specfile import EvalProtocol, SpecError, parse_spec_file
from .specfile import _parse_targets  # shared target syntax


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chromamix",
                                     description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train per the spec file, one run per seed")
    p.add_argument("--spec", required=True, help="experiment spec file")
    p.add_argument("--out", help="output root (default: $CHROMAMIX_OUT or ./runs)")
    p.add_argument("--seed", type=int, help="train only this seed")

    p = sub.add_parser("phase-sweep", help="train a full ablation phase grid")
    p.add_argument("--phase", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--out", help="output root")
    p.add_argument("--seeds", default="0,1,2", help="comma list (default 0,1,2)")
    p.add_argument("--parallel", type=int, default=1, metavar="N",
                   help="run N configs concurrently (default sequential)")
    p.add_argument("--total-steps", type=int, dest="total_steps",
                   help="override the phase step budget")

    p = sub.add_parser("transfer", help="evaluate a checkpoint across dynamics")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--spec", help="spec file providing the eval block")
    p.add_argument("--dynamics", choices=DYNAMICS_MODELS,
                   help="eval dynamics (when no spec is given)")
    p.add_argument("--targets", help="'label: r,g,b; ...' (default: C1-C4)")
    p.add_argument("--reps", type=int, default=4)
    p.add_argument("--horizon", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=7.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("reachability", help="minimum-tolerance table")
    p.add_argument("--models", default=",".join(DYNAMICS_MODELS))
    p.add_argument("--targets", help="'label: r,g,b; ...' (default: C1-C4)")
    p.add_argument("--resolution", type=float, default=0.001)
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("metrics", help="curve metrics (and CS) for run dirs")
    p.add_argument("runs", nargs="+", help="run directories (containing training.csv)")
    p.add_argument("--out", help="output directory")

    p = sub.add_parser("plot", help="plot-ready CSV series from run artifacts")
    p.add_argument("runs", nargs="+", help="run or sweep directories")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            spec = parse_spec_file(args.spec)
            for run_dir in cmd_train(spec, out=args.out, seed=args.seed):
                print(run_dir)
        elif args.command == "phase-sweep":
            seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
            path = cmd_phase_sweep(args.phase, out=args.out, seeds=seeds,
                                   parallel=args.parallel,
                                   total_steps=args.total_steps)
            print(path)
        elif args.command == "transfer":
            if args.spec:
                spec = parse_spec_file(args.spec)
                if spec.eval is None:
                    raise SpecError("eval: spec file has no eval block")
                protocol = spec.eval
            elif args.dynamics:
                targets = (_parse_targets("targets", args.targets)
                           if args.targets else tuple(EVAL_TARGETS.items()))
                protocol = EvalProtocol(dynamics=args.dynamics, targets=targets,
                                        reps=args.reps, horizon=args.horizon,
                                        tolerance=args.tolerance)
            else:
                raise SpecError("transfer needs --spec or --dynamics")
            payload = cmd_transfer(args.checkpoint, protocol,
                                   out=args.out or default_out_root() / "transfer",
                                   seed=args.seed)
            for label, row in payload["targets"].items():
                print(f"{label}: d={row['d_mean']:.2f}±{row['d_std']:.2f} "
                      f"s={row['s_mean']:.2f} success={row['success']:.0%}")
            if "overall" in payload:
                o = payload["overall"]
                print(f"Avg: d={o['d_mean']:.2f}±{o['d_std']:.2f} "
                      f"s={o['s_mean']:.2f} success={o['success']:.0%}")
        elif args.command == "reachability":
            models = tuple(m for m in args.models.split(",") if m)
            targets = (dict(_parse_targets("targets", args.targets))
                       if args.targets else None)
            entries = cmd_reachability(models=models, targets=targets,
                                       resolution=args.resolution,
                                       out=args.out or default_out_root() / "reachability")
            for e in entries:
                print(f"{e.label} {e.model}: tau_min={e.tau_min:.1f}")
        elif args.command == "metrics":
            payload = cmd_metrics(args.runs, out=args.out)
            for run, m in payload["runs"].items():
                t75 = "--" if m["t75"] is None else m["t75"]
                line = f"{run}: fp={m['fp']:.3f} t75={t75} cv={m['cv']:.4f} nm={m['nm']}"
                if "cs" in m:
                    line += f" cs={m['cs']:.3f}"
                print(line)
        elif args.command == "plot":
            for path in cmd_plot(args.runs, args.out):
                print(path)
    except (SpecError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
