"""Command-line entry point: ``neighbourmult <subcommand> ...``."""

import argparse
import dataclasses
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import dataset, harness, theory
from .config import ACTIVE, IMPUTE
from .errors import MultiplicityError


def _add_common(p, config_required=True):
    p.add_argument("--config", required=config_required, help="experiment JSON file")
    p.add_argument("--seed", type=int, help="run only this master seed")
    p.add_argument("--out", help=f"output directory (overrides ${harness.OUTPUT_ENV} and the config)")


def _cmd_gen_data(args):
    if args.config:
        cfg = harness.load_config(args.config)
        spec = cfg.synthetic_spec()
    else:
        half = args.separation / 2
        spec = dataset.SyntheticSpec(
            args.n_per_class,
            [-half / args.dim**0.5] * args.dim,
            [half / args.dim**0.5] * args.dim,
            correlation=args.correlation,
            seed=0,
            grid_step=args.grid_step,
        )
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    out = Path(args.out or harness.output_dir_env() or "data.csv")
    if out.suffix != ".csv":
        out = out / "data.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.save_csv(dataset.generate_gaussian(spec), out)
    print(out)


def _run_task(args, task):
    cfg = harness.load_config(args.config, args.seed)
    if cfg.task != task:
        raise MultiplicityError(f"config task is {cfg.task!r}, this subcommand runs {task!r}")
    run, out = harness.run_and_report(cfg, args.out)
    print(f"{len(run.records)} records, {len(run.errors)} failed cells -> {out}")
    return 1 if run.errors else 0


def _cmd_verify_theory(args):
    kinds = tuple(args.classes.split(","))
    eps = [Fraction(e) for e in args.epsilon.split(",")] if args.epsilon else None
    summary = theory.sweep(args.instances, args.seed, kinds, epsilons=eps)
    chains = theory.sweep_chains(args.chains, args.seed, kinds) if args.chains else []
    report = harness.theory_report(summary, chains)
    text = json.dumps(report, indent=2, sort_keys=True)
    target = args.out or harness.output_dir_env()
    if target:
        out = Path(target)
        out.mkdir(parents=True, exist_ok=True)
        (out / "theory.json").write_text(text + "\n")
    print(text)
    bad = summary.subset_failures + summary.ordering_failures + len(report["chains"]["counterexamples"])
    return 1 if bad else 0


def _cmd_report(args):
    src = Path(args.results or args.out or harness.output_dir_env() or "results")
    csv_path = src / "results.csv" if src.is_dir() else src
    records = harness.read_results_csv(csv_path)
    out = harness.emit_report(records, args.out or csv_path.parent)
    print(f"{len(records)} records -> {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="neighbourmult", description="Predictive multiplicity experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic two-Gaussian CSV")
    _add_common(p, config_required=False)
    p.add_argument("--n-per-class", type=int, default=3000)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--separation", type=float, default=1.683, help="distance between class means")
    p.add_argument("--correlation", type=float, default=0.0)
    p.add_argument("--grid-step", type=float, help="round features to multiples of this step")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("run-active", help="active-learning experiment from a config")
    _add_common(p)
    p.set_defaults(func=lambda a: _run_task(a, ACTIVE))

    p = sub.add_parser("run-impute", help="imputation experiment from a config")
    _add_common(p)
    p.set_defaults(func=lambda a: _run_task(a, IMPUTE))

    p = sub.add_parser("verify-theory", help="randomized exhaustive check of the theorem")
    p.add_argument("--instances", type=int, default=1000, help="random dataset pairs")
    p.add_argument("--chains", type=int, default=200, help="random k-step chains")
    p.add_argument("--classes", default=",".join(theory.CLASS_KINDS))
    p.add_argument("--epsilon", help="comma-separated thresholds such as 1/4,1/2 (default: each pair's loss grid)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for theory.json")
    p.set_defaults(func=_cmd_verify_theory)

    p = sub.add_parser("report", help="re-aggregate an existing results.csv")
    p.add_argument("--results", help="results.csv or the directory holding it")
    p.add_argument("--out", help="where to write the report (default: next to results.csv)")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except MultiplicityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
