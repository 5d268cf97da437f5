"""Command-line surface.

Subcommands: emergence, pivot, init, experiment, verify, report.
Exit codes: 0 success, 1 validation/property failure, 2 internal error or
training divergence.  EMRG_LOG_LEVEL in {error,warn,info,debug} controls
logging verbosity.
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .dataio import append_log, read_logs, read_network_spec, save_weights
from .errors import EmrgError
from .experiment import ExperimentConfig, run_experiment, summary_rows
from .graphs import ActivationProfile
from .measures import choose_pivot, emergence_conv, emergence_layered
from .scaling import (
    BASE_SCHEMES,
    InitConfig,
    init_weights,
    recommended_alpha,
)
from .verify import run_battery

log = logging.getLogger("emrg")

_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _setup_logging():
    level = os.environ.get("EMRG_LOG_LEVEL", "warn").lower()
    logging.basicConfig(level=_LEVELS.get(level, logging.WARNING))


def _int_csv(text):
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints: {text!r}")


def _emergence_terms(shape, profile, filters=None):
    """Per-(i, j) contributions of the layered measure (1-based indices)."""
    n = list(shape)
    a = list(profile)
    m = list(filters) if filters is not None else a
    terms = []
    for i in range(len(n) - 1):
        through = 1
        for j in range(i + 1, len(n)):
            value = (n[i] - a[i]) * through * a[j]
            terms.append({"i": i + 1, "j": j + 1, "value": value})
            through *= m[j]
    return terms


def cmd_emergence(args):
    shape, profile, filters = read_network_spec(args.spec)
    if args.profile is not None:
        profile = ActivationProfile(args.profile)
        profile.check_against(shape)
    if args.conv_filters is not None:
        filters = args.conv_filters
    if profile is None:
        print("error: no activation profile (add 'profile' to the spec or pass --profile)",
              file=sys.stderr)
        return 1
    if filters is not None:
        value = emergence_conv(shape, profile, filters)
    else:
        value = emergence_layered(shape, profile)
    terms = _emergence_terms(shape, profile, filters)
    if args.json:
        print(json.dumps({
            "layers": list(shape),
            "profile": list(profile),
            "filters": filters,
            "terms": [{**t, "value": str(t["value"])} for t in terms],
            "emergence": str(value),
        }))
    else:
        print(f"{'i':>4} {'j':>4} {'paths':>16}")
        for t in terms:
            print(f"{t['i']:>4} {t['j']:>4} {t['value']:>16}")
        print(value)
    return 0


def cmd_pivot(args):
    shape, _, _ = read_network_spec(args.spec)
    report = choose_pivot(shape)
    if args.json:
        print(json.dumps({
            "layers": list(shape),
            "deltas": [str(d) for d in report.deltas],
            "pivot": report.pivot,
        }))
    else:
        for i, d in enumerate(report.deltas, start=1):
            print(f"layer {i}: delta = {d}")
        print(f"pivot: {report.pivot if report.pivot is not None else 'none'}")
    return 0


def cmd_init(args):
    shape, _, _ = read_network_spec(args.spec)
    alpha = args.alpha
    alpha_note = ""
    if alpha is None:
        alpha = recommended_alpha(len(shape) - 1)
        alpha_note = f"using recommended alpha = {alpha}"
    config = InitConfig(
        base_scheme=args.base,
        alpha=alpha,
        pivot_mode="explicit" if args.pivot_center is not None else "auto",
        center=args.pivot_center,
        seed=args.seed,
    )
    weights, schedule = init_weights(shape, config)
    save_weights(weights, args.output)
    exp_sum = sum(schedule.exponents)
    if args.json:
        print(json.dumps({
            "layers": list(shape),
            "base": args.base,
            "alpha": alpha,
            "seed": args.seed,
            "multipliers": schedule.multipliers,
            "exponent_sum": exp_sum,
            "output": str(args.output),
        }))
    else:
        if alpha_note:
            print(alpha_note)
        print("multipliers: " + " ".join(f"{m:g}" for m in schedule.multipliers))
        print(f"exponent sum: {exp_sum:g}")
        print(f"wrote {args.output}")
    return 0


def cmd_experiment(args):
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return 1
    config = ExperimentConfig.from_dict(raw)
    results = run_experiment(config)
    logdir = Path(args.output)
    logdir.mkdir(parents=True, exist_ok=True)
    logpath = logdir / "experiment.jsonl"
    for res in results:
        append_log(res.record, logpath)
    rows = summary_rows(results)
    if args.json:
        print(json.dumps({"log": str(logpath), "summary": rows}))
    else:
        print(f"{'seed':>6} {'arm':>8} {'alpha':>6} {'init_emergence':>18} "
              f"{'epoch1_loss':>12} {'epoch1_acc':>11}")
        for r in rows:
            loss = f"{r['epoch1_loss']:.4f}" if r["epoch1_loss"] is not None else "-"
            acc = f"{r['epoch1_accuracy']:.3f}" if r["epoch1_accuracy"] is not None else "-"
            print(f"{r['seed']:>6} {r['arm']:>8} {r['alpha']:>6g} "
                  f"{r['init_emergence']:>18} {loss:>12} {acc:>11}")
    diverged = [r for r in rows if r["diverged"]]
    for r in diverged:
        print(
            f"divergence: seed={r['seed']} arm={r['arm']} "
            f"epoch={r['diverged_epoch']}",
            file=sys.stderr,
        )
    return 2 if diverged else 0


def cmd_verify(args):
    max_layers = min(args.max_layers, 6)
    max_width = min(args.max_width, 8)
    results = run_battery(max_layers, max_width, args.trials)
    if args.json:
        print(json.dumps([
            {
                "name": r.name,
                "passed": r.passed,
                "cases": r.cases,
                "counterexample": r.counterexample,
            }
            for r in results
        ]))
    else:
        for r in results:
            print(r)
    return 0 if all(r.passed for r in results) else 1


def cmd_report(args):
    path = Path(args.logs)
    if path.is_dir():
        path = path / "experiment.jsonl"
    records = read_logs(path)
    rows = []
    for rec in records:
        for entry in rec.logs:
            rows.append({
                "seed": rec.seed,
                "arm": rec.arm,
                "alpha": rec.alpha,
                "epoch": entry["epoch"],
                "train_loss": entry["train_loss"],
                "train_accuracy": entry["train_accuracy"],
                "test_accuracy": entry["test_accuracy"],
                "emergence": entry["emergence"],
            })
    fields = ["seed", "arm", "alpha", "epoch", "train_loss",
              "train_accuracy", "test_accuracy", "emergence"]
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.output:
            out.close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="emrg",
        description="Emergence measures and emergence-promoting initialization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("emergence", help="compute the emergence of a network spec")
    p.add_argument("spec", help="network spec file (JSON)")
    p.add_argument("--profile", type=_int_csv, default=None,
                   help="override active counts, e.g. 1,2,2")
    p.add_argument("--conv-filters", type=_int_csv, default=None,
                   help="per-layer filter counts for the convolutional measure")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_emergence)

    p = sub.add_parser("pivot", help="per-layer deltas and the pivot layer")
    p.add_argument("spec")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_pivot)

    p = sub.add_parser("init", help="write scaled initial weights (EMIW)")
    p.add_argument("spec")
    p.add_argument("--base", choices=BASE_SCHEMES, default="kaiming_normal")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pivot-center", type=float, default=None)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("experiment", help="paired baseline-vs-scaled training runs")
    p.add_argument("config", help="experiment config file (JSON)")
    p.add_argument("-o", "--output", required=True, help="log directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="run the cross-oracle property battery")
    p.add_argument("--max-layers", type=int, default=5)
    p.add_argument("--max-width", type=int, default=6)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="emit per-epoch CSV from experiment logs")
    p.add_argument("logs", help="log file or directory")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmrgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal failure
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
