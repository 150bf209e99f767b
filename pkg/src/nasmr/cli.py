"""Command line entry point: ``nasmr run|check|replay|sweep|demo-lower-bound``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor

from .adversary import UnknownStrategy
from .checks import CheckReport, Context, Verdict, check_records
from .encoding import EncodingError
from .lowerbound import demo_lower_bound
from .scenario import ConfigError, ScenarioConfig, run
from .sim import SimulationError, read_transcript


def parse_seeds(text: str) -> range:
    a, sep, b = text.partition("..")
    try:
        lo = int(a)
        hi = int(b) if sep else lo
    except ValueError:
        raise argparse.ArgumentTypeError(f"--seeds: expected a..b, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"--seeds: empty range {text!r}")
    return range(lo, hi + 1)


def _print_report(report: CheckReport) -> None:
    for line in report.lines():
        print(line)


def _save_report(report: CheckReport, path, ctx=None) -> str:
    from .plotting import report_figure

    report.write(path)
    return report_figure(report, path, ctx)


def _checks_of(cfg: dict, only):
    return only or cfg.get("checks") or None


def cmd_run(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    cfg.validate()
    _, tr = run(cfg)
    tr.write(args.out)
    print(f"wrote {args.out} ({len(tr.records)} records, digest {tr.digest()[:16]})")
    return 0


def cmd_check(args) -> int:
    config, records, _ = read_transcript(args.transcript)
    report = check_records(config, records, _checks_of(config, args.only))
    _print_report(report)
    if args.report:
        fig = _save_report(report, args.report, Context(config, records))
        print(f"wrote {args.report} and {fig}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_replay(args) -> int:
    with open(args.transcript, "rb") as fh:
        original = fh.read()
    config, _, _ = read_transcript(args.transcript)
    _, tr = run(ScenarioConfig.from_dict(config))
    fresh = tr.to_bytes()
    if fresh == original:
        print(f"replay identical ({len(fresh)} bytes)")
        return 0
    old_lines, new_lines = original.splitlines(), fresh.splitlines()
    first = next((i for i, (a, b) in enumerate(zip(old_lines, new_lines)) if a != b), min(len(old_lines), len(new_lines)))
    print(f"replay differs at line {first + 1}", file=sys.stderr)
    return 1


def _sweep_one(job):
    cfg_dict, seed, only = job
    cfg = ScenarioConfig.from_dict(cfg_dict).with_seed(seed)
    _, tr = run(cfg)
    report = check_records(tr.config, tr.records, only)
    return seed, report, tr.digest()


def sweep(cfg: ScenarioConfig, seeds, only=None, jobs: int = 1) -> list:
    """``[(seed, CheckReport, transcript digest)]`` in seed order."""
    work = [(cfg.to_dict(), s, only) for s in seeds]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    return [_sweep_one(w) for w in work]


def aggregate(rows) -> CheckReport:
    agg = CheckReport()
    counts = defaultdict(lambda: {"pass": 0, "fail": 0, "skip": 0})
    first_fail = {}
    order = []
    for seed, rep, _ in rows:
        for v in rep.verdicts:
            if v.name not in counts:
                order.append(v.name)
            counts[v.name][v.status] += 1
            if v.status == "fail" and v.name not in first_fail:
                first_fail[v.name] = (seed, v)
    for name in order:
        c = counts[name]
        if name in first_fail:
            seed, v = first_fail[name]
            agg.verdicts.append(Verdict(name, "fail", v.first, f"seed {seed}: {v.detail} ({c['fail']} failing)"))
        elif c["pass"]:
            agg.verdicts.append(Verdict(name, "pass", None, f"{c['pass']} pass, {c['skip']} skip"))
        else:
            agg.verdicts.append(Verdict(name, "skip", None, f"{c['skip']} skip"))
    numeric = defaultdict(list)
    for _, rep, _ in rows:
        for k, v in rep.metrics.items():
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                numeric[k].append(v)
    for k, vals in numeric.items():
        agg.metrics[f"mean_{k}"] = sum(vals) / len(vals)
    agg.metrics["runs"] = len(rows)
    return agg


def cmd_sweep(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    cfg.validate()
    rows = sweep(cfg, args.seeds, _checks_of(cfg.to_dict(), args.only), args.jobs)
    agg = aggregate(rows)
    for seed, rep, digest in rows:
        status = "pass" if rep.passed else "fail"
        print(json.dumps({"kind": "run", "seed": seed, "status": status, "digest": digest}, sort_keys=True))
    _print_report(agg)
    if args.report:
        from .plotting import sweep_figure

        agg.write(args.report)
        fig = sweep_figure([(s, r) for s, r, _ in rows], args.report)
        print(f"wrote {args.report} and {fig}", file=sys.stderr)
    return 0 if agg.passed else 1


def cmd_demo(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    report, tr = demo_lower_bound(cfg)
    _print_report(report)
    if args.out:
        tr.write(args.out)
    if args.report:
        fig = _save_report(report, args.report, Context(tr.config, tr.records))
        print(f"wrote {args.report} and {fig}", file=sys.stderr)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nasmr", description="Simulate, check and replay network-agnostic SMR scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write its transcript")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("check", help="check a transcript offline")
    p.add_argument("transcript")
    p.add_argument("--report", help="write the report here plus a .png next to it")
    p.add_argument("--only", nargs="+", help="restrict to these checks")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("replay", help="re-run a transcript's config and byte-compare")
    p.add_argument("transcript")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("sweep", help="run a scenario over a seed range")
    p.add_argument("config")
    p.add_argument("--seeds", type=parse_seeds, required=True, help="inclusive range a..b")
    p.add_argument("--report")
    p.add_argument("--only", nargs="+")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("demo-lower-bound", help="split-world experiment for parameters violating the bound")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the transcript here")
    p.add_argument("--report")
    p.set_defaults(fn=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, UnknownStrategy, SimulationError, EncodingError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
