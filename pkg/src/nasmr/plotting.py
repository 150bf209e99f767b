"""Figures written next to check and sweep reports."""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.bbox": "tight",
}

STATUS_COLOR = {"pass": "tab:green", "fail": "tab:red", "skip": "0.7"}


def figure_path(report_path) -> str:
    """``out/report.jsonl`` -> ``out/report.png``."""
    path = str(report_path)
    stem = path.rsplit(".", 1)[0] if "." in path.rsplit("/", 1)[-1] else path
    return stem + ".png"


def _verdict_panel(ax, names, statuses, values=None):
    ys = range(len(names))
    widths = values if values is not None else [1] * len(names)
    ax.barh(ys, widths, color=[STATUS_COLOR.get(s, "0.5") for s in statuses])
    ax.set_yticks(list(ys))
    ax.set_yticklabels(names)
    ax.invert_yaxis()


def slot_latencies(ctx) -> dict:
    """slot -> list of (output time - epoch time) over honest parties."""
    starts = {(e.src, e.value()): e.time for e in ctx.honest_notes("epoch", "smr")}
    out = defaultdict(list)
    for e in ctx.honest_notes("output", "smr"):
        k = int(e.path.rsplit("/", 1)[-1])
        if (e.src, k) in starts:
            out[k].append(e.time - starts[(e.src, k)])
    return dict(out)


def report_figure(report, path, ctx=None) -> str:
    with plt.rc_context(STYLE):
        lat = slot_latencies(ctx) if ctx is not None else {}
        ncols = 3 if lat else 2
        fig, axes = plt.subplots(1, ncols, figsize=(4 * ncols, 3.5))

        _verdict_panel(axes[0], [v.name for v in report.verdicts], [v.status for v in report.verdicts])
        axes[0].set_xticks([])
        axes[0].set_title("checks")

        kinds = sorted(k for k in report.metrics if k.startswith("messages_") and k != "messages_total")
        axes[1].bar(range(len(kinds)), [report.metrics[k] for k in kinds], color="tab:blue")
        axes[1].set_xticks(range(len(kinds)))
        axes[1].set_xticklabels([k[len("messages_"):] for k in kinds], rotation=60, ha="right")
        axes[1].set_title(f"messages sent ({report.metrics.get('messages_total', 0)})")

        if lat:
            slots = sorted(lat)
            axes[2].boxplot([lat[k] for k in slots], positions=range(len(slots)))
            axes[2].set_xticks(range(len(slots)))
            axes[2].set_xticklabels([str(k) for k in slots])
            axes[2].set_xlabel("slot")
            axes[2].set_ylabel("epoch to output (ticks)")
            axes[2].set_title("slot latency")

        out = figure_path(path)
        fig.savefig(out)
        plt.close(fig)
    return out


SWEEP_METRICS = ("mean_slot_latency", "gc_grade2_rate", "aba_mean_round", "messages_total")


def sweep_figure(rows, path) -> str:
    """``rows`` is a list of ``(seed, CheckReport)``."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
        names, passes, totals = [], defaultdict(int), defaultdict(int)
        for _, rep in rows:
            for v in rep.verdicts:
                if v.name not in totals:
                    names.append(v.name)
                if v.status != "skip":
                    totals[v.name] += 1
                    passes[v.name] += v.status == "pass"
        rates = [passes[n] / totals[n] if totals[n] else 0.0 for n in names]
        statuses = ["skip" if not totals[n] else ("pass" if passes[n] == totals[n] else "fail") for n in names]
        _verdict_panel(axes[0], names, statuses, rates)
        axes[0].set_xlim(0, 1)
        axes[0].set_xlabel("pass rate")
        axes[0].set_title(f"checks over {len(rows)} seeds")

        metric = next((m for m in SWEEP_METRICS if any(m in rep.metrics for _, rep in rows)), None)
        if metric:
            pts = [(seed, rep.metrics[metric]) for seed, rep in rows if metric in rep.metrics]
            axes[1].plot([s for s, _ in pts], [v for _, v in pts], "o", ms=3, color="tab:blue")
            axes[1].set_xlabel("seed")
            axes[1].set_ylabel(metric)
            axes[1].set_title(metric)
        else:
            axes[1].axis("off")

        out = figure_path(path)
        fig.savefig(out)
        plt.close(fig)
    return out
