"""Split-world experiment: with ``t_a + 2 t_s >= n`` two isolated camps finalise
conflicting slot-1 blocks.

Parties are partitioned into ``S0``, ``S1`` and ``Sa``. Messages between the
camps ``S0`` and ``S1`` are held back until the horizon; every member of
``Sa`` is corrupted and runs one honest copy per camp. Camp ``b`` (and the
copies facing it) holds transaction ``m_b``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .checks import CheckReport, Context, Verdict, check_transcript
from .crypto import derive_seed
from .protocols.smr import slot_period
from .scenario import ConfigError, ScenarioConfig, run
from .types import Transaction


class VacuousDemo(ConfigError):
    pass


def partition(n: int, t_a: int, t_s: int) -> tuple[list, list, list]:
    """``(S0, S1, Sa)``: ``Sa`` takes the last parties (at most ``t_a``), ``S1`` the ``t_s`` before them."""
    size_a = min(t_a, max(0, n - 2 * t_s))
    sa = list(range(n - size_a + 1, n + 1))
    rest = list(range(1, n - size_a + 1))
    s1 = rest[len(rest) - t_s:] if t_s else []
    s0 = rest[: len(rest) - len(s1)]
    return s0, s1, sa


def messages(seed: int) -> tuple[bytes, bytes]:
    rng = random.Random(derive_seed(seed, "split-world"))
    return rng.randbytes(32), rng.randbytes(32)


def split_world_config(n: int, t_a: int, t_s: int, seed: int = 0, kappa: int = 2, delta: int = 2) -> ScenarioConfig:
    s0, s1, sa = partition(n, t_a, t_s)
    m0, m1 = messages(seed)
    period = slot_period(delta, kappa)
    txs = [
        {"time": 0, "targets": s0, "payload": m0.hex()},
        {"time": 0, "targets": s1, "payload": m1.hex()},
    ]
    if sa:
        txs.append({"time": 0, "targets": sa, "payload": m0.hex(), "lane": 0})
        txs.append({"time": 0, "targets": sa, "payload": m1.hex(), "lane": 1})
    return ScenarioConfig.from_dict(
        {
            "params": {"n": n, "t_a": t_a, "t_s": t_s, "kappa": kappa, "enforce_bound": False},
            "net": {"mode": "async", "delta": delta, "horizon": 3 * period + 100 * delta, "seed": seed},
            "adversary": {
                "strategy": "split-world",
                "scheduler": "split-world",
                "corrupt": sa,
                "budget": len(sa),
                "params": {"S0": s0, "S1": s1, "Sa": sa},
            },
            "workload": {"txs": txs},
            "protocol": {"name": "smr", "slots": 1},
        }
    )


@dataclass
class SplitOutcome:
    violation: bool
    blocks0: dict
    blocks1: dict
    detail: str


def split_outcome(cfg: ScenarioConfig, transcript) -> SplitOutcome:
    adv = cfg.adversary["params"]
    s0, s1 = adv["S0"], adv["S1"]
    m0, m1 = (Transaction(bytes.fromhex(tx["payload"])) for tx in cfg.workload["txs"][:2])
    ctx = Context(transcript.config, transcript.records)
    blocks = {}
    for e in ctx.honest_notes("output", "smr"):
        if e.path.endswith("/slot/1"):
            blocks[e.src] = e.value()
    b0 = {p: blocks.get(p) for p in s0}
    b1 = {p: blocks.get(p) for p in s1}
    side0 = all(b is not None and m0 in b and m1 not in b for b in b0.values())
    side1 = all(b is not None and m1 in b and m0 not in b for b in b1.values())
    violation = bool(s0 and s1 and side0 and side1)
    done0 = sum(b is not None for b in b0.values())
    done1 = sum(b is not None for b in b1.values())
    detail = f"S0 blocks {done0}/{len(s0)}, S1 blocks {done1}/{len(s1)}"
    return SplitOutcome(violation, b0, b1, detail)


def run_split_world(cfg: ScenarioConfig):
    sim, tr = run(cfg)
    return tr, split_outcome(cfg, tr)


def from_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Split-world scenario for the parameters, seed and timing of ``cfg``."""
    p, net = cfg.protocol_params, cfg.net_config
    return split_world_config(p.n, p.t_a, p.t_s, seed=net.seed, kappa=p.kappa, delta=net.delta)


def demo_lower_bound(cfg: ScenarioConfig) -> tuple[CheckReport, object]:
    """Run the experiment for the parameters in ``cfg``; refuses those for which it is vacuous."""
    p = cfg.protocol_params
    if p.bound_holds:
        raise VacuousDemo(
            f"params: t_a + 2*t_s < n holds ({p.t_a} + 2*{p.t_s} < {p.n}); the split-world demo needs it violated"
        )
    split = cfg if cfg.adversary.get("strategy") == "split-world" else from_config(cfg)
    tr, outcome = run_split_world(split)
    report = check_transcript(tr, only=["budget", "eventual-delivery"])
    status = "pass" if outcome.violation else "fail"
    report.verdicts.append(Verdict("split-disagreement", status, None, outcome.detail))
    report.metrics["violation"] = outcome.violation
    return report, tr
