"""Invariant checks computed from a transcript alone.

Every verdict is derived from the transcript records plus the scenario config
echoed on its first line, so a saved transcript can be re-checked offline.
Signatures are re-verified by recomputing digests; the signing ledger is not
needed for that.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .crypto import Verifier
from .encoding import EncodingError, canonical_decode
from .scenario import ScenarioConfig
from .types import Pair, Signature, pair_is_valid


class OfflineRegistry:
    """Signature checks without the ledger: the digest must match the claimed content."""

    def __init__(self, n: int):
        self.n = n

    def verify(self, party, tag, payload, sig) -> bool:
        return isinstance(sig, Signature) and sig.signer == party and sig.digest == hashlib.sha256(tag + payload).digest()


@dataclass
class Verdict:
    name: str
    status: str  # pass | fail | skip
    first: int | None = None
    detail: str = ""


@dataclass
class CheckReport:
    verdicts: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.status != "fail" for v in self.verdicts)

    def verdict(self, name: str) -> Verdict | None:
        for v in self.verdicts:
            if v.name == name:
                return v
        return None

    def failures(self) -> list:
        return [v for v in self.verdicts if v.status == "fail"]

    def lines(self):
        for v in self.verdicts:
            yield json.dumps({"kind": "verdict", "check": v.name, "status": v.status, "first": v.first, "detail": v.detail}, sort_keys=True)
        for k in sorted(self.metrics):
            yield json.dumps({"kind": "metric", "name": k, "value": self.metrics[k]}, sort_keys=True)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.lines():
                fh.write(line + "\n")


@dataclass
class Event:
    seq: int
    time: int
    kind: str
    src: int
    dst: int
    payload: bytes
    note: str
    label: str = ""
    path: str = ""
    attrs: dict = field(default_factory=dict)
    lane: int = 0

    def value(self):
        if not self.payload:
            return None
        try:
            return canonical_decode(self.payload)
        except EncodingError:
            return None


_NOTE_KINDS = {"output", "decide", "halt", "epoch", "grade", "anomaly", "drop"}


def _parse(rec) -> Event:
    if isinstance(rec, dict):
        ev = Event(rec["seq"], rec["time"], rec["kind"], rec["src"], rec["dst"], rec["payload"], rec["note"])
    else:
        ev = Event(*rec)
    parts = ev.note.split(" ")
    if ev.kind in _NOTE_KINDS and len(parts) >= 2:
        ev.label, ev.path = parts[0], parts[1]
        for tok in parts[2:]:
            if "=" in tok:
                k, v = tok.split("=", 1)
                ev.attrs[k] = v
        ev.lane = int(ev.attrs.get("lane", 0))
    elif ev.kind == "send" and len(parts) >= 3:
        ev.label, ev.path = parts[0], parts[1]
        for tok in parts[2].split(";"):
            if tok.startswith("d="):
                ev.attrs["d"] = int(tok[2:])
            elif tok == "clamped":
                ev.attrs["clamped"] = True
            elif tok.startswith("lanes="):
                a, b = tok[6:].split(">")
                ev.lane = int(a)
                ev.attrs["dst_lane"] = int(b)
    return ev


class Context:
    def __init__(self, config: dict, records: list):
        self.cfg = ScenarioConfig.from_dict(config)
        self.params = self.cfg.protocol_params
        self.net = self.cfg.net_config
        self.n = self.params.n
        self.events = [_parse(r) for r in records]
        self.corrupt_at = {}
        for e in self.events:
            if e.kind == "corrupt":
                self.corrupt_at.setdefault(e.src, e.seq)
        self.honest = [p for p in range(1, self.n + 1) if p not in self.corrupt_at]
        self.n_corrupt = len(self.corrupt_at)
        self._by_kind = defaultdict(list)
        for e in self.events:
            self._by_kind[e.kind].append(e)

    def of(self, kind: str, label: str | None = None) -> list:
        evs = self._by_kind.get(kind, [])
        if label is None:
            return evs
        return [e for e in evs if e.label == label]

    def honest_notes(self, kind: str, label: str) -> list:
        hs = set(self.honest)
        return [e for e in self.of(kind, label) if e.src in hs and e.lane == 0]

    def verifier(self, slot: int = 0) -> Verifier:
        return Verifier(OfflineRegistry(self.n), self.cfg.session, slot)


def _ok(name, detail=""):
    return Verdict(name, "pass", None, detail)


def _fail(name, first, detail):
    return Verdict(name, "fail", first, detail)


def _skip(name, why):
    return Verdict(name, "skip", None, why)


def _agreement(name, notes: list, key=lambda e: e.payload) -> Verdict:
    """All notes in the list carry the same value."""
    if not notes:
        return _ok(name, "no outputs")
    ref = key(notes[0])
    for e in notes[1:]:
        if key(e) != ref:
            return _fail(name, e.seq, f"P{e.src} output differs from P{notes[0].src}")
    return _ok(name, f"{len(notes)} outputs agree")


def _everyone(name, ctx: Context, notes: list, what: str) -> Verdict:
    got = {e.src for e in notes}
    missing = [p for p in ctx.honest if p not in got]
    if missing:
        return _fail(name, None, f"no {what} from honest " + ",".join(f"P{p}" for p in missing))
    return _ok(name, f"all {len(ctx.honest)} honest parties")


def _first_per_party(notes: list) -> dict:
    out = {}
    for e in notes:
        out.setdefault(e.src, e)
    return out


# -- network-level checks ------------------------------------------------------


def check_sync_bound(ctx: Context) -> Verdict:
    if ctx.net.mode != "sync":
        return _skip("sync-bound", "async run")
    for e in ctx.of("send"):
        if e.attrs.get("d", e.time) - e.time > ctx.net.delta:
            return _fail("sync-bound", e.seq, f"delivery at {e.attrs['d']} exceeds send {e.time} + delta")
    clamped = sum(1 for e in ctx.of("send") if e.attrs.get("clamped"))
    return _ok("sync-bound", f"{len(ctx.of('send'))} sends, {clamped} clamped")


def check_eventual_delivery(ctx: Context) -> Verdict:
    delivered = set()
    for e in ctx.of("deliver"):
        delivered.add(int(e.note.split("=", 1)[1]))
    for e in ctx.of("send"):
        if e.time < ctx.net.horizon and e.attrs.get("d", 0) <= ctx.net.horizon and e.seq not in delivered:
            return _fail("eventual-delivery", e.seq, "message never delivered")
    return _ok("eventual-delivery", f"{len(delivered)} deliveries")


def check_budget(ctx: Context) -> Verdict:
    corrupt = ctx.of("corrupt")
    if len(corrupt) > ctx.cfg.budget:
        return _fail("budget", corrupt[ctx.cfg.budget].seq, f"{len(corrupt)} corruptions exceed budget {ctx.cfg.budget}")
    return _ok("budget", f"{len(corrupt)} of {ctx.cfg.budget}")


def check_oracle_secrecy(ctx: Context) -> Verdict:
    asks = defaultdict(set)
    honest_ask = defaultdict(bool)
    revealed = set()
    quorum = {"leader": ctx.n // 2 + 1, "coin": ctx.params.t_a + 1}
    for e in ctx.events:
        if e.kind not in ("oracle", "oracle-reveal", "oracle-reply"):
            continue
        name, _, rest = e.note.partition(" ")
        key = (name, rest.replace("ask ", "", 1))
        if e.kind == "oracle":
            asks[key].add(e.src)
            if e.src not in ctx.corrupt_at or ctx.corrupt_at[e.src] > e.seq:
                honest_ask[key] = True
        elif e.kind == "oracle-reveal":
            if len(asks[key]) < quorum[name] or not honest_ask[key]:
                return _fail("oracle-secrecy", e.seq, f"{name} revealed after {len(asks[key])} requests")
            revealed.add(key)
        elif key not in revealed:
            return _fail("oracle-secrecy", e.seq, f"{name} reply before reveal")
    return _ok("oracle-secrecy", f"{len(revealed)} reveals")


def check_halt_safety(ctx: Context) -> Verdict:
    halted = {}
    for e in ctx.events:
        if e.kind == "halt" and e.label == "aba":
            halted.setdefault((e.src, e.lane, e.path), e.seq)
        elif e.kind == "send" and e.label in ("EST", "AUX", "TERM") and e.src in ctx.honest:
            if (e.src, e.lane, e.path) in halted:
                return _fail("halt-safety", e.seq, f"P{e.src} sent {e.label} on halted {e.path}")
    return _ok("halt-safety", f"{len(halted)} halts")


def check_single_echo(ctx: Context) -> Verdict:
    seen = defaultdict(set)
    for e in ctx.of("send"):
        if e.label in ("ECHO", "READY") and e.src in ctx.honest:
            key = (e.src, e.lane, e.path, e.label)
            seen[key].add(e.payload)
            if len(seen[key]) > 1:
                return _fail("single-echo", e.seq, f"P{e.src} sent two different {e.label} on {e.path}")
    return _ok("single-echo")


# -- rbc -------------------------------------------------------------------------


def _rbc_value(ctx):
    v = ctx.cfg.protocol.get("value")
    return bytes.fromhex(v) if v is not None else b"\xab"


def check_rbc_validity(ctx):
    sender = int(ctx.cfg.protocol.get("sender", 1))
    if sender not in ctx.honest or ctx.n_corrupt > ctx.params.t_s:
        return _skip("rbc-validity", "sender corrupted or more than t_s corruptions")
    outs = _first_per_party(ctx.honest_notes("output", "rbc"))
    want = _rbc_value(ctx)
    for p in ctx.honest:
        e = outs.get(p)
        if e is None:
            return _fail("rbc-validity", None, f"P{p} did not output")
        if e.value() != want:
            return _fail("rbc-validity", e.seq, f"P{p} output a different value")
    return _ok("rbc-validity")


def check_rbc_agreement(ctx):
    return _agreement("rbc-agreement", ctx.honest_notes("output", "rbc"))


def check_rbc_totality(ctx):
    if ctx.n_corrupt > ctx.params.t_a and ctx.n_corrupt > ctx.params.t_s:
        return _skip("rbc-totality", "too many corruptions")
    notes = ctx.honest_notes("output", "rbc")
    if not notes:
        return _ok("rbc-totality", "nobody output")
    return _everyone("rbc-totality", ctx, notes, "rbc output")


# -- aba -------------------------------------------------------------------------


def _honest_inputs(ctx):
    inputs = ctx.cfg.protocol.get("inputs")
    return None if inputs is None else {p: inputs[p - 1] for p in ctx.honest}


def check_aba_agreement(ctx):
    return _agreement("aba-agreement", ctx.honest_notes("decide", "aba"))


def check_aba_validity(ctx):
    inputs = _honest_inputs(ctx) or {p: 1 for p in ctx.honest}
    vals = set(inputs.values())
    if len(vals) != 1:
        return _skip("aba-validity", "honest inputs not unanimous")
    (b,) = vals
    for e in ctx.honest_notes("decide", "aba"):
        if e.value() != b:
            return _fail("aba-validity", e.seq, f"P{e.src} decided {e.value()} against unanimous {b}")
    return _ok("aba-validity")


def check_aba_termination(ctx):
    if ctx.n_corrupt > ctx.params.t_a:
        return _skip("aba-termination", "more than t_a corruptions")
    return _everyone("aba-termination", ctx, ctx.honest_notes("decide", "aba"), "decision")


# -- acs -------------------------------------------------------------------------


def _acs_inputs(ctx):
    inputs = ctx.cfg.protocol.get("inputs")
    if inputs is None:
        return {p: ("value-%d" % p).encode() for p in ctx.honest}
    return {p: bytes.fromhex(inputs[p - 1]) for p in ctx.honest}


def _acs_regime(ctx):
    unanimous = len(set(_acs_inputs(ctx).values())) == 1
    return unanimous and ctx.n_corrupt <= ctx.params.t_s, ctx.n_corrupt <= ctx.params.t_a


def check_acs_validity(ctx):
    uni, _ = _acs_regime(ctx)
    if not uni:
        return _skip("acs-validity", "inputs not unanimous or too many corruptions")
    (v,) = set(_acs_inputs(ctx).values())
    for e in ctx.honest_notes("output", "acs"):
        if e.value() != frozenset([v]):
            return _fail("acs-validity", e.seq, f"P{e.src} output differs from the unanimous input")
    return _ok("acs-validity")


def check_acs_agreement(ctx):
    uni, low = _acs_regime(ctx)
    if not (uni or low):
        return _skip("acs-agreement", "outside both fault regimes")
    return _agreement("acs-agreement", ctx.honest_notes("output", "acs"))


def check_acs_liveness(ctx):
    uni, low = _acs_regime(ctx)
    if not (uni or low):
        return _skip("acs-liveness", "outside both fault regimes")
    return _everyone("acs-liveness", ctx, ctx.honest_notes("output", "acs"), "acs output")


def check_acs_set_quality(ctx):
    _, low = _acs_regime(ctx)
    if not low:
        return _skip("acs-set-quality", "more than t_a corruptions")
    inputs = _acs_inputs(ctx)
    honest_vals = list(inputs.values())
    for e in ctx.honest_notes("output", "acs"):
        out = e.value() or frozenset()
        contributors = [p for p, v in inputs.items() if v in out]
        if len(contributors) < ctx.params.t_a + 1:
            return _fail("acs-set-quality", e.seq, f"P{e.src} output holds {len(contributors)} honest inputs")
    return _ok("acs-set-quality", f"{len(honest_vals)} honest inputs")


def check_acs_bounded(ctx):
    uni, low = _acs_regime(ctx)
    if not (uni or low):
        return _skip("acs-bounded", "outside both fault regimes")
    halted = {(e.src, e.path) for e in ctx.honest_notes("halt", "aba")}
    for p in ctx.honest:
        for i in range(1, ctx.n + 1):
            if (p, f"acs/aba/{i}") not in halted:
                return _fail("acs-bounded", None, f"aba {i} at P{p} neither terminated nor halted")
    last = max((e.time for e in ctx.of("send")), default=0)
    if last >= ctx.net.horizon:
        return _fail("acs-bounded", None, "traffic still flowing at the horizon")
    return _ok("acs-bounded", f"quiet after t={last}")


# -- gc / bla --------------------------------------------------------------------


def check_bla_agreement(ctx):
    return _agreement("bla-agreement", ctx.honest_notes("output", "bla"))


def check_bla_termination(ctx):
    if 2 * ctx.n_corrupt >= ctx.n:
        return _skip("bla-termination", "no honest majority")
    return _everyone("bla-termination", ctx, ctx.honest_notes("output", "bla"), "bla output")


def check_bla_validity(ctx):
    ver = ctx.verifier(0)
    notes = ctx.honest_notes("output", "bla")
    strong = ctx.cfg.protocol.get("pair_signers") is None
    for e in notes:
        pair = e.value()
        if not isinstance(pair, Pair) or not pair_is_valid(pair, 0, ver):
            return _fail("bla-validity", e.seq, f"P{e.src} output is not a valid pair")
        if strong and not pair_is_valid(pair, ctx.params.t_s, ver):
            return _fail("bla-validity", e.seq, f"P{e.src} output is not t_s-valid although every input was")
    return _ok("bla-validity", f"{len(notes)} outputs")


def check_gc_consistency(ctx):
    by_inst = defaultdict(list)
    for e in ctx.honest_notes("grade", "gc"):
        by_inst[e.path].append(e)
    for path in sorted(by_inst):
        notes = by_inst[path]
        nonzero = [e for e in notes if e.attrs.get("g") != "0"]
        digests = {e.payload for e in nonzero}
        if len(digests) > 1:
            return _fail("gc-consistency", nonzero[-1].seq, f"conflicting nonzero grades in {path}")
        if any(e.attrs.get("g") == "2" for e in notes) and len(nonzero) < len(notes):
            bad = next(e for e in notes if e.attrs.get("g") == "0")
            return _fail("gc-consistency", bad.seq, f"grade 2 and grade 0 together in {path}")
    return _ok("gc-consistency", f"{len(by_inst)} iterations")


def gc_success_stats(ctx) -> tuple[int, int]:
    """(successes, trials): iterations up to and including the first where every honest party got grade 2."""
    by_bla = defaultdict(lambda: defaultdict(list))
    for e in ctx.honest_notes("grade", "gc"):
        head, _, k = e.path.rpartition("/gc/")
        by_bla[head][int(k)].append(e)
    succ = trials = 0
    for head in sorted(by_bla):
        its = by_bla[head]
        for k in sorted(its):
            trials += 1
            notes = its[k]
            if len({e.src for e in notes}) == len(ctx.honest) and all(e.attrs.get("g") == "2" for e in notes):
                succ += 1
                break
    return succ, trials


# -- smr / wba -------------------------------------------------------------------


def _smr_outputs(ctx) -> dict:
    """party -> {slot: (event, Block)}"""
    out = defaultdict(dict)
    for e in ctx.honest_notes("output", "smr"):
        k = int(e.path.rsplit("/", 1)[1])
        out[e.src][k] = (e, e.value())
    return out


def _regime_ok(ctx) -> bool:
    bound = ctx.params.t_s if ctx.net.mode == "sync" else ctx.params.t_a
    return ctx.n_corrupt <= bound


def check_smr_consistency(ctx):
    outs = _smr_outputs(ctx)
    ref = {}
    for p in sorted(outs):
        for k in sorted(outs[p]):
            e, blk = outs[p][k]
            if k in ref and ref[k][1] != blk:
                return _fail("smr-consistency", e.seq, f"slot {k}: P{p} disagrees with P{ref[k][0]}")
            ref.setdefault(k, (p, blk))
    return _ok("smr-consistency", f"{len(ref)} slots")


def check_smr_completeness(ctx):
    if not _regime_ok(ctx):
        return _skip("smr-completeness", "corruptions exceed the threshold for this network")
    slots = int(ctx.cfg.protocol.get("slots", 1))
    outs = _smr_outputs(ctx)
    for p in ctx.honest:
        missing = [k for k in range(1, slots + 1) if k not in outs.get(p, {})]
        if missing:
            return _fail("smr-completeness", None, f"P{p} has no block for slot(s) {missing}")
    return _ok("smr-completeness", f"{slots} slots x {len(ctx.honest)} parties")


def check_smr_strong_liveness(ctx):
    if not _regime_ok(ctx):
        return _skip("smr-strong-liveness", "corruptions exceed the threshold for this network")
    epochs = defaultdict(dict)
    for e in ctx.honest_notes("epoch", "smr"):
        epochs[e.src][e.value()] = e.seq
    outs = _smr_outputs(ctx)
    injected = defaultdict(dict)
    for e in ctx.of("inject"):
        if not e.note:
            injected[e.payload].setdefault(e.dst, e.seq)
    checked = 0
    for raw in sorted(injected):
        where = injected[raw]
        if any(p not in where for p in ctx.honest):
            continue
        tx = canonical_decode(raw)
        j = 0
        for p in ctx.honest:
            later = [k for k, s in epochs[p].items() if s > where[p]]
            if not later:
                j = None
                break
            j = max(j, min(later))
        if j is None:
            continue
        checked += 1
        for p in ctx.honest:
            if not any(tx in blk for k, (e, blk) in outs.get(p, {}).items() if k <= j):
                return _fail("smr-strong-liveness", where[p], f"tx {tx.payload[:6].hex()} not in any block <= slot {j} at P{p}")
    return _ok("smr-strong-liveness", f"{checked} transactions")


def check_smr_epochs(ctx):
    entered = defaultdict(list)
    for e in ctx.events:
        if e.src not in ctx.honest or e.lane:
            continue
        if e.kind == "epoch" and e.label == "smr":
            k = e.value()
            if k != len(entered[e.src]) + 1:
                return _fail("smr-epochs", e.seq, f"P{e.src} entered epoch {k} out of order")
            entered[e.src].append(k)
        elif e.kind == "output" and e.label == "smr":
            k = int(e.path.rsplit("/", 1)[1])
            if k not in entered[e.src]:
                return _fail("smr-epochs", e.seq, f"P{e.src} output slot {k} before entering its epoch")
    return _ok("smr-epochs")


def check_wba_agreement(ctx):
    return _agreement("wba-agreement", ctx.honest_notes("output", "wba"))


def check_wba_validity(ctx):
    inputs = _honest_inputs(ctx) or {p: 1 for p in ctx.honest}
    vals = set(int(x) for x in inputs.values())
    if len(vals) != 1 or not _regime_ok(ctx):
        return _skip("wba-validity", "honest inputs not unanimous or too many corruptions")
    (b,) = vals
    for e in ctx.honest_notes("output", "wba"):
        if e.value() != b:
            return _fail("wba-validity", e.seq, f"P{e.src} output {e.value()} against unanimous {b}")
    return _ok("wba-validity")


def check_wba_liveness(ctx):
    if ctx.net.mode != "sync" or ctx.n_corrupt > ctx.params.t_s:
        return _skip("wba-liveness", "only promised for synchronous runs")
    return _everyone("wba-liveness", ctx, ctx.honest_notes("output", "wba"), "wba output")


COMMON = {
    "sync-bound": check_sync_bound,
    "eventual-delivery": check_eventual_delivery,
    "budget": check_budget,
    "oracle-secrecy": check_oracle_secrecy,
    "halt-safety": check_halt_safety,
    "single-echo": check_single_echo,
}

BY_PROTOCOL = {
    "rbc": {"rbc-validity": check_rbc_validity, "rbc-agreement": check_rbc_agreement, "rbc-totality": check_rbc_totality},
    "aba": {"aba-agreement": check_aba_agreement, "aba-validity": check_aba_validity, "aba-termination": check_aba_termination},
    "acs": {
        "acs-validity": check_acs_validity,
        "acs-agreement": check_acs_agreement,
        "acs-liveness": check_acs_liveness,
        "acs-set-quality": check_acs_set_quality,
        "acs-bounded": check_acs_bounded,
    },
    "gc": {"gc-consistency": check_gc_consistency, "bla-agreement": check_bla_agreement, "bla-validity": check_bla_validity},
    "bla": {
        "gc-consistency": check_gc_consistency,
        "bla-agreement": check_bla_agreement,
        "bla-termination": check_bla_termination,
        "bla-validity": check_bla_validity,
    },
    "smr": {
        "smr-consistency": check_smr_consistency,
        "smr-completeness": check_smr_completeness,
        "smr-strong-liveness": check_smr_strong_liveness,
        "smr-epochs": check_smr_epochs,
    },
    "wba": {
        "wba-agreement": check_wba_agreement,
        "wba-validity": check_wba_validity,
        "wba-liveness": check_wba_liveness,
        "smr-consistency": check_smr_consistency,
        "smr-epochs": check_smr_epochs,
    },
}


def registered_checks(protocol: str) -> dict:
    out = dict(COMMON)
    out.update(BY_PROTOCOL.get(protocol, {}))
    return out


def _metrics(ctx: Context) -> dict:
    m = {}
    kinds = Counter(e.label for e in ctx.of("send"))
    m["messages_total"] = sum(kinds.values())
    for k in sorted(kinds):
        m[f"messages_{k}"] = kinds[k]
    m["corruptions"] = ctx.n_corrupt
    m["anomalies"] = len(ctx.of("anomaly"))
    rounds = [int(e.attrs["r"]) for e in ctx.honest_notes("decide", "aba") if "r" in e.attrs]
    if rounds:
        m["aba_decisions"] = len(rounds)
        m["aba_mean_round"] = sum(rounds) / len(rounds)
        m["aba_max_round"] = max(rounds)
    grades = ctx.honest_notes("grade", "gc")
    if grades:
        m["gc_grade2_rate"] = sum(e.attrs.get("g") == "2" for e in grades) / len(grades)
        s, t = gc_success_stats(ctx)
        m["gc_first_success"] = s
        m["gc_trials"] = t
    smr = _smr_outputs(ctx)
    if smr:
        m["slots_completed"] = min(len(smr.get(p, {})) for p in ctx.honest)
        starts = {}
        for e in ctx.honest_notes("epoch", "smr"):
            starts[(e.src, e.value())] = e.time
        lat = [e.time - starts[(p, k)] for p, d in smr.items() for k, (e, _) in d.items() if (p, k) in starts]
        if lat:
            m["mean_slot_latency"] = sum(lat) / len(lat)
    return m


def check_records(config: dict, records: list, only=None) -> CheckReport:
    ctx = Context(config, records)
    table = registered_checks(ctx.cfg.name)
    names = list(only or ctx.cfg.checks or table)
    report = CheckReport()
    for name in names:
        fn = table.get(name)
        if fn is None:
            report.verdicts.append(_fail(name, None, f"unknown check; registered: {', '.join(sorted(table))}"))
            continue
        report.verdicts.append(fn(ctx))
    report.metrics = _metrics(ctx)
    return report


def check_transcript(transcript, only=None) -> CheckReport:
    return check_records(transcript.config, transcript.records, only)
