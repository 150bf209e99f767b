"""Deterministic discrete-event network simulator.

Events are ordered by ``(time, phase, priority, seq)``. Within one time step
the phases are: deliveries and injections to honest parties (0), honest
timers and scheduled calls (1), oracle replies (2), and then everything
addressed to corrupted parties (3). So the adversary always acts last in a
step, after every honest message of that step was submitted (rushing).

A party may run several copies of its protocol in separate *lanes*; only
the split-world adversary uses more than lane 0.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable

from .crypto import CapabilityError, CoinOracle, KeyRegistry, LeaderOracle, derive_seed
from .encoding import canonical_encode
from .messages import inst_path
from .protocols.base import Ask, Env, Note, Send, Timer
from .types import ProtocolParams

PH_HONEST_IN = 0
PH_TIMER = 1
PH_ORACLE = 2
PH_ADVERSARY = 3


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class NetConfig:
    mode: str = "sync"
    delta: int = 1
    horizon: int = 1000
    seed: int = 0
    max_delay: int | None = None

    def __post_init__(self):
        if self.mode not in ("sync", "async"):
            raise SimulationError(f"net.mode must be sync or async, got {self.mode!r}")
        if self.delta < 1:
            raise SimulationError("net.delta must be a positive integer")
        if self.horizon < 1:
            raise SimulationError("net.horizon must be positive")

    @property
    def delay_bound(self) -> int:
        """Largest delay a scheduler should pick (clamped anyway in sync mode)."""
        if self.mode == "sync":
            return self.delta
        return self.max_delay or 4 * self.delta


@dataclass
class Envelope:
    seq: int
    src: int
    dst: int
    msg: Any
    send_time: int
    deliver_time: int = 0
    prio: int = 0
    src_lane: int = 0
    lane: int = 0
    adversarial: bool = False
    clamped: bool = False


class Transcript:
    """In-memory record list; rendered lazily as JSON lines."""

    def __init__(self, config: dict):
        self.config = config
        self.records: list = []
        self.states: dict = {}

    def add(self, time, kind, src, dst, payload: bytes = b"", note: str = "") -> int:
        seq = len(self.records)
        self.records.append((seq, time, kind, src, dst, payload, note))
        return seq

    def lines(self):
        yield json.dumps({"kind": "config", "format": 1, "config": self.config}, sort_keys=True)
        dumps = json.dumps
        for seq, time, kind, src, dst, payload, note in self.records:
            # same bytes as json.dumps(record, sort_keys=True), without the per-record dict
            yield (
                f'{{"dst": {dst}, "kind": "{kind}", "note": {dumps(note)}, '
                f'"payload": "{payload.hex()}", "seq": {seq}, "src": {src}, "time": {time}}}'
            )
        for party in sorted(self.states):
            yield json.dumps({"kind": "state", "party": party, "digest": self.states[party]}, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def to_bytes(self) -> bytes:
        return "".join(line + "\n" for line in self.lines()).encode("utf-8")

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.lines():
                fh.write(line)
                fh.write("\n")


def read_transcript(path) -> tuple[dict, list, dict]:
    """Parse a transcript file into ``(config, records, state_digests)``."""
    config = None
    records = []
    states = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("kind") == "config" and config is None and "seq" not in rec:
                config = rec["config"]
            elif rec.get("kind") == "state" and "seq" not in rec:
                states[rec["party"]] = rec["digest"]
            else:
                rec["payload"] = bytes.fromhex(rec["payload"])
                records.append(rec)
    if config is None:
        raise SimulationError(f"{path}: missing config line")
    return config, records, states


class Node:
    def __init__(self, party: int, env: Env, roots: dict):
        self.party = party
        self.env = env
        self.roots = roots

    def summary(self):
        out = []
        for lane in sorted(self.roots):
            root = self.roots[lane]
            fn = getattr(root, "summary", None)
            out.append((lane, fn() if fn else getattr(root, "output", None)))
        return tuple(out)


class Simulator:
    def __init__(self, params: ProtocolParams, net: NetConfig, adversary=None, session: int = 0, config: dict | None = None):
        from .adversary import Adversary

        self.params = params
        self.n = params.n
        self.net = net
        self.session = session
        self.adversary = adversary or Adversary()
        self.registry = KeyRegistry(self.n)
        self.rng = random.Random(derive_seed(net.seed, "net"))
        self.oracles = {
            "leader": LeaderOracle(self.n, derive_seed(net.seed, "leader-oracle")),
            "coin": CoinOracle(self.n, params.t_a, derive_seed(net.seed, "coin-oracle")),
        }
        self._oracle_waiting: dict = {}
        self._oracle_sent: dict = {}
        self.nodes: dict[int, Node] = {}
        self.verifiers: dict = {}
        self.heap: list = []
        self._seq = 0
        self.now = 0
        self.corrupted: dict[int, int] = {}
        self.transcript = Transcript(config or {})
        self.envelopes: dict[int, Envelope] = {}
        self.stats = {"sent": 0, "delivered": 0, "clamped": 0}

    # -- setup -----------------------------------------------------------
    def add_party(self, party: int, factory: Callable, lanes=(0,)) -> Node:
        env = Env(
            me=party,
            params=self.params,
            key=self.registry.issue(party),
            registry=self.registry,
            session=self.session,
            delta=self.net.delta,
            mode=self.net.mode,
            clock=lambda: self.now,
            _verifiers=self.verifiers,
        )
        node = Node(party, env, {lane: factory(env, lane) for lane in lanes})
        self.nodes[party] = node
        return node

    def call(self, time: int, party: int, fn: Callable, lane=None, label: str = "call") -> None:
        """Run ``fn(root)`` on the party's root(s) at ``time``; its return value is a list of actions."""
        self._push(time, PH_TIMER, 0, ("call", party, lane, fn, label))

    def inject(self, time: int, party: int, tx, lane=None) -> None:
        self._push(time, PH_HONEST_IN, -1, ("inject", party, lane, tx))

    def schedule_corruption(self, time: int, party: int, reason: str = "scheduled") -> None:
        self._push(time, -1, 0, ("corrupt", party, reason))

    # -- queue -----------------------------------------------------------
    def _push(self, time: int, phase: int, prio: int, event: tuple) -> None:
        self._seq += 1
        heapq.heappush(self.heap, (time, phase, prio, self._seq, event))

    def _phase_for(self, party: int, phase: int) -> int:
        return PH_ADVERSARY if party in self.corrupted else phase

    # -- corruption ------------------------------------------------------
    def is_corrupted(self, party: int) -> bool:
        return party in self.corrupted

    def honest(self) -> list[int]:
        return [p for p in sorted(self.nodes) if p not in self.corrupted]

    def corrupt(self, party: int, reason: str = "") -> bool:
        if party in self.corrupted:
            self.transcript.add(self.now, "corrupt-rejected", party, 0, b"", f"already corrupted {reason}".strip())
            return False
        if len(self.corrupted) >= self.adversary.budget:
            self.transcript.add(self.now, "corrupt-rejected", party, 0, b"", f"budget {self.adversary.budget} exhausted {reason}".strip())
            return False
        self.corrupted[party] = self.now
        self.transcript.add(self.now, "corrupt", party, 0, b"", reason)
        self.adversary.on_corrupt(self, party)
        return True

    def adversary_key(self, party: int):
        if party not in self.corrupted:
            raise CapabilityError(f"P{party} is not corrupted")
        return self.registry.issue(party)

    # -- actions ---------------------------------------------------------
    def _apply(self, party: int, lane: int, actions: list) -> None:
        for a in actions:
            if isinstance(a, Send):
                self._send(party, lane, a.dst, a.msg)
            elif isinstance(a, Timer):
                at = max(a.at, self.now)
                self._push(at, self._phase_for(party, PH_TIMER), a.prio, ("timer", party, lane, a.key))
            elif isinstance(a, Ask):
                self._ask(party, lane, a)
            elif isinstance(a, Note):
                payload = canonical_encode(a.value) if a.value is not None else b""
                extra = f" {a.extra}" if a.extra else ""
                lane_tag = f" lane={lane}" if lane else ""
                self.transcript.add(self.now, a.kind, party, 0, payload, f"{a.label} {inst_path(a.inst)}{extra}{lane_tag}")
            else:
                raise SimulationError(f"unknown action {a!r}")

    def _send(self, src: int, src_lane: int, dst: int, msg) -> None:
        if src in self.corrupted:
            items = self.adversary.outbound(self, src, src_lane, dst, msg)
            adversarial = True
        else:
            items = [(dst, msg, self.adversary.lane_for(self, src, src_lane, dst))]
            adversarial = False
        for d, m, lane in items:
            if lane is None:
                continue
            self.submit(Envelope(0, src, d, m, self.now, src_lane=src_lane, lane=lane, adversarial=adversarial))

    def submit(self, env: Envelope) -> Envelope:
        """Assign a delivery time (scheduler, then model bounds) and enqueue."""
        env.seq = len(self.transcript.records)
        if env.src == env.dst and env.src_lane == env.lane:
            env.deliver_time, env.prio = self.now + 1, 0
        else:
            t, env.prio = self.adversary.schedule(self, env)
            t = max(t, self.now + 1)
            if self.net.mode == "sync" and t > self.now + self.net.delta:
                t = self.now + self.net.delta
                env.clamped = True
                self.stats["clamped"] += 1
            elif self.net.mode == "async" and t > self.net.horizon:
                t = max(self.net.horizon, self.now + 1)
            env.deliver_time = t
        note = f"{env.msg.kind} {inst_path(env.msg.inst)} d={env.deliver_time}"
        if env.clamped:
            note += ";clamped"
        if env.src_lane or env.lane:
            note += f";lanes={env.src_lane}>{env.lane}"
        self.transcript.add(self.now, "send", env.src, env.dst, canonical_encode(env.msg), note)
        self.envelopes[env.seq] = env
        self.stats["sent"] += 1
        self._push(env.deliver_time, self._phase_for(env.dst, PH_HONEST_IN), env.prio, ("deliver", env))
        return env

    def _ask(self, party: int, lane: int, a: Ask) -> None:
        orc = self.oracles[a.oracle]
        okey = (a.oracle, a.key)
        self.transcript.add(self.now, "oracle", party, 0, canonical_encode(a.key), f"{a.oracle} ask {inst_path(a.key)}")
        newly, value = orc.request(a.key, party)
        if value is None:
            self._oracle_waiting.setdefault(okey, []).append((party, lane))
            return
        if newly:
            self.transcript.add(self.now, "oracle-reveal", 0, 0, canonical_encode(value), f"{a.oracle} {inst_path(a.key)}")
            if a.oracle == "leader":
                targets = [(p, ln) for p in sorted(self.nodes) for ln in sorted(self.nodes[p].roots)]
            else:
                targets = self._oracle_waiting.pop(okey, []) + [(party, lane)]
            self.adversary.on_reveal(self, a.oracle, a.key, value)
        else:
            targets = [(party, lane)]
        sent = self._oracle_sent.setdefault(okey, set())
        for p, ln in targets:
            if (p, ln) in sent:
                continue
            sent.add((p, ln))
            self._push(self.now, self._phase_for(p, PH_ORACLE), 0, ("oracle", p, ln, a.oracle, a.key, value))

    # -- main loop -------------------------------------------------------
    def _lanes(self, node: Node, lane):
        return sorted(node.roots) if lane is None else ([lane] if lane in node.roots else [])

    def step(self) -> bool:
        if not self.heap:
            return False
        time, phase, prio, seq, event = heapq.heappop(self.heap)
        self.now = time
        kind = event[0]
        if kind == "corrupt":
            self.corrupt(event[1], event[2])
            return True
        target = event[1].dst if kind == "deliver" else event[1]
        if phase < PH_ADVERSARY and phase >= 0 and target in self.corrupted:
            self._push(time, PH_ADVERSARY, prio, event)
            return True
        node = self.nodes[target]
        if kind == "deliver":
            env = event[1]
            self.stats["delivered"] += 1
            self.transcript.add(time, "deliver", env.src, env.dst, b"", f"env={env.seq}")
            if self.adversary.silent(self, target):
                return True
            for ln in self._lanes(node, env.lane):
                self._apply(target, ln, node.roots[ln].route("msg", env.msg.inst, env.src, env.msg))
            return True
        if self.adversary.silent(self, target):
            return True
        if kind == "timer":
            _, party, lane, key = event
            self._apply(party, lane, node.roots[lane].route("timer", key))
        elif kind == "oracle":
            _, party, lane, oracle, key, value = event
            self.transcript.add(time, "oracle-reply", 0, party, canonical_encode(value), f"{oracle} {inst_path(key)}")
            self._apply(party, lane, node.roots[lane].route("oracle", key, None, value))
        elif kind == "call":
            _, party, lane, fn, label = event
            for ln in self._lanes(node, lane):
                self._apply(party, ln, fn(node.roots[ln]) or [])
        elif kind == "inject":
            _, party, lane, tx = event
            for ln in self._lanes(node, lane):
                self.transcript.add(time, "inject", 0, party, canonical_encode(tx), f"lane={ln}" if ln else "")
                self._apply(party, ln, node.roots[ln].on_inject(tx))
        else:
            raise SimulationError(f"unknown event {kind!r}")
        return True

    def run(self) -> Transcript:
        self.adversary.setup(self)
        while self.heap and self.heap[0][0] <= self.net.horizon:
            self.step()
        self.now = max(self.now, 0)
        for p in sorted(self.nodes):
            digest = hashlib.sha256(canonical_encode(self.nodes[p].summary())).hexdigest()
            self.transcript.states[p] = digest
        return self.transcript
