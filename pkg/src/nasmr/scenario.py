"""Scenario configuration: a YAML/JSON key-value tree that fully determines a run.

Schema (every section optional except ``params``)::

    params:    {n, t_a, t_s, kappa, enforce_bound}
    net:       {mode: sync|async, delta, horizon, seed, max_delay}
    adversary: {strategy, scheduler, corrupt: [p | [time, p]], budget, params: {...}}
    workload:  {txs: [{time, targets, payload(hex), lane}], random: {count, start, end, payload_bytes}}
    protocol:  {name: rbc|aba|acs|gc|bla|smr|wba, slots, inputs, sender, value, buffers, pair_signers}
    checks:    [names]   (empty means every check that applies)
    session:   int
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field

import yaml

from .adversary import BEHAVIORS, SCHEDULERS, UnknownStrategy, make_adversary
from .crypto import Verifier, derive_seed
from .protocols.aba import BinaryAgreement
from .protocols.acs import CommonSubset
from .protocols.bla import BlockAgreement
from .protocols.rbc import ReliableBroadcast
from .protocols.smr import StateMachineReplication, WeakAgreement, slot_period
from .sim import NetConfig, SimulationError, Simulator
from .types import Block, Pair, ParamsError, ProtocolParams, Transaction

PROTOCOLS = ("rbc", "aba", "acs", "gc", "bla", "smr", "wba")


class ConfigError(ValueError):
    pass


def _need(d: dict, key: str, where: str, kind=None):
    if key not in d:
        raise ConfigError(f"{where}.{key}: missing")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise ConfigError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(v).__name__}")
    return v


def _hex(value, where: str) -> bytes:
    if isinstance(value, bytes):
        return value
    try:
        return bytes.fromhex(str(value))
    except ValueError as exc:
        raise ConfigError(f"{where}: not a hex string ({exc})") from None


@dataclass
class ScenarioConfig:
    params: dict
    net: dict = field(default_factory=dict)
    adversary: dict = field(default_factory=dict)
    workload: dict = field(default_factory=dict)
    protocol: dict = field(default_factory=lambda: {"name": "smr"})
    checks: list = field(default_factory=list)
    session: int = 0

    # -- loading ---------------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("config: expected a mapping at top level")
        unknown = set(d) - {"params", "net", "adversary", "workload", "protocol", "checks", "session"}
        if unknown:
            raise ConfigError(f"config: unknown section(s) {', '.join(sorted(unknown))}")
        cfg = cls(
            params=dict(_need(d, "params", "config", dict)),
            net=dict(d.get("net") or {}),
            adversary=dict(d.get("adversary") or {}),
            workload=dict(d.get("workload") or {}),
            protocol=dict(d.get("protocol") or {"name": "smr"}),
            checks=list(d.get("checks") or []),
            session=int(d.get("session", 0)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML/JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "params": copy.deepcopy(self.params),
            "net": copy.deepcopy(self.net),
            "adversary": copy.deepcopy(self.adversary),
            "workload": copy.deepcopy(self.workload),
            "protocol": copy.deepcopy(self.protocol),
            "checks": list(self.checks),
            "session": self.session,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        d = self.to_dict()
        d["net"]["seed"] = seed
        return ScenarioConfig.from_dict(d)

    # -- derived views ---------------------------------------------------
    @property
    def protocol_params(self) -> ProtocolParams:
        p = self.params
        try:
            return ProtocolParams(
                n=int(p["n"]),
                t_a=int(p.get("t_a", 0)),
                t_s=int(p.get("t_s", 0)),
                kappa=int(p.get("kappa", 8)),
                enforce_bound=bool(p.get("enforce_bound", True)),
            )
        except KeyError as exc:
            raise ConfigError(f"params.{exc.args[0]}: missing") from None
        except ParamsError as exc:
            raise ConfigError(f"params: {exc}") from None

    @property
    def net_config(self) -> NetConfig:
        n = self.net
        try:
            return NetConfig(
                mode=n.get("mode", "sync"),
                delta=int(n.get("delta", 1)),
                horizon=int(n.get("horizon", self.default_horizon())),
                seed=int(n.get("seed", 0)),
                max_delay=n.get("max_delay"),
            )
        except SimulationError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def name(self) -> str:
        return self.protocol.get("name", "smr")

    @property
    def n(self) -> int:
        return int(self.params["n"])

    def default_horizon(self) -> int:
        delta = int(self.net.get("delta", 1))
        kappa = int(self.params.get("kappa", 8))
        if self.name in ("smr", "wba"):
            slots = int(self.protocol.get("slots", 1))
            return slot_period(delta, kappa) * (slots + 2) + 200 * delta
        if self.name in ("gc", "bla"):
            k = 1 if self.name == "gc" else kappa
            return 5 * k * delta + 10 * delta
        return 1000 * delta

    @property
    def budget(self) -> int:
        if "budget" in self.adversary:
            return int(self.adversary["budget"])
        return len(self.adversary.get("corrupt", []))

    def corrupt_list(self) -> list:
        out = []
        for item in self.adversary.get("corrupt", []):
            if isinstance(item, int):
                out.append((0, item))
            else:
                out.append((int(item[0]), int(item[1])))
        return out

    def validate(self) -> None:
        params = self.protocol_params
        net = self.net_config
        name = self.name
        if name not in PROTOCOLS:
            raise ConfigError(f"protocol.name: unknown protocol {name!r}; choose one of {', '.join(PROTOCOLS)}")
        strategy = self.adversary.get("strategy", "none")
        if strategy not in BEHAVIORS:
            raise ConfigError(f"adversary.strategy: unknown strategy {strategy!r}; registered: {', '.join(sorted(BEHAVIORS))}")
        sched = self.adversary.get("scheduler", "random")
        if sched not in SCHEDULERS and sched != "split-world":
            raise ConfigError(
                f"adversary.scheduler: unknown scheduler {sched!r}; registered: {', '.join(sorted(list(SCHEDULERS) + ['split-world']))}"
            )
        for t, p in self.corrupt_list():
            if not 1 <= p <= params.n:
                raise ConfigError(f"adversary.corrupt: party {p} out of range 1..{params.n}")
            if not 0 <= t <= net.horizon:
                raise ConfigError(f"adversary.corrupt: time {t} outside [0, horizon]")
        for i, tx in enumerate(self.workload.get("txs", [])):
            t = int(_need(tx, "time", f"workload.txs[{i}]"))
            if not 0 <= t <= net.horizon:
                raise ConfigError(f"workload.txs[{i}].time: {t} outside [0, horizon]")
            _hex(_need(tx, "payload", f"workload.txs[{i}]"), f"workload.txs[{i}].payload")
        inputs = self.protocol.get("inputs")
        if inputs is not None and len(inputs) != params.n:
            raise ConfigError(f"protocol.inputs: expected {params.n} entries, got {len(inputs)}")
        if name == "rbc":
            sender = int(self.protocol.get("sender", 1))
            if not 1 <= sender <= params.n:
                raise ConfigError(f"protocol.sender: {sender} out of range")
        if name == "aba" and inputs is not None and any(b not in (0, 1) for b in inputs):
            raise ConfigError("protocol.inputs: binary agreement inputs must be bits")

    # -- workload --------------------------------------------------------
    def transactions(self) -> list[tuple[int, list, bytes, object]]:
        """Explicit plus generated injections as ``(time, targets, payload, lane)``."""
        n = self.n
        out = []
        for tx in self.workload.get("txs", []):
            targets = tx.get("targets") or list(range(1, n + 1))
            out.append((int(tx["time"]), [int(p) for p in targets], _hex(tx["payload"], "payload"), tx.get("lane")))
        gen = self.workload.get("random")
        if gen:
            rng = random.Random(derive_seed(int(self.net.get("seed", 0)), "workload"))
            count = int(gen.get("count", 10))
            start, end = int(gen.get("start", 0)), int(gen.get("end", 100))
            size = int(gen.get("payload_bytes", 16))
            for _ in range(count):
                t = rng.randint(start, end)
                out.append((t, list(range(1, n + 1)), rng.randbytes(size), None))
        out.sort(key=lambda x: (x[0], x[2]))
        return out


# -- building ---------------------------------------------------------------


def _value(cfg: ScenarioConfig, i: int):
    inputs = cfg.protocol.get("inputs")
    if inputs is None:
        return ("value-%d" % i).encode()
    return _hex(inputs[i - 1], f"protocol.inputs[{i - 1}]")


def _bla_pairs(cfg: ScenarioConfig, sim: Simulator) -> dict:
    """Sign every party's buffer up front and assemble each party's input pair."""
    params = sim.params
    n = params.n
    bufs = cfg.protocol.get("buffers")
    signers = cfg.protocol.get("pair_signers")
    ver = Verifier(sim.registry, sim.session, 0)
    blocks = {}
    for p in range(1, n + 1):
        if bufs is None:
            txs = [Transaction(b"buf-%d" % p)]
        else:
            txs = [Transaction(_hex(x, f"protocol.buffers[{p - 1}]")) for x in bufs[p - 1]]
        blocks[p] = Block.of(txs)
    signed = {p: ver.sign_buffer(sim.registry.issue(p), blocks[p]) for p in blocks}
    pairs = {}
    for i in range(1, n + 1):
        if signers is None:
            who = [((i - 1 + j) % n) + 1 for j in range(params.t_s + 1)]
        else:
            who = [int(x) for x in signers[i - 1]]
        block = Block()
        for p in who:
            block = block | blocks[p]
        pairs[i] = Pair(block, frozenset(signed[p] for p in who))
    return pairs


def build(cfg: ScenarioConfig) -> Simulator:
    params = cfg.protocol_params
    net = cfg.net_config
    adv_cfg = cfg.adversary
    strategy = adv_cfg.get("strategy", "none")
    scheduler = adv_cfg.get("scheduler", "random")
    adv_params = dict(adv_cfg.get("params") or {})
    camps = {}
    for p in adv_params.get("S0", []):
        camps[int(p)] = 0
    for p in adv_params.get("S1", []):
        camps[int(p)] = 1
    try:
        adversary = make_adversary(strategy, scheduler, net.seed, cfg.budget, cfg.corrupt_list(), adv_params, camps)
    except UnknownStrategy as exc:
        raise ConfigError(f"adversary: {exc.args[0]}") from None
    sim = Simulator(params, net, adversary, session=cfg.session, config=cfg.to_dict())
    split_lanes = set(int(p) for p in adv_params.get("Sa", [])) if strategy == "split-world" else set()

    name = cfg.name
    slots = int(cfg.protocol.get("slots", 1))
    inputs = cfg.protocol.get("inputs")
    pairs = _bla_pairs(cfg, sim) if name in ("gc", "bla") else None

    def factory(env, lane):
        i = env.me
        if name == "rbc":
            return ReliableBroadcast(env, ("rbc",), int(cfg.protocol.get("sender", 1)))
        if name == "aba":
            return BinaryAgreement(env, ("aba",))
        if name == "acs":
            return CommonSubset(env, ("acs",))
        if name in ("gc", "bla"):
            kappa = 1 if name == "gc" else None
            return BlockAgreement(env, (name,), pairs[i], slot=0, kappa=kappa)
        if name == "smr":
            return StateMachineReplication(env, ("smr",), slots)
        if name == "wba":
            bit = int(inputs[i - 1]) if inputs is not None else 1
            return WeakAgreement(env, ("wba",), bit, slots)
        raise ConfigError(f"protocol.name: {name!r}")

    for p in range(1, params.n + 1):
        lanes = (0, 1) if p in split_lanes else (0,)
        sim.add_party(p, factory, lanes)
        sender = int(cfg.protocol.get("sender", 1))
        if name == "rbc":
            if p == sender:
                value = _hex(cfg.protocol["value"], "protocol.value") if "value" in cfg.protocol else b"\xab"
                sim.call(0, p, lambda root, v=value: root.start(v), label="start")
        elif name == "aba":
            bit = int(inputs[p - 1]) if inputs is not None else 1
            sim.call(0, p, lambda root, b=bit: root.start(b), label="start")
        elif name == "acs":
            sim.call(0, p, lambda root, v=_value(cfg, p): root.start(v), label="start")
        else:
            sim.call(0, p, lambda root: root.start(), label="start")

    for time, targets, payload, lane in cfg.transactions():
        tx = Transaction(payload)
        for p in targets:
            sim.inject(time, p, tx, lane)
    return sim


def run(cfg: ScenarioConfig):
    sim = build(cfg)
    return sim, sim.run()
