"""Adversary library: corruption behaviours plus message schedulers.

An ``Adversary`` pairs one behaviour (what corrupted parties do) with one
scheduler (when messages arrive). Both draw randomness only from streams
derived from the scenario seed.
"""

from __future__ import annotations

import random

from .crypto import Verifier, derive_seed, domain_tag
from .encoding import encode_body
from .messages import Aux, Buf, Echo, Est, Propose, Ready, Term, Value, WbaValue
from .types import Block, SignedValue, Transaction


class UnknownStrategy(KeyError):
    pass


def slot_of(inst: tuple) -> int:
    for i, part in enumerate(inst[:-1]):
        if part == "slot":
            return inst[i + 1]
    return 0


# -- schedulers --------------------------------------------------------------


class Scheduler:
    name = "benign"

    def __init__(self, seed: int, params: dict | None = None):
        self.rng = random.Random(derive_seed(seed, "scheduler", self.name))
        self.params = params or {}

    def schedule(self, sim, env) -> tuple[int, int]:
        return sim.now + 1, 0


class RandomScheduler(Scheduler):
    name = "random"

    def schedule(self, sim, env):
        return sim.now + self.rng.randint(1, sim.net.delay_bound), self.rng.randrange(1 << 16)


class MaxDelayScheduler(Scheduler):
    """Honest traffic at the largest allowed delay; corrupted traffic as fast as possible."""

    name = "max-delay"

    def schedule(self, sim, env):
        prio = self.rng.randrange(1 << 16)
        if env.adversarial:
            return sim.now + 1, prio
        return sim.now + sim.net.delay_bound, prio


class SplitScheduler(Scheduler):
    """Blocks camp-crossing honest traffic until the horizon."""

    name = "split-world"

    def __init__(self, seed, params=None, camps=None):
        super().__init__(seed, params)
        self.camps = camps or {}

    def schedule(self, sim, env):
        a, b = self.camps.get(env.src), self.camps.get(env.dst)
        if a is not None and b is not None and a != b:
            return sim.net.horizon, 0
        return sim.now + self.rng.randint(1, sim.net.delta), self.rng.randrange(1 << 16)


SCHEDULERS = {
    "benign": Scheduler,
    "random": RandomScheduler,
    "max-delay": MaxDelayScheduler,
    "async-max-delay": MaxDelayScheduler,
}


# -- behaviours --------------------------------------------------------------


class Behavior:
    name = "none"
    silent_when_corrupted = False

    def __init__(self, params: dict | None = None):
        self.params = params or {}

    def setup(self, sim, adv) -> None:
        pass

    def on_corrupt(self, sim, adv, party: int) -> None:
        pass

    def outbound(self, sim, adv, src, lane, dst, msg) -> list:
        return [(dst, msg, 0)]

    def lane_for(self, sim, adv, src, src_lane, dst):
        return 0

    def on_reveal(self, sim, adv, oracle, key, value) -> None:
        pass


class Crash(Behavior):
    name = "crash"
    silent_when_corrupted = True

    def outbound(self, sim, adv, src, lane, dst, msg):
        return []


class Equivocator(Behavior):
    """Sends a conflicting variant of every targeted message to the upper half of the parties."""

    name = "equivocator"
    kinds: tuple = ()

    def __init__(self, params=None):
        super().__init__(params)
        kinds = self.params.get("kinds")
        if kinds:
            self.kinds = tuple(kinds)
        self._cache: dict = {}

    def targeted(self, msg) -> bool:
        return not self.kinds or msg.kind in self.kinds

    def outbound(self, sim, adv, src, lane, dst, msg):
        if dst > sim.n // 2 and self.targeted(msg):
            msg = self.variant(sim, src, msg)
        return [(dst, msg, 0)]

    @staticmethod
    def _value_variant(v, src):
        if isinstance(v, Block):
            return v | Block.of([Transaction(b"equivocation/" + str(src).encode())])
        if isinstance(v, bytes):
            return v + b"'"
        if isinstance(v, int) and not isinstance(v, bool):
            return v ^ 1
        return v

    def variant(self, sim, src, msg):
        cache = self._cache
        key = (src, encode_body(msg))
        hit = cache.get(key)
        if hit is not None:
            return hit
        out = msg
        if isinstance(msg, (Value, Echo, Ready)):
            out = type(msg)(msg.inst, self._value_variant(msg.value, src))
        elif isinstance(msg, (Est, Aux)):
            out = type(msg)(msg.inst, msg.round, msg.bit ^ 1)
        elif isinstance(msg, Term):
            out = Term(msg.inst, msg.bit ^ 1)
        elif isinstance(msg, Buf):
            ver = Verifier(sim.registry, sim.session, slot_of(msg.inst))
            buf = self._value_variant(msg.signed.buffer, src)
            out = Buf(msg.inst, ver.sign_buffer(sim.adversary_key(src), buf))
        elif isinstance(msg, Propose):
            sts = tuple(reversed(msg.statuses))
            tag = domain_tag(sim.session, slot_of(msg.inst), "bla", msg.inst, "PROPOSE")
            out = Propose(msg.inst, msg.proposer, sts, sim.adversary_key(src).sign_obj(tag, sts))
        elif isinstance(msg, WbaValue):
            bit = msg.signed.bit ^ 1
            tag = domain_tag(sim.session, 0, "wba", 0, "VALUE")
            sig = sim.adversary_key(src).sign_obj(tag, bit)
            out = WbaValue(msg.inst, SignedValue(src, bit, sig))
        cache[key] = out
        return out


class RbcEquivocator(Equivocator):
    name = "rbc-equivocator"
    kinds = ("VALUE", "ECHO", "READY")


class ProposeEquivocator(Equivocator):
    name = "propose-equivocator"
    kinds = ("PROPOSE",)


class StatusWithholder(Behavior):
    """Never sends Status messages to proposers; otherwise follows the protocol."""

    name = "status-withholder"

    def outbound(self, sim, adv, src, lane, dst, msg):
        if msg.kind == "STATUS":
            return []
        return [(dst, msg, 0)]


class LeaderAssassin(Crash):
    """Corrupts each freshly elected leader at the reveal, before it can commit."""

    name = "leader-assassin"

    def on_reveal(self, sim, adv, oracle, key, value):
        if oracle == "leader" and not sim.is_corrupted(value):
            sim.corrupt(value, f"leader of {'/'.join(str(x) for x in key)}")


class SplitWorld(Behavior):
    """Two isolated camps; every corrupted party runs one honest copy per camp.

    Lane ``b`` of a corrupted party talks only to camp ``b`` and to lane ``b``
    of the other corrupted parties.
    """

    name = "split-world"

    def __init__(self, params=None):
        super().__init__(params)
        self.camp: dict = {}

    def setup(self, sim, adv):
        for p in self.params.get("S0", []):
            self.camp[p] = 0
        for p in self.params.get("S1", []):
            self.camp[p] = 1

    def outbound(self, sim, adv, src, lane, dst, msg):
        c = self.camp.get(dst)
        if c is None:
            return [(dst, msg, lane)]
        if c != lane:
            return []
        return [(dst, msg, 0)]

    def lane_for(self, sim, adv, src, src_lane, dst):
        if dst in self.camp:
            return 0
        return self.camp.get(src, 0)


BEHAVIORS = {
    cls.name: cls
    for cls in (Behavior, Crash, Equivocator, RbcEquivocator, ProposeEquivocator, StatusWithholder, LeaderAssassin, SplitWorld)
}


class Adversary:
    def __init__(self, behavior: Behavior | None = None, scheduler: Scheduler | None = None, budget: int = 0, corrupt=()):
        self.behavior = behavior or Behavior()
        self.scheduler = scheduler or Scheduler(0)
        self.budget = budget
        self.initial = list(corrupt)

    def setup(self, sim) -> None:
        self.behavior.setup(sim, self)
        for item in self.initial:
            time, party = (0, item) if isinstance(item, int) else item
            sim.schedule_corruption(time, party, "initial" if time == 0 else "scheduled")

    def schedule(self, sim, env):
        return self.scheduler.schedule(sim, env)

    def on_corrupt(self, sim, party) -> None:
        self.behavior.on_corrupt(sim, self, party)

    def silent(self, sim, party) -> bool:
        return self.behavior.silent_when_corrupted and sim.is_corrupted(party)

    def outbound(self, sim, src, lane, dst, msg) -> list:
        return self.behavior.outbound(sim, self, src, lane, dst, msg)

    def lane_for(self, sim, src, src_lane, dst):
        return self.behavior.lane_for(sim, self, src, src_lane, dst)

    def on_reveal(self, sim, oracle, key, value) -> None:
        self.behavior.on_reveal(sim, self, oracle, key, value)


def make_adversary(strategy: str, scheduler: str, seed: int, budget: int, corrupt=(), params=None, camps=None) -> Adversary:
    if strategy not in BEHAVIORS:
        raise UnknownStrategy(f"unknown strategy {strategy!r}; registered: {', '.join(sorted(BEHAVIORS))}")
    if scheduler == "split-world":
        sched = SplitScheduler(seed, params, camps)
    elif scheduler in SCHEDULERS:
        sched = SCHEDULERS[scheduler](seed, params)
    else:
        raise UnknownStrategy(f"unknown scheduler {scheduler!r}; registered: {', '.join(sorted(list(SCHEDULERS) + ['split-world']))}")
    return Adversary(BEHAVIORS[strategy](dict(params or {})), sched, budget, corrupt)
