"""State machine replication by per-slot block agreement followed by common subset,
and weak BA on top of it.

Slot ``k`` starts at ``T_k = offset + (delta + D) * (k - 1)`` with
``D = 5 * kappa * delta`` the block-agreement duration. Slots overlap: the
common subset of slot ``k`` may still be running when slot ``k + 1`` starts.
"""

from __future__ import annotations

from ..crypto import domain_tag
from ..encoding import EncodingError, canonical_decode, canonical_encode, encode_body
from ..messages import Buf, WbaValue
from ..types import Block, BlockLog, EpochArray, Pair, SignedValue, Transaction, pair_is_valid
from .acs import CommonSubset
from .base import Env, Note, Protocol, Timer, broadcast
from .bla import BlockAgreement


def slot_period(delta: int, kappa: int) -> int:
    return delta + 5 * kappa * delta


class SmrSlot(Protocol):
    child_kinds = ("bla", "acs")

    def __init__(self, env: Env, inst: tuple, k: int, start_time: int):
        super().__init__(env, inst)
        self.k = k
        self.t_s = env.params.t_s
        self.start_time = start_time
        self.verifier = env.verifier(k)
        self.started = False
        self.held: list = []
        self.acc_block = Block()
        self.acc_sigma: dict = {}
        self.bla = None
        self.bla_held: list = []
        self.acs = CommonSubset(env, inst + ("acs", 0))
        self.acs_input_source = None
        self.block = None

    def child(self, kind, index):
        if kind == "acs":
            return self.acs
        return self.bla

    def on_orphan(self, event, path, src, payload) -> list:
        if event == "msg":
            self.bla_held.append((event, path, src, payload))
        return []

    def route(self, event, path, src=None, payload=None) -> list:
        if not self.started and event == "msg":
            self.held.append((event, path, src, payload))
            return []
        return super().route(event, path, src, payload)

    def start(self, buffer: Block) -> list:
        self.started = True
        signed = self.verifier.sign_buffer(self.env.key, buffer)
        out = broadcast(self.n, Buf(self.inst, signed))
        out.append(Timer(self.start_time + self.env.delta, self.inst + ("bla-start",)))
        held, self.held = self.held, []
        for item in held:
            out.extend(self.route(*item))
        return out

    @property
    def accumulator(self) -> Pair:
        return Pair(self.acc_block, frozenset(self.acc_sigma.values()))

    def on_message(self, src: int, msg) -> list:
        if isinstance(msg, Buf) and len(self.acc_sigma) <= self.t_s and src not in self.acc_sigma:
            sb = msg.signed
            if sb.signer == src and self.verifier.buffer_ok(sb):
                self.acc_sigma[src] = sb
                self.acc_block = self.acc_block | sb.buffer
        return []

    def on_timer(self, key) -> list:
        pair = self.accumulator
        out = []
        if len(self.acc_sigma) <= self.t_s:
            out.append(Note("anomaly", "smr", self.inst, None, f"block agreement input has only {len(self.acc_sigma)} signers"))
        self.bla = BlockAgreement(self.env, self.inst + ("bla", 0), pair, slot=self.k)
        out.extend(self.bla.start())
        held, self.bla_held = self.bla_held, []
        for item in held:
            out.extend(self.bla.route(*item))
        return out + self.on_child(self.bla)

    def on_child(self, child) -> list:
        out = []
        if child is self.bla and not self.acs.started:
            if self.bla.output is not None and pair_is_valid(self.bla.output, self.t_s, self.verifier):
                self.acs_input_source = "bla"
                out.extend(self.acs.start(self.bla.output.block))
            elif self.bla.finished:
                self.acs_input_source = "timeout"
                if len(self.acc_sigma) <= self.t_s:
                    out.append(Note("anomaly", "smr", self.inst, None, f"timeout with only {len(self.acc_sigma)} signers"))
                out.extend(self.acs.start(self.acc_block))
        if self.block is None and self.acs.output is not None:
            merged = Block()
            for v in sorted(self.acs.output, key=encode_body):
                if isinstance(v, Block):
                    merged = merged | v
            self.block = merged
        return out


class StateMachineReplication(Protocol):
    child_kinds = ("slot",)

    def __init__(self, env: Env, inst: tuple, slots: int, offset: int = 0):
        super().__init__(env, inst)
        self.slots = slots
        self.offset = offset
        self.period = slot_period(env.delta, env.params.kappa)
        self.buffer = Block()
        self.epochs = EpochArray()
        self.log = BlockLog(self.epochs)
        self.slot_state: dict = {}

    def slot_start_time(self, k: int) -> int:
        return self.offset + self.period * (k - 1)

    def start(self) -> list:
        return [Timer(self.slot_start_time(k), self.inst + ("start", k)) for k in range(1, self.slots + 1)]

    def child(self, kind, index):
        if not isinstance(index, int) or not 1 <= index <= self.slots:
            return None
        s = self.slot_state.get(index)
        if s is None:
            s = self.slot_state[index] = SmrSlot(self.env, self.inst + ("slot", index), index, self.slot_start_time(index))
        return s

    def on_inject(self, tx) -> list:
        if tx not in self.buffer:
            self.buffer = self.buffer | Block.of([tx])
        return []

    def on_timer(self, key) -> list:
        k = key[-1]
        self.epochs.enter(k)
        slot = self.child("slot", k)
        out = [Note("epoch", "smr", slot.inst, k)]
        out.extend(slot.start(self.buffer))
        return out + self.on_child(slot)

    def on_child(self, slot) -> list:
        if slot.block is None or slot.k in self.log:
            return []
        self.log.write(slot.k, slot.block)
        self.buffer = Block(self.buffer.txs - slot.block.txs)
        return [Note("output", "smr", slot.inst, slot.block, f"exit={slot.acs.exit} src={slot.acs_input_source}")]

    def summary(self):
        return tuple((k, b) for k, b in self.log.items())


class WeakAgreement(Protocol):
    """Each party contributes a signed bit as a transaction; output the majority
    of the first ``n - t_s`` distinct signers seen in the log (ties go to 0)."""

    child_kinds = ("smr",)

    def __init__(self, env: Env, inst: tuple, bit: int, slots: int):
        super().__init__(env, inst)
        self.bit = bit
        self.tag = domain_tag(env.session, 0, "wba", 0, "VALUE")
        self.smr = StateMachineReplication(env, inst + ("smr", 0), slots, offset=env.delta)
        self.V: dict = {}
        self.seen_slots: set = set()
        self.output = None
        self.injected: set = set()

    def child(self, kind, index):
        return self.smr

    def start(self) -> list:
        sig = self.env.key.sign_obj(self.tag, self.bit)
        out = broadcast(self.n, WbaValue(self.inst, SignedValue(self.env.me, self.bit, sig)))
        return out + self.smr.start()

    def _value_ok(self, sv) -> bool:
        return (
            isinstance(sv, SignedValue)
            and sv.bit in (0, 1)
            and self.env.registry.verify(sv.signer, self.tag, encode_body(sv.bit), sv.signature)
        )

    def on_message(self, src: int, msg) -> list:
        if isinstance(msg, WbaValue) and msg.signed.signer == src and src not in self.injected:
            if self._value_ok(msg.signed):
                self.injected.add(src)
                return self.smr.on_inject(Transaction(canonical_encode(msg.signed)))
        return []

    def on_child(self, child) -> list:
        out = []
        for k, block in self.smr.log.items():
            if k in self.seen_slots:
                continue
            self.seen_slots.add(k)
            for tx in block:
                try:
                    sv = canonical_decode(tx.payload)
                except EncodingError:
                    continue
                if self._value_ok(sv) and sv.signer not in self.V:
                    self.V[sv.signer] = sv.bit
        if self.output is None and len(self.V) >= self.n - self.env.params.t_s:
            ones = sum(self.V.values())
            zeros = len(self.V) - ones
            self.output = 1 if ones > zeros else 0
            out.append(Note("output", "wba", self.inst, self.output, f"V={len(self.V)}"))
        return out

    def summary(self):
        return (self.output, tuple(sorted(self.V.items())))
