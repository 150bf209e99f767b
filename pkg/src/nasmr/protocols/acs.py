"""Asynchronous common subset from ``n`` reliable broadcasts and ``n`` binary agreements.

Exit conditions, re-evaluated after every event in the order 1, 2, 3:

* C1(v): at least ``n - t_s`` broadcasts output ``v``.
* C2(v): ``s >= n - t_a``, every agreement decided, and a majority
  (``s // 2 + 1``) of the broadcasts indexed by ``S*`` output ``v``.
* C3: ``s >= n - t_a``, every agreement decided, every broadcast in ``S*`` output.

``S*`` is the set of indices whose agreement decided 1 and ``s = |S*|``.
After the output the broadcasts keep running; once C1 holds all agreements
are halted.
"""

from __future__ import annotations

from collections import Counter

from ..encoding import encode_body
from .aba import BinaryAgreement
from .base import Env, Note, Protocol, ProtocolError
from .rbc import ReliableBroadcast


def _digest_order(v):
    return encode_body(v)


class CommonSubset(Protocol):
    child_kinds = ("rbc", "aba")

    def __init__(self, env: Env, inst: tuple):
        super().__init__(env, inst)
        p = env.params
        self.t_a, self.t_s = p.t_a, p.t_s
        self.rbc = {i: ReliableBroadcast(env, inst + ("rbc", i), i, notes=False) for i in range(1, self.n + 1)}
        self.aba = {i: BinaryAgreement(env, inst + ("aba", i)) for i in range(1, self.n + 1)}
        self.started = False
        self.input = None
        self.output = None
        self.exit = None
        self.c1_latched = False
        self.zero_filled = False
        self._held: list = []

    def child(self, kind, index):
        table = self.rbc if kind == "rbc" else self.aba
        return table.get(index)

    def route(self, event, path, src=None, payload=None) -> list:
        if not self.started:
            self._held.append((event, path, src, payload))
            return []
        return super().route(event, path, src, payload)

    def start(self, block) -> list:
        if self.started:
            raise ProtocolError("common subset already started")
        self.started = True
        self.input = block
        out = self.rbc[self.env.me].start(block)
        held, self._held = self._held, []
        for event, path, src, payload in held:
            out.extend(super().route(event, path, src, payload))
        out.extend(self._react())
        return out

    def on_child(self, child) -> list:
        return self._react()

    # -- conditions ------------------------------------------------------
    def rbc_outputs(self) -> dict:
        return {i: r.output for i, r in self.rbc.items() if r.terminated}

    def s_star(self) -> list:
        return [i for i in sorted(self.aba) if self.aba[i].decided == 1]

    def all_decided(self) -> bool:
        return all(a.decided is not None for a in self.aba.values())

    def conditions(self) -> dict:
        outs = self.rbc_outputs()
        counts = Counter(outs.values())
        c1 = sorted((v for v, c in counts.items() if c >= self.n - self.t_s), key=_digest_order)
        star = self.s_star()
        s = len(star)
        gate = s >= self.n - self.t_a and self.all_decided()
        c2 = []
        c3 = False
        if gate:
            sub = Counter(outs[i] for i in star if i in outs)
            c2 = sorted((v for v, c in sub.items() if c >= s // 2 + 1), key=_digest_order)
            c3 = all(i in outs for i in star)
        return {"C1": c1, "C2": c2, "C3": c3, "s": s, "S*": star}

    # -- reaction --------------------------------------------------------
    def _react(self) -> list:
        out = []
        for i in sorted(self.rbc):
            a = self.aba[i]
            if self.rbc[i].terminated and not a.started and not a.halted:
                out.extend(a.start(1))
        if len(self.s_star()) >= self.n - self.t_a and not self.zero_filled:
            self.zero_filled = True
            for i in sorted(self.aba):
                a = self.aba[i]
                if not a.started and not a.halted:
                    out.extend(a.start(0))
        cond = self.conditions()
        if self.output is None:
            if cond["C1"]:
                out.extend(self._emit(frozenset([cond["C1"][0]]), 1, cond["C1"]))
            elif cond["C2"]:
                out.extend(self._emit(frozenset([cond["C2"][0]]), 2, cond["C2"]))
            elif cond["C3"]:
                outs = self.rbc_outputs()
                out.extend(self._emit(frozenset(outs[i] for i in cond["S*"]), 3, []))
        if cond["C1"] and not self.c1_latched:
            self.c1_latched = True
            for i in sorted(self.aba):
                out.extend(self.aba[i].halt("acs-c1"))
        return out

    def _emit(self, value: frozenset, exit_no: int, candidates: list) -> list:
        self.output = value
        self.exit = exit_no
        out = []
        if len(candidates) > 1:
            out.append(Note("anomaly", "acs", self.inst, None, f"exit {exit_no} ambiguous: {len(candidates)} values"))
        out.append(Note("output", "acs", self.inst, value, f"exit={exit_no}"))
        return out
