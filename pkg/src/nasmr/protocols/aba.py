"""Binary asynchronous Byzantine agreement (``t_a < n/3``) with a common coin.

Round ``r``:

* EST(r, b) from ``t_a + 1`` senders is relayed once; from ``2 t_a + 1`` senders
  ``b`` joins ``bin_values[r]``.
* Once ``bin_values[r]`` is non-empty, AUX(r, w) is sent for the first value added.
* With AUX from ``n - t_a`` senders whose values all lie in ``bin_values[r]``, the
  coin for ``r`` is requested. On coin ``c`` with quorum values ``V``: if
  ``V == {b}`` then ``est = b`` and ``b == c`` decides; otherwise ``est = c``.

Termination uses TERM messages: a decider broadcasts TERM(b); ``t_a + 1``
TERM(b) let a party decide ``b`` (and echo TERM); ``2 t_a + 1`` TERM(b) let a
decided party halt, since by then every honest party will collect ``t_a + 1``.
Until it halts a decided party keeps playing rounds with its estimate fixed.
"""

from __future__ import annotations

from collections import defaultdict

from ..messages import Aux, Est, Term
from .base import Ask, Env, Note, Protocol, ProtocolError, broadcast


class BinaryAgreement(Protocol):
    def __init__(self, env: Env, inst: tuple):
        super().__init__(env, inst)
        self.t = env.params.t_a
        self.started = False
        self.halted = False
        self.input = None
        self.round = 0
        self.est = None
        self.decided = None
        self.decided_round = None
        self.est_from: dict = defaultdict(set)  # (r, b) -> senders
        self.est_sent: set = set()
        self.bin_values: dict = defaultdict(list)
        self.aux_sent: set = set()
        self.aux_from: dict = defaultdict(dict)  # r -> {sender: bit}
        self.coin_asked: dict = {}  # r -> V
        self.coins: dict = {}
        self.term_from = {0: set(), 1: set()}
        self.term_sent = False
        self.dropped = 0

    # -- lifecycle -------------------------------------------------------
    def start(self, bit: int) -> list:
        if self.halted:
            return [Note("anomaly", "aba", self.inst, None, "init after halt ignored")]
        if self.started:
            raise ProtocolError("binary agreement already started")
        if bit not in (0, 1):
            raise ProtocolError(f"input must be a bit, got {bit!r}")
        self.started = True
        self.input = bit
        self.est = bit
        self.round = 1
        out = self._send_est(1, bit)
        for (r, b) in sorted(self.est_from):
            out.extend(self._est_rules(r, b))
        for b in (0, 1):
            out.extend(self._term_rules(b))
        out.extend(self._advance())
        return out

    def halt(self, reason: str = "") -> list:
        if self.halted:
            return []
        self.halted = True
        return [Note("halt", "aba", self.inst, self.decided, reason)]

    # -- events ----------------------------------------------------------
    def on_message(self, src: int, msg) -> list:
        if self.halted:
            self.dropped += 1
            if self.dropped == 1:
                return [Note("drop", "aba", self.inst, None, f"{msg.kind} from P{src} after halt")]
            return []
        if isinstance(msg, Est):
            if msg.bit not in (0, 1) or msg.round < 1:
                return []
            key = (msg.round, msg.bit)
            if src in self.est_from[key]:
                return []
            self.est_from[key].add(src)
            if not self.started:
                return []
            return self._est_rules(msg.round, msg.bit) + self._advance()
        if isinstance(msg, Aux):
            if msg.bit not in (0, 1) or msg.round < 1:
                return []
            if src in self.aux_from[msg.round]:
                return []
            self.aux_from[msg.round][src] = msg.bit
            return self._advance() if self.started else []
        if isinstance(msg, Term):
            if msg.bit not in (0, 1) or src in self.term_from[msg.bit]:
                return []
            self.term_from[msg.bit].add(src)
            return self._term_rules(msg.bit) if self.started else []
        return []

    def on_oracle(self, key: tuple, value) -> list:
        if self.halted or not self.started:
            return []
        r = key[-1]
        if r in self.coins:
            return []
        self.coins[r] = value
        return self._advance()

    # -- rules -----------------------------------------------------------
    def _send_est(self, r: int, b: int) -> list:
        if (r, b) in self.est_sent:
            return []
        self.est_sent.add((r, b))
        return broadcast(self.n, Est(self.inst, r, b))

    def _est_rules(self, r: int, b: int) -> list:
        out = []
        count = len(self.est_from[(r, b)])
        if count >= self.t + 1:
            out.extend(self._send_est(r, b))
        if count >= 2 * self.t + 1 and b not in self.bin_values[r]:
            self.bin_values[r].append(b)
        return out

    def _decide(self, b: int, how: str) -> list:
        if self.decided is not None:
            return []
        self.decided = b
        self.decided_round = self.round
        out = [Note("decide", "aba", self.inst, b, f"r={self.round} via={how}")]
        if not self.term_sent:
            self.term_sent = True
            out.extend(broadcast(self.n, Term(self.inst, b)))
        return out

    def _term_rules(self, b: int) -> list:
        out = []
        count = len(self.term_from[b])
        if count >= self.t + 1:
            out.extend(self._decide(b, "term"))
        if self.decided == b and count >= 2 * self.t + 1:
            out.extend(self.halt("terminated"))
        return out

    def _advance(self) -> list:
        out = []
        while not self.halted:
            r = self.round
            bins = self.bin_values[r]
            if bins and r not in self.aux_sent:
                self.aux_sent.add(r)
                out.extend(broadcast(self.n, Aux(self.inst, r, bins[0])))
            if r not in self.coin_asked:
                qual = [b for b in self.aux_from[r].values() if b in bins]
                if len(qual) >= self.n - self.t:
                    self.coin_asked[r] = frozenset(qual)
                    out.append(Ask("coin", self.inst + (r,)))
            if r not in self.coin_asked or r not in self.coins:
                break
            c = self.coins[r]
            vals = self.coin_asked[r]
            if len(vals) == 1:
                (b,) = vals
                self.est = b
                if b == c:
                    out.extend(self._decide(b, "coin"))
            else:
                self.est = c
            if self.decided is not None:
                self.est = self.decided
            self.round = r + 1
            out.extend(self._send_est(self.round, self.est))
            for b in (0, 1):
                if (self.round, b) in self.est_from:
                    out.extend(self._est_rules(self.round, b))
        return out
