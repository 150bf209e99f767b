"""Synchronous block agreement: proposer sub-protocol, graded consensus, iteration loop.

All three are driven by the enclosing ``BlockAgreement`` clock. Iteration ``k``
occupies local steps ``0..5`` at times ``(5k - 5 + s) * delta`` after the
start; step 5 of iteration ``k`` and step 0 of iteration ``k + 1`` share a
tick, in that order.

Quorum ``t = n // 2 + 1`` throughout (the smallest count above ``n / 2``).
"""

from __future__ import annotations

import hashlib

from ..crypto import domain_tag
from ..encoding import encode_body
from ..messages import Commit, Notify, Propose, Status
from ..types import Certificate, CommitSig, Pair, Vote, is_k_certificate, pair_is_valid, vote_is_valid
from .base import Ask, Env, Note, Protocol, Send, Timer, broadcast


def pair_digest(pair) -> bytes:
    return hashlib.sha256(encode_body(pair)).digest() if pair is not None else b""


class _Forms:
    """Formation predicates for one (session, slot), memoised on message identity."""

    def __init__(self, env: Env, slot: int):
        self.env = env
        self.slot = slot
        self.verifier = env.verifier(slot)
        self.memo = self.verifier._memo

    def tag(self, inst: tuple, kind: str) -> bytes:
        return domain_tag(self.env.session, self.slot, "bla", inst, kind)

    def status_ok(self, st, proposer_inst: tuple) -> bool:
        if not isinstance(st, Status) or not isinstance(st.vote, Vote):
            return False
        key = ("status", id(st), proposer_inst)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        ok = (
            st.inst == proposer_inst
            and self.env.registry.verify(st.sender, self.tag(proposer_inst, "STATUS"), encode_body(st.vote), st.signature)
            and vote_is_valid(st.vote, self.env.n, self.verifier)
        )
        self.memo[key] = (st, ok)
        return ok

    def propose_ok(self, pm, proposer_inst: tuple, proposer: int) -> bool:
        if not isinstance(pm, Propose) or pm.proposer != proposer or not isinstance(pm.statuses, tuple):
            return False
        key = ("propose", id(pm))
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        ok = pm.inst == proposer_inst and self.env.registry.verify(
            proposer, self.tag(proposer_inst, "PROPOSE"), encode_body(pm.statuses), pm.signature
        )
        if ok:
            senders = {st.sender for st in pm.statuses if self.status_ok(st, proposer_inst)}
            ok = len(senders) >= self.env.params.majority
        self.memo[key] = (pm, ok)
        return ok

    def commit_ok(self, cm, k: int) -> bool:
        return (
            isinstance(cm, Commit)
            and cm.k == k
            and pair_is_valid(cm.pair, 0, self.verifier)
            and self.verifier.commit_ok(cm.sender, cm.k, cm.pair, cm.signature)
        )

    def notify_ok(self, nm, k: int) -> bool:
        return (
            isinstance(nm, Notify)
            and nm.k == k
            and pair_is_valid(nm.pair, 0, self.verifier)
            and is_k_certificate(nm.cert, k, nm.pair, self.env.n, self.verifier)
        )


class ProposeInstance(Protocol):
    """One proposer slot inside graded consensus. Output is a Pair, or None for bottom."""

    def __init__(self, env: Env, inst: tuple, proposer: int, forms: _Forms):
        super().__init__(env, inst)
        self.proposer = proposer
        self.forms = forms
        self.statuses: dict = {}
        self.from_proposer = None
        self.seen: dict = {}  # encoding -> message, correctly formed only
        self.output = None
        self.done = False

    def on_message(self, src: int, msg) -> list:
        if self.done:
            return []
        if isinstance(msg, Status):
            if self.env.me == self.proposer and msg.sender == src and src not in self.statuses:
                if self.forms.status_ok(msg, self.inst):
                    self.statuses[src] = msg
            return []
        if isinstance(msg, Propose) and self.forms.propose_ok(msg, self.inst, self.proposer):
            self.seen.setdefault(encode_body(msg), msg)
            if src == self.proposer and self.from_proposer is None:
                self.from_proposer = msg
        return []

    def step(self, s: int, vote: Vote) -> list:
        f = self.forms
        if s == 0:
            sig = self.env.key.sign_obj(f.tag(self.inst, "STATUS"), vote)
            return [Send(self.proposer, Status(self.inst, self.env.me, vote, sig))]
        if s == 1:
            if self.env.me != self.proposer or len(self.statuses) < self.env.params.majority:
                return []
            sts = tuple(self.statuses[j] for j in sorted(self.statuses))
            sig = self.env.key.sign_obj(f.tag(self.inst, "PROPOSE"), sts)
            return broadcast(self.n, Propose(self.inst, self.proposer, sts, sig))
        if s == 2:
            if self.from_proposer is None:
                self.done = True
                return []
            return broadcast(self.n, self.from_proposer)
        if s == 3 and not self.done:
            self.done = True
            if self.from_proposer is None or len(self.seen) != 1:
                return []
            best = None
            for st in self.from_proposer.statuses:
                if not f.status_ok(st, self.inst):
                    continue
                if best is None or st.vote.k > best.vote.k or (st.vote.k == best.vote.k and st.sender < best.sender):
                    best = st
            self.output = best.vote.pair
        return []


class GradedConsensus(Protocol):
    child_kinds = ("prop",)

    def __init__(self, env: Env, inst: tuple, k: int, vote: Vote, forms: _Forms):
        super().__init__(env, inst)
        self.k = k
        self.vote = vote
        self.forms = forms
        self.props = {j: ProposeInstance(env, inst + ("prop", j), j, forms) for j in range(1, self.n + 1)}
        self.step_no = -1
        self.leader = None
        self.asked = False
        self.committed = False
        self.commits: dict = {}
        self.notifies: dict = {}
        self.result = None  # (pair, cert) or None
        self.grade = None

    def child(self, kind, index):
        return self.props.get(index)

    @property
    def leader_key(self) -> tuple:
        return self.inst + ("leader",)

    def tick(self, s: int) -> list:
        self.step_no = s
        out = []
        if self.grade is not None:
            return out
        if s <= 3:
            for j in sorted(self.props):
                out.extend(self.props[j].step(s, self.vote))
        if s == 3:
            self.asked = True
            out.append(Ask("leader", self.leader_key))
            out.extend(self._commit())
        elif s == 4:
            if self.leader is None:
                out.append(Note("anomaly", "gc", self.inst, None, "leader unknown at step 4"))
            else:
                mine = self.props[self.leader].output
                if mine is not None:
                    d = encode_body(mine)
                    support = [c for c in self.commits.values() if encode_body(c.pair) == d]
                    if len(support) >= self.env.params.majority:
                        cert = Certificate(frozenset(CommitSig(c.sender, c.k, c.signature) for c in support))
                        out.extend(broadcast(self.n, Notify(self.inst, self.k, mine, cert)))
                        out.extend(self._finish(mine, cert, 2))
        elif s == 5:
            if self.notifies:
                nm = self.notifies[min(self.notifies)]
                out.extend(self._finish(nm.pair, nm.cert, 1))
            else:
                out.extend(self._finish(None, None, 0))
        return out

    def _finish(self, pair, cert, g: int) -> list:
        self.grade = g
        self.result = (pair, cert) if pair is not None else None
        return [Note("grade", "gc", self.inst, pair_digest(pair), f"g={g} leader={self.leader}")]

    def _commit(self) -> list:
        if self.committed or self.leader is None or self.step_no < 3:
            return []
        self.committed = True
        pair = self.props[self.leader].output
        if pair is None:
            return []
        sig = self.forms.verifier.sign_commit(self.env.key, self.k, pair)
        return broadcast(self.n, Commit(self.inst, self.env.me, self.k, pair, sig))

    def on_oracle(self, key, value) -> list:
        if self.leader is not None or self.grade is not None:
            return []
        self.leader = value
        return self._commit()

    def on_message(self, src: int, msg) -> list:
        if self.grade is not None:
            return []
        if isinstance(msg, Commit):
            if self.step_no < 4 and msg.sender == src and src not in self.commits and self.forms.commit_ok(msg, self.k):
                self.commits[src] = msg
        elif isinstance(msg, Notify):
            if self.step_no < 5 and src not in self.notifies and self.forms.notify_ok(msg, self.k):
                self.notifies[src] = msg
        return []


class BlockAgreement(Protocol):
    """``kappa`` graded-consensus iterations with a write-once output pair.

    The instance keeps running through the last iteration after it outputs,
    so slower parties can still pick up certificates.
    """

    child_kinds = ("gc",)

    def __init__(self, env: Env, inst: tuple, pair: Pair, slot: int = 0, kappa: int | None = None):
        super().__init__(env, inst)
        self.kappa = kappa or env.params.kappa
        self.forms = _Forms(env, slot)
        self.input = pair
        self.vote = Vote(0, pair, Certificate())
        self.gcs: dict = {}
        self.pending: dict = {}
        self.output = None
        self.output_iteration = None
        self.grades: dict = {}
        self.t0 = None
        self.finished = False

    @property
    def duration(self) -> int:
        return 5 * self.kappa * self.env.delta

    def start(self) -> list:
        self.t0 = self.env.now()
        return self.on_timer(self.inst + ("tick", 0))

    def child(self, kind, index):
        return self.gcs.get(index)

    def on_orphan(self, event, path, src, payload) -> list:
        k = path[len(self.inst) + 1]
        if event == "msg" and isinstance(k, int) and k > len(self.gcs) and k <= self.kappa:
            self.pending.setdefault(k, []).append((event, path, src, payload))
        return []

    def on_timer(self, key) -> list:
        m = key[-1]
        out = []
        if m > 0 and m % 5 == 0:
            k = m // 5
            gc = self.gcs[k]
            out.extend(gc.tick(5))
            self.grades[k] = gc.grade
            if gc.grade > 0:
                pair, cert = gc.result
                self.vote = Vote(k, pair, cert)
                if gc.grade == 2 and self.output is None:
                    self.output = pair
                    self.output_iteration = k
                    out.append(Note("output", "bla", self.inst, pair, f"iter={k}"))
        if m < 5 * self.kappa:
            k, s = m // 5 + 1, m % 5
            if s == 0:
                gc = self.gcs[k] = GradedConsensus(self.env, self.inst + ("gc", k), k, self.vote, self.forms)
                for item in self.pending.pop(k, []):
                    out.extend(gc.route(*item))
            out.extend(self.gcs[k].tick(s))
            out.append(Timer(self.t0 + (m + 1) * self.env.delta, self.inst + ("tick", m + 1)))
        else:
            self.finished = True
        return out
