"""Bracha-style reliable broadcast with a tunable validity threshold ``t_s``.

Quorums: ``n - t_s`` echoes trigger READY, ``t_s + 1`` readies amplify it and
``n - t_s`` readies deliver. With ``t_a + 2 t_s < n`` this is ``t_s``-valid and
``t_a``-consistent.
"""

from __future__ import annotations

from collections import defaultdict

from ..messages import Echo, Ready, Value, inst_path
from .base import Env, Note, Protocol, ProtocolError, broadcast

_UNSET = object()


class ReliableBroadcast(Protocol):
    def __init__(self, env: Env, inst: tuple, sender: int, value=_UNSET, notes: bool = True):
        super().__init__(env, inst)
        if value is not _UNSET and env.me != sender:
            raise ProtocolError(f"P{env.me} is not the sender of {inst_path(inst)} but was given an input")
        self.sender = sender
        self.value = value
        self.t_s = env.params.t_s
        self.echoes: dict = defaultdict(set)
        self.readies: dict = defaultdict(set)
        self.got_value = False
        self.sent_echo = False
        self.sent_ready = False
        self.started = False
        self.output = None
        self.terminated = False
        self.notes = notes

    def start(self, value=_UNSET) -> list:
        if value is not _UNSET:
            if self.env.me != self.sender:
                raise ProtocolError("only the sender provides an input")
            self.value = value
        if self.started:
            raise ProtocolError(f"{inst_path(self.inst)} already started")
        self.started = True
        if self.env.me != self.sender:
            return []
        if self.value is _UNSET:
            raise ProtocolError("sender has no input")
        return broadcast(self.n, Value(self.inst, self.value))

    def on_message(self, src: int, msg) -> list:
        if self.terminated:
            return []
        if isinstance(msg, Value):
            if src != self.sender or self.got_value:
                return []
            self.got_value = True
            self.sent_echo = True
            return broadcast(self.n, Echo(self.inst, msg.value))
        if isinstance(msg, Echo):
            seen = self.echoes[msg.value]
        elif isinstance(msg, Ready):
            seen = self.readies[msg.value]
        else:
            return []
        if src in seen:
            return []
        seen.add(src)
        return self._progress(msg.value)

    def _progress(self, v) -> list:
        out = []
        if not self.sent_ready and (
            len(self.echoes[v]) >= self.n - self.t_s or len(self.readies[v]) >= self.t_s + 1
        ):
            self.sent_ready = True
            out.extend(broadcast(self.n, Ready(self.inst, v)))
        if len(self.readies[v]) >= self.n - self.t_s:
            self.output = v
            self.terminated = True
            if self.notes:
                out.append(Note("output", "rbc", self.inst, v))
        return out


def rbc_init(env: Env, inst: tuple, sender: int, value=_UNSET):
    """Create an instance and return ``(state, outbound)``."""
    state = ReliableBroadcast(env, inst, sender, value)
    if env.me == sender and value is _UNSET:
        raise ProtocolError("sender has no input")
    return state, state.start()
