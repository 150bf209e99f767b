"""Actions emitted by protocol handlers and the per-party environment they run in.

Handlers never touch the network directly: every ``on_*`` method mutates the
instance's own state and returns a list of actions for the runtime to carry out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from ..crypto import KeyRegistry, SigningKey, Verifier
from ..types import ProtocolParams


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class Send:
    dst: int
    msg: Any


@dataclass(frozen=True)
class Timer:
    at: int
    key: tuple
    prio: int = 0


@dataclass(frozen=True)
class Ask:
    oracle: str
    key: tuple


@dataclass(frozen=True)
class Note:
    """A transcript record: output, decision, epoch entry, anomaly, ..."""

    kind: str
    label: str
    inst: tuple
    value: Any = None
    extra: str = ""


@dataclass
class Env:
    me: int
    params: ProtocolParams
    key: SigningKey
    registry: KeyRegistry
    session: int = 0
    delta: int = 1
    mode: str = "sync"
    clock: Callable[[], int] = lambda: 0
    _verifiers: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.params.n

    def now(self) -> int:
        return self.clock()

    def verifier(self, slot: int) -> Verifier:
        v = self._verifiers.get(slot)
        if v is None:
            v = self._verifiers[slot] = Verifier(self.registry, self.session, slot)
        return v


def broadcast(n: int, msg) -> list:
    return [Send(j, msg) for j in range(1, n + 1)]


class Protocol:
    """Base for event-driven protocol instances.

    Events carry a path (message ``inst``, timer key or oracle key). A path of
    the form ``self.inst + (kind, index, ...)`` with ``kind`` in
    ``child_kinds`` belongs to a child instance; anything else is handled here.
    After a child handled an event, ``on_child`` lets the parent react.
    """

    child_kinds: tuple = ()

    def __init__(self, env: Env, inst: tuple):
        self.env = env
        self.inst = inst
        self.n = env.params.n

    def child(self, kind, index):
        return None

    def on_child(self, child) -> list:
        return []

    def on_orphan(self, event: str, path: tuple, src, payload) -> list:
        return []

    def route(self, event: str, path: tuple, src=None, payload=None) -> list:
        d = len(self.inst)
        if len(path) >= d + 2 and path[d] in self.child_kinds:
            c = self.child(path[d], path[d + 1])
            if c is None:
                return self.on_orphan(event, path, src, payload)
            out = c.route(event, path, src, payload)
            return out + self.on_child(c)
        if event == "msg":
            return self.on_message(src, payload)
        if event == "timer":
            return self.on_timer(path)
        if event == "oracle":
            return self.on_oracle(path, payload)
        raise ProtocolError(f"unknown event {event!r}")

    def start(self) -> list:
        return []

    def on_message(self, src: int, msg) -> list:
        return []

    def on_timer(self, key: tuple) -> list:
        return []

    def on_oracle(self, key: tuple, value) -> list:
        return []

    def on_inject(self, tx) -> list:
        return []
