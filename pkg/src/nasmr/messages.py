"""Wire messages. Every message carries ``inst``, the instance path used for routing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .encoding import register
from .types import Certificate, Pair, Signature, SignedBuffer, SignedValue, Vote


@register(0x20)
@dataclass(frozen=True)
class Value:
    inst: tuple
    value: Any
    kind = "VALUE"


@register(0x21)
@dataclass(frozen=True)
class Echo:
    inst: tuple
    value: Any
    kind = "ECHO"


@register(0x22)
@dataclass(frozen=True)
class Ready:
    inst: tuple
    value: Any
    kind = "READY"


@register(0x23)
@dataclass(frozen=True)
class Est:
    inst: tuple
    round: int
    bit: int
    kind = "EST"


@register(0x24)
@dataclass(frozen=True)
class Aux:
    inst: tuple
    round: int
    bit: int
    kind = "AUX"


@register(0x25)
@dataclass(frozen=True)
class Term:
    inst: tuple
    bit: int
    kind = "TERM"


@register(0x26)
@dataclass(frozen=True)
class Status:
    inst: tuple
    sender: int
    vote: Vote
    signature: Signature
    kind = "STATUS"


@register(0x27)
@dataclass(frozen=True)
class Propose:
    inst: tuple
    proposer: int
    statuses: tuple
    signature: Signature
    kind = "PROPOSE"


@register(0x28)
@dataclass(frozen=True)
class Commit:
    inst: tuple
    sender: int
    k: int
    pair: Pair
    signature: Signature
    kind = "COMMIT"


@register(0x29)
@dataclass(frozen=True)
class Notify:
    inst: tuple
    k: int
    pair: Pair
    cert: Certificate
    kind = "NOTIFY"


@register(0x2A)
@dataclass(frozen=True)
class Buf:
    inst: tuple
    signed: SignedBuffer
    kind = "BUF"


@register(0x2B)
@dataclass(frozen=True)
class WbaValue:
    inst: tuple
    signed: SignedValue
    kind = "WBAVAL"


def inst_path(inst: tuple) -> str:
    return "/".join(str(x) for x in inst)
