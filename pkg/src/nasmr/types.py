"""Domain objects shared by every protocol, plus their validity predicates."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .encoding import encode_body, register


class ParamsError(ValueError):
    pass


class WriteOnceError(RuntimeError):
    pass


class EpochOrderError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    t_a: int
    t_s: int
    kappa: int = 8
    enforce_bound: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ParamsError("n must be positive")
        if not 0 <= self.t_a <= self.t_s < self.n:
            raise ParamsError(f"need 0 <= t_a <= t_s < n, got t_a={self.t_a} t_s={self.t_s} n={self.n}")
        if self.kappa < 1:
            raise ParamsError("kappa must be a positive integer")
        if self.enforce_bound and not self.bound_holds:
            raise ParamsError(
                f"t_a + 2*t_s < n violated ({self.t_a} + 2*{self.t_s} >= {self.n}); "
                "clear enforce_bound to run it anyway"
            )

    @property
    def bound_holds(self) -> bool:
        return self.t_a + 2 * self.t_s < self.n

    @property
    def majority(self) -> int:
        """ceil((n+1)/2): the smallest count strictly above n/2."""
        return self.n // 2 + 1


@register(0x10)
@dataclass(frozen=True)
class Transaction:
    payload: bytes

    @cached_property
    def id(self) -> bytes:
        return hashlib.sha256(self.payload).digest()

    def __repr__(self):
        return f"Tx({self.payload[:6].hex()})"


@register(0x11, counted_set=True)
@dataclass(frozen=True)
class Block:
    txs: frozenset = frozenset()

    def __post_init__(self):
        if not isinstance(self.txs, frozenset):
            object.__setattr__(self, "txs", frozenset(self.txs))

    @classmethod
    def of(cls, txs: Iterable[Transaction]) -> "Block":
        return cls(frozenset(txs))

    def sorted(self) -> list[Transaction]:
        """Transactions in canonical (id) order."""
        return sorted(self.txs, key=lambda tx: tx.id)

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self):
        return len(self.txs)

    def __contains__(self, tx):
        return tx in self.txs

    def __or__(self, other: "Block") -> "Block":
        return Block(self.txs | other.txs)

    def issubset(self, other: "Block") -> bool:
        return self.txs <= other.txs

    def __repr__(self):
        return "Block{" + ",".join(repr(tx) for tx in self.sorted()) + "}"


@register(0x12)
@dataclass(frozen=True)
class Signature:
    signer: int
    digest: bytes


def _dedupe_by_signer(items: Iterable) -> frozenset:
    """Keep one entry per signer (the one with the smallest encoding)."""
    best: dict[int, tuple[bytes, object]] = {}
    for item in items:
        enc = encode_body(item)
        cur = best.get(item.signer)
        if cur is None or enc < cur[0]:
            best[item.signer] = (enc, item)
    return frozenset(v for _, v in best.values())


@register(0x13)
@dataclass(frozen=True)
class SignedBuffer:
    signer: int
    buffer: Block
    signature: Signature


@register(0x14)
@dataclass(frozen=True)
class Pair:
    block: Block
    sigma: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "sigma", _dedupe_by_signer(self.sigma))

    @property
    def signers(self) -> list[int]:
        return sorted(sb.signer for sb in self.sigma)


@register(0x15)
@dataclass(frozen=True)
class CommitSig:
    signer: int
    k: int
    signature: Signature


@register(0x16)
@dataclass(frozen=True)
class Certificate:
    entries: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "entries", _dedupe_by_signer(self.entries))

    def __len__(self):
        return len(self.entries)


@register(0x17)
@dataclass(frozen=True)
class Vote:
    k: int
    pair: Pair
    cert: Certificate = field(default_factory=Certificate)


@register(0x18)
@dataclass(frozen=True)
class SignedValue:
    """A party's signed input bit for weak BA."""

    signer: int
    bit: int
    signature: Signature


def pair_is_valid(pair: Pair, t: int, verifier) -> bool:
    """True iff more than ``t`` distinct verifying signed buffers, each contained in the block."""
    return verifier.pair_support(pair) > t


def vote_is_valid(vote: Vote, n: int, verifier) -> bool:
    if not pair_is_valid(vote.pair, 0, verifier):
        return False
    if vote.k == 0:
        return True
    if vote.k < 0:
        return False
    return 2 * verifier.cert_support(vote.cert, vote.pair, min_k=vote.k) > n


def is_k_certificate(cert: Certificate, k: int, pair: Pair, n: int, verifier) -> bool:
    return 2 * verifier.cert_support(cert, pair, exact_k=k) > n


class EpochArray:
    """Write-once epoch markers; epochs must be entered in order."""

    def __init__(self):
        self._entered: set[int] = set()

    def enter(self, j: int) -> None:
        if j < 1:
            raise EpochOrderError(f"epoch index must be positive, got {j}")
        if j in self._entered:
            raise WriteOnceError(f"epoch {j} already entered")
        if j > 1 and (j - 1) not in self._entered:
            raise EpochOrderError(f"epoch {j} entered before epoch {j - 1}")
        self._entered.add(j)

    def entered(self, j: int) -> bool:
        return j in self._entered

    def __len__(self):
        return len(self._entered)


class BlockLog:
    """Write-once array of blocks indexed by slot."""

    def __init__(self, epochs: EpochArray):
        self._epochs = epochs
        self._blocks: dict[int, Block] = {}

    def write(self, j: int, block: Block) -> None:
        if j in self._blocks:
            raise WriteOnceError(f"slot {j} already holds a block")
        if not self._epochs.entered(j):
            raise EpochOrderError(f"block for slot {j} output before entering epoch {j}")
        self._blocks[j] = block

    def get(self, j: int):
        return self._blocks.get(j)

    def __contains__(self, j):
        return j in self._blocks

    def items(self):
        return sorted(self._blocks.items())

    def __len__(self):
        return len(self._blocks)
