"""Idealised PKI signatures and the two randomness oracles.

Signatures are perfectly unforgeable: a signature is ``(signer, sha256(tag || payload))``
and it only verifies if the owner of the signing key actually produced it.
Signing keys are capability objects; whoever holds one can sign for that
party, so corrupting a party means handing its key to the adversary.
"""

from __future__ import annotations

import hashlib
import random
from functools import lru_cache

from .encoding import encode_body
from .types import Block, Certificate, Pair, Signature, SignedBuffer

PROTOCOL_NAME = "nasmr"


class CapabilityError(PermissionError):
    """Raised when signing for a party without holding its key."""


@lru_cache(maxsize=65536)
def domain_tag(session: int, slot: int, subprotocol: str, instance, kind: str) -> bytes:
    return encode_body((PROTOCOL_NAME, session, slot, subprotocol, instance, kind))


def derive_seed(*parts) -> int:
    h = hashlib.sha256(encode_body(tuple(parts))).digest()
    return int.from_bytes(h[:8], "big") >> 1  # fits the signed 64-bit integer encoding


class SigningKey:
    __slots__ = ("party", "_registry")

    def __init__(self, registry: "KeyRegistry", party: int):
        self.party = party
        self._registry = registry

    def sign(self, tag: bytes, payload: bytes) -> Signature:
        return self._registry.sign(self.party, tag, payload, self)

    def sign_obj(self, tag: bytes, obj) -> Signature:
        return self.sign(tag, encode_body(obj))

    def __repr__(self):
        return f"SigningKey(P{self.party})"


class KeyRegistry:
    def __init__(self, n: int):
        self.n = n
        self._ledger: set[tuple[int, bytes]] = set()
        self._keys = {p: SigningKey(self, p) for p in range(1, n + 1)}

    def issue(self, party: int) -> SigningKey:
        """Hand out the signing key (done once, by the simulator, at setup or corruption)."""
        return self._keys[party]

    def sign(self, party: int, tag: bytes, payload: bytes, key: SigningKey) -> Signature:
        if key is None or self._keys.get(party) is not key:
            raise CapabilityError(f"caller does not hold the signing key of P{party}")
        digest = hashlib.sha256(tag + payload).digest()
        self._ledger.add((party, digest))
        return Signature(party, digest)

    def verify(self, party: int, tag: bytes, payload: bytes, sig) -> bool:
        if not isinstance(sig, Signature) or sig.signer != party:
            return False
        if sig.digest != hashlib.sha256(tag + payload).digest():
            return False
        return (party, sig.digest) in self._ledger


class Verifier:
    """Registry view bound to one (session, slot), with memoised predicate results."""

    def __init__(self, registry: KeyRegistry, session: int, slot: int):
        self.registry = registry
        self.n = registry.n
        self.session = session
        self.slot = slot
        self.buf_tag = domain_tag(session, slot, "smr", 0, "BUF")
        self.commit_tag = domain_tag(session, slot, "bla", 0, "COMMIT")
        self._memo: dict = {}

    def buffer_ok(self, sb) -> bool:
        if not isinstance(sb, SignedBuffer) or not isinstance(sb.buffer, Block):
            return False
        key = ("buf", id(sb))
        hit = self._memo.get(key)
        if hit is not None:
            return hit[1]
        ok = self.registry.verify(sb.signer, self.buf_tag, encode_body(sb.buffer), sb.signature)
        self._memo[key] = (sb, ok)
        return ok

    def sign_buffer(self, key: SigningKey, buffer: Block) -> SignedBuffer:
        return SignedBuffer(key.party, buffer, key.sign_obj(self.buf_tag, buffer))

    def commit_ok(self, signer: int, k: int, pair: Pair, sig) -> bool:
        return self.registry.verify(signer, self.commit_tag, encode_body((k, pair)), sig)

    def sign_commit(self, key: SigningKey, k: int, pair: Pair) -> Signature:
        return key.sign_obj(self.commit_tag, (k, pair))

    def pair_support(self, pair) -> int:
        """Distinct verifying signers of the pair, or -1 if a verifying buffer is not in the block."""
        if not isinstance(pair, Pair):
            return -1
        key = ("pair", id(pair))
        hit = self._memo.get(key)
        if hit is not None:
            return hit[1]
        count = 0
        for sb in pair.sigma:
            if not self.buffer_ok(sb):
                continue
            if not sb.buffer.issubset(pair.block):
                count = -1
                break
            count += 1
        self._memo[key] = (pair, count)
        return count

    def cert_support(self, cert, pair: Pair, min_k: int | None = None, exact_k: int | None = None) -> int:
        """Distinct signers with a valid Commit on ``pair`` at an acceptable round."""
        if not isinstance(cert, Certificate):
            return 0
        key = ("cert", id(cert), id(pair), min_k, exact_k)
        hit = self._memo.get(key)
        if hit is not None:
            return hit[2]
        count = 0
        for entry in cert.entries:
            if exact_k is not None and entry.k != exact_k:
                continue
            if min_k is not None and entry.k < min_k:
                continue
            if self.commit_ok(entry.signer, entry.k, pair, entry.signature):
                count += 1
        self._memo[key] = (cert, pair, count)
        return count


class _QuorumOracle:
    """Samples one value per key once more than ``quorum - 1`` distinct parties asked."""

    name = "oracle"

    def __init__(self, n: int, seed: int, quorum: int):
        self.n = n
        self.seed = seed
        self.quorum = quorum
        self.requesters: dict = {}
        self.values: dict = {}

    def _sample(self, key):
        raise NotImplementedError

    def request(self, key, party: int):
        """Register a request; returns ``(newly_revealed, value_or_None)``."""
        if key in self.values:
            return False, self.values[key]
        asked = self.requesters.setdefault(key, set())
        asked.add(party)
        if len(asked) >= self.quorum:
            self.values[key] = self._sample(key)
            return True, self.values[key]
        return False, None

    def revealed(self, key) -> bool:
        return key in self.values


class LeaderOracle(_QuorumOracle):
    name = "leader"

    def __init__(self, n: int, seed: int):
        super().__init__(n, seed, quorum=n // 2 + 1)

    def _sample(self, key) -> int:
        return random.Random(derive_seed(self.seed, "leader", key)).randint(1, self.n)


class CoinOracle(_QuorumOracle):
    name = "coin"

    def __init__(self, n: int, t_a: int, seed: int):
        super().__init__(n, seed, quorum=t_a + 1)

    def _sample(self, key) -> int:
        return random.Random(derive_seed(self.seed, "coin", key)).getrandbits(1)
