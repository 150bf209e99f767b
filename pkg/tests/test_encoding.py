import random

from hypothesis import given, settings
from hypothesis import strategies as st

from nasmr.crypto import KeyRegistry, domain_tag
from nasmr.encoding import EncodingError, canonical_decode, canonical_encode, encode_body
from nasmr.messages import Aux, Echo, Est, Ready, Term, Value
from nasmr.types import Block, Pair, Signature, SignedBuffer, Transaction

import pytest


def test_empty_block_is_tag_plus_zero_count():
    body = encode_body(Block())
    assert len(body) == 1 + 8
    assert body[1:] == bytes(8)


def test_block_encoding_ignores_insertion_order():
    a, b = Transaction(b"a"), Transaction(b"b")
    assert encode_body(Block.of([a, b])) == encode_body(Block.of([b, a]))


def test_round_trip_nested():
    reg = KeyRegistry(4)
    blk = Block.of([Transaction(b"x"), Transaction(b"y")])
    sb = SignedBuffer(1, blk, reg.issue(1).sign_obj(b"t", blk))
    obj = (Pair(blk, frozenset([sb])), Echo(("acs", "rbc", 2), blk), -5, "s", None, True)
    assert canonical_decode(canonical_encode(obj)) == obj


def test_decode_rejects_trailing_bytes():
    with pytest.raises(EncodingError):
        canonical_decode(canonical_encode(7) + b"\x00")


def test_domain_tags_separate_contexts():
    tags = {
        domain_tag(0, 1, "bla", ("gc", 1), "COMMIT"),
        domain_tag(0, 2, "bla", ("gc", 1), "COMMIT"),
        domain_tag(1, 1, "bla", ("gc", 1), "COMMIT"),
        domain_tag(0, 1, "bla", ("gc", 1), "NOTIFY"),
        domain_tag(0, 1, "smr", ("gc", 1), "COMMIT"),
    }
    assert len(tags) == 5


def _random_message(rng):
    inst = tuple(rng.choice(["rbc", "aba", "acs", "slot", 1, 2, 3]) for _ in range(rng.randint(1, 4)))
    kind = rng.randrange(7)
    if kind == 0:
        return Value(inst, rng.randbytes(rng.randint(0, 6)))
    if kind == 1:
        return Echo(inst, Block.of(Transaction(rng.randbytes(2)) for _ in range(rng.randint(0, 3))))
    if kind == 2:
        return Ready(inst, rng.randint(-3, 3))
    if kind == 3:
        return Est(inst, rng.randint(1, 5), rng.randint(0, 1))
    if kind == 4:
        return Aux(inst, rng.randint(1, 5), rng.randint(0, 1))
    if kind == 5:
        return Term(inst, rng.randint(0, 1))
    return Signature(rng.randint(1, 7), rng.randbytes(3))


def test_random_messages_never_collide():
    rng = random.Random(2024)
    seen = {}
    for _ in range(100_000):
        m = _random_message(rng)
        enc = canonical_encode(m)
        prev = seen.setdefault(enc, m)
        assert prev == m, (prev, m)
    assert len(seen) > 50_000


leaf = st.one_of(
    st.integers(min_value=-(2**63), max_value=2**63 - 1),
    st.binary(max_size=8),
    st.text(max_size=5),
    st.none(),
    st.booleans(),
)
values = st.recursive(leaf, lambda c: st.one_of(st.tuples(c, c), st.frozensets(c, max_size=3)), max_leaves=10)


def typed(x):
    if isinstance(x, tuple):
        return ("tuple", tuple(typed(i) for i in x))
    if isinstance(x, frozenset):
        return ("set", frozenset(typed(i) for i in x))
    return (type(x).__name__, x)


@settings(max_examples=300, deadline=None)
@given(values, values)
def test_encoding_is_injective_and_invertible(a, b):
    ea, eb = canonical_encode(a), canonical_encode(b)
    assert canonical_decode(ea) == a
    assert (ea == eb) == (typed(a) == typed(b))
