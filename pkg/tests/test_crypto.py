from collections import Counter

import pytest
from scipy.stats import chisquare

from nasmr.crypto import CapabilityError, CoinOracle, KeyRegistry, LeaderOracle, derive_seed
from nasmr.sim import NetConfig, Simulator
from nasmr.types import ProtocolParams

TAG = b"test-tag"


def test_sign_then_verify():
    reg = KeyRegistry(4)
    sig = reg.issue(1).sign(TAG, b"m")
    assert reg.verify(1, TAG, b"m", sig)
    assert not reg.verify(1, TAG, b"m2", sig)
    assert not reg.verify(1, b"other", b"m", sig)


def test_wrong_signer_rejected():
    reg = KeyRegistry(4)
    sig = reg.issue(1).sign(TAG, b"m")
    assert not reg.verify(2, TAG, b"m", sig)


def test_forged_signature_not_in_ledger():
    import hashlib

    from nasmr.types import Signature

    reg = KeyRegistry(4)
    fake = Signature(3, hashlib.sha256(TAG + b"m").digest())
    assert not reg.verify(3, TAG, b"m", fake)


def test_signing_with_foreign_key_is_refused():
    reg = KeyRegistry(4)
    with pytest.raises(CapabilityError):
        reg.sign(3, TAG, b"m", reg.issue(1))


def test_adversary_cannot_use_honest_key():
    params = ProtocolParams(4, 1, 1)
    sim = Simulator(params, NetConfig())
    with pytest.raises(CapabilityError):
        sim.adversary_key(3)


def test_leader_needs_majority_of_requests():
    orc = LeaderOracle(4, seed=1)
    assert orc.request(("gc", 1), 1) == (False, None)
    assert orc.request(("gc", 1), 2) == (False, None)
    newly, leader = orc.request(("gc", 1), 3)
    assert newly and 1 <= leader <= 4
    assert orc.request(("gc", 1), 4) == (False, leader)


def test_repeated_request_does_not_count():
    orc = LeaderOracle(4, seed=1)
    for _ in range(5):
        assert orc.request("k", 1) == (False, None)
    assert orc.request("k", 2) == (False, None)
    assert not orc.revealed("k")


def test_leader_distribution_is_uniform():
    n = 4
    counts = Counter()
    for i in range(1000):
        orc = LeaderOracle(n, derive_seed(i, "leader-oracle"))
        for p in (1, 2, 3):
            orc.request(("gc", 1), p)
        counts[orc.values[("gc", 1)]] += 1
    freqs = [counts[p] for p in range(1, n + 1)]
    assert all(abs(f / 1000 - 1 / n) <= 0.05 for f in freqs), freqs
    assert chisquare(freqs).pvalue > 0.001


def test_coin_quorum_is_t_a_plus_one():
    orc = CoinOracle(4, t_a=1, seed=9)
    assert orc.request(("aba", 1), 2) == (False, None)
    newly, bit = orc.request(("aba", 1), 3)
    assert newly and bit in (0, 1)
    assert orc.request(("aba", 1), 1) == (False, bit)
    assert orc.request(("aba", 1), 2) == (False, bit)


def test_coin_frequency():
    orc = CoinOracle(4, t_a=0, seed=derive_seed(7, "coin"))
    bits = [orc.request(("aba", r), 1)[1] for r in range(2000)]
    assert abs(sum(bits) / 2000 - 0.5) <= 0.05


def test_oracles_depend_on_seed_only():
    a, b = CoinOracle(4, 0, 5), CoinOracle(4, 0, 5)
    assert [a.request(r, 1)[1] for r in range(50)] == [b.request(r, 2)[1] for r in range(50)]
