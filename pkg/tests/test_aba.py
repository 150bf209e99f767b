import pytest

from conftest import make_envs
from nasmr.checks import Context, check_transcript
from nasmr.encoding import canonical_decode
from nasmr.messages import Est, Term
from nasmr.protocols.aba import BinaryAgreement
from nasmr.protocols.base import Note, ProtocolError
from nasmr.scenario import ScenarioConfig, run

INST = ("aba",)


@pytest.mark.parametrize("bit", [0, 1])
def test_input_sends_first_round_estimate(bit):
    out = BinaryAgreement(make_envs()[1], INST).start(bit)
    assert [a.dst for a in out] == [1, 2, 3, 4]
    assert {a.msg for a in out} == {Est(INST, 1, bit)}


def test_bad_input_and_double_start():
    a = BinaryAgreement(make_envs()[1], INST)
    with pytest.raises(ProtocolError):
        a.start(2)
    a.start(0)
    with pytest.raises(ProtocolError):
        a.start(1)


def test_start_after_halt_is_logged_noop():
    a = BinaryAgreement(make_envs()[1], INST)
    a.halt("test")
    out = a.start(1)
    assert len(out) == 1 and isinstance(out[0], Note) and out[0].kind == "anomaly"
    assert not a.started


def test_halt_before_decision_silences_instance():
    a = BinaryAgreement(make_envs()[1], INST)
    a.start(1)
    a.halt()
    assert a.decided is None
    out = a.on_message(2, Est(INST, 1, 1)) + a.on_message(3, Est(INST, 1, 1)) + a.on_oracle(INST + (1,), 1)
    assert all(isinstance(x, Note) for x in out)
    assert a.decided is None


def test_halted_instance_logs_dropped_estimate():
    a = BinaryAgreement(make_envs()[1], INST)
    a.start(0)
    a.halt()
    out = a.on_message(2, Est(INST, 1, 0))
    assert [n.kind for n in out] == ["drop"]
    assert a.on_message(3, Est(INST, 1, 0)) == []


def test_halt_after_decision_keeps_decision():
    a = BinaryAgreement(make_envs()[1], INST)
    a.start(1)
    for src in (2, 3):  # t_s + 1 matching TERM messages decide
        a.on_message(src, Term(INST, 1))
    assert a.decided == 1
    a.halt()
    assert a.decided == 1 and a.halted


def _aba(inputs, seed, mode="async", corrupt=(), strategy="crash", t_a=1, scheduler="random"):
    cfg = ScenarioConfig.from_dict(
        {
            "params": {"n": len(inputs), "t_a": t_a, "t_s": 1},
            "net": {"mode": mode, "delta": 2, "seed": seed},
            "adversary": {"strategy": strategy, "scheduler": scheduler, "corrupt": list(corrupt)},
            "protocol": {"name": "aba", "inputs": list(inputs)},
        }
    )
    return run(cfg)[1]


def _decisions(tr):
    ctx = Context(tr.config, tr.records)
    return {e.src: (e.value(), int(e.attrs["r"])) for e in ctx.honest_notes("decide", "aba")}


@pytest.mark.parametrize("bit", [0, 1])
def test_unanimous_input_decides_it_with_silent_fault(bit):
    for seed in range(100):
        tr = _aba([bit] * 4, seed, corrupt=[4])
        dec = _decisions(tr)
        assert set(dec) == {1, 2, 3}
        assert {b for b, _ in dec.values()} == {bit}


def test_mixed_inputs_agree_under_equivocation():
    rounds = []
    for seed in range(150):
        tr = _aba([0, 1, 1, 0], seed, corrupt=[4], strategy="equivocator")
        assert check_transcript(tr, only=["aba-agreement", "aba-termination"]).passed, seed
        rounds += [r for _, r in _decisions(tr).values()]
    assert sum(rounds) / len(rounds) <= 4


def test_unanimous_ones_decide_at_first_coin_one():
    for seed in range(40):
        tr = _aba([1, 1, 1, 1], seed, mode="sync", t_a=0)
        coins = {}
        for r in tr.records:
            if r[2] == "oracle-reveal" and r[6].startswith("coin"):
                coins[int(r[6].rsplit("/", 1)[1])] = canonical_decode(r[5])
        first_one = min(k for k, c in coins.items() if c == 1)
        dec = _decisions(tr)
        assert len(dec) == 4
        assert {d for d in dec.values()} == {(1, first_one)}
