import pytest

from conftest import make_envs
from nasmr.checks import Context, check_transcript
from nasmr.protocols.acs import CommonSubset
from nasmr.protocols.base import ProtocolError
from nasmr.scenario import ScenarioConfig, run
from nasmr.types import Block

INST = ("acs",)


def test_one_rbc_per_party_and_local_input():
    c = CommonSubset(make_envs()[2], INST)
    assert sorted(c.rbc) == [1, 2, 3, 4] and sorted(c.aba) == [1, 2, 3, 4]
    out = c.start(Block())
    assert [a.msg.inst for a in out] == [INST + ("rbc", 2)] * 4
    assert all(a.msg.value == Block() for a in out)


def test_double_start_fails():
    c = CommonSubset(make_envs()[1], INST)
    c.start(b"x")
    with pytest.raises(ProtocolError):
        c.start(b"x")


def _force(c, rbc_out, decided):
    for i, v in rbc_out.items():
        c.rbc[i].terminated, c.rbc[i].output = True, v
    for i, b in decided.items():
        c.aba[i].decided = b


def test_c1_with_three_matching_rbcs():
    c = CommonSubset(make_envs()[1], INST)
    _force(c, {1: b"v", 2: b"v", 3: b"v"}, {})
    assert c.conditions()["C1"] == [b"v"]


def test_c2_majority_of_s_star():
    c = CommonSubset(make_envs()[1], INST)
    _force(c, {1: b"v", 2: b"v", 3: b"w"}, {1: 1, 2: 1, 3: 1, 4: 0})
    cond = c.conditions()
    assert cond["s"] == 3 and 3 // 2 + 1 == 2
    assert cond["C1"] == [] and cond["C2"] == [b"v"] and cond["C3"]


def test_only_c3_without_majority():
    # |S*| = 2 must reach n - t_a, hence n = 3
    c = CommonSubset(make_envs(3, t_a=1, t_s=1)[1], INST)
    _force(c, {1: b"v", 2: b"w"}, {1: 1, 2: 1, 3: 0})
    cond = c.conditions()
    assert cond["S*"] == [1, 2]
    assert cond["C1"] == [] and cond["C2"] == [] and cond["C3"]


def _acs(inputs, seed, mode, corrupt=(), strategy="crash", scheduler="random", n=4, t=1):
    cfg = ScenarioConfig.from_dict(
        {
            "params": {"n": n, "t_a": t, "t_s": t},
            "net": {"mode": mode, "delta": 2, "seed": seed},
            "adversary": {"strategy": strategy, "scheduler": scheduler, "corrupt": list(corrupt)},
            "protocol": {"name": "acs", "inputs": list(inputs)},
        }
    )
    return run(cfg)[1]


def test_unanimous_sync_exits_first():
    tr = _acs(["aa"] * 4, 1, "sync")
    ctx = Context(tr.config, tr.records)
    outs = ctx.honest_notes("output", "acs")
    assert len(outs) == 4
    assert all(e.value() == frozenset([bytes.fromhex("aa")]) and e.attrs["exit"] == "1" for e in outs)


def test_distinct_inputs_async_set_quality():
    for seed in range(60):
        tr = _acs(["a1", "b2", "c3", "d4"], seed, "async", corrupt=[4], scheduler="async-max-delay")
        rep = check_transcript(tr, only=["acs-agreement", "acs-set-quality", "acs-liveness", "acs-bounded"])
        assert rep.passed, (seed, rep.failures())
        ctx = Context(tr.config, tr.records)
        out = ctx.honest_notes("output", "acs")[0].value()
        assert len(out & {bytes.fromhex(x) for x in ("a1", "b2", "c3")}) >= 2
