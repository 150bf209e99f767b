import pytest

from conftest import make_envs
from rbc_explore import INST, explore
from nasmr.checks import check_transcript
from nasmr.messages import Echo, Ready, Value
from nasmr.protocols.base import ProtocolError, Send
from nasmr.protocols.rbc import ReliableBroadcast
from nasmr.scenario import ScenarioConfig, run


def test_sender_broadcasts_value():
    envs = make_envs()
    out = ReliableBroadcast(envs[1], INST, 1, b"\xab").start()
    assert [a.dst for a in out] == [1, 2, 3, 4]
    assert all(a.msg == Value(INST, b"\xab") for a in out)


def test_non_sender_start_is_silent():
    assert ReliableBroadcast(make_envs()[2], INST, 1).start() == []


def test_sender_without_input_fails():
    with pytest.raises(ProtocolError):
        ReliableBroadcast(make_envs()[1], INST, 1).start()


def test_quorums_n4():
    envs = make_envs()
    r = ReliableBroadcast(envs[1], INST, 4)
    r.start()
    v = b"v"
    assert r.on_message(1, Echo(INST, v)) == []
    assert r.on_message(2, Echo(INST, v)) == []
    out = r.on_message(3, Echo(INST, v))  # n - t_s = 3 echoes
    assert {a.msg for a in out} == {Ready(INST, v)}

    r2 = ReliableBroadcast(envs[2], INST, 4)
    assert r2.on_message(1, Ready(INST, v)) == []
    out = r2.on_message(2, Ready(INST, v))  # t_s + 1 = 2 readies amplify
    assert {a.msg for a in out} == {Ready(INST, v)}
    r2.on_message(3, Ready(INST, v))  # n - t_s = 3 readies deliver
    assert r2.output == v and r2.terminated


def test_duplicate_echo_not_counted():
    r = ReliableBroadcast(make_envs()[1], INST, 4)
    for _ in range(3):
        r.on_message(2, Echo(INST, b"v"))
    assert len(r.echoes[b"v"]) == 1 and not r.sent_ready


def test_value_from_non_sender_ignored():
    r = ReliableBroadcast(make_envs()[1], INST, 4)
    assert r.on_message(2, Value(INST, b"v")) == []


def test_all_honest_sync_outputs_within_three_delays():
    cfg = ScenarioConfig.from_dict(
        {"params": {"n": 4, "t_a": 1, "t_s": 1}, "net": {"mode": "sync", "delta": 5, "seed": 1}, "protocol": {"name": "rbc", "sender": 2, "value": "c0ffee"}}
    )
    _, tr = run(cfg)
    outs = [r for r in tr.records if r[2] == "output"]
    assert len(outs) == 4 and all(r[1] <= 15 for r in outs)
    assert check_transcript(tr).passed


def test_equivocating_sender_three_messages_exhaustive():
    v, w = b"v", b"w"
    states, leaves, bad = explore([(4, 1, Value(INST, v)), (4, 2, Value(INST, v)), (4, 3, Value(INST, w))])
    assert states > 100 and leaves >= 1
    assert bad == []


def test_equivocating_sender_with_echo_support_exhaustive():
    # P4 also echoes v towards P1 and P2, which is enough for v to be delivered
    v, w = b"v", b"w"
    byz = [(4, 1, Value(INST, v)), (4, 2, Value(INST, v)), (4, 3, Value(INST, w)), (4, 1, Echo(INST, v)), (4, 2, Echo(INST, v))]
    states, leaves, bad = explore(byz)
    assert leaves > 1
    assert bad == []


def test_explorer_detects_broken_threshold(monkeypatch):
    # negative control: with one echo enough for READY, a READY from P4 to each camp splits them
    monkeypatch.setattr(ReliableBroadcast, "_progress", _weak_progress)
    v, w = b"v", b"w"
    byz = [(4, 1, Value(INST, v)), (4, 2, Value(INST, v)), (4, 3, Value(INST, w)), (4, 1, Ready(INST, v)), (4, 3, Ready(INST, w))]
    _, _, bad = explore(byz, stop_early=True)
    assert bad


def _weak_progress(self, v):
    out = []
    if not self.sent_ready and self.echoes[v]:
        self.sent_ready = True
        out.extend(Send(j, Ready(self.inst, v)) for j in range(1, self.n + 1))
    if len(self.readies[v]) >= 2:
        self.output = v
        self.terminated = True
    return out
