import pytest

from conftest import make_envs
from nasmr.checks import Context, check_transcript
from nasmr.encoding import canonical_encode
from nasmr.messages import Buf
from nasmr.protocols.smr import StateMachineReplication, WeakAgreement, slot_period
from nasmr.scenario import ScenarioConfig, run
from nasmr.types import Block, EpochOrderError, SignedValue, Transaction


def test_slot_timetable():
    env = make_envs(kappa=3, delta=2)[1]
    smr = StateMachineReplication(env, ("smr",), slots=3)
    assert smr.slot_start_time(1) == 0
    assert smr.slot_start_time(2) == 2 + 5 * 3 * 2 == slot_period(2, 3)
    assert [t.at for t in smr.start()] == [0, 32, 64]


def test_empty_buffer_is_still_signed_and_sent():
    env = make_envs()[1]
    smr = StateMachineReplication(env, ("smr",), slots=1)
    out = smr.on_timer(("smr", "start", 1))
    bufs = [a.msg for a in out if hasattr(a, "msg") and isinstance(a.msg, Buf)]
    assert len(bufs) == 4 and bufs[0].signed.buffer == Block()
    assert env.verifier(1).buffer_ok(bufs[0].signed)


def test_slot_out_of_order_is_rejected():
    smr = StateMachineReplication(make_envs()[1], ("smr",), slots=3)
    smr.on_timer(("smr", "start", 1))
    with pytest.raises(EpochOrderError):
        smr.on_timer(("smr", "start", 3))


def test_duplicate_injection_single_entry():
    smr = StateMachineReplication(make_envs()[1], ("smr",), slots=1)
    tx = Transaction(b"t")
    smr.on_inject(tx)
    smr.on_inject(Transaction(b"t"))
    assert len(smr.buffer) == 1


def _smr(seed, slots=3, mode="sync", strategy="none", corrupt=(), scheduler="random", txs=(), budget=None, kappa=3, max_delay=None):
    net = {"mode": mode, "delta": 2, "seed": seed}
    if max_delay:
        net["max_delay"] = max_delay
    adv = {"strategy": strategy, "scheduler": scheduler, "corrupt": list(corrupt)}
    if budget is not None:
        adv["budget"] = budget
    cfg = ScenarioConfig.from_dict(
        {
            "params": {"n": 4, "t_a": 1, "t_s": 1, "kappa": kappa},
            "net": net,
            "adversary": adv,
            "workload": {"txs": list(txs)},
            "protocol": {"name": "smr", "slots": slots},
        }
    )
    return run(cfg)


def _blocks(tr):
    ctx = Context(tr.config, tr.records)
    out = {}
    for e in ctx.honest_notes("output", "smr"):
        out.setdefault(e.src, {})[int(e.path.rsplit("/", 1)[1])] = (e.value(), e.attrs)
    return out


def test_all_honest_sync_identical_blocks_from_bla():
    sim, tr = _smr(1, txs=[{"time": 0, "payload": "aa"}, {"time": 40, "payload": "bb"}])
    blocks = _blocks(tr)
    for k in (1, 2, 3):
        assert len({blocks[p][k][0] for p in blocks}) == 1
        assert {blocks[p][k][1]["src"] for p in blocks} == {"bla"}
    assert check_transcript(tr).passed


def test_commonly_held_tx_lands_by_its_slot():
    period = slot_period(2, 3)
    sim, tr = _smr(2, txs=[{"time": period - 1, "payload": "cc"}])
    blocks = _blocks(tr)
    tx = Transaction(bytes.fromhex("cc"))
    assert all(tx in blocks[p][2][0] and tx not in blocks[p][1][0] for p in blocks)
    assert check_transcript(tr, only=["smr-strong-liveness"]).verdict("smr-strong-liveness").status == "pass"


def test_mid_slot_injection_waits_for_next_snapshot():
    sim, tr = _smr(3, txs=[{"time": 1, "payload": "dd"}])
    blocks = _blocks(tr)
    tx = Transaction(bytes.fromhex("dd"))
    assert all(tx not in blocks[p][1][0] and tx in blocks[p][2][0] for p in blocks)


def test_reinjected_tx_enters_buffer_and_is_pruned_again():
    period = slot_period(2, 3)
    sim, tr = _smr(4, txs=[{"time": 0, "payload": "ee"}, {"time": period - 2, "payload": "ee"}])
    tx = Transaction(bytes.fromhex("ee"))
    blocks = _blocks(tr)
    assert all(tx in blocks[p][1][0] and tx in blocks[p][2][0] for p in blocks)
    assert all(tx not in sim.nodes[p].roots[0].buffer for p in sim.honest())


def test_async_timeout_path_still_consistent():
    sources = set()
    for seed in range(20):
        sim, tr = _smr(seed, mode="async", strategy="crash", corrupt=[2], scheduler="async-max-delay", max_delay=8)
        rep = check_transcript(tr, only=["smr-consistency", "smr-completeness", "smr-epochs"])
        assert rep.passed, (seed, rep.failures())
        sources |= {a["src"] for d in _blocks(tr).values() for _, a in d.values()}
    assert "timeout" in sources


@pytest.mark.parametrize("strategy,corrupt,budget", [("crash", [3], None), ("equivocator", [3], None), ("leader-assassin", [], 1)])
def test_sync_byzantine_matrix(strategy, corrupt, budget):
    for seed in range(5):
        sim, tr = _smr(seed, slots=4, strategy=strategy, corrupt=corrupt, budget=budget, txs=[{"time": 5 * i, "payload": "%02x" % i} for i in range(8)])
        rep = check_transcript(tr)
        assert rep.passed, (strategy, seed, rep.failures())
        assert rep.metrics["slots_completed"] == 4


# -- weak agreement ------------------------------------------------------------


def test_wba_majority_arithmetic():
    envs = make_envs()
    w = WeakAgreement(envs[4], ("wba",), 0, slots=1)
    txs = []
    for p, bit in ((1, 1), (2, 1), (3, 0)):
        sv = SignedValue(p, bit, envs[p].key.sign_obj(w.tag, bit))
        from nasmr.encoding import canonical_encode

        txs.append(Transaction(canonical_encode(sv)))
    w.smr.epochs.enter(1)
    w.smr.log.write(1, Block.of(txs))
    notes = w.on_child(w.smr)
    assert w.output == 1 and notes[0].extra == "V=3"


def test_wba_ignores_forged_values():
    envs = make_envs()
    w = WeakAgreement(envs[4], ("wba",), 0, slots=1)

    forged = SignedValue(1, 1, envs[2].key.sign_obj(w.tag, 1))
    w.smr.epochs.enter(1)
    w.smr.log.write(1, Block.of([Transaction(canonical_encode(forged)), Transaction(b"junk")]))
    w.on_child(w.smr)
    assert w.V == {}


def _wba(seed, inputs, mode, corrupt=(), strategy="crash", scheduler="random"):
    cfg = ScenarioConfig.from_dict(
        {
            "params": {"n": 4, "t_a": 1, "t_s": 1, "kappa": 3},
            "net": {"mode": mode, "delta": 2, "seed": seed, "max_delay": 8},
            "adversary": {"strategy": strategy, "scheduler": scheduler, "corrupt": list(corrupt)},
            "protocol": {"name": "wba", "slots": 2, "inputs": list(inputs)},
        }
    )
    return run(cfg)


def _wba_outputs(tr):
    ctx = Context(tr.config, tr.records)
    return {e.src: (e.value(), e.time) for e in ctx.honest_notes("output", "wba")}


def test_wba_sync_unanimous_after_first_slot():
    sim, tr = _wba(1, [1, 1, 1, 1], "sync")
    outs = _wba_outputs(tr)
    first_slot_end = max(r[1] for r in tr.records if r[2] == "output" and "/slot/1" in r[6])
    assert {v for v, _ in outs.values()} == {1} and len(outs) == 4
    assert all(t <= first_slot_end for _, t in outs.values())


def test_wba_async_unanimous_honest_value_wins():
    for seed in range(10):
        sim, tr = _wba(seed, [0, 0, 0, 1], "async", corrupt=[4], strategy="equivocator")
        outs = _wba_outputs(tr)
        assert outs and {v for v, _ in outs.values()} == {0}
