from nasmr.adversary import Adversary, Behavior, MaxDelayScheduler, Scheduler
from nasmr.checks import check_transcript
from nasmr.messages import Value
from nasmr.protocols.base import Protocol, broadcast
from nasmr.scenario import ScenarioConfig, run
from nasmr.sim import NetConfig, Simulator
from nasmr.types import ProtocolParams

P4 = ProtocolParams(4, 1, 1)


class Ping(Protocol):
    def __init__(self, env, inst=("ping",)):
        super().__init__(env, inst)
        self.got = []

    def start(self):
        return broadcast(self.n, Value(self.inst, self.env.me))

    def on_message(self, src, msg):
        self.got.append((self.env.now(), src, msg.value))
        return []


class Fixed(Scheduler):
    def __init__(self, at):
        super().__init__(0)
        self.at = at

    def schedule(self, sim, env):
        return self.at(sim, env), 0


def ping_sim(net, adversary=None, start_at=0, starters=(1, 2, 3, 4)):
    sim = Simulator(P4, net, adversary)
    for p in range(1, 5):
        sim.add_party(p, lambda env, lane: Ping(env))
    for p in starters:
        sim.call(start_at, p, lambda root: root.start())
    return sim


def sends(tr):
    return [r for r in tr.records if r[2] == "send"]


def test_sync_delivery_is_clamped_to_delta():
    sim = ping_sim(NetConfig("sync", delta=10, horizon=200), Adversary(scheduler=Fixed(lambda s, e: s.now + 100)), start_at=3, starters=(1,))
    tr = sim.run()
    got = sim.nodes[2].roots[0].got
    assert got == [(13, 1, 1)]
    assert sim.stats["clamped"] == 3  # everything except the loopback
    assert any("clamped" in r[6] for r in sends(tr))


def test_async_deferral_to_horizon_is_delivered():
    sim = ping_sim(NetConfig("async", delta=1, horizon=50), Adversary(scheduler=Fixed(lambda s, e: s.net.horizon - 1)), starters=(1,))
    sim.run()
    assert sim.nodes[3].roots[0].got == [(49, 1, 1)]


def test_async_delay_past_horizon_is_capped():
    sim = ping_sim(NetConfig("async", delta=1, horizon=50), Adversary(scheduler=Fixed(lambda s, e: 10**6)), starters=(1,))
    sim.run()
    assert sim.nodes[3].roots[0].got == [(50, 1, 1)]


def test_benign_scheduler_is_fifo_per_link():
    sim = ping_sim(NetConfig("sync", delta=5, horizon=100), starters=())
    for t in range(5):
        sim.call(t, 1, lambda root: root.start())
    sim.run()
    got = sim.nodes[2].roots[0].got
    assert [t for t, _, _ in got] == [1, 2, 3, 4, 5]


class Recorder(Behavior):
    def __init__(self):
        super().__init__()
        self.seen_at_send = []

    def outbound(self, sim, adv, src, lane, dst, msg):
        self.seen_at_send.append(sim.stats["delivered"])
        return [(dst, msg, 0)]


def test_honest_deliveries_precede_adversary_in_same_step():
    beh = Recorder()
    adv = Adversary(beh, Fixed(lambda s, e: 5), budget=1, corrupt=[4])
    sim = ping_sim(NetConfig("sync", delta=10, horizon=20), adv, starters=(1,))
    tr = sim.run()
    delivered = [r for r in tr.records if r[2] == "deliver"]
    dsts = [r[4] for r in delivered]
    assert dsts.index(4) > max(i for i, d in enumerate(dsts) if d != 4)
    assert all(r[1] == 5 for r in delivered if r[3] != r[4])


def test_empty_queue_ends_run():
    sim = ping_sim(NetConfig("sync", delta=1, horizon=10**9), starters=())
    tr = sim.run()
    assert sim.now == 0 and not tr.records


def test_same_seed_same_transcript():
    cfg = ScenarioConfig.from_dict({"params": {"n": 4, "t_a": 1, "t_s": 1}, "net": {"mode": "async", "seed": 5}, "protocol": {"name": "acs"}})
    assert run(cfg)[1].to_bytes() == run(cfg)[1].to_bytes()
    assert run(cfg)[1].digest() != run(cfg.with_seed(6))[1].digest()


def test_corruption_budget():
    sim = ping_sim(NetConfig("sync", horizon=20), Adversary(budget=1), starters=())
    sim.schedule_corruption(7, 2)
    sim.schedule_corruption(9, 3)
    tr = sim.run()
    kinds = [(r[2], r[3]) for r in tr.records]
    assert ("corrupt", 2) in kinds and ("corrupt-rejected", 3) in kinds
    assert sim.is_corrupted(2) and not sim.is_corrupted(3)
    assert sim.honest() == [1, 3, 4]


class Flip(Behavior):
    def outbound(self, sim, adv, src, lane, dst, msg):
        return [(dst, Value(msg.inst, -msg.value), 0)]


def test_corrupted_party_messages_are_authored_by_strategy():
    sim = ping_sim(NetConfig("sync", horizon=30), Adversary(Flip(), budget=1), starters=())
    sim.schedule_corruption(7, 2)
    for t in (3, 10):
        sim.call(t, 2, lambda root: root.start())
    sim.run()
    got = [(t, v) for t, src, v in sim.nodes[1].roots[0].got if src == 2]
    assert got == [(4, 2), (11, -2)]


def test_leader_reveal_corruption_is_expressible():
    cfg = ScenarioConfig.from_dict(
        {"params": {"n": 4, "t_a": 1, "t_s": 1, "kappa": 2}, "net": {"seed": 3, "delta": 2}, "protocol": {"name": "bla"}, "adversary": {"strategy": "leader-assassin", "budget": 1}}
    )
    sim, tr = run(cfg)
    reveal = next(r for r in tr.records if r[2] == "oracle-reveal" and r[6].startswith("leader"))
    corrupt = next(r for r in tr.records if r[2] == "corrupt")
    assert corrupt[0] == reveal[0] + 1 and corrupt[1] == reveal[1]
    assert sim.corrupted


def test_all_honest_sync_respects_delta():
    cfg = ScenarioConfig.from_dict({"params": {"n": 4, "t_a": 1, "t_s": 1}, "net": {"mode": "sync", "delta": 3, "seed": 1}, "protocol": {"name": "rbc"}})
    sim, tr = run(cfg)
    rep = check_transcript(tr, only=["sync-bound", "eventual-delivery"])
    assert rep.passed and rep.verdict("sync-bound").status == "pass"
    assert sim.stats["clamped"] == 0


def test_async_max_delay_delivers_everything():
    sim = ping_sim(NetConfig("async", delta=2, horizon=100), Adversary(scheduler=MaxDelayScheduler(0)))
    sim.run()
    assert sim.stats["sent"] == sim.stats["delivered"] == 16


def test_transcript_file_round_trip(tmp_path):
    from nasmr.sim import read_transcript

    cfg = ScenarioConfig.from_dict({"params": {"n": 4, "t_a": 1, "t_s": 1}, "net": {"seed": 2}, "protocol": {"name": "aba"}})
    _, tr = run(cfg)
    path = tmp_path / "t.jsonl"
    tr.write(path)
    config, records, states = read_transcript(path)
    assert config == cfg.to_dict()
    assert len(records) == len(tr.records) and set(states) == {1, 2, 3, 4}
    _, again = run(ScenarioConfig.from_dict(config))
    assert again.to_bytes() == path.read_bytes()
