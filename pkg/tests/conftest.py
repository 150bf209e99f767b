import sys

import pytest

from nasmr.crypto import KeyRegistry
from nasmr.protocols.base import Env
from nasmr.types import ProtocolParams


def make_env(me, n=4, t_a=1, t_s=1, kappa=4, registry=None, delta=1, mode="sync", clock=None, verifiers=None):
    params = ProtocolParams(n, t_a, t_s, kappa, enforce_bound=False)
    registry = registry or KeyRegistry(n)
    env = Env(me, params, registry.issue(me), registry, delta=delta, mode=mode)
    if clock is not None:
        env.clock = clock
    if verifiers is not None:
        env._verifiers = verifiers
    return env


def make_envs(n=4, t_a=1, t_s=1, kappa=4, **kw):
    registry = KeyRegistry(n)
    shared = {}
    return {p: make_env(p, n, t_a, t_s, kappa, registry, verifiers=shared, **kw) for p in range(1, n + 1)}


@pytest.fixture
def envs4():
    return make_envs()


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is not None and acc.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acc.LINES:
            terminalreporter.write_line(line)
