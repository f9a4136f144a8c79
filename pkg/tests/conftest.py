import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wsn_abe import access_tree as at  # noqa: E402
from wsn_abe import protocol  # noqa: E402
from wsn_abe.ecc import TOY17  # noqa: E402

_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((marker.args[0], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    # parametrized criteria pass only if every case passes
    merged = {}
    for label, outcome, duration in _acceptance:
        ok, total = merged.get(label, (True, 0.0))
        merged[label] = (ok and outcome == "passed", total + duration)
    terminalreporter.section("acceptance criteria")
    for label, (ok, duration) in sorted(merged.items()):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label} ({duration:.2f}s)")


UNIVERSE = ["admin", "doctor", "nurse", "researcher"]
TWO_OF_TWO = at.threshold(2, at.Leaf("doctor"), at.Leaf("nurse"))


class World:
    """A small patched deployment with helpers to run protocol steps by hand."""

    def __init__(self, params=TOY17, m=2, m_prime=1, seed=11, patches=protocol.ALL_PATCHES,
                 cluster_attrs=None, delta_t=5):
        self.params = params
        self.rng = random.Random(seed)
        self.clock = protocol.LogicalClock()
        self.patches = patches
        self.delta_t = delta_t
        self.bs, heads, self.sensors = protocol.predeploy(
            params, m, m_prime, UNIVERSE, cluster_attrs, self.rng, clock=self.clock,
            sensors=[["doctor"]], patches=patches)
        self.chs = {ch.cid: ch for ch in heads}
        self.requests = {}

    def register(self, user_id=b"alice", password=b"hunter2", tree=TWO_OF_TWO):
        req, r = protocol.register_client(user_id, password, self.rng)
        card = protocol.register_bs(self.bs, req, tree, self.clock, self.rng)
        card.r = r
        self.requests[user_id] = req
        return card

    def login(self, card, user_id=b"alice", password=b"hunter2", cid="CH1"):
        return protocol.login(card, user_id, password, cid, self.clock, self.rng, self.params)

    def forward(self, req):
        self.clock.advance()
        return protocol.bs_authenticate(self.bs, req, self.clock, self.rng, self.patches)

    def verify(self, fwd, cid="CH1"):
        self.clock.advance()
        return protocol.ch_verify(self.chs[cid], fwd, self.clock, self.delta_t, self.patches)

    def reply(self, ctx, data=b"reading", cid="CH1"):
        return protocol.ch_encrypt_reply(self.chs[cid], ctx, data, self.clock, self.rng)

    def decrypt(self, card, session, reply):
        self.clock.advance()
        return protocol.user_decrypt(card, session, reply, self.clock, self.delta_t, self.params)

    def session(self, card, data=b"reading", user_id=b"alice", password=b"hunter2", cid="CH1"):
        req, sess = self.login(card, user_id, password, cid)
        ctx = self.verify(self.forward(req), cid)
        return self.decrypt(card, sess, self.reply(ctx, data, cid))


@pytest.fixture
def world():
    return World()
