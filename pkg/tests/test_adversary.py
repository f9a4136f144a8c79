import hashlib
import inspect
import random

import pytest
from conftest import World

from wsn_abe import adversary, protocol
from wsn_abe.access_tree import Leaf
from wsn_abe.ecc import TOY17
from wsn_abe.errors import AuthFailure, UnknownClusterHead


def _rpw_oracle(user_id, r, pw):
    enc = b"".join(len(f).to_bytes(4, "big") + f for f in (user_id, r, pw))
    return hashlib.sha256(enc).digest()


def test_insider_examples():
    w = World()
    card = w.register(b"alice", b"hunter2")
    stolen = adversary.steal_card(card)
    req = w.requests[b"alice"]
    words = [b"abc", b"hunter2", b"pass123"]
    # the oracle agrees that only the second candidate matches
    assert [_rpw_oracle(b"alice", card.r, pw) == req.rpw for pw in words] == [False, True, False]
    report = adversary.insider_guess_password(stolen, req, words)
    assert report.recovered and report.password == b"hunter2" and report.attempts == 2
    assert report.dictionary_size == 3

    miss = adversary.insider_guess_password(stolen, req, [b"abc", b"pass123", b"qwerty"])
    assert not miss.recovered and miss.password is None and miss.attempts == 3
    assert miss.to_dict()["recovered"] is False

    # the recovered password logs in as the victim
    lreq, sess = w.login(stolen.card, b"alice", report.password)
    assert w.verify(w.forward(lreq)).user_id == b"alice"


def test_stolen_card_is_identical_copy(world):
    card = world.register()
    stolen = adversary.steal_card(card)
    assert stolen.card == card and stolen.card is not card


def test_insider_never_returns_wrong_password():
    # 10^4 random (ID, PW, r) triples, each against a small dictionary holding the truth
    rng = random.Random(77)
    for trial in range(10_000):
        user_id = rng.randbytes(rng.randrange(1, 9))
        r = rng.randbytes(16)
        words = [rng.randbytes(rng.randrange(1, 7)) for _ in range(4)]
        truth = words[trial % 4]
        rpw = _rpw_oracle(user_id, r, truth)
        card = protocol.SmartCard(TOY17.G, 0, Leaf("a"), b"", {}, TOY17.G, "sha256", [], r)
        report = adversary.insider_guess_password(adversary.StolenCardView(card),
                                                  protocol.RegistrationRequest(user_id, rpw), words)
        assert report.password == truth
        assert report.attempts == words.index(truth) + 1


def test_load_dictionary(tmp_path):
    path = tmp_path / "words.txt"
    path.write_text("abc\n\nhunter2\r\npässwort\n", encoding="utf-8")
    assert adversary.load_dictionary(path) == [b"abc", b"hunter2", "pässwort".encode()]


def test_capture_cluster_head():
    w = World()
    s1 = adversary.capture_cluster_head(w.chs["CH1"])
    s2 = adversary.capture_cluster_head(w.chs["CH2"])
    assert s1.mk == w.bs.clusters["CH1"].mk
    assert s1.mk != s2.mk
    st = s1.state
    rec = w.bs.clusters["CH1"]
    assert (st.B, st.t_ch, st.w_ch, st.attrs) == (rec.B, rec.t_ch, rec.w_ch, rec.attrs)


def test_decrypt_forward_with_captured_key():
    w = World()
    card = w.register()
    secrets = adversary.capture_cluster_head(w.chs["CH1"])
    req, sess = w.login(card)
    fwd = w.forward(req)
    leaked = adversary.decrypt_forward_with_captured_key(secrets, fwd, TOY17)
    assert leaked["ID_i"] == b"alice" and leaked["CIDu"] == "CH1" and leaked["TSU_i"] == card.tsu
    # raw wire bytes work too
    assert adversary.decrypt_forward_with_captured_key(secrets, fwd.to_bytes(), TOY17) == leaked
    req2, _ = w.login(card, cid="CH2")
    with pytest.raises(AuthFailure):
        adversary.decrypt_forward_with_captured_key(secrets, w.forward(req2), TOY17)


def test_storage_report_examples():
    one = adversary.storage_report(100, 100, 1)
    assert (one.pairs_per_card, one.hash_ops_per_card, one.total_hash_ops) == (200, 200, 200)
    assert adversary.storage_report(100, 100, 37).total_hash_ops == 37 * 200
    zero = adversary.storage_report(0, 0, 5)
    assert (zero.pairs_per_card, zero.hash_ops_per_card, zero.total_hash_ops) == (0, 0, 0)


def test_storage_report_matches_registration_counter():
    bs, _, _ = protocol.predeploy(TOY17, 7, 3, ["a"], None, random.Random(0))
    rng, clock = random.Random(1), protocol.LogicalClock()
    for i in range(4):
        req, _ = protocol.register_client(f"u{i}".encode(), b"p", rng)
        protocol.register_bs(bs, req, Leaf("a"), clock, rng)
    assert bs.counters["s_iu_hash"] == adversary.storage_report(7, 3, 4).total_hash_ops


def test_rekey_cost_report():
    w = World(m=3, m_prime=0)
    assert adversary.rekey_cost_report(w.bs, [], "CH1").affected_cards == 0
    cards = [w.register(f"user{i}".encode(), b"pw", Leaf("doctor")) for i in range(7)]
    report = adversary.rekey_cost_report(w.bs, cards, "CH2")
    assert (report.affected_cards, report.recomputed_pairs) == (7, 7)
    with pytest.raises(UnknownClusterHead):
        adversary.rekey_cost_report(w.bs, cards, "CH9")


def test_attacks_never_take_base_station_state():
    attacks = [adversary.steal_card, adversary.insider_guess_password, adversary.capture_cluster_head,
               adversary.decrypt_forward_with_captured_key, adversary.storage_report]
    for fn in attacks:
        for param in inspect.signature(fn).parameters.values():
            assert "BaseStationState" not in str(param.annotation), fn.__name__
    sig = inspect.signature(adversary.rekey_cost_report)
    assert "BaseStationState" in str(sig.parameters["bs"].annotation)
