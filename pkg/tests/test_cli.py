import json
import subprocess
import sys

import pytest

from wsn_abe.cli import main
from wsn_abe.harness import Transcript


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_run_fixture_by_name(capsys, tmp_path):
    out = tmp_path / "t.json"
    code, cap = _run(capsys, "run", "--scenario", "honest_session", "--out", str(out))
    assert code == 0
    summary = json.loads(cap.out)
    assert summary["expectations_met"] and summary["decryptions"] == 1
    t = Transcript.from_json(out.read_text())
    assert t[-1].kind == "DecryptionSuccess"


def test_run_strict_fixture_is_expected_abort(capsys):
    code, cap = _run(capsys, "run", "--scenario", "strict_d1")
    assert code == 0
    assert set(json.loads(cap.out)["aborts"]) == {"UnresolvableKeyLookup"}


def test_run_mode_override_breaks_expectations(capsys):
    code, cap = _run(capsys, "run", "--scenario", "honest_session", "--mode", "strict")
    assert code == 1
    assert json.loads(cap.out)["aborts"] == ["UnresolvableKeyLookup"]
    code, cap = _run(capsys, "run", "--scenario", "honest_session", "--mode", "strict", "--defects", "D1")
    assert json.loads(cap.out)["aborts"] == ["MissingStoredSecret"]


def test_run_config_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"mode": "patched"}')
    assert _run(capsys, "run", "--scenario", str(bad))[0] == 2
    assert _run(capsys, "run", "--scenario", "no_such_fixture")[0] == 2


def test_predeploy(capsys, tmp_path):
    out = tmp_path / "state.json"
    code, _ = _run(capsys, "predeploy", "--m", "3", "--m-prime", "2", "--sensors", "2", "--seed", "4",
                   "--out", str(out))
    assert code == 0
    state = json.loads(out.read_text())
    assert len(state["cluster_heads"]) == 3 and len(state["sensors"]) == 2
    code, cap = _run(capsys, "predeploy", "--curve", "p160", "--m", "1")
    assert code == 0 and json.loads(cap.out)["base_station"]


def test_replay(capsys):
    code, cap = _run(capsys, "replay", "--scenario", "honest_session", "--index", "4", "--after", "1")
    assert code == 0 and json.loads(cap.out)["verdict"] == "accept"
    code, cap = _run(capsys, "replay", "--scenario", "honest_session", "--index", "4", "--at", "50")
    assert json.loads(cap.out)["error"] == "StaleTimestamp"
    assert _run(capsys, "replay", "--scenario", "honest_session", "--index", "99")[0] == 2


def test_attack_insider(capsys, tmp_path):
    words = tmp_path / "words.txt"
    words.write_text("password\n123456\nhunter2\n")
    code, cap = _run(capsys, "attack", "insider", "--dictionary", str(words))
    report = json.loads(cap.out)
    assert code == 0 and report["attempts"] == 3 and report["true_password_found"]
    code, cap = _run(capsys, "attack", "insider", "--dictionary", str(words), "--password", "zzz")
    assert json.loads(cap.out)["recovered"] is False


def test_attack_capture(capsys):
    code, cap = _run(capsys, "attack", "capture", "--scenario", "node_capture", "--ch", "CH1")
    report = json.loads(cap.out)
    assert code == 0 and len(report["leaked"]) == 10 and report["undecryptable"] == 2
    assert _run(capsys, "attack", "capture", "--scenario", "node_capture", "--ch", "CH7")[0] == 2


def test_analyze(capsys):
    code, cap = _run(capsys, "analyze", "storage", "--users", "3")
    assert code == 0 and json.loads(cap.out)["total_hash_ops"] == 600
    code, cap = _run(capsys, "analyze", "rekey", "--users", "7", "--ch", "CH2")
    assert json.loads(cap.out)["affected_cards"] == 7
    assert _run(capsys, "analyze", "rekey", "--ch", "CH99")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wsn_abe", "analyze", "storage"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["pairs_per_card"] == 200


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
