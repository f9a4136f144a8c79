"""Command-line entry point: ``wsn-abe <command> ...``.

Exit codes: 0 on completion (including aborts the scenario declares as
expected), 1 when a scenario's expectations are not met, 2 on config errors.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import access_tree as at
from . import adversary, ecc, harness, protocol
from .errors import ConfigError, IndexOutOfRange, SchemeError

EXIT_OK, EXIT_EXPECTATION, EXIT_CONFIG = 0, 1, 2


def _common(p: argparse.ArgumentParser, scenario: bool = False) -> None:
    p.add_argument("--curve", help="toy17, p160, or a curve parameter file")
    p.add_argument("--mode", choices=("strict", "patched"))
    p.add_argument("--defects", help="comma-separated defects to patch, e.g. D1,D2")
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--m-prime", type=int, dest="m_prime")
    p.add_argument("--delta-t", type=int, dest="delta_t")
    p.add_argument("--out", help="write JSON output (transcript or state) here")
    if scenario:
        p.add_argument("--scenario", required=True, help="scenario JSON file or shipped fixture name")


def _parse_defects(text):
    if text is None:
        return None
    return [d.strip() for d in text.split(",") if d.strip()]


def _load_scenario(args) -> harness.SimConfig:
    path = Path(args.scenario)
    if not path.is_file():
        shipped = harness.shipped_scenarios()
        if args.scenario not in shipped:
            raise ConfigError(f"no scenario file or fixture named {args.scenario!r}")
        path = shipped[args.scenario]
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    for key in ("curve", "mode", "seed", "m", "m_prime", "delta_t"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    if args.defects is not None:
        raw["defects"] = _parse_defects(args.defects)
    elif args.mode is not None:
        raw.pop("defects", None)
    return harness.SimConfig.from_dict(raw)


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _summary(cfg: harness.SimConfig, t: harness.Transcript) -> dict:
    problems = harness.check_expectations(cfg, t)
    return {"scenario": cfg.name, "mode": cfg.mode, "patches": sorted(cfg.patches),
            "events": len(t), "aborts": t.abort_codes(),
            "decryptions": len(t.of_kind("DecryptionSuccess")),
            "expectations_met": not problems, "problems": problems}


def cmd_predeploy(args) -> int:
    params = ecc.load_curve(args.curve or "toy17")
    patches = protocol.resolve_patches(args.mode or "patched", _parse_defects(args.defects))
    universe = [a.strip() for a in args.universe.split(",") if a.strip()]
    rng = random.Random(args.seed or 0)
    bs, heads, nodes = protocol.predeploy(
        params, args.m if args.m is not None else 2, args.m_prime or 0, universe, None, rng,
        sensors=[universe] * args.sensors, patches=patches)
    state = {"base_station": protocol.bs_to_dict(bs),
             "cluster_heads": [protocol.ch_to_dict(ch) for ch in heads],
             "sensors": [protocol.sensor_to_dict(s) for s in nodes]}
    text = json.dumps(state, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load_scenario(args)
    t = harness.run_scenario(cfg)
    if args.out:
        Path(args.out).write_text(t.to_json() + "\n")
    summary = _summary(cfg, t)
    _emit(summary)
    return EXIT_OK if summary["expectations_met"] else EXIT_EXPECTATION


def cmd_replay(args) -> int:
    cfg = _load_scenario(args)
    sim = harness.Simulation(cfg)
    sim.run()
    if args.at is not None:
        tick = args.at
    else:
        if not 0 <= args.index < len(sim.transcript):
            raise IndexOutOfRange(f"no event {args.index}")
        tick = max(sim.clock.now, sim.transcript[args.index].tick + args.after)
    verdict = sim.replay_check(args.index, tick)
    if args.out:
        Path(args.out).write_text(sim.transcript.to_json() + "\n")
    _emit(verdict)
    return EXIT_OK


def cmd_attack_insider(args) -> int:
    params = ecc.load_curve(args.curve or "toy17")
    rng = random.Random(args.seed or 0)
    words = adversary.load_dictionary(args.dictionary)
    m = args.m if args.m is not None else 2
    bs, _, _ = protocol.predeploy(params, m, args.m_prime or 0, ["a"], None, rng)
    user_id, password = args.user_id.encode(), args.password.encode()
    request, r = protocol.register_client(user_id, password, rng)
    card = protocol.register_bs(bs, request, at.Leaf("a"), protocol.LogicalClock(), rng)
    card.r = r
    report = adversary.insider_guess_password(adversary.steal_card(card), request, words)
    out = report.to_dict()
    out["true_password_found"] = report.password == password
    _emit(out, args.out)
    return EXIT_OK


def cmd_attack_capture(args) -> int:
    cfg = _load_scenario(args)
    sim = harness.Simulation(cfg)
    sim.run()
    if args.ch not in sim.chs:
        raise ConfigError(f"unknown cluster head {args.ch!r}")
    secrets = adversary.capture_cluster_head(sim.chs[args.ch])
    leaked, failed = [], 0
    for msg in harness.eavesdrop_view(sim.transcript):
        if msg.kind != "AuthForward":
            continue
        try:
            rec = adversary.decrypt_forward_with_captured_key(secrets, msg.payload, sim.params)
        except SchemeError:
            failed += 1
            continue
        leaked.append({"index": msg.seq, "ID_i": rec["ID_i"].decode(errors="replace"),
                       "CIDu": rec["CIDu"], "TSU_i": rec["TSU_i"]})
    _emit({"ch": args.ch, "leaked": leaked, "undecryptable": failed}, args.out)
    return EXIT_OK


def cmd_analyze_storage(args) -> int:
    m = args.m if args.m is not None else 100
    m_prime = args.m_prime if args.m_prime is not None else 100
    _emit(adversary.storage_report(m, m_prime, args.users).to_dict(), args.out)
    return EXIT_OK


def cmd_analyze_rekey(args) -> int:
    params = ecc.load_curve(args.curve or "toy17")
    rng = random.Random(args.seed or 0)
    m = args.m if args.m is not None else 5
    bs, _, _ = protocol.predeploy(params, m, args.m_prime or 0, ["a"], None, rng)
    clock = protocol.LogicalClock()
    cards = []
    for i in range(args.users):
        request, r = protocol.register_client(f"user{i}".encode(), b"pw", rng)
        cards.append(protocol.register_bs(bs, request, at.Leaf("a"), clock, rng))
    _emit(adversary.rekey_cost_report(bs, cards, args.ch).to_dict(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsn-abe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predeploy", help="create and dump a deployment's entity states")
    _common(p)
    p.add_argument("--universe", default="doctor,nurse,researcher")
    p.add_argument("--sensors", type=int, default=0)
    p.set_defaults(func=cmd_predeploy)

    p = sub.add_parser("run", help="run a scenario and write its transcript")
    _common(p, scenario=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="run a scenario, then re-inject one public message")
    _common(p, scenario=True)
    p.add_argument("--index", type=int, required=True, help="transcript seq of the message")
    p.add_argument("--at", type=int, help="absolute redelivery tick")
    p.add_argument("--after", type=int, default=0, help="ticks after the original send")
    p.set_defaults(func=cmd_replay)

    attack = sub.add_parser("attack").add_subparsers(dest="attack", required=True)
    p = attack.add_parser("insider", help="offline password guessing from a stolen card")
    _common(p)
    p.add_argument("--dictionary", required=True)
    p.add_argument("--user-id", default="alice")
    p.add_argument("--password", default="hunter2")
    p.set_defaults(func=cmd_attack_insider)
    p = attack.add_parser("capture", help="capture a cluster head and decrypt overheard forwards")
    _common(p, scenario=True)
    p.add_argument("--ch", default="CH1")
    p.set_defaults(func=cmd_attack_capture)

    analyze = sub.add_parser("analyze").add_subparsers(dest="analysis", required=True)
    p = analyze.add_parser("storage", help="smart-card storage and hashing cost")
    _common(p)
    p.add_argument("--users", type=int, default=1)
    p.set_defaults(func=cmd_analyze_storage)
    p = analyze.add_parser("rekey", help="cards touched when a cluster head is replaced")
    _common(p)
    p.add_argument("--users", type=int, default=1)
    p.add_argument("--ch", default="CH1")
    p.set_defaults(func=cmd_analyze_rekey)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IndexOutOfRange, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SchemeError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
