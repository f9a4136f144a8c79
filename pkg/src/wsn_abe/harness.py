"""Deterministic scenario runner.

A scenario is a JSON document (see ``SimConfig.from_dict``) describing a
deployment, a user roster and a script of actions. Running it yields a
``Transcript``: every message, abort, verdict and attack report as an
ordered event. Channels are in-process; time is a logical clock that only
moves on ``deliver`` (one tick) and ``delay`` / ``replay`` actions.

All randomness comes from one ``random.Random(seed)``. Draw order: predeploy
(see ``protocol.predeploy``), then per action in script order: register
(r_i, y_i, polynomial coefficients), login (n_i, nonce), base-station
forward (nonce), cluster-head reply (nonce).
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import access_tree as at
from . import adversary, ecc, protocol
from .crypto_prims import decode_fields, encode_fields, sym_decrypt, sym_encrypt
from .errors import ConfigError, IndexOutOfRange, PointNotOnCurve, SchemeError
from .protocol import AuthForward, AuthReply, LoginRequest, LogicalClock

PUBLIC_KINDS = ("LoginRequest", "AuthForward", "AuthReply")
DEFAULT_DELTA_T = 5
OPS = ("register", "login", "deliver", "session", "delay", "replay", "tamper", "attack")


@dataclass(frozen=True)
class UserSpec:
    name: str
    password: str
    tree: at.Node

    @property
    def user_id(self) -> bytes:
        return self.name.encode()


@dataclass
class SimConfig:
    curve: ecc.CurveParams
    mode: str
    patches: frozenset
    m: int
    m_prime: int
    universe: list
    users: dict
    actions: list
    cluster_attrs: list | None = None
    sensors: list = field(default_factory=list)
    delta_t: int = DEFAULT_DELTA_T
    seed: int = 0
    ch_lifetime: int = protocol.DEFAULT_CH_LIFETIME
    sensor_data: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)
    name: str = "scenario"

    @classmethod
    def from_dict(cls, d: dict) -> SimConfig:
        try:
            mode = d.get("mode", "patched")
            patches = protocol.resolve_patches(mode, d.get("defects"))
            users = {}
            for u in d.get("users", []):
                if u["id"] in users:
                    raise ConfigError(f"duplicate roster entry {u['id']!r}")
                users[u["id"]] = UserSpec(u["id"], u["password"], at.tree_from_obj(u["tree"]))
            cfg = cls(
                curve=ecc.load_curve(d.get("curve", "toy17")),
                mode=mode,
                patches=patches,
                m=int(d["m"]),
                m_prime=int(d.get("m_prime", 0)),
                universe=list(d["universe"]),
                users=users,
                actions=list(d.get("actions", [])),
                cluster_attrs=d.get("cluster_attrs"),
                sensors=list(d.get("sensors", [])),
                delta_t=int(d.get("delta_t", DEFAULT_DELTA_T)),
                seed=int(d.get("seed", 0)),
                ch_lifetime=int(d.get("ch_lifetime", protocol.DEFAULT_CH_LIFETIME)),
                sensor_data=dict(d.get("sensor_data", {})),
                expect=dict(d.get("expect", {})),
                name=str(d.get("name", "scenario")),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad scenario: {exc!r}") from exc
        cfg.check_references()
        return cfg

    @classmethod
    def load(cls, path) -> SimConfig:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
        return cls.from_dict(data)

    def check_references(self) -> None:
        deployed, _ = protocol.cluster_ids(self.m, self.m_prime)
        for i, act in enumerate(self.actions):
            op = act.get("op")
            if op not in OPS:
                raise ConfigError(f"action {i}: unknown op {op!r}")
            if op in ("register", "login", "session") and act.get("user") not in self.users:
                raise ConfigError(f"action {i}: unknown user {act.get('user')!r}")
            if op == "attack":
                kind = act.get("kind")
                if kind not in ("insider", "capture", "leak", "retarget"):
                    raise ConfigError(f"action {i}: unknown attack {kind!r}")
                if kind == "insider" and act.get("user") not in self.users:
                    raise ConfigError(f"action {i}: unknown user {act.get('user')!r}")
                if kind in ("capture", "leak", "retarget") and act.get("ch") not in deployed:
                    raise ConfigError(f"action {i}: unknown cluster head {act.get('ch')!r}")
            if op == "deliver" and act.get("to") is not None:
                if act["to"] not in deployed + ["BS"] and act["to"] not in self.users:
                    raise ConfigError(f"action {i}: unknown recipient {act['to']!r}")


@dataclass(frozen=True)
class Event:
    seq: int
    tick: int
    actor: str
    kind: str
    channel: str  # public | secure | local
    to: str | None = None
    payload: bytes | None = None
    report: dict | None = None

    def to_dict(self) -> dict:
        d = {"seq": self.seq, "tick": self.tick, "actor": self.actor, "kind": self.kind,
             "channel": self.channel}
        if self.to is not None:
            d["to"] = self.to
        if self.payload is not None:
            d["payload"] = self.payload.hex()
        if self.report is not None:
            d["report"] = self.report
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Event:
        payload = bytes.fromhex(d["payload"]) if "payload" in d else None
        return cls(d["seq"], d["tick"], d["actor"], d["kind"], d["channel"], d.get("to"),
                   payload, d.get("report"))


@dataclass
class Transcript:
    events: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def __getitem__(self, i) -> Event:
        return self.events[i]

    def to_json(self) -> str:
        return json.dumps([e.to_dict() for e in self.events], sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> Transcript:
        return cls([Event.from_dict(d) for d in json.loads(text)])

    def of_kind(self, kind: str) -> list:
        return [e for e in self.events if e.kind == kind]

    def abort_codes(self) -> list:
        return [e.report["error"] for e in self.events if e.kind == "Abort"]


@dataclass(frozen=True)
class ViewMessage:
    """What a passive eavesdropper records: position, time, type and raw bytes."""
    seq: int
    tick: int
    kind: str
    payload: bytes


def eavesdrop_view(t: Transcript) -> list:
    return [ViewMessage(e.seq, e.tick, e.kind, e.payload)
            for e in t.events if e.channel == "public" and e.kind in PUBLIC_KINDS]


@dataclass
class _Pending:
    seq: int
    kind: str
    to: str
    data: bytes


class Simulation:
    """Owns every entity of one scenario and executes its script."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.params = config.curve
        self.rng = random.Random(config.seed)
        self.clock = LogicalClock()
        self.transcript = Transcript()
        self.pending: list[_Pending] = []
        self.cards: dict[str, protocol.SmartCard] = {}
        self.sessions: dict[str, protocol.UserSession] = {}
        self.requested_data: dict[bytes, bytes] = {}
        self.intercepted: dict[str, protocol.RegistrationRequest] = {}
        self.captured: dict[str, adversary.CapturedChSecrets] = {}
        self.by_id = {u.user_id: name for name, u in config.users.items()}
        self.bs = None
        self.chs: dict[str, protocol.ClusterHeadState] = {}
        self.sensors: list = []
        self._predeploy()

    # -- bookkeeping --------------------------------------------------------

    def emit(self, actor, kind, channel="local", to=None, payload=None, report=None) -> Event:
        ev = Event(len(self.transcript), self.clock.now, actor, kind, channel, to, payload, report)
        self.transcript.events.append(ev)
        return ev

    def abort(self, actor: str, exc: SchemeError, step: str) -> None:
        self.emit(actor, "Abort", report={"error": exc.code, "detail": str(exc), "step": step})

    def _predeploy(self) -> None:
        cfg = self.config
        try:
            self.bs, heads, self.sensors = protocol.predeploy(
                self.params, cfg.m, cfg.m_prime, cfg.universe, cfg.cluster_attrs, self.rng,
                sensors=cfg.sensors, clock=self.clock, ch_lifetime=cfg.ch_lifetime, patches=cfg.patches)
        except SchemeError as exc:
            self.abort("BS", exc, "predeploy")
            return
        self.chs = {ch.cid: ch for ch in heads}
        self.emit("BS", "Predeploy", report={
            "curve": self.params.name, "mode": cfg.mode, "patches": sorted(cfg.patches),
            "m": cfg.m, "m_prime": cfg.m_prime, "universe": sorted(cfg.universe),
            "sensors": len(self.sensors)})

    @property
    def deployed(self) -> bool:
        return self.bs is not None

    # -- actions --------------------------------------------------------------

    def run(self) -> Transcript:
        for act in self.config.actions:
            if not self.deployed:
                break
            getattr(self, f"_do_{act['op']}")(act)
        return self.transcript

    def _do_register(self, act) -> None:
        spec = self.config.users[act["user"]]
        password = act.get("password", spec.password).encode()
        request, r = protocol.register_client(spec.user_id, password, self.rng)
        self.emit(spec.name, "RegistrationRequest", channel="secure", to="BS",
                  payload=encode_fields([request.user_id, request.rpw]))
        before = self.bs.counters["s_iu_hash"]
        tree = at.tree_from_obj(act["tree"]) if "tree" in act else spec.tree
        try:
            card = protocol.register_bs(self.bs, request, tree, self.clock, self.rng)
        except SchemeError as exc:
            self.abort("BS", exc, "register")
            return
        card.r = r
        self.cards[spec.name] = card
        self.intercepted[spec.name] = request
        self.emit("BS", "CardIssued", channel="secure", to=spec.name, report={
            "user": spec.name, "pairs": len(card.pairs),
            "hash_ops": self.bs.counters["s_iu_hash"] - before, "TSU_i": card.tsu})

    def _do_login(self, act) -> bool:
        spec = self.config.users[act["user"]]
        card = self.cards.get(spec.name)
        if card is None:
            raise ConfigError(f"user {spec.name!r} logs in before registering")
        password = act.get("password", spec.password).encode()
        try:
            req, session = protocol.login(card, spec.user_id, password, act["ch"], self.clock,
                                          self.rng, self.params)
        except SchemeError as exc:
            self.abort(spec.name, exc, "login")
            return False
        self.sessions[spec.name] = session
        data = act.get("data", self.config.sensor_data.get(act["ch"]))
        if data is not None:
            self.requested_data[spec.user_id] = data.encode()
        else:
            self.requested_data.pop(spec.user_id, None)
        self._send(spec.name, "LoginRequest", "BS", req.to_bytes(self.params))
        return True

    def _send(self, actor, kind, to, data) -> None:
        ev = self.emit(actor, kind, channel="public", to=to, payload=data)
        self.pending.append(_Pending(ev.seq, kind, to, data))

    def _do_deliver(self, act) -> None:
        for _ in range(int(act.get("count", 1))):
            if not self.pending:
                return
            msg = self.pending.pop(0)
            self.clock.advance(1)
            self._receive(act.get("to", msg.to), msg.data)

    def _do_session(self, act) -> None:
        if not self._do_login(act):
            return
        for _ in range(3):
            if not self.pending:
                return
            self._do_deliver({})

    def _do_delay(self, act) -> None:
        self.clock.advance(int(act["ticks"]))

    def _do_tamper(self, act) -> None:
        if not self.pending:
            raise ConfigError("tamper with no message in flight")
        msg = self.pending[0]
        nbits = 8 * len(msg.data)
        bit = int(act["bit"])
        if not -nbits <= bit < nbits:
            raise ConfigError(f"bit {bit} outside a {nbits}-bit message")
        bit %= nbits
        data = bytearray(msg.data)
        data[bit // 8] ^= 0x80 >> (bit % 8)
        msg.data = bytes(data)
        self.emit("adversary", "Tamper", report={"target": msg.seq, "bit": bit})

    def _do_replay(self, act) -> None:
        index = int(act["index"])
        if "at" in act:
            tick = int(act["at"])
        else:
            if not 0 <= index < len(self.transcript):
                raise IndexOutOfRange(index)
            tick = self.transcript[index].tick + int(act.get("after", 0))
        self.replay_check(index, tick)

    def _do_attack(self, act) -> None:
        getattr(self, f"_attack_{act['kind']}")(act)

    # -- message processing -------------------------------------------------------

    def _decode(self, data: bytes, recipient: str):
        try:
            return protocol.decode_message(data, self.params)
        except (SchemeError, PointNotOnCurve) as exc:
            self.abort(recipient, exc, "decode")
            return None

    def _receive(self, recipient: str, data: bytes) -> None:
        msg = self._decode(data, recipient)
        if msg is None:
            return
        try:
            if recipient == "BS" and isinstance(msg, LoginRequest):
                fwd = protocol.bs_authenticate(self.bs, msg, self.clock, self.rng, self.config.patches)
                self._send("BS", "AuthForward", fwd.route, fwd.to_bytes())
            elif recipient in self.chs and isinstance(msg, AuthForward):
                ch = self.chs[recipient]
                ctx = protocol.ch_verify(ch, msg, self.clock, self.config.delta_t, self.config.patches)
                self.emit(recipient, "BSAuthenticated", report={"T_BS": ctx.t_bs})
                data_out = self.requested_data.get(ctx.user_id,
                                                   f"reading:{ch.cid}:{self.clock.now}".encode())
                reply = protocol.ch_encrypt_reply(ch, ctx, data_out, self.clock, self.rng)
                self._send(recipient, "AuthReply", self.by_id.get(ctx.user_id, ctx.user_id.hex()),
                           reply.to_bytes(self.params))
            elif recipient in self.config.users and isinstance(msg, AuthReply):
                plaintext = self._user_decrypt(recipient, msg)
                self.emit(recipient, "DecryptionSuccess", payload=plaintext)
            else:
                raise ConfigError(f"{recipient} cannot process {type(msg).__name__}")
        except ConfigError:
            raise
        except SchemeError as exc:
            self.abort(recipient, exc, type(msg).__name__)

    def _user_decrypt(self, user: str, reply: AuthReply) -> bytes:
        session = self.sessions.get(user)
        if session is None:
            raise ConfigError(f"reply for {user!r} without an open session")
        return protocol.user_decrypt(self.cards[user], session, reply, self.clock,
                                     self.config.delta_t, self.params)

    # -- replay --------------------------------------------------------------------

    def replay_check(self, index: int, tick: int) -> dict:
        """Re-inject the bytes of public event ``index`` at ``tick`` and record the verdict.

        The receiver runs its checks only; nothing further is sent.
        """
        if not 0 <= index < len(self.transcript):
            raise IndexOutOfRange(f"no event {index}")
        ev = self.transcript[index]
        if ev.channel != "public" or ev.kind not in PUBLIC_KINDS:
            raise IndexOutOfRange(f"event {index} is not a public-channel message")
        try:
            self.clock.set(tick)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        verdict = {"index": index, "kind": ev.kind, "to": ev.to, "original_tick": ev.tick,
                   "tick": tick, "verdict": "accept", "error": None}
        try:
            msg = protocol.decode_message(ev.payload, self.params)
            if isinstance(msg, LoginRequest):
                protocol.bs_authenticate(self.bs, msg, self.clock, self.rng, self.config.patches)
            elif isinstance(msg, AuthForward):
                protocol.ch_verify(self.chs[ev.to], msg, self.clock, self.config.delta_t,
                                   self.config.patches)
            else:
                self._user_decrypt(ev.to, msg)
        except SchemeError as exc:
            verdict.update(verdict="reject", error=exc.code)
        self.emit("adversary", "ReplayVerdict", report=verdict)
        return verdict

    # -- attacks ----------------------------------------------------------------------

    def _attack_insider(self, act) -> None:
        name = act["user"]
        if name not in self.cards:
            raise ConfigError(f"insider attack on unregistered user {name!r}")
        if "dictionary_file" in act:
            words = adversary.load_dictionary(act["dictionary_file"])
        else:
            words = [w.encode() for w in act["dictionary"]]
        stolen = adversary.steal_card(self.cards[name])
        report = adversary.insider_guess_password(stolen, self.intercepted[name], words)
        out = report.to_dict()
        out["user"] = name
        if report.recovered:
            try:
                protocol.login(stolen.card, self.intercepted[name].user_id, report.password,
                               stolen.card.pairs[0][1], self.clock, self.rng, self.params)
                out["impersonation"] = "accepted"
            except SchemeError as exc:
                out["impersonation"] = f"rejected:{exc.code}"
        self.emit("adversary", "InsiderReport", report=out)

    def _attack_capture(self, act) -> None:
        secrets = adversary.capture_cluster_head(self.chs[act["ch"]])
        self.captured[act["ch"]] = secrets
        st = secrets.state
        self.emit("adversary", "CaptureReport", report={
            "ch": st.cid, "MK_CHu": st.mk.hex(), "I_u": sorted(st.attrs), "T_CHu": st.t_ch,
            "W_CHu": st.w_ch, "B_u": ecc.encode_point(st.B, self.params).hex()})

    def _captured(self, cid: str) -> adversary.CapturedChSecrets:
        if cid not in self.captured:
            raise ConfigError(f"cluster head {cid} has not been captured")
        return self.captured[cid]

    def _attack_leak(self, act) -> None:
        secrets = self._captured(act["ch"])
        leaked, failed = [], 0
        for msg in eavesdrop_view(self.transcript):
            if msg.kind != "AuthForward":
                continue
            try:
                rec = adversary.decrypt_forward_with_captured_key(secrets, msg.payload, self.params)
            except SchemeError:
                failed += 1
                continue
            leaked.append({"index": msg.seq, "ID_i": rec["ID_i"].decode(errors="replace"),
                           "CIDu": rec["CIDu"], "TSU_i": rec["TSU_i"], "T_BS": rec["T_BS"]})
        self.emit("adversary", "LeakReport", report={"ch": act["ch"], "leaked": leaked,
                                                     "undecryptable": failed})

    def _attack_retarget(self, act) -> None:
        """Rewrite the CIDu inside an overheard forward and feed it to the captured head."""
        secrets = self._captured(act["ch"])
        ev = self.transcript[int(act["index"])]
        fields = decode_fields(sym_decrypt(secrets.mk, AuthForward.from_bytes(ev.payload).enc))
        fields[1] = act["cid"].encode()
        forged = AuthForward(sym_encrypt(secrets.mk, self.rng.randbytes(8), encode_fields(fields)))
        report = {"index": ev.seq, "ch": act["ch"], "cid": act["cid"], "verdict": "accept", "error": None}
        try:
            protocol.ch_verify(self.chs[act["ch"]], forged, self.clock, self.config.delta_t,
                               self.config.patches)
        except SchemeError as exc:
            report.update(verdict="reject", error=exc.code)
            self.abort(act["ch"], exc, "AuthForward")
        self.emit("adversary", "RetargetReport", report=report)


def run_scenario(config: SimConfig) -> Transcript:
    return Simulation(config).run()


def replay_check(sim: Simulation, index: int, tick: int) -> dict:
    return sim.replay_check(index, tick)


def check_expectations(config: SimConfig, t: Transcript) -> list[str]:
    """Compare a transcript with the scenario's ``expect`` block; empty means satisfied.

    Keys: ``aborts`` (exact ordered list of abort codes; default none),
    ``decryptions`` (count of DecryptionSuccess), ``verdicts`` (ordered
    accept/reject list of replay verdicts).
    """
    problems = []
    exp = config.expect
    aborts = t.abort_codes()
    if aborts != list(exp.get("aborts", [])):
        problems.append(f"aborts {aborts} != expected {exp.get('aborts', [])}")
    if "decryptions" in exp and len(t.of_kind("DecryptionSuccess")) != exp["decryptions"]:
        problems.append(f"decryptions {len(t.of_kind('DecryptionSuccess'))} != {exp['decryptions']}")
    if "verdicts" in exp:
        got = [e.report["verdict"] for e in t.of_kind("ReplayVerdict")]
        if got != list(exp["verdicts"]):
            problems.append(f"replay verdicts {got} != {exp['verdicts']}")
    return problems


def shipped_scenarios() -> dict:
    """Name -> path of the scenario fixtures bundled with the package."""
    root = resources.files("wsn_abe") / "scenarios"
    return {p.name.removesuffix(".json"): Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}
