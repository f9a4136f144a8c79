"""Entity states, wire messages and the protocol phases.

Phases: pre-deployment, registration (client half and base-station half),
login, base-station authentication, cluster-head verification, cluster-head
reply (master-key encryption) and user-side data decryption.

The scheme as published cannot run end to end. Three defects are modelled
with per-defect switches; a defect is either left as written (the run aborts
where the published steps cannot be carried out) or patched minimally:

D1  the base station has no way to pick ``y_i`` for an incoming login.
    Patch: trial decryption over every registered user.
D2  the base station never stores ``R_i`` / ``y_i``.
    Patch: keep a user table ``ID_i -> {y_i, R_i, TSU_i, P_i}``.
D3  the cluster head unmasks ``T_iu`` with ``T_CHu`` instead of ``S_iu``.
    Patch: unmask with ``S_iu``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from . import access_tree as at
from . import ecc
from .crypto_prims import (
    HASH_NAME, AuthCiphertext, decode_fields, decode_ts, derive_sym_key,
    encode_fields, encode_ts, hash_fields, sym_decrypt, sym_encrypt, xor_bytes,
    xor_mask,
)
from .ecc import CurveParams, Point, decode_point, encode_point
from .errors import (
    AccessDenied, AuthFailure, BadCredentials, DuplicateUser, ExpiredClusterHead,
    HashMismatch, MalformedMessage, MissingStoredSecret, StaleReply,
    StaleTimestamp, T1Mismatch, UnknownAttribute, UnknownClusterHead,
    UnresolvableKeyLookup, UserAuthFailed, WrongCluster,
)

DEFECTS = ("D1", "D2", "D3")
ALL_PATCHES = frozenset(DEFECTS)
NO_PATCHES = frozenset()

MAX_ID_LEN = 64
MAX_PASSWORD_LEN = 64
MAX_DATA_LEN = 64 * 1024
R_I_SIZE = 16
KEY_SIZE = 32
NONCE_SIZE = 8
DEFAULT_CH_LIFETIME = 1_000_000
ZERO_MASK = bytes(8)

MSG_LOGIN = 0x01
MSG_FORWARD = 0x02
MSG_REPLY = 0x03


def resolve_patches(mode: str, defects=None) -> frozenset:
    """Patched defects for a run.

    ``defects`` lists the defects to patch; when omitted, ``strict`` patches
    nothing and ``patched`` patches all three.
    """
    if mode not in ("strict", "patched"):
        raise ValueError(f"unknown mode {mode!r}")
    if defects is None:
        return ALL_PATCHES if mode == "patched" else NO_PATCHES
    chosen = frozenset(defects)
    unknown = chosen - ALL_PATCHES
    if unknown:
        raise ValueError(f"unknown defects: {sorted(unknown)}")
    return chosen


class LogicalClock:
    """Monotonic tick counter shared by every entity of one simulation."""

    def __init__(self, now: int = 0):
        self.now = now

    def advance(self, ticks: int = 1) -> int:
        if ticks < 0:
            raise ValueError("clock cannot run backwards")
        self.now += ticks
        return self.now

    def set(self, tick: int) -> int:
        if tick < self.now:
            raise ValueError(f"clock cannot run backwards ({tick} < {self.now})")
        self.now = tick
        return self.now


# -- entity states -------------------------------------------------------------

@dataclass
class ClusterRecord:
    mk: bytes
    b: int
    B: Point
    k_secret: bytes  # K_u, pre-loaded but used by no later step
    t_ch: int
    w_ch: int
    attrs: frozenset


@dataclass
class ReservedCluster:
    cid: str
    mk: bytes


@dataclass
class UserRecord:
    y: int
    R: bytes
    tsu: int
    tree: at.Node


@dataclass
class BaseStationState:
    params: CurveParams
    x: int
    X: Point  # public key, computed but never used afterwards
    attributes: dict  # attr -> AttributeKey
    clusters: dict  # cid -> ClusterRecord
    reserved: list
    users: dict | None  # None when D2 is left as published
    issued: set = field(default_factory=set)  # every ID_i a card was issued to
    counters: Counter = field(default_factory=Counter)

    @property
    def universe(self) -> frozenset:
        return frozenset(self.attributes)


@dataclass
class ClusterHeadState:
    cid: str
    attrs: frozenset
    mk: bytes
    k_secret: bytes
    B: Point
    T: dict  # attr -> T_i for attr in attrs
    t_ch: int
    w_ch: int
    params: CurveParams


@dataclass
class SensorNodeState:
    sid: str
    attrs: frozenset
    mk: bytes


@dataclass
class SmartCard:
    G: Point
    tsu: int
    tree: at.Node
    R: bytes  # stored in the "RU_i" slot
    leaf_keys: dict  # leaf path -> K_iu
    Y: Point
    hash_id: str
    pairs: list  # [(S_iu, CIDu)] of length m + m'
    r: bytes | None = None

    def mask_for(self, cid: str) -> bytes:
        for s_iu, c in self.pairs:
            if c == cid:
                return s_iu
        raise UnknownClusterHead(cid)


@dataclass(frozen=True)
class RegistrationRequest:
    user_id: bytes
    rpw: bytes


@dataclass
class UserSession:
    user_id: bytes
    cid: str
    n_i: int
    N: Point
    SK: Point
    tu: int


@dataclass(frozen=True)
class SessionContext:
    user_id: bytes
    cid: str
    tu: int
    N: Point
    Y: Point
    tsu: int
    t_bs: int


# -- wire messages --------------------------------------------------------------

def _tagged(tag: int, fields) -> bytes:
    return bytes([tag]) + encode_fields(fields)


def _untag(data: bytes, tag: int, count: int) -> list[bytes]:
    if not data or data[0] != tag:
        raise MalformedMessage(f"expected message type {tag:#04x}")
    fields = decode_fields(data[1:])
    if len(fields) != count:
        raise MalformedMessage(f"expected {count} fields, got {len(fields)}")
    return fields


@dataclass(frozen=True)
class LoginRequest:
    N: Point
    enc: AuthCiphertext

    def to_bytes(self, params: CurveParams) -> bytes:
        return _tagged(MSG_LOGIN, [encode_point(self.N, params), self.enc.to_bytes()])

    @classmethod
    def from_bytes(cls, data: bytes, params: CurveParams) -> LoginRequest:
        n_raw, ct = _untag(data, MSG_LOGIN, 2)
        return cls(decode_point(n_raw, params), AuthCiphertext.from_bytes(ct))


@dataclass(frozen=True)
class AuthForward:
    enc: AuthCiphertext
    # destination address set by the base station; routing only, not in the wire bytes
    route: str | None = field(default=None, compare=False)

    def to_bytes(self, params: CurveParams | None = None) -> bytes:
        return _tagged(MSG_FORWARD, [self.enc.to_bytes()])

    @classmethod
    def from_bytes(cls, data: bytes, params: CurveParams | None = None) -> AuthForward:
        (ct,) = _untag(data, MSG_FORWARD, 1)
        return cls(AuthCiphertext.from_bytes(ct))


@dataclass(frozen=True)
class AuthReply:
    M1: AuthCiphertext
    ts_ch: int
    masked: bytes  # T_CHu xor W_CHu
    t_ch: int
    check: bytes
    K2: dict  # attr -> B_u + T_u

    def to_bytes(self, params: CurveParams) -> bytes:
        k2 = []
        for attr in sorted(self.K2):
            k2 += [attr.encode(), encode_point(self.K2[attr], params)]
        return _tagged(MSG_REPLY, [self.M1.to_bytes(), encode_ts(self.ts_ch), self.masked,
                                   encode_ts(self.t_ch), self.check, encode_fields(k2)])

    @classmethod
    def from_bytes(cls, data: bytes, params: CurveParams) -> AuthReply:
        m1, ts, masked, t_ch, check, k2_raw = _untag(data, MSG_REPLY, 6)
        k2_fields = decode_fields(k2_raw)
        if len(k2_fields) % 2 or len(masked) != 8:
            raise MalformedMessage("bad reply layout")
        K2 = {k2_fields[i].decode(): decode_point(k2_fields[i + 1], params)
              for i in range(0, len(k2_fields), 2)}
        return cls(AuthCiphertext.from_bytes(m1), decode_ts(ts), masked, decode_ts(t_ch), check, K2)


def decode_message(data: bytes, params: CurveParams):
    if not data:
        raise MalformedMessage("empty message")
    decoder = {MSG_LOGIN: LoginRequest, MSG_FORWARD: AuthForward, MSG_REPLY: AuthReply}.get(data[0])
    if decoder is None:
        raise MalformedMessage(f"unknown message type {data[0]:#04x}")
    return decoder.from_bytes(data, params)


# -- shared derivations -----------------------------------------------------------

def _s_iu(tsu: int, masked_window: bytes) -> bytes:
    return hash_fields(encode_ts(tsu), masked_window)


def _window(t_ch: int, w_ch: int) -> bytes:
    return xor_bytes(encode_ts(t_ch), encode_ts(w_ch))


def _rpw(user_id: bytes, r: bytes, password: bytes) -> bytes:
    return hash_fields(user_id, r, password)


def _r_i(user_id: bytes, rpw: bytes, tsu: int) -> bytes:
    a_i = hash_fields(user_id, encode_ts(tsu))
    return hash_fields(rpw, a_i)


def _m_i(R: bytes, tu: int, N: Point, params: CurveParams) -> bytes:
    return hash_fields(R, encode_ts(tu), params.encode_coord(N.x))


def _t1(tu: int, t_bs: int) -> bytes:
    return hash_fields(encode_ts(tu), encode_ts(t_bs))


def _session_key(cid: str, user_id: bytes, tu: int, N: Point, ts_ch: int,
                 K3: Point, params: CurveParams) -> bytes:
    k_iu = hash_fields(cid.encode(), user_id, encode_ts(tu), params.encode_coord(N.x), encode_ts(ts_ch))
    return hash_fields(k_iu, encode_point(K3, params))


def _reply_check(user_id: bytes, cid: str, ts_ch: int, M1: AuthCiphertext) -> bytes:
    return hash_fields(user_id, cid.encode(), encode_ts(ts_ch), M1.to_bytes())


def _scalar(rng, n: int) -> int:
    return rng.randrange(1, n)


def _check_len(name: str, value: bytes, limit: int) -> None:
    if len(value) > limit:
        raise ValueError(f"{name} longer than {limit} bytes")


# -- pre-deployment ------------------------------------------------------------------

def cluster_ids(m: int, m_prime: int = 0) -> tuple[list[str], list[str]]:
    return [f"CH{u}" for u in range(1, m + 1)], [f"CH{u}" for u in range(m + 1, m + m_prime + 1)]


def predeploy(params: CurveParams, m: int, m_prime: int, universe, assignments=None, rng=None,
              *, sensors=(), clock: LogicalClock | None = None,
              ch_lifetime: int = DEFAULT_CH_LIFETIME, patches=ALL_PATCHES):
    """Create the base station, ``m`` cluster heads and the sensor nodes.

    Draw order from ``rng``: x; t_i per attribute in sorted order; per
    cluster head MK, K_u, b_u; per reserved id MK*; per sensor MKS.
    ``assignments`` defaults to the whole universe for every cluster head.
    """
    ecc.require_valid(params)
    if rng is None:
        raise ValueError("predeploy needs a seeded random source")
    clock = clock or LogicalClock()
    universe = sorted(set(universe))
    if assignments is None:
        assignments = [universe] * m
    if len(assignments) != m:
        raise ValueError(f"{len(assignments)} attribute sets for {m} cluster heads")
    for attrs in list(assignments) + [s for s in sensors]:
        extra = set(attrs) - set(universe)
        if extra:
            raise UnknownAttribute(f"attributes outside the universe: {sorted(extra)}")

    G, n = params.G, params.n
    x = _scalar(rng, n)
    X = ecc.scalar_mul(x, G, params)
    attributes = {}
    for attr in universe:
        t = _scalar(rng, n)
        attributes[attr] = at.AttributeKey(t, ecc.scalar_mul(t, G, params))

    deployed, reserved_ids = cluster_ids(m, m_prime)
    t_ch = clock.now
    w_ch = t_ch + ch_lifetime
    clusters, heads = {}, []
    for cid, attrs in zip(deployed, assignments):
        mk, k_secret = rng.randbytes(KEY_SIZE), rng.randbytes(KEY_SIZE)
        b = _scalar(rng, n)
        B = ecc.scalar_mul(b, G, params)
        attrs = frozenset(attrs)
        clusters[cid] = ClusterRecord(mk, b, B, k_secret, t_ch, w_ch, attrs)
        heads.append(ClusterHeadState(cid, attrs, mk, k_secret, B,
                                      {a: attributes[a].public for a in sorted(attrs)},
                                      t_ch, w_ch, params))
    reserved = [ReservedCluster(cid, rng.randbytes(KEY_SIZE)) for cid in reserved_ids]
    nodes = [SensorNodeState(f"S{j}", frozenset(attrs), rng.randbytes(KEY_SIZE))
             for j, attrs in enumerate(sensors, 1)]

    users = {} if "D2" in patches else None
    bs = BaseStationState(params, x, X, attributes, clusters, reserved, users)
    return bs, heads, nodes


# -- registration ------------------------------------------------------------------------

def register_client(user_id: bytes, password: bytes, rng) -> tuple[RegistrationRequest, bytes]:
    _check_len("ID", user_id, MAX_ID_LEN)
    _check_len("password", password, MAX_PASSWORD_LEN)
    r = rng.randbytes(R_I_SIZE)
    return RegistrationRequest(user_id, _rpw(user_id, r, password)), r


def register_bs(bs: BaseStationState, request: RegistrationRequest, tree: at.Node,
                clock: LogicalClock, rng) -> SmartCard:
    """Issue a smart card. The caller inserts ``r_i`` afterwards.

    ``bs.counters['s_iu_hash']`` grows by one per key-plus-id pair computed.
    """
    params = bs.params
    if request.user_id in bs.issued:
        raise DuplicateUser(request.user_id.decode(errors="replace"))
    at.check_universe(tree, bs.universe)

    tsu = clock.now
    R = _r_i(request.user_id, request.rpw, tsu)
    y = _scalar(rng, params.n)
    Y = ecc.scalar_mul(y, params.G, params)
    assignment = at.assign_polynomials(tree, y, params.n, rng)
    keys = at.leaf_keys(assignment, bs.attributes)

    pairs = []
    for cid, rec in bs.clusters.items():
        pairs.append((_s_iu(tsu, _window(rec.t_ch, rec.w_ch)), cid))
        bs.counters["s_iu_hash"] += 1
    for res in bs.reserved:
        pairs.append((_s_iu(tsu, ZERO_MASK), res.cid))
        bs.counters["s_iu_hash"] += 1

    if bs.users is not None:
        bs.users[request.user_id] = UserRecord(y, R, tsu, tree)
    bs.issued.add(request.user_id)
    bs.counters["cards_issued"] += 1
    return SmartCard(params.G, tsu, tree, R, keys, Y, HASH_NAME, pairs)


# -- login -----------------------------------------------------------------------------------

def login(card: SmartCard, user_id: bytes, password: bytes, cid: str, clock: LogicalClock,
          rng, params: CurveParams) -> tuple[LoginRequest, UserSession]:
    if card.r is None:
        raise BadCredentials("card has no r_i inserted")
    rpw = _rpw(user_id, card.r, password)
    R_star = _r_i(user_id, rpw, card.tsu)
    if R_star != card.R:
        raise BadCredentials("incorrect credentials")
    s_iu = card.mask_for(cid)

    n_i = _scalar(rng, params.n)
    N = ecc.scalar_mul(n_i, params.G, params)
    SK = ecc.scalar_mul(n_i, card.Y, params)
    tu = clock.now
    M_i = _m_i(R_star, tu, N, params)
    T_iu = xor_mask(tu, s_iu)
    plaintext = encode_fields([user_id, cid.encode(), T_iu, M_i])
    enc = sym_encrypt(derive_sym_key(SK, params), rng.randbytes(NONCE_SIZE), plaintext)
    return LoginRequest(N, enc), UserSession(user_id, cid, n_i, N, SK, tu)


# -- base-station authentication -----------------------------------------------------------

def _open_login(key: bytes, req: LoginRequest):
    fields = decode_fields(sym_decrypt(key, req.enc))
    if len(fields) != 4 or len(fields[2]) != 8:
        raise MalformedMessage("bad login plaintext")
    user_id, cid, T_iu, M_i = fields
    return user_id, cid.decode(errors="replace"), T_iu, M_i


def bs_authenticate(bs: BaseStationState, req: LoginRequest, clock: LogicalClock, rng,
                    patches=ALL_PATCHES) -> AuthForward:
    params = bs.params
    if "D1" not in patches:
        raise UnresolvableKeyLookup("login request carries no user identifier outside the ciphertext")
    if bs.users is None or "D2" not in patches:
        raise MissingStoredSecret("base station holds no stored y_i / R_i")
    if req.N.is_infinity or not ecc.is_on_curve(req.N, params):
        raise UserAuthFailed("N_i is not a valid curve point")

    matches = []
    for table_id, rec in bs.users.items():
        SK_star = ecc.scalar_mul(rec.y, req.N, params)
        bs.counters["trial_scalar_mul"] += 1
        try:
            opened = _open_login(derive_sym_key(SK_star, params), req)
        except (AuthFailure, MalformedMessage):
            continue
        if opened[0] == table_id:
            matches.append((rec, opened))
    if len(matches) != 1:
        raise UserAuthFailed("no unique registered user opens this login request")
    rec, (user_id, cid, T_iu, M_i) = matches[0]

    cluster = bs.clusters.get(cid)
    if cluster is None:
        raise UnknownClusterHead(cid)
    s_star = _s_iu(rec.tsu, _window(cluster.t_ch, cluster.w_ch))
    tu_star = decode_ts(xor_mask(T_iu, s_star))
    if _m_i(rec.R, tu_star, req.N, params) != M_i:
        raise UserAuthFailed("M_i mismatch")

    t_bs = clock.now
    T1 = _t1(tu_star, t_bs)
    Y = ecc.scalar_mul(rec.y, params.G, params)
    plaintext = encode_fields([user_id, cid.encode(), T_iu, encode_ts(t_bs), encode_point(req.N, params),
                               T1, encode_point(Y, params), encode_ts(rec.tsu)])
    bs.counters["authenticated"] += 1
    return AuthForward(sym_encrypt(cluster.mk, rng.randbytes(NONCE_SIZE), plaintext), route=cid)


def open_forward(mk: bytes, fwd: AuthForward, params: CurveParams) -> dict:
    """Decrypt a forward under a cluster-head master key into its eight fields."""
    fields = decode_fields(sym_decrypt(mk, fwd.enc))
    if len(fields) != 8:
        raise MalformedMessage("bad forward plaintext")
    user_id, cid, T_iu, t_bs, N, T1, Y, tsu = fields
    return {"ID_i": user_id, "CIDu": cid.decode(errors="replace"), "T_iu": T_iu,
            "T_BS": decode_ts(t_bs), "N_i": decode_point(N, params), "T1": T1,
            "Y_i": decode_point(Y, params), "TSU_i": decode_ts(tsu)}


# -- cluster head ---------------------------------------------------------------------------

def ch_verify(ch: ClusterHeadState, fwd: AuthForward, clock: LogicalClock, delta_t: int,
              patches=ALL_PATCHES) -> SessionContext:
    rec = open_forward(ch.mk, fwd, ch.params)
    if rec["CIDu"] != ch.cid:
        raise WrongCluster(f"forward names {rec['CIDu']}, this is {ch.cid}")
    if abs(rec["T_BS"] - clock.now) >= delta_t:
        raise StaleTimestamp(f"T_BS={rec['T_BS']} now={clock.now} delta={delta_t}")
    if "D3" in patches:
        mask = _s_iu(rec["TSU_i"], _window(ch.t_ch, ch.w_ch))
    else:
        mask = encode_ts(ch.t_ch)
    tu_star = decode_ts(xor_mask(rec["T_iu"], mask))
    if _t1(tu_star, rec["T_BS"]) != rec["T1"]:
        raise T1Mismatch("recomputed T1 differs from the received T1")
    return SessionContext(rec["ID_i"], ch.cid, tu_star, rec["N_i"], rec["Y_i"], rec["TSU_i"], rec["T_BS"])


def ch_encrypt_reply(ch: ClusterHeadState, ctx: SessionContext, data: bytes,
                     clock: LogicalClock, rng) -> AuthReply:
    params = ch.params
    _check_len("sensor data", data, MAX_DATA_LEN)
    K3 = ecc.point_add(ch.B, ctx.Y, params)
    K2 = {attr: ecc.point_add(ch.B, ch.T[attr], params) for attr in sorted(ch.attrs)}
    ts_ch = clock.now
    k_si = _session_key(ch.cid, ctx.user_id, ctx.tu, ctx.N, ts_ch, K3, params)
    M1 = sym_encrypt(k_si, rng.randbytes(NONCE_SIZE), data)
    return AuthReply(M1, ts_ch, _window(ch.t_ch, ch.w_ch), ch.t_ch,
                     _reply_check(ctx.user_id, ch.cid, ts_ch, M1), K2)


# -- user ------------------------------------------------------------------------------------

def user_decrypt(card: SmartCard, session: UserSession, reply: AuthReply, clock: LogicalClock,
                 delta_t: int, params: CurveParams) -> bytes:
    if _reply_check(session.user_id, session.cid, reply.ts_ch, reply.M1) != reply.check:
        raise HashMismatch("reply digest mismatch")
    if abs(clock.now - reply.ts_ch) >= delta_t:
        raise StaleReply(f"TS_CHu={reply.ts_ch} now={clock.now} delta={delta_t}")
    w_ch = decode_ts(xor_mask(reply.masked, encode_ts(reply.t_ch)))
    if w_ch <= reply.t_ch:
        raise ExpiredClusterHead(f"W_CHu={w_ch} <= T_CHu={reply.t_ch}")

    inputs = {}
    for path, leaf in at.leaves(card.tree):
        if leaf.attr in reply.K2:
            share = ecc.scalar_mul(card.leaf_keys[path], params.G, params)
            inputs[path] = ecc.point_add(share, reply.K2[leaf.attr], params)
    attrs = set(reply.K2) & at.tree_attributes(card.tree)
    K3 = at.access_reconstruct(card.tree, inputs, attrs, params)
    if K3 is None:
        raise AccessDenied("cluster-head attributes do not satisfy the access tree")
    k_si = _session_key(session.cid, session.user_id, session.tu, session.N, reply.ts_ch, K3, params)
    return sym_decrypt(k_si, reply.M1)


# -- state serialization ---------------------------------------------------------------------

def _hex_pt(P: Point, params: CurveParams) -> str:
    return encode_point(P, params).hex()


def _pt(s: str, params: CurveParams) -> Point:
    return decode_point(bytes.fromhex(s), params)


def card_to_dict(card: SmartCard, params: CurveParams) -> dict:
    return {
        "G": _hex_pt(card.G, params),
        "TSU_i": card.tsu,
        "P_i": at.tree_to_obj(card.tree),
        "R_i": card.R.hex(),
        "K_iu": {".".join(map(str, path)) or "root": hex(k) for path, k in card.leaf_keys.items()},
        "Y_i": _hex_pt(card.Y, params),
        "hash": card.hash_id,
        "pairs": [[s.hex(), cid] for s, cid in card.pairs],
        "r_i": card.r.hex() if card.r is not None else None,
    }


def card_from_dict(d: dict, params: CurveParams) -> SmartCard:
    def path(s):
        return () if s == "root" else tuple(int(p) for p in s.split("."))

    return SmartCard(
        _pt(d["G"], params), int(d["TSU_i"]), at.tree_from_obj(d["P_i"]), bytes.fromhex(d["R_i"]),
        {path(k): int(v, 16) for k, v in d["K_iu"].items()}, _pt(d["Y_i"], params), d["hash"],
        [(bytes.fromhex(s), cid) for s, cid in d["pairs"]],
        bytes.fromhex(d["r_i"]) if d.get("r_i") else None,
    )


def ch_to_dict(ch: ClusterHeadState) -> dict:
    p = ch.params
    return {"CIDu": ch.cid, "I_u": sorted(ch.attrs), "MK_CHu": ch.mk.hex(), "K_u": ch.k_secret.hex(),
            "B_u": _hex_pt(ch.B, p), "T_u": {a: _hex_pt(T, p) for a, T in ch.T.items()},
            "T_CHu": ch.t_ch, "W_CHu": ch.w_ch, "curve": p.to_dict()}


def ch_from_dict(d: dict) -> ClusterHeadState:
    p = ecc.CurveParams.from_dict(d["curve"])
    return ClusterHeadState(d["CIDu"], frozenset(d["I_u"]), bytes.fromhex(d["MK_CHu"]),
                            bytes.fromhex(d["K_u"]), _pt(d["B_u"], p),
                            {a: _pt(v, p) for a, v in d["T_u"].items()}, int(d["T_CHu"]),
                            int(d["W_CHu"]), p)


def sensor_to_dict(s: SensorNodeState) -> dict:
    return {"SID_j": s.sid, "I_j": sorted(s.attrs), "MKS_j": s.mk.hex()}


def sensor_from_dict(d: dict) -> SensorNodeState:
    return SensorNodeState(d["SID_j"], frozenset(d["I_j"]), bytes.fromhex(d["MKS_j"]))


def bs_to_dict(bs: BaseStationState) -> dict:
    p = bs.params
    users = None
    if bs.users is not None:
        users = {uid.hex(): {"y_i": hex(r.y), "R_i": r.R.hex(), "TSU_i": r.tsu,
                             "P_i": at.tree_to_obj(r.tree)} for uid, r in bs.users.items()}
    return {
        "curve": p.to_dict(),
        "x": hex(bs.x),
        "X": _hex_pt(bs.X, p),
        "attributes": {a: {"t": hex(k.secret), "T": _hex_pt(k.public, p)} for a, k in bs.attributes.items()},
        "clusters": {cid: {"MK_CHu": c.mk.hex(), "b_u": hex(c.b), "B_u": _hex_pt(c.B, p),
                           "K_u": c.k_secret.hex(), "T_CHu": c.t_ch, "W_CHu": c.w_ch,
                           "I_u": sorted(c.attrs)} for cid, c in bs.clusters.items()},
        "reserved": [{"CIDu": r.cid, "MK_CHu": r.mk.hex()} for r in bs.reserved],
        "users": users,
        "issued": sorted(uid.hex() for uid in bs.issued),
    }


def bs_from_dict(d: dict) -> BaseStationState:
    p = ecc.CurveParams.from_dict(d["curve"])
    attributes = {a: at.AttributeKey(int(v["t"], 16), _pt(v["T"], p)) for a, v in d["attributes"].items()}
    clusters = {cid: ClusterRecord(bytes.fromhex(c["MK_CHu"]), int(c["b_u"], 16), _pt(c["B_u"], p),
                                   bytes.fromhex(c["K_u"]), int(c["T_CHu"]), int(c["W_CHu"]),
                                   frozenset(c["I_u"])) for cid, c in d["clusters"].items()}
    reserved = [ReservedCluster(r["CIDu"], bytes.fromhex(r["MK_CHu"])) for r in d["reserved"]]
    users = None
    if d.get("users") is not None:
        users = {bytes.fromhex(uid): UserRecord(int(u["y_i"], 16), bytes.fromhex(u["R_i"]), int(u["TSU_i"]),
                                                at.tree_from_obj(u["P_i"])) for uid, u in d["users"].items()}
    return BaseStationState(p, int(d["x"], 16), _pt(d["X"], p), attributes, clusters, reserved, users,
                            {bytes.fromhex(u) for u in d.get("issued", [])})
