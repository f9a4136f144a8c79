"""Short-Weierstrass curve arithmetic over GF(p), affine coordinates.

Not constant time. Scalars are plain ints reduced modulo the base-point
order ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import gmpy2

from .errors import InvalidParams, MalformedMessage, ParamsTooLarge, PointNotOnCurve

ENUMERATION_LIMIT = 2**20


@dataclass(frozen=True)
class Point:
    x: int | None
    y: int | None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self) -> str:
        return "Point(inf)" if self.is_infinity else f"Point({self.x}, {self.y})"


INFINITY = Point(None, None)


@dataclass(frozen=True)
class CurveParams:
    name: str
    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int

    @property
    def G(self) -> Point:
        return Point(self.gx, self.gy)

    @property
    def coord_width(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_width(self) -> int:
        return (self.n.bit_length() + 7) // 8

    def encode_coord(self, v: int) -> bytes:
        return v.to_bytes(self.coord_width, "big")

    def to_dict(self) -> dict:
        return {"name": self.name, "p": hex(self.p), "a": hex(self.a), "b": hex(self.b),
                "gx": hex(self.gx), "gy": hex(self.gy), "n": hex(self.n)}

    @classmethod
    def from_dict(cls, d: dict) -> CurveParams:
        ints = {k: _parse_int(d[k]) for k in ("p", "a", "b", "gx", "gy", "n")}
        return cls(name=str(d.get("name", "custom")), **ints)


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    violation: str | None = None


TOY17 = CurveParams("toy17", p=17, a=2, b=2, gx=5, gy=1, n=19)

# SEC 2 secp160r1
P160 = CurveParams(
    "p160",
    p=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFF,
    a=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF7FFFFFFC,
    b=0x1C97BEFC54BD7A8B65ACF89F81D4D4ADC565FA45,
    gx=0x4A96B5688EF573284664698968C38BB913CBFC82,
    gy=0x23A628553168947D59DCC912042351377AC5FB32,
    n=0x0100000000000000000001F4C8F927AED3CA752257,
)

CURVES = {"toy17": TOY17, "p160": P160}


def _parse_int(v) -> int:
    if isinstance(v, int):
        return v
    v = str(v).strip().lower()
    return int(v, 16) if v.startswith("0x") else int(v)


def validate_params(params: CurveParams) -> ValidityReport:
    """Check the curve invariants in order and name the first one that fails."""
    p, a, b = params.p, params.a, params.b
    if p < 3 or not gmpy2.is_prime(p):
        return ValidityReport(False, "p is not an odd prime")
    if not (0 <= a < p and 0 <= b < p):
        return ValidityReport(False, "a, b must lie in [0, p)")
    if (4 * a**3 + 27 * b**2) % p == 0:
        return ValidityReport(False, "singular curve: 4a^3 + 27b^2 = 0 mod p")
    if not (0 <= params.gx < p and 0 <= params.gy < p) or not is_on_curve(params.G, params):
        return ValidityReport(False, "G is not on the curve")
    if not gmpy2.is_prime(params.n):
        return ValidityReport(False, "n is not prime")
    if not _mul(params.n, params.G, params).is_infinity:
        return ValidityReport(False, "n*G is not the point at infinity")
    return ValidityReport(True)


def require_valid(params: CurveParams) -> None:
    report = validate_params(params)
    if not report.ok:
        raise InvalidParams(f"{params.name}: {report.violation}")


def is_on_curve(P: Point, params: CurveParams) -> bool:
    if P.is_infinity:
        return True
    x, y, p = P.x, P.y, params.p
    return (y * y - (x * x * x + params.a * x + params.b)) % p == 0


def _check(P: Point, params: CurveParams) -> None:
    if not is_on_curve(P, params):
        raise PointNotOnCurve(f"{P!r} is not on {params.name}")


def _add(P: Point, Q: Point, params: CurveParams) -> Point:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    p = params.p
    if P.x == Q.x:
        if (P.y + Q.y) % p == 0:
            return INFINITY
        lam = (3 * P.x * P.x + params.a) * pow(2 * P.y, -1, p) % p
    else:
        lam = (Q.y - P.y) * pow(Q.x - P.x, -1, p) % p
    x3 = (lam * lam - P.x - Q.x) % p
    return Point(x3, (lam * (P.x - x3) - P.y) % p)


def _mul(k: int, P: Point, params: CurveParams) -> Point:
    R = INFINITY
    addend = P
    while k:
        if k & 1:
            R = _add(R, addend, params)
        addend = _add(addend, addend, params)
        k >>= 1
    return R


def point_neg(P: Point, params: CurveParams) -> Point:
    return P if P.is_infinity else Point(P.x, (-P.y) % params.p)


def point_add(P: Point, Q: Point, params: CurveParams) -> Point:
    _check(P, params)
    _check(Q, params)
    return _add(P, Q, params)


def scalar_mul(k: int, P: Point, params: CurveParams) -> Point:
    """Double-and-add. ``k`` is reduced modulo n first."""
    _check(P, params)
    return _mul(k % params.n, P, params)


def enumerate_points(params: CurveParams) -> list[Point]:
    if params.p >= ENUMERATION_LIMIT:
        raise ParamsTooLarge(f"p has {params.p.bit_length()} bits; enumeration is desk-scale only")
    p = params.p
    roots: dict[int, list[int]] = {}
    for y in range(p):
        roots.setdefault(y * y % p, []).append(y)
    pts = [INFINITY]
    for x in range(p):
        rhs = (x * x * x + params.a * x + params.b) % p
        pts.extend(Point(x, y) for y in roots.get(rhs, []))
    return pts


def encode_point(P: Point, params: CurveParams) -> bytes:
    if P.is_infinity:
        return b"\x00"
    return b"\x04" + params.encode_coord(P.x) + params.encode_coord(P.y)


def decode_point(data: bytes, params: CurveParams) -> Point:
    if data == b"\x00":
        return INFINITY
    w = params.coord_width
    if len(data) != 1 + 2 * w or data[0] != 0x04:
        raise MalformedMessage("bad point encoding")
    P = Point(int.from_bytes(data[1:1 + w], "big"), int.from_bytes(data[1 + w:], "big"))
    if P.x >= params.p or P.y >= params.p:
        raise PointNotOnCurve("coordinate out of range")
    _check(P, params)
    return P


def encode_scalar(k: int, params: CurveParams) -> bytes:
    return (k % params.n).to_bytes(params.scalar_width, "big")


def decode_scalar(data: bytes, params: CurveParams) -> int:
    if len(data) != params.scalar_width:
        raise MalformedMessage("bad scalar width")
    return int.from_bytes(data, "big") % params.n


_CURVE_KEYS = ("p", "a", "b", "gx", "gy", "n")


def parse_curve_text(text: str) -> CurveParams:
    """Parse ``key = value`` lines; ``#`` starts a comment, ints are decimal or 0x-hex.

    Required keys: p, a, b, gx, gy, n. Optional: name.
    """
    fields = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        fields[key.lower()] = value
    missing = [k for k in _CURVE_KEYS if k not in fields]
    if missing:
        raise ValueError(f"curve file missing keys: {', '.join(missing)}")
    return CurveParams.from_dict(fields)


def dump_curve_text(params: CurveParams) -> str:
    lines = [f"name = {params.name}"]
    lines += [f"{k} = {hex(getattr(params, k))}" for k in _CURVE_KEYS]
    return "\n".join(lines) + "\n"


def load_curve(spec: str | dict | CurveParams) -> CurveParams:
    """Resolve a shipped curve name, a parameter dict, or a curve file path."""
    if isinstance(spec, CurveParams):
        return spec
    if isinstance(spec, dict):
        return CurveParams.from_dict(spec)
    if spec in CURVES:
        return CURVES[spec]
    path = Path(spec)
    if path.is_file():
        return parse_curve_text(path.read_text())
    raise ValueError(f"unknown curve {spec!r}")
