"""Hashing, field encoding, a hash-based authenticated stream cipher,
timestamp masking and point-to-key derivation.

The cipher here is a deterministic stand-in so that runs are bit-exact and
dependency free. It is NOT a production construction.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable

from .errors import AuthFailure, FieldTooLong, InfinityPoint, MalformedMessage

HASH_NAME = "sha256"
DIGEST_SIZE = 32
NONCE_SIZE = 8
TS_SIZE = 8
_MAX_FIELD = 2**32 - 1


def hash(data: bytes) -> bytes:  # noqa: A001 - mirrors h(.) in the scheme
    return hashlib.sha256(data).digest()


def encode_fields(fields: Iterable[bytes]) -> bytes:
    """Length-prefixed concatenation: ``len(f) as u32be || f`` per field."""
    out = bytearray()
    for f in fields:
        if len(f) > _MAX_FIELD:
            raise FieldTooLong(f"field of {len(f)} bytes exceeds 2^32-1")
        out += struct.pack(">I", len(f))
        out += f
    return bytes(out)


def decode_fields(data: bytes) -> list[bytes]:
    fields = []
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise MalformedMessage("truncated length prefix")
        (ln,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + ln > len(data):
            raise MalformedMessage("truncated field")
        fields.append(data[pos:pos + ln])
        pos += ln
    return fields


def hash_fields(*fields: bytes) -> bytes:
    return hash(encode_fields(fields))


def encode_ts(ticks: int) -> bytes:
    if not 0 <= ticks < 2**64:
        raise ValueError(f"timestamp out of range: {ticks}")
    return ticks.to_bytes(TS_SIZE, "big")


def decode_ts(data: bytes) -> int:
    if len(data) != TS_SIZE:
        raise MalformedMessage(f"timestamp must be {TS_SIZE} bytes")
    return int.from_bytes(data, "big")


def xor_bytes(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b, strict=True))


def xor_mask(ts: int | bytes, mask: bytes) -> bytes:
    """XOR an 8-byte timestamp with the first 8 bytes of ``mask``.

    ``ts`` may be a tick count or an already-encoded 8-byte value, so the
    function is its own inverse.
    """
    raw = encode_ts(ts) if isinstance(ts, int) else ts
    if len(raw) != TS_SIZE:
        raise ValueError("masked timestamp must be 8 bytes")
    return xor_bytes(raw, mask[:TS_SIZE])


@dataclass(frozen=True)
class AuthCiphertext:
    nonce: bytes
    body: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return encode_fields([self.nonce, self.body, self.tag])

    @classmethod
    def from_bytes(cls, data: bytes) -> AuthCiphertext:
        fields = decode_fields(data)
        if len(fields) != 3 or len(fields[0]) != NONCE_SIZE or len(fields[2]) != DIGEST_SIZE:
            raise MalformedMessage("bad ciphertext record")
        return cls(*fields)


def _keystream(key: bytes, nonce: bytes, length: int) -> bytes:
    blocks = []
    for j in range((length + DIGEST_SIZE - 1) // DIGEST_SIZE):
        blocks.append(hash(encode_fields([key, nonce, struct.pack(">I", j)])))
    return b"".join(blocks)[:length]


def sym_encrypt(key: bytes, nonce: bytes, plaintext: bytes) -> AuthCiphertext:
    if len(nonce) != NONCE_SIZE:
        raise ValueError(f"nonce must be {NONCE_SIZE} bytes")
    body = xor_bytes(plaintext, _keystream(key, nonce, len(plaintext)))
    tag = hash(encode_fields([key, nonce, body]))
    return AuthCiphertext(nonce, body, tag)


def sym_decrypt(key: bytes, ct: AuthCiphertext) -> bytes:
    if hash(encode_fields([key, ct.nonce, ct.body])) != ct.tag:
        raise AuthFailure("ciphertext tag mismatch")
    return xor_bytes(ct.body, _keystream(key, ct.nonce, len(ct.body)))


def derive_sym_key(point, params) -> bytes:
    """Key from the fixed-width big-endian x-coordinate of ``point``."""
    if point.is_infinity:
        raise InfinityPoint("cannot derive a key from the point at infinity")
    return hash(encode_fields([params.encode_coord(point.x)]))
