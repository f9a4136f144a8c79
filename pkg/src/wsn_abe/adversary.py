"""Attacks and cost analyses against the scheme.

Attack functions take only what the threat model hands the attacker: the
contents of a stolen smart card, registration values seen by an insider at
the base station, messages overheard on the public channel, and the memory
of a captured cluster head. ``rekey_cost_report`` is the exception: it models
the defender's own bookkeeping and reads the base-station tables.
"""
from __future__ import annotations

import copy
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .ecc import CurveParams
from .errors import UnknownClusterHead
from .protocol import (
    AuthForward, BaseStationState, ClusterHeadState, RegistrationRequest, SmartCard, open_forward,
)


@dataclass(frozen=True)
class StolenCardView:
    card: SmartCard


@dataclass(frozen=True)
class CapturedChSecrets:
    state: ClusterHeadState

    @property
    def mk(self) -> bytes:
        return self.state.mk


@dataclass(frozen=True)
class InsiderReport:
    password: bytes | None
    attempts: int
    dictionary_size: int

    @property
    def recovered(self) -> bool:
        return self.password is not None

    def to_dict(self) -> dict:
        return {"recovered": self.recovered,
                "password": self.password.decode(errors="replace") if self.password is not None else None,
                "attempts": self.attempts, "dictionary_size": self.dictionary_size}


@dataclass(frozen=True)
class StorageReport:
    m: int
    m_prime: int
    users: int
    pairs_per_card: int
    hash_ops_per_card: int
    total_hash_ops: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class RekeyReport:
    compromised: str
    affected_cards: int
    recomputed_pairs: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def steal_card(card: SmartCard) -> StolenCardView:
    """Side-channel extraction: a full copy of every item on the card."""
    return StolenCardView(copy.deepcopy(card))


def load_dictionary(path) -> list[bytes]:
    """UTF-8, one candidate per line; blank lines skipped, line endings stripped."""
    text = Path(path).read_text(encoding="utf-8")
    return [line.encode("utf-8") for line in text.splitlines() if line]


def insider_guess_password(stolen: StolenCardView, intercepted: RegistrationRequest,
                           dictionary: Iterable) -> InsiderReport:
    """Offline guessing: hash ``ID || r_i || PW*`` per candidate, in dictionary order."""
    words = [w.encode("utf-8") if isinstance(w, str) else bytes(w) for w in dictionary]
    user_id, r = intercepted.user_id, stolen.card.r
    if r is None:
        return InsiderReport(None, 0, len(words))
    # RPW = sha256(len|ID|len|r|len|PW): hash the fixed prefix once, per the field encoding
    prefix = hashlib.sha256(struct.pack(">I", len(user_id)) + user_id + struct.pack(">I", len(r)) + r)
    for attempt, guess in enumerate(words, 1):
        h = prefix.copy()
        h.update(struct.pack(">I", len(guess)) + guess)
        if h.digest() == intercepted.rpw:
            return InsiderReport(guess, attempt, len(words))
    return InsiderReport(None, len(words), len(words))


def capture_cluster_head(ch: ClusterHeadState) -> CapturedChSecrets:
    return CapturedChSecrets(copy.deepcopy(ch))


def decrypt_forward_with_captured_key(secrets: CapturedChSecrets, fwd: AuthForward | bytes,
                                      params: CurveParams | None = None) -> dict:
    """Open an overheard base-station forward with a captured master key.

    Raises ``AuthFailure`` when the forward was meant for another cluster head.
    """
    params = params or secrets.state.params
    if isinstance(fwd, (bytes, bytearray)):
        fwd = AuthForward.from_bytes(bytes(fwd))
    return open_forward(secrets.mk, fwd, params)


def storage_report(m: int, m_prime: int, users: int) -> StorageReport:
    per_card = m + m_prime
    return StorageReport(m, m_prime, users, per_card, per_card, users * per_card)


def rekey_cost_report(bs: BaseStationState, cards: Iterable[SmartCard], compromised: str) -> RekeyReport:
    if compromised not in bs.clusters:
        raise UnknownClusterHead(compromised)
    affected = pairs = 0
    for card in cards:
        hits = sum(1 for _, cid in card.pairs if cid == compromised)
        affected += hits > 0
        pairs += hits
    return RekeyReport(compromised, affected, pairs)

