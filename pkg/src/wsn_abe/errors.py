"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) so transcripts and
reports can name the failure without pickling exception objects.
"""


class SchemeError(Exception):
    """Base class for every failure raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__


# primitives
class FieldTooLong(SchemeError):
    pass


class AuthFailure(SchemeError):
    """Authenticated decryption failed: wrong key or tampered ciphertext."""


class InfinityPoint(SchemeError):
    pass


class PointNotOnCurve(SchemeError):
    pass


class ParamsTooLarge(SchemeError):
    pass


class NonInvertibleDifference(SchemeError):
    pass


# deployment / registration
class InvalidParams(SchemeError):
    pass


class UnknownAttribute(SchemeError):
    pass


class DuplicateUser(SchemeError):
    pass


class MalformedMessage(SchemeError):
    """Wire bytes do not parse as the expected message."""


# login / authentication / reply
class BadCredentials(SchemeError):
    pass


class UnknownClusterHead(SchemeError):
    pass


class UnresolvableKeyLookup(SchemeError):
    """The base station cannot tell which user's key opens a login request."""


class MissingStoredSecret(SchemeError):
    """The base station never kept the per-user secrets it needs."""


class UserAuthFailed(SchemeError):
    pass


class WrongCluster(SchemeError):
    pass


class StaleTimestamp(SchemeError):
    pass


class T1Mismatch(SchemeError):
    pass


class HashMismatch(SchemeError):
    pass


class StaleReply(SchemeError):
    pass


class ExpiredClusterHead(SchemeError):
    pass


class AccessDenied(SchemeError):
    pass


# harness
class ConfigError(SchemeError):
    pass


class IndexOutOfRange(SchemeError):
    pass


PROTOCOL_ERRORS = (
    InvalidParams, UnknownAttribute, DuplicateUser, MalformedMessage,
    BadCredentials, UnknownClusterHead, UnresolvableKeyLookup,
    MissingStoredSecret, UserAuthFailed, AuthFailure, WrongCluster,
    StaleTimestamp, T1Mismatch, HashMismatch, StaleReply,
    ExpiredClusterHead, AccessDenied,
)
ADVERSARY_ERRORS = (AuthFailure, UnknownClusterHead)
