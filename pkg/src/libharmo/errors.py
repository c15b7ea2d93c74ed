"""Exception types and the per-file/per-item diagnostic record."""

from __future__ import annotations

from dataclasses import dataclass


class LibharmoError(Exception):
    """Base class for all errors raised by this package."""


class IoError(LibharmoError):
    pass


class CycleError(LibharmoError):
    """Raised when POM inheritance relations form a directed cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cyclic POM inheritance: " + " -> ".join(str(c) for c in self.cycle))


class RemoteFetchError(LibharmoError):
    pass


class EmptyInput(LibharmoError):
    pass


class UnknownRoot(LibharmoError):
    pass


class MalformedClassFile(LibharmoError):
    pass


class OfflineMiss(LibharmoError):
    """Offline mode and the requested artifact is not in the cache."""


class NotFoundError(LibharmoError):
    pass


class HttpError(LibharmoError):
    def __init__(self, msg, status=None, retries=0):
        self.status = status
        self.retries = retries
        super().__init__(msg)


class ChecksumMismatch(LibharmoError):
    pass


class NoSuchGroup(LibharmoError):
    pass


class CollisionUnresolvable(LibharmoError):
    pass


class StaleFile(LibharmoError):
    pass


class PostconditionFailed(LibharmoError):
    pass


class NoLocalAncestor(LibharmoError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    """A non-fatal problem attached to a result instead of aborting it."""

    code: str
    message: str
    subject: str = ""

    def __str__(self):
        if self.subject:
            return f"[{self.code}] {self.subject}: {self.message}"
        return f"[{self.code}] {self.message}"
