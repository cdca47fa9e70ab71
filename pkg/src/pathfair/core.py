"""Domain types shared across the simulator and the analysis code.

Time is an integer tick count everywhere. Signatures are modelled as sets of
signer ids; aggregating approvals is a set union.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

NodeId = int


class ParameterError(ValueError):
    """Raised when a SystemParams instance breaks one of its invariants."""


class IncompleteCertificateError(ValueError):
    pass


class HubType(enum.Enum):
    REGULAR = "regular"  # honest members alone reach t
    IMPASSE = "impasse"  # neither side reaches t
    BOTH = "both"  # both sides reach t; ruled out by t > q/2
    CORRUPTED = "corrupted"  # malicious members alone reach t


class TimestampKind(enum.Enum):
    TRUE = "true"
    ADVANCED = "advanced"
    DELAYED = "delayed"
    ARBITRARY = "arbitrary"


@dataclass(frozen=True)
class SystemParams:
    n: int
    f: int | None = None
    q: int = 1
    t: int = 1
    k: int = 1
    c: float = 1.0
    tau: float | None = None
    delta_net: int = 10
    delta_clock: int = 1
    kappa: float = 0.0
    lambda_bytes: int = 32
    paths_per_block: int | None = None

    def __post_init__(self):
        if self.f is None:
            object.__setattr__(self, "f", self.n // 3)
        if self.tau is None:
            object.__setattr__(self, "tau", self.c + 1.0)
        if self.paths_per_block is None:
            object.__setattr__(self, "paths_per_block", self.n)

    @property
    def fairness_threshold(self) -> int:
        """Separation beyond which two regular-path transactions must stay ordered."""
        return 4 * self.k * self.delta_net + 2 * self.delta_clock

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def validate(self, *, bft: bool = True) -> "SystemParams":
        if self.n < 1:
            raise ParameterError(f"n must be positive, got {self.n}")
        if self.n >= 2**32:
            raise ParameterError("n must fit in 32 bits")
        if not 0 <= self.f <= self.n:
            raise ParameterError(f"f={self.f} outside [0, n]")
        if bft and self.n < 3 * self.f + 1:
            raise ParameterError(f"n={self.n} < 3f+1 with f={self.f}")
        if not 1 <= self.q <= self.n:
            raise ParameterError(f"hub size q={self.q} outside [1, n]")
        if not 1 <= self.t <= self.q:
            raise ParameterError(f"threshold t={self.t} outside [1, q]")
        if 2 * self.t <= self.q:
            raise ParameterError(f"t={self.t} must exceed q/2={self.q / 2}")
        if self.k < 1:
            raise ParameterError("path length k must be at least 1")
        if not 0.0 <= self.kappa <= 1.0:
            raise ParameterError(f"kappa={self.kappa} outside [0, 1]")
        if self.delta_net < 1 or self.delta_clock < 0:
            raise ParameterError("delta_net must be >= 1 and delta_clock >= 0")
        if self.paths_per_block < 0:
            raise ParameterError("paths_per_block must be non-negative")
        return self


def tx_digest(client: str, nonce: int, payload_len: int) -> bytes:
    """32-byte id of a synthetic payload; only its length matters to the protocol."""
    h = hashlib.sha256()
    h.update(client.encode())
    h.update(nonce.to_bytes(8, "big"))
    h.update(payload_len.to_bytes(8, "big"))
    return h.digest()


@dataclass(frozen=True)
class Transaction:
    id: bytes
    payload_len: int
    submit_time: int
    client: str = "client"
    hidden: bool = False

    def __post_init__(self):
        if self.payload_len <= 0:
            raise ValueError("payload_len must be positive")

    @classmethod
    def synthetic(cls, nonce: int, submit_time: int, payload_len: int = 250,
                  client: str = "client", hidden: bool = False) -> "Transaction":
        return cls(tx_digest(client, nonce, payload_len), payload_len, submit_time,
                   client, hidden)


@dataclass(frozen=True)
class HubSpec:
    members: tuple[NodeId, ...]
    hub_index: int
    # Decryption hubs may be smaller than q and carry their own threshold.
    threshold: int | None = None

    @property
    def size(self) -> int:
        return len(self.members)

    def threshold_for(self, params: SystemParams) -> int:
        return params.t if self.threshold is None else self.threshold


@dataclass(frozen=True)
class PathSpec:
    path_id: int
    hubs: tuple[HubSpec, ...]
    block: int

    @property
    def initiator(self) -> NodeId:
        return self.hubs[0].members[0]


@dataclass(frozen=True)
class HubApproval:
    hub_index: int
    timestamp: int
    signers: frozenset[NodeId]

    def merge(self, other: "HubApproval") -> "HubApproval":
        if other.hub_index != self.hub_index:
            raise ValueError("cannot merge approvals of different hubs")
        return HubApproval(self.hub_index, self.timestamp, self.signers | other.signers)


@dataclass(frozen=True)
class Certificate:
    tx: bytes
    path: int
    block: int
    approvals: tuple[HubApproval, ...]
    locked_ts: int = field(default=0)

    @classmethod
    def assemble(cls, tx: bytes, path: int, block: int,
                 approvals: Sequence[HubApproval]) -> "Certificate":
        approvals = tuple(approvals)
        return cls(tx, path, block, approvals, locked_timestamp_of(approvals))

    @property
    def key(self) -> tuple[bytes, int]:
        return (self.tx, self.path)


def classify_hub(honest_count: int, malicious_count: int, t: int) -> HubType:
    honest_pass = honest_count >= t
    malicious_pass = malicious_count >= t
    if honest_pass and malicious_pass:
        return HubType.BOTH
    if honest_pass:
        return HubType.REGULAR
    if malicious_pass:
        return HubType.CORRUPTED
    return HubType.IMPASSE


def locked_timestamp_of(approvals: Iterable[HubApproval]) -> int:
    stamps = [a.timestamp for a in approvals]
    if not stamps:
        raise IncompleteCertificateError("certificate carries no approvals")
    return max(stamps)


def locked_timestamp(cert: Certificate, k: int | None = None) -> int:
    """Maximum approval timestamp along the certificate's path."""
    if k is not None and len(cert.approvals) != k:
        raise IncompleteCertificateError(
            f"expected {k} approvals, certificate has {len(cert.approvals)}")
    return locked_timestamp_of(cert.approvals)
