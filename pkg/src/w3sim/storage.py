"""Content storage in three routes: inline on-chain, replicated off-chain
with an on-chain hook, and a size-thresholded hybrid of the two.

Off-chain nodes are simulator objects with availability flags; integrity
of a linked blob is a digest check against the content id recorded by a
confirmed hook transaction.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from enum import Enum
from random import Random

from . import identity

INLINE_CAP_BYTES = 1024
DEFAULT_REPLICAS = 3  # content is kept in at least three locations
DEFAULT_INLINE_THRESHOLD = 256


class StorageError(Exception):
    pass


class InlineTooLarge(StorageError):
    pass


class InsufficientStorageNodes(StorageError):
    pass


class AllReplicasDown(StorageError):
    pass


class NotFound(StorageError):
    pass


class Route(Enum):
    ON_CHAIN = "OnChain"
    OFF_CHAIN = "OffChain"
    HYBRID = "Hybrid"


@dataclass(frozen=True)
class StoragePlan:
    route: Route = Route.ON_CHAIN
    replicas: int = DEFAULT_REPLICAS
    inline_threshold: int = DEFAULT_INLINE_THRESHOLD
    inline_cap: int = INLINE_CAP_BYTES

    def __post_init__(self):
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.inline_threshold <= 0:
            raise ValueError("inline_threshold must be positive")


@dataclass(frozen=True)
class ContentId:
    digest: bytes

    @classmethod
    def of(cls, data: bytes) -> "ContentId":
        return cls(identity.digest(data))

    def __str__(self) -> str:
        return self.digest.hex()


@dataclass(frozen=True)
class InlineRef:
    data: bytes
    hook_tx: bytes | None = None


@dataclass(frozen=True)
class LinkedRef:
    cid: ContentId
    hook_tx: bytes | None = None


StorageRef = InlineRef | LinkedRef


class VerifyResult(Enum):
    VERIFIED = "Verified"
    MISMATCH = "Mismatch"
    UNCONFIRMED = "Unconfirmed"

    def __bool__(self) -> bool:
        return self is VerifyResult.VERIFIED


@dataclass
class StorageNode:
    node_id: int
    alive: bool = True
    blobs: dict = field(default_factory=dict)


class OffChainStore:
    """A fixed set of storage nodes with cid -> replica-set placement."""

    def __init__(self, n_nodes: int = 10):
        self.nodes = [StorageNode(i) for i in range(n_nodes)]
        self.placement: dict[bytes, tuple[int, ...]] = {}

    def live_nodes(self) -> list[StorageNode]:
        return [n for n in self.nodes if n.alive]

    def set_alive(self, node_id: int, alive: bool):
        self.nodes[node_id].alive = alive

    def sample_crashes(self, rng: Random, crash_prob: float):
        """Resample per-access availability under a fault plan."""
        for node in self.nodes:
            node.alive = not (crash_prob > 0 and rng.random() < crash_prob)

    def write(self, data: bytes, replicas: int) -> ContentId:
        live = self.live_nodes()
        if len(live) < replicas:
            raise InsufficientStorageNodes(f"{len(live)} live nodes < {replicas} replicas")
        cid = ContentId.of(data)
        # Deterministic placement: rotate by content digest for spread.
        start = int.from_bytes(cid.digest[:4], "big") % len(live)
        chosen = [live[(start + i) % len(live)].node_id for i in range(replicas)]
        for node_id in chosen:
            self.nodes[node_id].blobs[cid.digest] = data
        self.placement[cid.digest] = tuple(chosen)
        return cid

    def read(self, cid: ContentId) -> bytes:
        placed = self.placement.get(cid.digest)
        if placed is None:
            raise NotFound(cid.digest.hex())
        for node_id in placed:
            node = self.nodes[node_id]
            if node.alive and cid.digest in node.blobs:
                return node.blobs[cid.digest]
        raise AllReplicasDown(cid.digest.hex())

    def tamper(self, cid: ContentId, mutate) -> None:
        """Apply mutate() to every stored replica of cid (test/fault hook)."""
        for node_id in self.placement.get(cid.digest, ()):
            blobs = self.nodes[node_id].blobs
            if cid.digest in blobs:
                blobs[cid.digest] = mutate(blobs[cid.digest])


class StorageFabric:
    """Route-aware put/get/verify facade over one off-chain store.

    is_confirmed(tx_id) tells the fabric whether a hook transaction has
    reached consensus; linked refs only verify once their hook confirms.
    """

    def __init__(self, plan: StoragePlan, store: OffChainStore | None = None, is_confirmed=None):
        self.plan = plan
        self.store = store if store is not None else OffChainStore()
        self.is_confirmed = is_confirmed or (lambda tx_id: True)
        self.offchain_bytes = 0
        self.fault_prob = 0.0
        self.fault_rng: Random | None = None

    def _sample_faults(self):
        if self.fault_prob > 0 and self.fault_rng is not None:
            self.store.sample_crashes(self.fault_rng, self.fault_prob)

    def put(self, data: bytes, plan: StoragePlan | None = None) -> StorageRef:
        plan = plan or self.plan
        if plan.route is not Route.ON_CHAIN:
            self._sample_faults()
        if plan.route is Route.ON_CHAIN:
            if len(data) > plan.inline_cap:
                raise InlineTooLarge(f"{len(data)} bytes exceeds inline cap {plan.inline_cap}")
            return InlineRef(data=data)
        if plan.route is Route.HYBRID and len(data) <= plan.inline_threshold:
            if len(data) > plan.inline_cap:
                raise InlineTooLarge(f"{len(data)} bytes exceeds inline cap {plan.inline_cap}")
            return InlineRef(data=data)
        if not data:
            raise StorageError("off-chain put requires non-empty data")
        cid = self.store.write(data, plan.replicas)
        self.offchain_bytes += len(data) * plan.replicas
        return LinkedRef(cid=cid)

    def bind_hook(self, ref: StorageRef, tx_id: bytes) -> StorageRef:
        """Attach the on-chain hook transaction that carries this ref."""
        return replace(ref, hook_tx=tx_id)

    def get(self, ref: StorageRef) -> bytes:
        if isinstance(ref, InlineRef):
            return ref.data
        self._sample_faults()
        return self.store.read(ref.cid)

    def verify_integrity(self, ref: StorageRef, data: bytes) -> VerifyResult:
        if ref.hook_tx is None or not self.is_confirmed(ref.hook_tx):
            return VerifyResult.UNCONFIRMED
        if isinstance(ref, InlineRef):
            return VerifyResult.VERIFIED if data == ref.data else VerifyResult.MISMATCH
        return VerifyResult.VERIFIED if ContentId.of(data) == ref.cid else VerifyResult.MISMATCH


def plan_for_storage_mode(mode: int, replicas: int = DEFAULT_REPLICAS,
                          inline_threshold: int = DEFAULT_INLINE_THRESHOLD) -> StoragePlan:
    """Map a storage-component route index (1/2/3) to a concrete plan."""
    if mode == 1:
        return StoragePlan(route=Route.ON_CHAIN)
    if mode == 2:
        return StoragePlan(route=Route.HYBRID, replicas=replicas, inline_threshold=inline_threshold)
    if mode == 3:
        return StoragePlan(route=Route.OFF_CHAIN, replicas=replicas)
    raise ValueError(f"unknown storage mode {mode}")


def export_store(store: OffChainStore, path: str) -> list[str]:
    """Write each stored blob to path/<hex cid>; returns the filenames."""
    os.makedirs(path, exist_ok=True)
    written = []
    for digest_bytes in sorted(store.placement):
        for node_id in store.placement[digest_bytes]:
            blob = store.nodes[node_id].blobs.get(digest_bytes)
            if blob is not None:
                name = digest_bytes.hex()
                with open(os.path.join(path, name), "wb") as fh:
                    fh.write(blob)
                written.append(name)
                break
    return written
