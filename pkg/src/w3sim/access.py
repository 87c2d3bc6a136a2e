"""Client-side entry points: browser-wallet submission, agent batching,
and confirmed-state retrieval.

A wallet must connect before it can submit. An agent is a custodial
intermediary: registered users hand it operations, it bundles up to
batch_size of them into one transaction signed with the agent key, and
the chain attributes each embedded operation to its originating user.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import identity, storage, txcraft, vm
from .consensus import ChainNetwork


class AccessError(Exception):
    pass


class NotConnected(AccessError):
    pass


class UnregisteredUser(AccessError):
    pass


class NoConfirmedState(AccessError):
    pass


@dataclass(frozen=True)
class UserOp:
    """One application-level request, before it becomes a transaction."""

    contract_id: bytes
    method: str
    args: tuple[bytes, ...] = ()
    data: bytes = b""


@dataclass
class WalletClient:
    keypair: identity.KeyPair
    address: identity.Address
    session: str | None = None
    nonce_cache: int = 0

    @classmethod
    def create(cls, seed: bytes, scheme: identity.AddressScheme = identity.AddressScheme.BASE16_ETH):
        kp = identity.generate_keypair(seed)
        return cls(keypair=kp, address=identity.derive_address(kp.public_key, scheme))


def connect_wallet(client: WalletClient, service_id: str) -> str:
    """Establish (or reuse) a session with a service; idempotent."""
    if client.session is None:
        client.session = service_id
    return client.session


def _next_nonce(client: WalletClient, chain: ChainNetwork) -> int:
    confirmed = chain.expected_nonce(client.address.payload)
    nonce = max(confirmed, client.nonce_cache)
    client.nonce_cache = nonce + 1
    return nonce


def _gas_limit_for(op: UserOp, inline_len: int, schedule: vm.GasSchedule) -> int:
    # Generous static envelope: constructor-free built-ins never exceed it.
    return schedule.base_tx + schedule.per_inline_byte * inline_len + 60_000


def contract_address(contract_id: bytes) -> identity.Address:
    """Present a 20-byte contract handle as a receiver address."""
    return identity.Address(scheme=identity.AddressScheme.BASE16_ETH,
                            payload=contract_id,
                            text=identity.encode_base16(contract_id))


def submit_direct(client: WalletClient, chain: ChainNetwork, op: UserOp,
                  fabric: storage.StorageFabric | None = None,
                  schedule: vm.GasSchedule = vm.DEFAULT_GAS_SCHEDULE,
                  inline: bytes | None = None) -> bytes:
    """Build, sign and submit one transaction for one request; returns tx id."""
    if client.session is None:
        raise NotConnected("connect the wallet before submitting")
    if inline is None:
        inline, _ = prepare_data(op, fabric)
    metadata = txcraft.TxMetadata(
        sender=client.address,
        receiver=contract_address(op.contract_id) if op.contract_id else client.address,
        nonce=_next_nonce(client, chain),
        gas_limit=_gas_limit_for(op, len(inline), schedule),
        sim_time=chain.now,
    )
    payload = txcraft.TxPayload(contract_id=op.contract_id, method=op.method,
                                args=op.args, inline_data=inline)
    tx = txcraft.build_transaction(client.keypair.secret_key, metadata, payload)
    chain.submit(tx)
    return tx.tx_id


def prepare_data(op: UserOp, fabric: storage.StorageFabric | None):
    """Route op.data through the storage plan; returns (inline bytes, ref).

    Inline payloads are tagged 0x00 + data, linked ones 0x01 + cid, so the
    on-chain record is self-describing.
    """
    if not op.data:
        return b"", None
    if fabric is None:
        return op.data, None
    ref = fabric.put(op.data)
    if isinstance(ref, storage.InlineRef):
        return b"\x00" + ref.data, ref
    return b"\x01" + ref.cid.digest, ref


class AgentBehavior(Enum):
    HONEST = "Honest"
    WITHHOLDING = "Withholding"


@dataclass(frozen=True)
class BundleTicket:
    origin: bytes
    seq: int


@dataclass
class Agent:
    """Custodial batcher: one on-chain sender for many users' operations."""

    keypair: identity.KeyPair
    address: identity.Address
    batch_size: int = 10
    flush_interval: int = 5
    behavior: AgentBehavior = AgentBehavior.HONEST
    registered_users: set[bytes] = field(default_factory=set)
    batch_buffer: list[tuple[BundleTicket, UserOp, bytes]] = field(default_factory=list)
    nonce_cache: int = 0
    _seqs: dict[bytes, int] = field(default_factory=dict)
    _last_flush_tick: int = 0

    @classmethod
    def create(cls, seed: bytes, batch_size: int = 10, flush_interval: int = 5,
               behavior: AgentBehavior = AgentBehavior.HONEST):
        kp = identity.generate_keypair(seed)
        return cls(keypair=kp, address=identity.derive_address(kp.public_key),
                   batch_size=batch_size, flush_interval=flush_interval, behavior=behavior)

    def register_user(self, user_payload: bytes):
        self.registered_users.add(user_payload)

    def genesis_registrations(self, state: vm.ContractState):
        """Record grants in system storage so the chain can check them."""
        for user in sorted(self.registered_users):
            state.set_storage(vm.SYSTEM_CONTRACT_ID, b"agt:" + self.address.payload + user, b"\x01")


def submit_via_agent(agent: Agent, user_payload: bytes, op: UserOp,
                     chain: ChainNetwork, fabric: storage.StorageFabric | None = None,
                     inline: bytes | None = None) -> BundleTicket:
    """Buffer a registered user's operation; flushes when the buffer fills.

    Data hits the storage fabric now (the user uploads before handing the
    reference to the agent), so the buffered entry is submission-ready.
    """
    if user_payload not in agent.registered_users:
        raise UnregisteredUser(user_payload.hex())
    if inline is None:
        inline, _ = prepare_data(op, fabric)
    seq = agent._seqs.get(user_payload, 0)
    agent._seqs[user_payload] = seq + 1
    ticket = BundleTicket(origin=user_payload, seq=seq)
    agent.batch_buffer.append((ticket, op, inline))
    if len(agent.batch_buffer) >= agent.batch_size:
        flush(agent, chain)
    return ticket


def maybe_flush(agent: Agent, chain: ChainNetwork) -> list[bytes]:
    """Flush when the configured interval has elapsed."""
    if agent.batch_buffer and chain.now - agent._last_flush_tick >= agent.flush_interval:
        return flush(agent, chain)
    return []


def flush(agent: Agent, chain: ChainNetwork,
          schedule: vm.GasSchedule = vm.DEFAULT_GAS_SCHEDULE) -> list[bytes]:
    """Emit one transaction per batch_size slice of the buffer.

    A withholding agent clears its buffer and returns the would-be tx ids
    without ever submitting; no protocol error surfaces, only a liveness
    probe can tell.
    """
    tx_ids: list[bytes] = []
    buffered, agent.batch_buffer = agent.batch_buffer, []
    agent._last_flush_tick = chain.now
    for start in range(0, len(buffered), agent.batch_size):
        chunk = buffered[start : start + agent.batch_size]
        ops = []
        inline_total = 0
        for ticket, op, inline in chunk:
            inline_total += len(inline)
            ops.append(vm.BundleOp(origin=ticket.origin, seq=ticket.seq,
                                   contract_id=op.contract_id, method=op.method,
                                   args=op.args, inline_data=inline))
        blob = vm.encode_bundle(ops)
        target = ops[0].contract_id if ops else b"\x00" * 20
        metadata = txcraft.TxMetadata(
            sender=agent.address,
            receiver=contract_address(target),
            nonce=max(chain.expected_nonce(agent.address.payload), agent.nonce_cache),
            gas_limit=schedule.base_tx + schedule.per_inline_byte * inline_total + 70_000 * len(ops),
            sim_time=chain.now,
        )
        agent.nonce_cache = metadata.nonce + 1
        payload = txcraft.TxPayload(contract_id=ops[0].contract_id if ops else b"\x00" * 20,
                                    method=vm.BUNDLE_METHOD, args=(blob,))
        tx = txcraft.build_transaction(agent.keypair.secret_key, metadata, payload)
        tx_ids.append(tx.tx_id)
        if agent.behavior is AgentBehavior.HONEST:
            chain.submit(tx)
    return tx_ids


@dataclass(frozen=True)
class RetrievedState:
    """Latest confirmed values relevant to an address, plus the confirming tx id."""

    entries: tuple[tuple[str, str], ...]
    tx_id: bytes
    tick: int

    def as_dict(self) -> dict[str, str]:
        return dict(self.entries)


def retrieve_state(chain: ChainNetwork, addr: identity.Address, contract_id: bytes,
                   node_id: int | None = None) -> RetrievedState:
    """Read the latest confirmed state slice for (addr, contract).

    The slice is served from the confirmed view of one honest maintainer;
    by persistence every honest node returns the same answer.
    """
    if node_id is not None:
        node = chain.nodes[node_id]
        if not node.local_view:
            raise NoConfirmedState("node has no confirmed view")
    entry = chain.touch_index.get((addr.payload, contract_id))
    if entry is None:
        raise NoConfirmedState(f"no confirmed transaction touches {addr.text} in {contract_id.hex()}")
    tx_id, written_keys, tick = entry
    values: dict[str, str] = {}
    payload = addr.payload
    # Only entries keyed by the address itself: any change to one of these
    # comes from a transaction that touches the address and so supersedes
    # the index entry, which is what keeps retrieval stable in between.
    mine = [key for key in written_keys if payload in key]
    for key in _standard_keys(chain.state, contract_id, payload) + mine:
        raw = chain.state.get_storage(contract_id, key)
        values[key.hex()] = raw.hex() if raw is not None else ""
    return RetrievedState(entries=tuple(sorted(values.items())), tx_id=tx_id, tick=tick)


def _standard_keys(state: vm.ContractState, contract_id: bytes, payload: bytes) -> list[bytes]:
    contract = state.contracts.get(contract_id)
    if contract is None:
        return []
    if contract.kind is vm.ContractKind.FUNGIBLE_TOKEN:
        return [b"bal:" + payload, b"sup:"]
    if contract.kind is vm.ContractKind.NON_FUNGIBLE_TOKEN:
        return [b"cnt:" + payload]
    return []
