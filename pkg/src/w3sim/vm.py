"""Deterministic gas-metered contract state machine with built-in contracts.

Contracts are built-in kinds rather than interpreted bytecode: a fungible
token with the six standard ledger methods, a non-fungible token with
unique (contract, token_id) ownership, a market that settles payment and
ownership atomically, and a verifier that anchors commitments for work
executed off-chain.

State root: every entry (storage cell, native balance, contract record)
hashes to a 32-byte digest; the root is the sum of those digests mod
2**256, rendered big-endian. The combiner is order-independent, so the
root is a pure function of the entry set and can be maintained in O(1)
per write. Tests recompute it from scratch as an independent oracle.

Execution buffers all writes and applies them only on success, so a
reverted call leaves the state root untouched. Gas is the schedule's
base cost plus per-component costs summed over the call.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum

from . import identity
from .txcraft import Transaction, _ser_bytes

_ROOT_MOD = 2**256

SYSTEM_CONTRACT_ID = b"\x00" * 20

# Storage key prefixes. Payment and ownership entries ("core") always
# execute on-chain; the rest ("aux") may be delegated to an off-chain
# executor under hybrid computation.
_CORE_PREFIXES = (b"bal:", b"sup:", b"own:", b"agt:", b"seq:", b"com:")


class ContractKind(Enum):
    FUNGIBLE_TOKEN = "FungibleToken"
    NON_FUNGIBLE_TOKEN = "NonFungibleToken"
    NFT_MARKET = "NftMarket"
    HYBRID_VERIFIER = "HybridVerifier"


@dataclass(frozen=True)
class GasSchedule:
    base_tx: int = 21000
    per_storage_write: int = 5000
    per_storage_read: int = 200
    per_event: int = 375
    per_inline_byte: int = 16


DEFAULT_GAS_SCHEDULE = GasSchedule()


@dataclass
class ContractDef:
    contract_id: bytes
    kind: ContractKind
    params: dict


@dataclass(frozen=True)
class Event:
    tx_id: bytes
    name: str
    fields: tuple[tuple[str, str], ...]

    def field(self, key: str) -> str | None:
        for k, v in self.fields:
            if k == key:
                return v
        return None


class TxStatus(Enum):
    SUCCESS = "Success"
    REVERTED = "Reverted"


@dataclass(frozen=True)
class Receipt:
    status: TxStatus
    reason: str | None
    gas_used: int
    events: tuple[Event, ...]
    new_state_root: bytes
    writes: tuple[tuple[bytes, bytes], ...] = ()

    @property
    def success(self) -> bool:
        return self.status is TxStatus.SUCCESS


class VmError(Exception):
    pass


class DuplicateContract(VmError):
    pass


class QueryError(VmError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class _Revert(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _u64(n: int) -> bytes:
    return n.to_bytes(8, "big")


def _u128(n: int) -> bytes:
    # Unsigned 128-bit wrap-around domain; negatives are guarded before
    # every debit, the mask only matters for corrupted counters.
    return (n & (2**128 - 1)).to_bytes(16, "big")


def _canon_params(params: dict) -> bytes:
    items = []
    for k in sorted(params):
        v = params[k]
        items.append(f"{k}={v.hex() if isinstance(v, bytes) else v}")
    return ";".join(items).encode()


class ContractState:
    """Logical contract state: storage cells, native balances, contracts."""

    def __init__(self):
        self.storage: dict[bytes, dict[bytes, bytes]] = {}
        self.native_balances: dict[bytes, int] = {}
        self.contracts: dict[bytes, ContractDef] = {}
        self.event_log: list[Event] = []
        self._root_acc = 0

    @staticmethod
    def storage_entry_digest(contract_id: bytes, key: bytes, value: bytes) -> bytes:
        return identity.digest(b"w3/st" + _ser_bytes(contract_id) + _ser_bytes(key) + _ser_bytes(value))

    @staticmethod
    def native_entry_digest(payload: bytes, amount: int) -> bytes:
        return identity.digest(b"w3/nb" + _ser_bytes(payload) + _u128(amount))

    @staticmethod
    def contract_entry_digest(c: ContractDef) -> bytes:
        return identity.digest(b"w3/cd" + _ser_bytes(c.contract_id) + c.kind.value.encode() + _canon_params(c.params))

    @property
    def state_root(self) -> bytes:
        return self._root_acc.to_bytes(32, "big")

    def _add(self, entry_digest: bytes):
        self._root_acc = (self._root_acc + int.from_bytes(entry_digest, "big")) % _ROOT_MOD

    def _remove(self, entry_digest: bytes):
        self._root_acc = (self._root_acc - int.from_bytes(entry_digest, "big")) % _ROOT_MOD

    def get_storage(self, contract_id: bytes, key: bytes) -> bytes | None:
        return self.storage.get(contract_id, {}).get(key)

    def set_storage(self, contract_id: bytes, key: bytes, value: bytes | None):
        area = self.storage.setdefault(contract_id, {})
        old = area.get(key)
        if old is not None:
            self._remove(self.storage_entry_digest(contract_id, key, old))
        if value is None:
            area.pop(key, None)
        else:
            area[key] = value
            self._add(self.storage_entry_digest(contract_id, key, value))

    def native_balance(self, payload: bytes) -> int:
        return self.native_balances.get(payload, 0)

    def credit_native(self, payload: bytes, amount: int):
        self._set_native(payload, self.native_balance(payload) + amount)

    def debit_native(self, payload: bytes, amount: int):
        bal = self.native_balance(payload)
        if amount > bal:
            raise VmError("native balance cannot go negative")
        self._set_native(payload, bal - amount)

    def _set_native(self, payload: bytes, amount: int):
        old = self.native_balances.get(payload)
        if old is not None:
            self._remove(self.native_entry_digest(payload, old))
        if amount == 0:
            self.native_balances.pop(payload, None)
        else:
            self.native_balances[payload] = amount
            self._add(self.native_entry_digest(payload, amount))

    def register_contract(self, contract: ContractDef):
        if contract.contract_id in self.contracts:
            raise DuplicateContract(f"contract {contract.contract_id.hex()} already deployed")
        self.contracts[contract.contract_id] = contract
        self._add(self.contract_entry_digest(contract))


def is_aux_key(key: bytes) -> bool:
    """True for bookkeeping entries that hybrid computation may delegate."""
    return not key.startswith(_CORE_PREFIXES)


def deploy_contract(state: ContractState, contract: ContractDef) -> tuple[ContractState, bytes]:
    """Register a contract and run its constructor writes."""
    state.register_contract(contract)
    if contract.kind is ContractKind.FUNGIBLE_TOKEN:
        supply = int(contract.params["supply"])
        deployer = contract.params["deployer"]
        state.set_storage(contract.contract_id, b"sup:", _u128(supply))
        if supply:
            state.set_storage(contract.contract_id, b"bal:" + deployer, _u128(supply))
    return state, contract.contract_id


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BundleOp:
    """One user operation inside an agent-signed bundle."""

    origin: bytes
    seq: int
    contract_id: bytes
    method: str
    args: tuple[bytes, ...] = ()
    inline_data: bytes = b""


BUNDLE_METHOD = "__bundle__"


def encode_bundle(ops: list[BundleOp]) -> bytes:
    parts = [len(ops).to_bytes(4, "big")]
    for op in ops:
        parts.append(_ser_bytes(op.origin))
        parts.append(_u64(op.seq))
        parts.append(_ser_bytes(op.contract_id))
        parts.append(_ser_bytes(op.method.encode()))
        parts.append(len(op.args).to_bytes(4, "big"))
        parts.extend(_ser_bytes(a) for a in op.args)
        parts.append(_ser_bytes(op.inline_data))
    return b"".join(parts)


def decode_bundle(blob: bytes) -> list[BundleOp]:
    pos = 0

    def take(n):
        nonlocal pos
        chunk = blob[pos : pos + n]
        if len(chunk) != n:
            raise ValueError("truncated bundle")
        pos += n
        return chunk

    def take_bytes():
        return take(int.from_bytes(take(4), "big"))

    count = int.from_bytes(take(4), "big")
    ops = []
    for _ in range(count):
        origin = take_bytes()
        seq = int.from_bytes(take(8), "big")
        contract_id = take_bytes()
        method = take_bytes().decode()
        argc = int.from_bytes(take(4), "big")
        args = tuple(take_bytes() for _ in range(argc))
        inline = take_bytes()
        ops.append(BundleOp(origin, seq, contract_id, method, args, inline))
    return ops


@dataclass
class DelegationPolicy:
    """Hybrid-computation context for one execution.

    Aux writes are delegated to the off-chain executor: they still land in
    the logical state but cost no on-chain write gas; instead a commitment
    event anchors their digest. A write is inside the on-chain checked
    region iff digest(key)[0] < 256*(1 - offchain_fraction). A malicious
    executor tampers one delegated write per call: landing in the checked
    region raises CommitmentMismatch, outside it the wrong value is applied
    silently and reported to violation_sink.
    """

    offchain_fraction: float = 0.5
    malicious: bool = False
    tamper_target: str = "auto"  # auto | checked | unchecked
    run_seed: int = 0

    def is_checked(self, key: bytes) -> bool:
        bound = int(256 * (1.0 - self.offchain_fraction))
        return identity.digest(b"w3/chk" + key)[0] < bound


class _View:
    """Read-through overlay so bundle ops observe earlier ops' writes."""

    def __init__(self, state: ContractState):
        self.state = state
        self.pending: dict[tuple[bytes, bytes], bytes | None] = {}

    def get(self, contract_id: bytes, key: bytes) -> bytes | None:
        slot = (contract_id, key)
        if slot in self.pending:
            return self.pending[slot]
        return self.state.get_storage(contract_id, key)

    def set(self, contract_id: bytes, key: bytes, value: bytes | None):
        self.pending[(contract_id, key)] = value


class _Call:
    """Metering scope for a single op: buffered writes, reads, events."""

    def __init__(self, view: _View, tx_id: bytes):
        self.view = view
        self.tx_id = tx_id
        self.reads: list[tuple[bytes, bytes]] = []
        self.writes: list[tuple[bytes, bytes, bytes | None]] = []
        self.events: list[Event] = []

    def sload(self, contract_id: bytes, key: bytes) -> bytes | None:
        self.reads.append((contract_id, key))
        for cid, k, v in reversed(self.writes):
            if cid == contract_id and k == key:
                return v
        return self.view.get(contract_id, key)

    def sstore(self, contract_id: bytes, key: bytes, value: bytes | None):
        self.writes.append((contract_id, key, value))

    def emit(self, name: str, **fields: str):
        self.events.append(Event(self.tx_id, name, tuple(sorted(fields.items()))))


def _load_amount(raw: bytes | None) -> int:
    return int.from_bytes(raw, "big") if raw else 0


def _ft_call(call: _Call, cid: bytes, sender: bytes, method: str, args: tuple[bytes, ...]):
    if method == "transfer":
        to, amount = args[0], _load_amount(args[1])
        bal = _load_amount(call.sload(cid, b"bal:" + sender))
        if bal < amount:
            raise _Revert("InsufficientBalance")
        call.sstore(cid, b"bal:" + sender, _u128(bal - amount))
        call.sstore(cid, b"bal:" + to, _u128(_load_amount(call.sload(cid, b"bal:" + to)) + amount))
        call.emit("Transfer", src=sender.hex(), dst=to.hex(), amount=str(amount))
    elif method == "approve":
        spender, amount = args[0], _load_amount(args[1])
        call.sstore(cid, b"alw:" + sender + spender, _u128(amount))
        call.emit("Approval", owner=sender.hex(), spender=spender.hex(), amount=str(amount))
    elif method == "transferFrom":
        src, dst, amount = args[0], args[1], _load_amount(args[2])
        allowance = _load_amount(call.sload(cid, b"alw:" + src + sender))
        if allowance < amount:
            raise _Revert("InsufficientAllowance")
        bal = _load_amount(call.sload(cid, b"bal:" + src))
        if bal < amount:
            raise _Revert("InsufficientBalance")
        call.sstore(cid, b"alw:" + src + sender, _u128(allowance - amount))
        call.sstore(cid, b"bal:" + src, _u128(bal - amount))
        call.sstore(cid, b"bal:" + dst, _u128(_load_amount(call.sload(cid, b"bal:" + dst)) + amount))
        call.emit("Transfer", src=src.hex(), dst=dst.hex(), amount=str(amount))
    elif method in ("totalSupply", "balanceOf", "allowance"):
        if method == "totalSupply":
            call.sload(cid, b"sup:")
        elif method == "balanceOf":
            call.sload(cid, b"bal:" + args[0])
        else:
            call.sload(cid, b"alw:" + args[0] + args[1])
    else:
        raise _Revert("UnknownMethod")


def _nft_call(call: _Call, cid: bytes, sender: bytes, method: str, args, inline_data: bytes):
    if method == "mint":
        token_id = args[0]
        if call.sload(cid, b"own:" + token_id) is not None:
            raise _Revert("DuplicateTokenId")
        call.sstore(cid, b"own:" + token_id, sender)
        call.sstore(cid, b"dat:" + token_id, inline_data)
        count = _load_amount(call.sload(cid, b"cnt:" + sender))
        call.sstore(cid, b"cnt:" + sender, _u128(count + 1))
        call.emit("Mint", owner=sender.hex(), token_id=token_id.hex())
    elif method == "transferFrom":
        src, dst, token_id = args[0], args[1], args[2]
        owner = call.sload(cid, b"own:" + token_id)
        if owner is None or owner != src or sender != src:
            raise _Revert("NotOwner")
        call.sstore(cid, b"own:" + token_id, dst)
        call.sstore(cid, b"cnt:" + src, _u128(_load_amount(call.sload(cid, b"cnt:" + src)) - 1))
        call.sstore(cid, b"cnt:" + dst, _u128(_load_amount(call.sload(cid, b"cnt:" + dst)) + 1))
        call.emit("NftTransfer", src=src.hex(), dst=dst.hex(), token_id=token_id.hex())
    elif method == "ownerOf":
        if call.sload(cid, b"own:" + args[0]) is None:
            raise _Revert("NotMinted")
    else:
        raise _Revert("UnknownMethod")


def _market_call(call: _Call, contract: ContractDef, sender: bytes, method: str, args):
    cid = contract.contract_id
    nft = contract.params["nft"]
    token = contract.params["token"]
    if method == "list":
        token_id, price = args[0], _load_amount(args[1])
        owner = call.sload(nft, b"own:" + token_id)
        if owner != sender:
            raise _Revert("NotOwner")
        call.sstore(cid, b"lst:" + token_id, _u128(price) + sender)
        call.emit("Listed", seller=sender.hex(), token_id=token_id.hex(), price=str(price))
    elif method == "buy":
        token_id, offered = args[0], _load_amount(args[1])
        listing = call.sload(cid, b"lst:" + token_id)
        if listing is None:
            raise _Revert("NotListed")
        price, seller = _load_amount(listing[:16]), listing[16:]
        if offered != price:
            raise _Revert("PriceMismatch")
        if call.sload(nft, b"own:" + token_id) != seller:
            raise _Revert("NotOwner")
        bal = _load_amount(call.sload(token, b"bal:" + sender))
        if bal < price:
            raise _Revert("InsufficientBalance")
        # Payment and ownership transfer settle in one call frame.
        call.sstore(token, b"bal:" + sender, _u128(bal - price))
        call.sstore(token, b"bal:" + seller, _u128(_load_amount(call.sload(token, b"bal:" + seller)) + price))
        call.sstore(nft, b"own:" + token_id, sender)
        call.sstore(nft, b"cnt:" + seller, _u128(_load_amount(call.sload(nft, b"cnt:" + seller)) - 1))
        call.sstore(nft, b"cnt:" + sender, _u128(_load_amount(call.sload(nft, b"cnt:" + sender)) + 1))
        call.sstore(cid, b"lst:" + token_id, None)
        call.emit("Transfer", src=sender.hex(), dst=seller.hex(), amount=str(price))
        call.emit("NftTransfer", src=seller.hex(), dst=sender.hex(), token_id=token_id.hex())
        call.emit("Sale", buyer=sender.hex(), seller=seller.hex(), token_id=token_id.hex(), price=str(price))
    else:
        raise _Revert("UnknownMethod")


def _dispatch(call: _Call, state: ContractState, sender: bytes, contract_id: bytes,
              method: str, args, inline_data: bytes):
    contract = state.contracts.get(contract_id)
    if contract is None:
        raise _Revert("UnknownContract")
    if contract.kind is ContractKind.FUNGIBLE_TOKEN:
        _ft_call(call, contract_id, sender, method, args)
    elif contract.kind is ContractKind.NON_FUNGIBLE_TOKEN:
        _nft_call(call, contract_id, sender, method, args, inline_data)
    elif contract.kind is ContractKind.NFT_MARKET:
        _market_call(call, contract, sender, method, args)
    else:
        raise _Revert("UnknownMethod")


@dataclass
class _OpOutcome:
    ok: bool
    reason: str | None
    reads: list
    writes: list
    events: list


def _run_op(view: _View, state: ContractState, tx_id: bytes, sender: bytes,
            contract_id: bytes, method: str, args, inline_data: bytes) -> _OpOutcome:
    call = _Call(view, tx_id)
    try:
        _dispatch(call, state, sender, contract_id, method, args, inline_data)
    except _Revert as err:
        return _OpOutcome(False, err.reason, call.reads, [], [])
    return _OpOutcome(True, None, call.reads, call.writes, call.events)


def execute(state: ContractState, tx: Transaction, schedule: GasSchedule = DEFAULT_GAS_SCHEDULE,
            *, delegation: DelegationPolicy | None = None,
            violation_sink=None) -> tuple[ContractState, Receipt]:
    """Apply one validated transaction; returns the (mutated) state and receipt.

    Deterministic: same state, tx, schedule and delegation yield the same
    receipt and root. On revert only gas accounting survives; the state
    root is untouched.
    """
    view = _View(state)
    gas = schedule.base_tx + schedule.per_inline_byte * len(tx.payload.inline_data)
    events: list[Event] = []
    applied: list[tuple[bytes, bytes, bytes | None]] = []
    sender = tx.metadata.sender.payload
    revert_reason: str | None = None

    if tx.payload.method == BUNDLE_METHOD:
        ops = []
        try:
            ops = decode_bundle(tx.payload.args[0] if tx.payload.args else b"")
        except (ValueError, IndexError):
            revert_reason = "MalformedBundle"
        for i, op in enumerate(ops):
            gas += schedule.per_inline_byte * len(op.inline_data)
            gas += 2 * schedule.per_storage_read  # registration + sequence lookups
            reg = view.get(SYSTEM_CONTRACT_ID, b"agt:" + sender + op.origin)
            expected_seq = _load_amount(view.get(SYSTEM_CONTRACT_ID, b"seq:" + sender + op.origin))
            if reg is None:
                outcome = _OpOutcome(False, "UnregisteredUser", [], [], [])
            elif op.seq != expected_seq:
                outcome = _OpOutcome(False, "SequenceMismatch", [], [], [])
            else:
                # Sequence numbers are consumed even when the op reverts.
                seq_key = b"seq:" + sender + op.origin
                view.set(SYSTEM_CONTRACT_ID, seq_key, _u64(op.seq + 1))
                applied.append((SYSTEM_CONTRACT_ID, seq_key, _u64(op.seq + 1)))
                gas += schedule.per_storage_write
                outcome = _run_op(view, state, tx.tx_id, op.origin, op.contract_id,
                                  op.method, op.args, op.inline_data)
            marker = {"origin": op.origin.hex(), "seq": str(op.seq)}
            gas_delta, op_writes, op_events, fail_reason = _apply_outcome(
                view, tx, schedule, delegation, outcome, violation_sink,
                seed_extra=i.to_bytes(4, "big"))
            gas += gas_delta
            if fail_reason is None:
                applied.extend(op_writes)
                events.extend(op_events)
                events.append(Event(tx.tx_id, "OpOk", tuple(sorted(marker.items()))))
            else:
                marker["reason"] = fail_reason
                events.append(Event(tx.tx_id, "OpFailed", tuple(sorted(marker.items()))))
            gas += schedule.per_event
    else:
        outcome = _run_op(view, state, tx.tx_id, sender, tx.payload.contract_id,
                          tx.payload.method, tx.payload.args, tx.payload.inline_data)
        gas_delta, op_writes, op_events, revert_reason = _apply_outcome(
            view, tx, schedule, delegation, outcome, violation_sink, seed_extra=b"")
        gas += gas_delta
        if revert_reason is None:
            applied.extend(op_writes)
            events.extend(op_events)

    if revert_reason is None and gas > tx.metadata.gas_limit:
        revert_reason = "OutOfGas"
        gas = tx.metadata.gas_limit

    if revert_reason is not None:
        return state, Receipt(TxStatus.REVERTED, revert_reason, min(gas, tx.metadata.gas_limit),
                              (), state.state_root)

    for cid, key, value in applied:
        state.set_storage(cid, key, value)
    state.event_log.extend(events)
    written = tuple((cid, key) for cid, key, _ in applied)
    return state, Receipt(TxStatus.SUCCESS, None, gas, tuple(events), state.state_root, written)


def _apply_outcome(view: _View, tx: Transaction, schedule: GasSchedule,
                   policy: DelegationPolicy | None, outcome: _OpOutcome,
                   violation_sink, seed_extra: bytes):
    """Price one op outcome and stage its writes into the view.

    Returns (gas_delta, writes, events, fail_reason). With a delegation
    policy the core leg executes on-chain at full price while aux writes
    are applied under a commitment anchored by one event.
    """
    if not outcome.ok:
        return schedule.per_storage_read * len(outcome.reads), [], [], outcome.reason

    if policy is None:
        gas = schedule.per_storage_read * len(outcome.reads)
        gas += schedule.per_storage_write * len(outcome.writes)
        gas += schedule.per_event * len(outcome.events)
        for cid, key, value in outcome.writes:
            view.set(cid, key, value)
        return gas, list(outcome.writes), list(outcome.events), None

    core_writes = [(c, k, v) for c, k, v in outcome.writes if not is_aux_key(k)]
    aux_writes = [(c, k, v) for c, k, v in outcome.writes if is_aux_key(k)]
    core_reads = [(c, k) for c, k in outcome.reads if not is_aux_key(k)]

    tampered_checked = False
    if policy.malicious and aux_writes:
        rng = random.Random(policy.run_seed
                            ^ int.from_bytes(identity.digest(tx.tx_id + seed_extra)[:8], "big"))
        pool = aux_writes
        if policy.tamper_target == "checked":
            pool = [w for w in aux_writes if policy.is_checked(w[1])]
        elif policy.tamper_target == "unchecked":
            pool = [w for w in aux_writes if not policy.is_checked(w[1])]
        if pool:
            idx = aux_writes.index(rng.choice(pool))
            cid, key, value = aux_writes[idx]
            bad = bytes(b ^ 0xFF for b in value) if value else b"\xff"
            aux_writes[idx] = (cid, key, bad)
            if policy.is_checked(key):
                tampered_checked = True
            elif violation_sink is not None:
                violation_sink(tx.tx_id)

    gas = schedule.per_storage_read * len(core_reads)
    gas += schedule.per_storage_write * len(core_writes)
    gas += schedule.per_event * len(outcome.events)
    if aux_writes:
        gas += schedule.per_event  # the commitment anchoring the delegated leg
    if tampered_checked:
        return gas, [], [], "CommitmentMismatch"

    events = list(outcome.events)
    if aux_writes:
        commitment = identity.digest(
            b"w3/com" + b"".join(_ser_bytes(c) + _ser_bytes(k) + _ser_bytes(v or b"")
                                 for c, k, v in aux_writes))
        events.append(Event(tx.tx_id, "Commitment", (("digest", commitment.hex()),)))
    writes = []
    for cid, key, value in core_writes + aux_writes:
        view.set(cid, key, value)
        writes.append((cid, key, value))
    return gas, writes, events, None


# ---------------------------------------------------------------------------
# Read-only queries
# ---------------------------------------------------------------------------


def query_state(state: ContractState, contract_id: bytes, method: str, args: tuple[bytes, ...] = ()):
    """Read-only path: no state change, no gas."""
    contract = state.contracts.get(contract_id)
    if contract is None:
        raise QueryError("UnknownContract")
    kind = contract.kind
    if kind is ContractKind.FUNGIBLE_TOKEN:
        if method == "totalSupply":
            return _load_amount(state.get_storage(contract_id, b"sup:"))
        if method == "balanceOf":
            return _load_amount(state.get_storage(contract_id, b"bal:" + args[0]))
        if method == "allowance":
            return _load_amount(state.get_storage(contract_id, b"alw:" + args[0] + args[1]))
    elif kind is ContractKind.NON_FUNGIBLE_TOKEN:
        if method == "ownerOf":
            owner = state.get_storage(contract_id, b"own:" + args[0])
            if owner is None:
                raise QueryError("NotMinted")
            return owner
        if method == "dataOf":
            data = state.get_storage(contract_id, b"dat:" + args[0])
            if data is None:
                raise QueryError("NotMinted")
            return data
    elif kind is ContractKind.NFT_MARKET:
        if method == "listing":
            listing = state.get_storage(contract_id, b"lst:" + args[0])
            if listing is None:
                raise QueryError("NotListed")
            return listing
    elif kind is ContractKind.HYBRID_VERIFIER:
        if method == "commitmentAt":
            return state.get_storage(contract_id, b"com:" + args[0])
    raise QueryError("UnknownMethod")


def export_events_ndjson(state: ContractState) -> str:
    """Event log as newline-delimited JSON records."""
    lines = []
    for ev in state.event_log:
        record = {"tx_id": ev.tx_id.hex(), "event_name": ev.name, "fields": dict(ev.fields)}
        lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")
