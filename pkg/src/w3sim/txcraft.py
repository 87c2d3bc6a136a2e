"""Signed transaction envelopes with a canonical byte serialization.

The canonical form is length-prefixed fields in declaration order with
big-endian integers, so transaction ids are bit-exact across builds.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import identity
from .identity import Address, Signature


class TxError(Exception):
    pass


class SenderKeyMismatch(TxError):
    pass


class InvalidSignature(TxError):
    pass


class StaleNonce(TxError):
    pass


class FutureNonce(TxError):
    pass


@dataclass(frozen=True)
class TxMetadata:
    sender: Address
    receiver: Address
    nonce: int
    gas_limit: int
    sim_time: int


@dataclass(frozen=True)
class TxPayload:
    contract_id: bytes = b""
    method: str = ""
    args: tuple[bytes, ...] = ()
    inline_data: bytes = b""

    def __post_init__(self):
        if self.method and not self.contract_id:
            raise ValueError("a method call requires a contract_id")


@dataclass(frozen=True)
class Transaction:
    metadata: TxMetadata
    payload: TxPayload
    signature: Signature
    tx_id: bytes

    def wire_bytes(self) -> bytes:
        return serialize_transaction(self)


def _ser_bytes(b: bytes) -> bytes:
    return len(b).to_bytes(4, "big") + b


def _ser_u64(n: int) -> bytes:
    return n.to_bytes(8, "big")


def serialize_metadata(m: TxMetadata) -> bytes:
    # Addresses serialize as their scheme-independent 20-byte payload.
    return b"".join(
        (
            _ser_bytes(m.sender.payload),
            _ser_bytes(m.receiver.payload),
            _ser_u64(m.nonce),
            _ser_u64(m.gas_limit),
            _ser_u64(m.sim_time),
        )
    )


def serialize_payload(p: TxPayload) -> bytes:
    parts = [
        _ser_bytes(p.contract_id),
        _ser_bytes(p.method.encode()),
        len(p.args).to_bytes(4, "big"),
    ]
    parts.extend(_ser_bytes(a) for a in p.args)
    parts.append(_ser_bytes(p.inline_data))
    return b"".join(parts)


def signing_bytes(metadata: TxMetadata, payload: TxPayload) -> bytes:
    return serialize_metadata(metadata) + serialize_payload(payload)


def serialize_transaction(tx: Transaction) -> bytes:
    return signing_bytes(tx.metadata, tx.payload) + _ser_bytes(tx.signature.tag)


def build_transaction(sk: bytes, metadata: TxMetadata, payload: TxPayload) -> Transaction:
    """Sign (metadata, payload) with sk and seal the envelope with its id."""
    pk = identity._public_key_of(sk)
    if identity.digest(pk)[: identity.ADDRESS_BYTES] != metadata.sender.payload:
        raise SenderKeyMismatch("secret key does not control metadata.sender")
    sig = identity.sign(sk, signing_bytes(metadata, payload))
    body = signing_bytes(metadata, payload) + _ser_bytes(sig.tag)
    return Transaction(metadata=metadata, payload=payload, signature=sig, tx_id=identity.digest(body))


def validate_transaction(tx: Transaction, expected_nonce: int) -> None:
    """Raise InvalidSignature / StaleNonce / FutureNonce; return None when ok."""
    pk = identity.public_key_for_payload(tx.metadata.sender.payload)
    if pk is None or not identity.verify(pk, signing_bytes(tx.metadata, tx.payload), tx.signature):
        raise InvalidSignature(f"transaction {tx.tx_id.hex()[:12]} has a bad signature")
    if tx.metadata.nonce < expected_nonce:
        raise StaleNonce(f"nonce {tx.metadata.nonce} already used (expected {expected_nonce})")
    if tx.metadata.nonce > expected_nonce:
        raise FutureNonce(f"nonce {tx.metadata.nonce} leaves a gap (expected {expected_nonce})")
