"""Simulated maintainer network producing confirmed blocks.

Two confirmation rules:

* BftQuorum: a rotating proposer's block confirms in-round once strictly
  more than fraction * n nodes vote for it (immediate finality). For the
  2/3 default that is the classic n >= 3f + 1 tolerance: f <= (n-1)/3.
* MajorityChain: weighted random election extends one of two statically
  held branches (honest vs adversarial); a block confirms once it is
  confirm_depth deep on the branch whose holder share exceeds fraction.
  Branch holding is static: confirmation is gated on holder share, so no
  two confirmed blocks can ever share a height below threshold.

Everything runs on an integer tick clock with a seeded PRNG; a round's
duration grows with node count times the block's byte and gas footprint,
which is what makes architecture choices measurable downstream.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum
from random import Random

from . import identity, vm
from .txcraft import Transaction, validate_transaction, TxError

ZERO_HASH = b"\x00" * 32


class ConsensusError(Exception):
    pass


class DuplicateTx(ConsensusError):
    pass


class PoolFull(ConsensusError):
    pass


class RuleKind(Enum):
    MAJORITY_CHAIN = "MajorityChain"
    BFT_QUORUM = "BftQuorum"


class NodeBehavior(Enum):
    HONEST = "Honest"
    CRASHED = "Crashed"
    BYZANTINE = "Byzantine"


class ByzantineMode(Enum):
    SILENT = "silent"
    EQUIVOCATE = "equivocate"
    WITHHOLD_TXS = "withhold"


@dataclass(frozen=True)
class ConsensusRule:
    kind: RuleKind = RuleKind.BFT_QUORUM
    fraction: float = 2 / 3
    confirm_depth: int = 6


@dataclass(frozen=True)
class ConsensusConfig:
    rule: ConsensusRule = ConsensusRule()
    n_nodes: int = 7
    block_interval: int = 1
    msg_delay: tuple[int, int] = (0, 2)
    adversarial_share: float = 0.0
    pool_capacity: int = 10_000
    max_txs_per_block: int = 8
    network_capacity: int = 4_000
    gas_byte_equiv: int = 64
    maintainer_crash_prob: float = 0.0

    def __post_init__(self):
        if not (0 < self.rule.fraction <= 1):
            raise ValueError("fraction must be in (0, 1]")
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")

    @property
    def quorum(self) -> int:
        # Strictly more than fraction*n votes, computed over exact rationals
        # so 2/3 of 9 demands 7, not a float-rounded 6.
        frac = Fraction(self.rule.fraction).limit_denominator(10_000)
        return min(self.n_nodes, int(frac * self.n_nodes) + 1)


@dataclass(frozen=True)
class Block:
    height: int
    parent_hash: bytes
    txs: tuple[Transaction, ...]
    state_root: bytes
    proposer: int
    block_hash: bytes


def make_block(height: int, parent_hash: bytes, txs: tuple[Transaction, ...],
               state_root: bytes, proposer: int) -> Block:
    header = b"".join(
        [height.to_bytes(8, "big"), parent_hash, proposer.to_bytes(8, "big", signed=True)]
        + [tx.tx_id for tx in txs]
        + [state_root]
    )
    return Block(height, parent_hash, txs, state_root, proposer, identity.digest(b"w3/blk" + header))


@dataclass
class MaintainerNode:
    node_id: int
    keypair: identity.KeyPair
    address: identity.Address
    behavior: NodeBehavior = NodeBehavior.HONEST
    byz_mode: ByzantineMode = ByzantineMode.SILENT
    local_view: list[Block] = field(default_factory=list)


@dataclass(frozen=True)
class Confirmation:
    tx: Transaction
    receipt: vm.Receipt
    block_hash: bytes
    height: int
    tick: int


class ChainNetwork:
    """One simulated chain instance: pool, maintainers, confirmed log, state.

    Single-threaded by contract; independent instances share nothing.
    """

    def __init__(self, config: ConsensusConfig, state: vm.ContractState | None = None,
                 executor=None, seed: int = 0,
                 behaviors: list[NodeBehavior] | None = None,
                 byz_mode: ByzantineMode = ByzantineMode.SILENT,
                 block_hook=None):
        self.config = config
        self.state = state if state is not None else vm.ContractState()
        self.executor = executor or (lambda st, tx: vm.execute(st, tx)[1])
        self.block_hook = block_hook
        self.rng = Random(seed)
        self.now = 0
        self.round_count = 0
        self.pool: OrderedDict[bytes, Transaction] = OrderedDict()
        self.seen_tx: set[bytes] = set()
        self.next_nonce: dict[bytes, int] = {}
        self.nodes: list[MaintainerNode] = []
        for i in range(config.n_nodes):
            kp = identity.generate_keypair(b"maintainer/" + str(seed).encode() + b"/" + str(i).encode())
            addr = identity.derive_address(kp.public_key)
            behavior = behaviors[i] if behaviors else NodeBehavior.HONEST
            self.nodes.append(MaintainerNode(i, kp, addr, behavior, byz_mode))
        genesis = make_block(0, ZERO_HASH, (), self.state.state_root, -1)
        self.genesis = genesis
        self.confirmed_blocks: list[Block] = [genesis]
        self.confirmations: list[Confirmation] = []
        self.confirmed_tick: dict[bytes, int] = {}
        self.discards: list[tuple[bytes, str]] = []
        self.touch_index: dict[tuple[bytes, bytes], tuple[bytes, tuple[bytes, ...], int]] = {}
        self.gas_total = 0
        self.bytes_total = 0
        self._unconfirmed = 0
        self._honest_branch: list[Block] = [genesis]
        self._adv_branch: list[Block] = [genesis]
        self._mc_confirmed_upto = 0
        majority = config.rule.kind is RuleKind.MAJORITY_CHAIN
        for node in self.nodes:
            if majority:
                # Nodes hold their branch; crashed nodes keep a frozen view.
                if node.behavior is NodeBehavior.BYZANTINE:
                    node.local_view = self._adv_branch
                elif node.behavior is NodeBehavior.CRASHED:
                    node.local_view = [genesis]
                else:
                    node.local_view = self._honest_branch
            else:
                node.local_view = [genesis]

    # -- submission ---------------------------------------------------------

    def submit(self, tx: Transaction) -> None:
        if tx.tx_id in self.seen_tx:
            raise DuplicateTx(tx.tx_id.hex())
        if len(self.pool) >= self.config.pool_capacity:
            raise PoolFull(f"pool at capacity {self.config.pool_capacity}")
        self.seen_tx.add(tx.tx_id)
        self.pool[tx.tx_id] = tx
        self._unconfirmed += 1

    def expected_nonce(self, payload: bytes) -> int:
        return self.next_nonce.get(payload, 0)

    # -- round machinery ----------------------------------------------------

    def run_round(self) -> list[Confirmation]:
        self.round_count += 1
        if self.config.rule.kind is RuleKind.BFT_QUORUM:
            return self._run_bft_round()
        return self._run_majority_round()

    def _offline(self, node: MaintainerNode) -> bool:
        if node.behavior is NodeBehavior.CRASHED:
            return True
        p = self.config.maintainer_crash_prob
        return p > 0 and self.rng.random() < p

    def _pack_block(self) -> tuple[Transaction, ...]:
        picked: list[Transaction] = []
        expected = dict(self.next_nonce)
        drop: list[bytes] = []
        for tx_id, tx in self.pool.items():
            if len(picked) >= self.config.max_txs_per_block:
                break
            sender = tx.metadata.sender.payload
            want = expected.get(sender, 0)
            if tx.metadata.nonce == want:
                picked.append(tx)
                expected[sender] = want + 1
            elif tx.metadata.nonce < want:
                drop.append(tx_id)  # stale; replay already confirmed
        for tx_id in drop:
            self.pool.pop(tx_id, None)
            self.discards.append((tx_id, "StaleNonce"))
            self._unconfirmed -= 1
        return tuple(picked)

    def _advance_clock(self, block_bytes: int, block_gas: int):
        work = self.config.n_nodes * (block_bytes + block_gas // self.config.gas_byte_equiv)
        dur = self.config.block_interval + math.ceil(work / self.config.network_capacity)
        lo, hi = self.config.msg_delay
        dur += self.rng.randint(lo, hi) if hi > lo else lo
        self.now += dur

    def _execute_txs(self, txs: tuple[Transaction, ...], proposer: int):
        receipts: list[tuple[Transaction, vm.Receipt]] = []
        block_gas = 0
        for tx in txs:
            sender = tx.metadata.sender.payload
            try:
                validate_transaction(tx, self.next_nonce.get(sender, 0))
            except TxError as err:
                self.discards.append((tx.tx_id, type(err).__name__))
                self._unconfirmed -= 1
                continue
            self.next_nonce[sender] = tx.metadata.nonce + 1
            receipt = self.executor(self.state, tx)
            receipts.append((tx, receipt))
            block_gas += receipt.gas_used
        return receipts, block_gas

    def _record_confirmations(self, block: Block,
                              receipts: list[tuple[Transaction, vm.Receipt]]) -> list[Confirmation]:
        confs = []
        for tx, receipt in receipts:
            conf = Confirmation(tx, receipt, block.block_hash, block.height, self.now)
            self.confirmed_tick[tx.tx_id] = self.now
            self._unconfirmed -= 1
            self._index_touches(tx, receipt)
            confs.append(conf)
        self.confirmations.extend(confs)
        return confs

    def _index_touches(self, tx: Transaction, receipt: vm.Receipt):
        if not receipt.success:
            return
        touched_contracts = {cid for cid, _ in receipt.writes}
        addrs = {tx.metadata.sender.payload}
        for ev in receipt.events:
            for key, value in ev.fields:
                if key in ("src", "dst", "owner", "seller", "buyer", "spender", "origin"):
                    try:
                        addrs.add(bytes.fromhex(value))
                    except ValueError:
                        pass
        for cid in touched_contracts:
            keys = tuple(k for c, k in receipt.writes if c == cid)
            for addr in addrs:
                self.touch_index[(addr, cid)] = (tx.tx_id, keys, self.now)

    def _votes_for(self, offline: set[int]) -> int:
        votes = 0
        for node in self.nodes:
            if node.node_id in offline or node.behavior is NodeBehavior.CRASHED:
                continue
            if node.behavior is NodeBehavior.HONEST:
                votes += 1
            elif node.byz_mode is not ByzantineMode.SILENT:
                votes += 1  # non-silent byzantine nodes vote to keep cover
        return votes

    def _run_bft_round(self) -> list[Confirmation]:
        proposer = self.nodes[self.round_count % self.config.n_nodes]
        offline = {node.node_id for node in self.nodes if self._offline(node)}
        height = len(self.confirmed_blocks)
        parent = self.confirmed_blocks[-1].block_hash

        if proposer.node_id in offline or (
            proposer.behavior is NodeBehavior.BYZANTINE and proposer.byz_mode is ByzantineMode.SILENT
        ):
            self._advance_clock(0, 0)
            return []

        if proposer.behavior is NodeBehavior.BYZANTINE and proposer.byz_mode is ByzantineMode.EQUIVOCATE:
            packed = self._pack_block()
            prop_a, prop_b = packed, tuple(reversed(packed))
            votes_a = votes_b = 0
            for node in self.nodes:
                if node.node_id in offline or node.behavior is NodeBehavior.CRASHED:
                    continue
                if node.behavior is NodeBehavior.BYZANTINE:
                    votes_a += 1
                    votes_b += 1
                elif node.node_id % 2 == 0:
                    votes_a += 1
                else:
                    votes_b += 1
            quorum = self.config.quorum
            if prop_a != prop_b:
                assert not (votes_a >= quorum and votes_b >= quorum), \
                    "equivocation must never confirm two blocks at one height"
            if votes_a >= quorum:
                txs = prop_a
            elif votes_b >= quorum:
                txs = prop_b
            else:
                self._advance_clock(0, 0)
                return []
        else:
            txs = self._pack_block()
            if proposer.behavior is NodeBehavior.BYZANTINE and proposer.byz_mode is ByzantineMode.WITHHOLD_TXS:
                txs = ()
            if self._votes_for(offline) < self.config.quorum:
                self._advance_clock(0, 0)
                return []

        for tx in txs:
            self.pool.pop(tx.tx_id, None)
        receipts, block_gas = self._execute_txs(txs, proposer.node_id)
        if self.block_hook is not None:
            block_gas += self.block_hook(self.state, height, [r for _, r in receipts])
        block = make_block(height, parent, txs, self.state.state_root, proposer.node_id)
        if block_gas:
            self.state.credit_native(proposer.address.payload, block_gas)
        self.confirmed_blocks.append(block)
        for node in self.nodes:
            if node.behavior is not NodeBehavior.CRASHED:
                node.local_view.append(block)
        block_bytes = sum(len(tx.wire_bytes()) for tx in txs)
        self.gas_total += block_gas
        self.bytes_total += block_bytes
        self._advance_clock(block_bytes, block_gas)
        return self._record_confirmations(block, receipts)

    def _qualifying_branch(self) -> list[Block] | None:
        honest_share = 1.0 - self.config.adversarial_share
        if honest_share > self.config.rule.fraction:
            return self._honest_branch
        if self.config.adversarial_share > self.config.rule.fraction:
            return self._adv_branch
        return None

    def _run_majority_round(self) -> list[Confirmation]:
        adversarial = self.rng.random() < self.config.adversarial_share
        if adversarial:
            branch = self._adv_branch
            txs: tuple[Transaction, ...] = ()  # adversary withholds user txs
            proposer = -2
        else:
            branch = self._honest_branch
            txs = self._pack_block()
            proposer = self.round_count % self.config.n_nodes
            for tx in txs:
                self.pool.pop(tx.tx_id, None)
        tip = branch[-1]
        block = make_block(tip.height + 1, tip.block_hash, txs, self.state.state_root, proposer)
        branch.append(block)
        self._advance_clock(sum(len(tx.wire_bytes()) for tx in txs), 0)

        confs: list[Confirmation] = []
        qualifying = self._qualifying_branch()
        if qualifying is None:
            return confs
        k = self.config.rule.confirm_depth
        deep_enough = len(qualifying) - 1 - k  # highest index buried k deep
        while self._mc_confirmed_upto < deep_enough:
            self._mc_confirmed_upto += 1
            pending = qualifying[self._mc_confirmed_upto]
            receipts, block_gas = self._execute_txs(pending.txs, pending.proposer)
            if self.block_hook is not None:
                block_gas += self.block_hook(self.state, pending.height, [r for _, r in receipts])
            if block_gas and pending.proposer >= 0:
                self.state.credit_native(self.nodes[pending.proposer].address.payload, block_gas)
            self.confirmed_blocks.append(pending)
            self.gas_total += block_gas
            self.bytes_total += sum(len(tx.wire_bytes()) for tx in pending.txs)
            confs.extend(self._record_confirmations(pending, receipts))
        return confs

    # -- probes --------------------------------------------------------------

    def check_persistence(self, height: int | None = None) -> bool:
        """True iff honest nodes report identical blocks up to tip - k."""
        k = self.config.rule.confirm_depth if self.config.rule.kind is RuleKind.MAJORITY_CHAIN else 0
        honest = [n for n in self.nodes if n.behavior is NodeBehavior.HONEST]
        if not honest:
            return True
        tip = min(len(n.local_view) for n in honest) - 1
        limit = tip - k if height is None else min(height, tip - k)
        for h in range(0, max(limit, 0) + 1):
            hashes = {n.local_view[h].block_hash for n in honest}
            if len(hashes) != 1:
                return False
        return True

    def check_liveness(self, tx_id: bytes, deadline_ticks: int) -> bool:
        """Advance rounds until the deadline; true iff tx confirmed by then."""
        if deadline_ticks <= 0:
            return False
        guard = 0
        while self.now < deadline_ticks and tx_id not in self.confirmed_tick and guard < 100_000:
            self.run_round()
            guard += 1
        tick = self.confirmed_tick.get(tx_id)
        return tick is not None and tick <= deadline_ticks

    def run_until_drained(self, max_rounds: int = 5000) -> int:
        """Run rounds until every submitted tx confirms or is discarded.

        Bounded by max_rounds so byzantine stalls and non-qualifying
        branches terminate; leftover transactions simply stay unconfirmed.
        """
        rounds = 0
        while rounds < max_rounds and (self.pool or self._unconfirmed > 0):
            self.run_round()
            rounds += 1
        return rounds


def chain_ndjson(network: ChainNetwork) -> str:
    """Confirmed chain as newline-delimited JSON blocks.

    Each transaction appears both by id and as its canonical wire bytes
    in hex, so envelopes can be inspected or re-parsed offline.
    """
    lines = []
    for block in network.confirmed_blocks:
        record = {
            "height": block.height,
            "parent_hash": block.parent_hash.hex(),
            "block_hash": block.block_hash.hex(),
            "proposer": block.proposer,
            "state_root": block.state_root.hex(),
            "tx_ids": [tx.tx_id.hex() for tx in block.txs],
            "tx_wire": [tx.wire_bytes().hex() for tx in block.txs],
        }
        lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")
