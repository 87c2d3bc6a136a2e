"""The architectural design space: access x computation x storage.

Twelve named types cover every combination of browser/agent access,
on-chain/hybrid computation, and on-chain/hybrid/off-chain storage.
Consensus and state confirmation stay on-chain in every type, which is
the decentralization floor all of them share. compose() wires a type
into one runnable simulation topology.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from random import Random

from . import access, consensus, identity, storage, vm

FT_ID = b"\x01" * 20
NFT_ID = b"\x02" * 20
MARKET_ID = b"\x03" * 20
VERIFIER_ID = b"\x04" * 20


class AccessMode(Enum):
    BROWSER = 1  # A1
    AGENT = 2    # A2


class ComputeMode(Enum):
    ON_CHAIN = 1  # B1
    HYBRID = 2    # B2


class StorageMode(Enum):
    ON_CHAIN = 1   # C1
    HYBRID = 2     # C2
    OFF_CHAIN = 3  # C3


@dataclass(frozen=True)
class ArchitectureType:
    type_id: int
    access: AccessMode
    compute: ComputeMode
    storage: StorageMode

    @property
    def tuple_label(self) -> str:
        return f"A{self.access.value},B{self.compute.value},C{self.storage.value}"

    def modified_components(self) -> int:
        return sum(
            1
            for mode in (self.access, self.compute, self.storage)
            if mode.value != 1
        )


_TYPE_TUPLES: dict[int, tuple[int, int, int]] = {
    1: (1, 1, 1), 2: (1, 1, 2), 3: (1, 1, 3),
    4: (1, 2, 1), 5: (1, 2, 2), 6: (1, 2, 3),
    7: (2, 1, 1), 8: (2, 1, 2), 9: (2, 1, 3),
    10: (2, 2, 1), 11: (2, 2, 2), 12: (2, 2, 3),
}
_TUPLE_TO_TYPE = {v: k for k, v in _TYPE_TUPLES.items()}


def architecture(type_id: int) -> ArchitectureType:
    if type_id not in _TYPE_TUPLES:
        raise ValueError(f"architecture type id must be 1..12, got {type_id}")
    a, b, c = _TYPE_TUPLES[type_id]
    return ArchitectureType(type_id, AccessMode(a), ComputeMode(b), StorageMode(c))


def type_from_tuple(access_mode: AccessMode, compute_mode: ComputeMode,
                    storage_mode: StorageMode) -> ArchitectureType:
    type_id = _TUPLE_TO_TYPE[(access_mode.value, compute_mode.value, storage_mode.value)]
    return ArchitectureType(type_id, access_mode, compute_mode, storage_mode)


def tuple_of(arch: ArchitectureType) -> tuple[AccessMode, ComputeMode, StorageMode]:
    return (arch.access, arch.compute, arch.storage)


def parse_tuple(text: str) -> ArchitectureType:
    """Parse 'A1,B2,C3' (case-insensitive, spaces allowed)."""
    parts = [p.strip().upper() for p in text.split(",")]
    if len(parts) != 3 or [p[0] for p in parts] != ["A", "B", "C"]:
        raise ValueError(f"expected 'Aa,Bb,Cc', got {text!r}")
    try:
        a, b, c = (int(p[1:]) for p in parts)
        return type_from_tuple(AccessMode(a), ComputeMode(b), StorageMode(c))
    except (ValueError, KeyError) as err:
        raise ValueError(f"invalid architecture tuple {text!r}") from err


ALL_TYPES = tuple(architecture(i) for i in range(1, 13))


class ExecutorBehavior(Enum):
    HONEST = "Honest"
    MALICIOUS = "Malicious"


@dataclass(frozen=True)
class HybridComputeConfig:
    offchain_fraction: float = 0.5
    executor_behavior: ExecutorBehavior = ExecutorBehavior.HONEST
    tamper_target: str = "auto"  # auto | checked | unchecked

    def __post_init__(self):
        if not (0.0 <= self.offchain_fraction <= 1.0):
            raise ValueError("offchain_fraction must be in [0, 1]")


@dataclass(frozen=True)
class SimConfig:
    """Dial set for one simulation run; defaults are the desk-scale setup."""

    seed: int = 42
    n_nodes: int = 7
    rule: consensus.ConsensusRule = consensus.ConsensusRule()
    block_interval: int = 1
    msg_delay: tuple[int, int] = (0, 2)
    max_txs_per_block: int = 8
    network_capacity: int = 4_000
    gas_byte_equiv: int = 64
    pool_capacity: int = 10_000
    gas_schedule: vm.GasSchedule = vm.DEFAULT_GAS_SCHEDULE
    storage_nodes: int = 10
    replicas: int = storage.DEFAULT_REPLICAS
    inline_threshold: int = storage.DEFAULT_INLINE_THRESHOLD
    inline_cap: int = storage.INLINE_CAP_BYTES
    batch_size: int = 10
    flush_interval: int = 5
    offchain_fraction: float = 0.5
    maintainer_crash_prob: float = 0.0


@dataclass(frozen=True)
class FaultKnobs:
    """Composition-level fault switches (derived from a fault plan)."""

    byzantine_maintainers: int = 0
    byz_mode: consensus.ByzantineMode = consensus.ByzantineMode.SILENT
    maintainer_crash_prob: float = 0.0
    storage_crash_prob: float = 0.0
    executor_behavior: ExecutorBehavior = ExecutorBehavior.HONEST
    tamper_target: str = "auto"


@dataclass
class SimulationTopology:
    """A composed architecture instance ready to run a workload."""

    arch: ArchitectureType
    config: SimConfig
    state: vm.ContractState
    chain: consensus.ChainNetwork
    fabric: storage.StorageFabric
    agent: access.Agent | None
    hybrid: HybridComputeConfig | None
    integrity_violations: int = 0
    tickets: list = field(default_factory=list)

    @property
    def uses_agent(self) -> bool:
        return self.agent is not None

    @property
    def uses_offchain_storage(self) -> bool:
        return self.fabric.plan.route is not storage.Route.ON_CHAIN


def storage_plan_for(arch: ArchitectureType, config: SimConfig) -> storage.StoragePlan:
    plan = storage.plan_for_storage_mode(
        arch.storage.value, replicas=config.replicas, inline_threshold=config.inline_threshold)
    return storage.StoragePlan(route=plan.route, replicas=plan.replicas,
                               inline_threshold=plan.inline_threshold, inline_cap=config.inline_cap)


def compose(arch: ArchitectureType, sim_config: SimConfig, *,
            funded: dict[bytes, int] | None = None,
            registered_users: tuple[bytes, ...] = (),
            faults: FaultKnobs | None = None) -> SimulationTopology:
    """Wire access, computation, storage and one chain into a topology.

    funded seeds fungible-token balances at genesis (the sum becomes the
    total supply); registered_users are granted to the agent when the
    access mode is agent-based.
    """
    faults = faults or FaultKnobs()
    state = vm.ContractState()

    deploy = vm.deploy_contract
    deploy(state, vm.ContractDef(FT_ID, vm.ContractKind.FUNGIBLE_TOKEN,
                                 {"supply": 0, "deployer": b"\x00" * 20}))
    deploy(state, vm.ContractDef(NFT_ID, vm.ContractKind.NON_FUNGIBLE_TOKEN, {}))
    deploy(state, vm.ContractDef(MARKET_ID, vm.ContractKind.NFT_MARKET,
                                 {"nft": NFT_ID, "token": FT_ID}))
    deploy(state, vm.ContractDef(VERIFIER_ID, vm.ContractKind.HYBRID_VERIFIER, {}))

    total = 0
    for payload, amount in sorted((funded or {}).items()):
        state.set_storage(FT_ID, b"bal:" + payload, amount.to_bytes(16, "big"))
        total += amount
    state.set_storage(FT_ID, b"sup:", total.to_bytes(16, "big"))

    agent = None
    if arch.access is AccessMode.AGENT:
        agent = access.Agent.create(
            b"agent/" + str(sim_config.seed).encode(),
            batch_size=sim_config.batch_size, flush_interval=sim_config.flush_interval)
        for user in registered_users:
            agent.register_user(user)
        agent.genesis_registrations(state)

    hybrid = None
    delegation = None
    violations: list[int] = []
    if arch.compute is ComputeMode.HYBRID:
        hybrid = HybridComputeConfig(
            offchain_fraction=sim_config.offchain_fraction,
            executor_behavior=faults.executor_behavior,
            tamper_target=faults.tamper_target)
        delegation = vm.DelegationPolicy(
            offchain_fraction=hybrid.offchain_fraction,
            malicious=hybrid.executor_behavior is ExecutorBehavior.MALICIOUS,
            tamper_target=hybrid.tamper_target,
            run_seed=sim_config.seed)

    topology_ref: list[SimulationTopology] = []

    def executor(st: vm.ContractState, tx) -> vm.Receipt:
        def sink(_tx_id):
            if topology_ref:
                topology_ref[0].integrity_violations += 1

        _, receipt = vm.execute(st, tx, sim_config.gas_schedule,
                                delegation=delegation, violation_sink=sink)
        return receipt

    block_hook = None
    if arch.compute is ComputeMode.HYBRID:
        def block_hook(st: vm.ContractState, height: int, receipts) -> int:
            digests = [bytes.fromhex(ev.field("digest") or "")
                       for r in receipts for ev in r.events if ev.name == "Commitment"]
            if not digests:
                return 0
            fold = identity.digest(b"w3/fold" + b"".join(digests))
            st.set_storage(VERIFIER_ID, b"com:" + height.to_bytes(8, "big"), fold)
            return sim_config.gas_schedule.per_storage_write

    cons_config = consensus.ConsensusConfig(
        rule=sim_config.rule,
        n_nodes=sim_config.n_nodes,
        block_interval=sim_config.block_interval,
        msg_delay=sim_config.msg_delay,
        pool_capacity=sim_config.pool_capacity,
        max_txs_per_block=sim_config.max_txs_per_block,
        network_capacity=sim_config.network_capacity,
        gas_byte_equiv=sim_config.gas_byte_equiv,
        maintainer_crash_prob=max(sim_config.maintainer_crash_prob, faults.maintainer_crash_prob),
    )
    behaviors = [
        consensus.NodeBehavior.BYZANTINE if i < faults.byzantine_maintainers
        else consensus.NodeBehavior.HONEST
        for i in range(cons_config.n_nodes)
    ]
    chain = consensus.ChainNetwork(cons_config, state, executor, seed=sim_config.seed,
                                   behaviors=behaviors, byz_mode=faults.byz_mode,
                                   block_hook=block_hook)

    fabric = storage.StorageFabric(
        storage_plan_for(arch, sim_config),
        store=storage.OffChainStore(sim_config.storage_nodes),
        is_confirmed=lambda tx_id: tx_id in chain.confirmed_tick,
    )
    if faults.storage_crash_prob > 0:
        fabric.fault_prob = faults.storage_crash_prob
        fabric.fault_rng = Random(sim_config.seed ^ 0x5707A6E)

    topo = SimulationTopology(arch=arch, config=sim_config, state=state, chain=chain,
                              fabric=fabric, agent=agent, hybrid=hybrid)
    topology_ref.append(topo)
    return topo


def execute_hybrid(state: vm.ContractState, tx, config: HybridComputeConfig,
                   schedule: vm.GasSchedule = vm.DEFAULT_GAS_SCHEDULE,
                   run_seed: int = 0, violation_sink=None) -> tuple[vm.ContractState, vm.Receipt]:
    """Run one transaction with the off-chain executor + on-chain verification."""
    policy = vm.DelegationPolicy(
        offchain_fraction=config.offchain_fraction,
        malicious=config.executor_behavior is ExecutorBehavior.MALICIOUS,
        tamper_target=config.tamper_target,
        run_seed=run_seed)
    return vm.execute(state, tx, schedule, delegation=policy, violation_sink=violation_sink)
