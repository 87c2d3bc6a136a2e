import random

import pytest

from w3sim import identity, txcraft, vm
from w3sim.archetypes import (
    ALL_TYPES,
    FT_ID,
    NFT_ID,
    MARKET_ID,
    VERIFIER_ID,
    AccessMode,
    ComputeMode,
    ExecutorBehavior,
    HybridComputeConfig,
    SimConfig,
    StorageMode,
    architecture,
    compose,
    execute_hybrid,
    parse_tuple,
    tuple_of,
    type_from_tuple,
)
from w3sim.storage import Route
from w3sim.vm import ContractDef, ContractKind, ContractState, deploy_contract, query_state


class TestTypeSpace:
    def test_named_corner_types(self):
        assert type_from_tuple(AccessMode.BROWSER, ComputeMode.ON_CHAIN, StorageMode.ON_CHAIN).type_id == 1
        assert type_from_tuple(AccessMode.AGENT, ComputeMode.ON_CHAIN, StorageMode.ON_CHAIN).type_id == 7
        assert type_from_tuple(AccessMode.AGENT, ComputeMode.HYBRID, StorageMode.OFF_CHAIN).type_id == 12

    def test_bijection_roundtrip(self):
        seen = set()
        for arch in ALL_TYPES:
            a, b, c = tuple_of(arch)
            again = type_from_tuple(a, b, c)
            assert again == arch
            seen.add((a, b, c))
        assert len(seen) == 12

    def test_parse_tuple(self):
        assert parse_tuple("A1,B1,C1").type_id == 1
        assert parse_tuple(" a2 , b2 , c3 ").type_id == 12
        for bad in ("A1,B1", "A3,B1,C1", "A1,B1,C4", "X1,B1,C1", "nonsense"):
            with pytest.raises(ValueError):
                parse_tuple(bad)

    def test_modified_component_counts(self):
        assert architecture(1).modified_components() == 0
        assert architecture(2).modified_components() == 1
        assert architecture(7).modified_components() == 1
        assert architecture(10).modified_components() == 2
        assert architecture(12).modified_components() == 3

    def test_unknown_type_id(self):
        with pytest.raises(ValueError):
            architecture(13)

    def test_tuple_labels(self):
        assert architecture(1).tuple_label == "A1,B1,C1"
        assert architecture(10).tuple_label == "A2,B2,C1"


class TestComposition:
    def compose_type(self, type_id):
        return compose(architecture(type_id), SimConfig(seed=5))

    def test_type1_minimal_stack(self):
        topo = self.compose_type(1)
        assert topo.agent is None
        assert not topo.uses_offchain_storage
        assert topo.hybrid is None
        assert topo.chain is not None  # consensus stays on-chain in every type

    def test_type2_running_example_stack(self):
        topo = self.compose_type(2)
        assert topo.agent is None
        assert topo.fabric.plan.route is Route.HYBRID
        assert set(topo.state.contracts) == {FT_ID, NFT_ID, MARKET_ID, VERIFIER_ID}

    def test_type10_agent_hybrid_onchain(self):
        topo = self.compose_type(10)
        assert topo.agent is not None
        assert topo.hybrid is not None
        assert topo.fabric.plan.route is Route.ON_CHAIN

    def test_every_type_keeps_consensus_onchain(self):
        for arch in ALL_TYPES:
            topo = compose(arch, SimConfig(seed=6))
            assert topo.chain.config.n_nodes >= 1
            assert topo.chain.genesis.height == 0

    def test_funded_balances_define_supply(self):
        a, b = b"\x0a" * 20, b"\x0b" * 20
        topo = compose(architecture(1), SimConfig(seed=8), funded={a: 70, b: 30})
        assert query_state(topo.state, FT_ID, "totalSupply") == 100
        assert query_state(topo.state, FT_ID, "balanceOf", (a,)) == 70


def make_actors(n, tag=b"hyb"):
    out = []
    for i in range(n):
        kp = identity.generate_keypair(tag + b"-%d" % i)
        out.append((kp, identity.derive_address(kp.public_key)))
    return out


def fresh_pair_of_states(actors):
    """Two identical genesis states for differential runs."""
    states = []
    for _ in range(2):
        state = ContractState()
        deploy_contract(state, ContractDef(FT_ID, ContractKind.FUNGIBLE_TOKEN,
                                           {"supply": 0, "deployer": b"\x00" * 20}))
        deploy_contract(state, ContractDef(NFT_ID, ContractKind.NON_FUNGIBLE_TOKEN, {}))
        deploy_contract(state, ContractDef(MARKET_ID, ContractKind.NFT_MARKET,
                                           {"nft": NFT_ID, "token": FT_ID}))
        total = 0
        for _, addr in actors:
            state.set_storage(FT_ID, b"bal:" + addr.payload, (10_000).to_bytes(16, "big"))
            total += 10_000
        state.set_storage(FT_ID, b"sup:", total.to_bytes(16, "big"))
        states.append(state)
    return states


def random_workload(actors, n_ops, seed):
    rng = random.Random(seed)
    txs = []
    minted = []
    for i in range(n_ops):
        kp, addr = rng.choice(actors)
        choice = rng.random()
        if choice < 0.4 or not minted:
            token = (1000 + i).to_bytes(32, "big")
            minted.append(token)
            payload = txcraft.TxPayload(contract_id=NFT_ID, method="mint", args=(token,),
                                        inline_data=b"\x00" + rng.randbytes(24))
        elif choice < 0.7:
            payload = txcraft.TxPayload(contract_id=FT_ID, method="transfer",
                                        args=(rng.choice(actors)[1].payload,
                                              rng.randrange(50).to_bytes(16, "big")))
        else:
            payload = txcraft.TxPayload(contract_id=FT_ID, method="approve",
                                        args=(rng.choice(actors)[1].payload,
                                              rng.randrange(50).to_bytes(16, "big")))
        metadata = txcraft.TxMetadata(sender=addr, receiver=addr, nonce=i,
                                      gas_limit=500_000, sim_time=i)
        txs.append(txcraft.build_transaction(kp.secret_key, metadata, payload))
    return txs


class TestHybridExecution:
    def test_honest_differential_equivalence_1000_ops(self):
        actors = make_actors(4)
        pure, hybrid = fresh_pair_of_states(actors)
        config = HybridComputeConfig(offchain_fraction=0.5,
                                     executor_behavior=ExecutorBehavior.HONEST)
        for tx in random_workload(actors, 1_000, seed=31):
            _, pure_receipt = vm.execute(pure, tx)
            _, hybrid_receipt = execute_hybrid(hybrid, tx, config, run_seed=31)
            assert pure_receipt.status == hybrid_receipt.status
            assert hybrid_receipt.gas_used <= pure_receipt.gas_used
        assert pure.state_root == hybrid.state_root

    def test_malicious_checked_region_rejected(self):
        actors = make_actors(2, tag=b"mal")
        _, state = fresh_pair_of_states(actors)
        config = HybridComputeConfig(offchain_fraction=0.5,
                                     executor_behavior=ExecutorBehavior.MALICIOUS,
                                     tamper_target="checked")
        rejected = attempts = 0
        for tx in random_workload(actors, 200, seed=32):
            policy_checked_exists = True
            _, receipt = execute_hybrid(state, tx, config, run_seed=32)
            if receipt.reason == "CommitmentMismatch":
                rejected += 1
            if not receipt.success:
                assert receipt.reason in ("CommitmentMismatch",)
            attempts += 1
        assert rejected > 0
        # Every tx whose tamper landed (i.e. every rejected one) was caught;
        # none slipped through silently.
        assert attempts == 200

    def test_malicious_unchecked_is_silent_violation(self):
        actors = make_actors(2, tag=b"mal2")
        pure, tampered = fresh_pair_of_states(actors)
        config = HybridComputeConfig(offchain_fraction=0.5,
                                     executor_behavior=ExecutorBehavior.MALICIOUS,
                                     tamper_target="unchecked")
        violations = []
        txs = random_workload(actors, 300, seed=33)
        for tx in txs:
            vm.execute(pure, tx)
            _, receipt = execute_hybrid(tampered, tx, config, run_seed=33,
                                        violation_sink=violations.append)
            assert receipt.success  # silent: no protocol-visible failure
        assert violations
        assert pure.state_root != tampered.state_root  # the harness oracle sees it

    def test_violation_count_matches_tampered_txs(self):
        actors = make_actors(2, tag=b"mal3")
        _, state = fresh_pair_of_states(actors)
        config = HybridComputeConfig(offchain_fraction=0.5,
                                     executor_behavior=ExecutorBehavior.MALICIOUS,
                                     tamper_target="unchecked")
        violations = []
        for tx in random_workload(actors, 100, seed=34):
            execute_hybrid(state, tx, config, run_seed=34, violation_sink=violations.append)
        assert len(violations) == len(set(violations))  # one per tx, tx ids unique

    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            HybridComputeConfig(offchain_fraction=1.5)

    def test_topology_counts_violations(self):
        from w3sim.archetypes import FaultKnobs
        wallets = make_actors(2, tag=b"topo-mal")
        funded = {addr.payload: 100_000 for _, addr in wallets}
        topo = compose(architecture(4), SimConfig(seed=44), funded=funded,
                       faults=FaultKnobs(executor_behavior=ExecutorBehavior.MALICIOUS,
                                         tamper_target="unchecked"))
        kp, addr = wallets[0]
        token = (5).to_bytes(32, "big")
        metadata = txcraft.TxMetadata(sender=addr, receiver=addr, nonce=0,
                                      gas_limit=500_000, sim_time=0)
        payload = txcraft.TxPayload(contract_id=NFT_ID, method="mint", args=(token,),
                                    inline_data=b"\x00data")
        topo.chain.submit(txcraft.build_transaction(kp.secret_key, metadata, payload))
        topo.chain.run_until_drained()
        assert topo.integrity_violations == 1
