import itertools
import random

import pytest

from w3sim.storage import (
    AllReplicasDown,
    ContentId,
    InlineRef,
    InlineTooLarge,
    InsufficientStorageNodes,
    LinkedRef,
    NotFound,
    OffChainStore,
    Route,
    StorageFabric,
    StoragePlan,
    VerifyResult,
    export_store,
    plan_for_storage_mode,
)


def fabric_for(route, n_nodes=3, confirmed=True, **plan_kwargs):
    plan = StoragePlan(route=route, **plan_kwargs)
    return StorageFabric(plan, OffChainStore(n_nodes), is_confirmed=lambda _tx: confirmed)


class TestPut:
    def test_onchain_inline(self):
        fabric = fabric_for(Route.ON_CHAIN)
        ref = fabric.put(b"x" * 1000)
        assert isinstance(ref, InlineRef)

    def test_onchain_too_large(self):
        fabric = fabric_for(Route.ON_CHAIN)
        with pytest.raises(InlineTooLarge):
            fabric.put(b"x" * 1025)

    def test_hybrid_threshold(self):
        fabric = fabric_for(Route.HYBRID)
        assert isinstance(fabric.put(b"x" * 200), InlineRef)
        assert isinstance(fabric.put(b"x" * 300), LinkedRef)

    def test_offchain_needs_enough_live_nodes(self):
        fabric = fabric_for(Route.OFF_CHAIN, n_nodes=3)
        fabric.store.set_alive(0, False)
        with pytest.raises(InsufficientStorageNodes):
            fabric.put(b"payload")

    def test_offchain_rejects_empty(self):
        fabric = fabric_for(Route.OFF_CHAIN)
        with pytest.raises(Exception):
            fabric.put(b"")

    def test_default_replica_count_is_three(self):
        assert StoragePlan(route=Route.OFF_CHAIN).replicas == 3
        fabric = fabric_for(Route.OFF_CHAIN, n_nodes=5)
        ref = fabric.put(b"replicated")
        assert len(fabric.store.placement[ref.cid.digest]) == 3

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            StoragePlan(route=Route.OFF_CHAIN, replicas=0)
        with pytest.raises(ValueError):
            StoragePlan(route=Route.HYBRID, inline_threshold=0)

    def test_mode_mapping(self):
        assert plan_for_storage_mode(1).route is Route.ON_CHAIN
        assert plan_for_storage_mode(2).route is Route.HYBRID
        assert plan_for_storage_mode(3).route is Route.OFF_CHAIN


class TestGet:
    def test_inline_identity(self):
        fabric = fabric_for(Route.ON_CHAIN)
        ref = fabric.put(b"inline bytes")
        assert fabric.get(ref) == b"inline bytes"

    def test_any_two_failures_survive(self):
        fabric = fabric_for(Route.OFF_CHAIN, n_nodes=3)
        ref = fabric.put(b"three copies")
        for down in itertools.combinations(range(3), 2):
            for i in range(3):
                fabric.store.set_alive(i, i not in down)
            assert fabric.get(ref) == b"three copies"

    def test_all_replicas_down(self):
        fabric = fabric_for(Route.OFF_CHAIN, n_nodes=3)
        ref = fabric.put(b"gone")
        for i in range(3):
            fabric.store.set_alive(i, False)
        with pytest.raises(AllReplicasDown):
            fabric.get(ref)

    def test_unknown_cid(self):
        fabric = fabric_for(Route.OFF_CHAIN)
        with pytest.raises(NotFound):
            fabric.get(LinkedRef(cid=ContentId.of(b"never stored")))


class TestIntegrity:
    def test_roundtrip_verified(self):
        fabric = fabric_for(Route.OFF_CHAIN)
        ref = fabric.bind_hook(fabric.put(b"content"), b"\x01" * 32)
        assert fabric.verify_integrity(ref, fabric.get(ref)) is VerifyResult.VERIFIED
        assert bool(fabric.verify_integrity(ref, fabric.get(ref)))

    def test_flipped_byte_mismatch(self):
        fabric = fabric_for(Route.OFF_CHAIN)
        ref = fabric.bind_hook(fabric.put(b"content"), b"\x01" * 32)
        fabric.store.tamper(ref.cid, lambda b: bytes([b[0] ^ 1]) + b[1:])
        got = fabric.get(ref)
        assert fabric.verify_integrity(ref, got) is VerifyResult.MISMATCH
        assert not fabric.verify_integrity(ref, got)

    def test_unconfirmed_hook_not_true(self):
        fabric = fabric_for(Route.OFF_CHAIN, confirmed=False)
        ref = fabric.bind_hook(fabric.put(b"content"), b"\x01" * 32)
        result = fabric.verify_integrity(ref, b"content")
        assert result is VerifyResult.UNCONFIRMED
        assert not result

    def test_missing_hook_not_true(self):
        fabric = fabric_for(Route.OFF_CHAIN)
        ref = fabric.put(b"content")  # never bound
        assert fabric.verify_integrity(ref, b"content") is VerifyResult.UNCONFIRMED

    def test_inline_integrity_is_byte_equality(self):
        fabric = fabric_for(Route.ON_CHAIN)
        ref = fabric.bind_hook(fabric.put(b"abc"), b"\x02" * 32)
        assert fabric.verify_integrity(ref, b"abc") is VerifyResult.VERIFIED
        assert fabric.verify_integrity(ref, b"abd") is VerifyResult.MISMATCH

    def test_tamper_detection_complete_1000_mutations(self):
        rng = random.Random(6)
        fabric = fabric_for(Route.OFF_CHAIN)
        data = rng.randbytes(512)
        ref = fabric.bind_hook(fabric.put(data), b"\x03" * 32)
        for _ in range(1_000):
            mutated = bytearray(data)
            for _ in range(rng.randrange(1, 4)):
                mutated[rng.randrange(len(mutated))] ^= rng.randrange(1, 256)
            if bytes(mutated) == data:
                continue
            assert fabric.verify_integrity(ref, bytes(mutated)) is VerifyResult.MISMATCH


class TestAllRoutesRoundtrip:
    @pytest.mark.parametrize("route,size", [
        (Route.ON_CHAIN, 300),
        (Route.HYBRID, 100),   # below threshold: inline
        (Route.HYBRID, 700),   # above threshold: linked
        (Route.OFF_CHAIN, 300),
    ])
    def test_put_then_verify_true_once_hooked(self, route, size):
        fabric = fabric_for(route, n_nodes=5)
        data = bytes(range(256))[:200] * 4
        data = data[:size]
        ref = fabric.bind_hook(fabric.put(data), b"\x09" * 32)
        assert fabric.get(ref) == data
        assert fabric.verify_integrity(ref, fabric.get(ref)) is VerifyResult.VERIFIED


class TestAvailabilityMonotonicity:
    def test_success_rate_nondecreasing_in_replicas(self):
        rates = []
        for replicas in (1, 2, 3, 4):
            rng = random.Random(42)
            fabric = fabric_for(Route.OFF_CHAIN, n_nodes=8, replicas=replicas)
            ref = fabric.bind_hook(fabric.put(b"monotone"), b"\x04" * 32)
            ok = 0
            for _ in range(1_000):
                for node in fabric.store.nodes:
                    node.alive = rng.random() >= 0.5
                try:
                    fabric.get(ref)
                    ok += 1
                except AllReplicasDown:
                    pass
            rates.append(ok / 1_000)
        assert rates == sorted(rates)


class TestContentId:
    def test_digest_identity(self):
        assert ContentId.of(b"a") == ContentId.of(b"a")
        assert ContentId.of(b"a") != ContentId.of(b"b")

    def test_corpus_injective(self):
        rng = random.Random(8)
        blobs = {rng.randbytes(rng.randrange(1, 64)) for _ in range(2_000)}
        cids = {ContentId.of(b).digest for b in blobs}
        assert len(cids) == len(blobs)


class TestExport:
    def test_files_named_by_hex_cid(self, tmp_path):
        fabric = fabric_for(Route.OFF_CHAIN, n_nodes=4)
        refs = [fabric.put(bytes([i]) * 40) for i in range(3)]
        names = export_store(fabric.store, str(tmp_path))
        assert sorted(names) == sorted(r.cid.digest.hex() for r in refs)
        for ref in refs:
            assert (tmp_path / ref.cid.digest.hex()).read_bytes() == fabric.get(ref)
