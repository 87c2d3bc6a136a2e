"""Command-line entry point.

Subcommands: simulate (one architecture report), sweep (all twelve types),
matrix (sweep + diff against the reference evaluation, nonzero exit on any
mismatch), demo (narrated NFT sale walking the five protocol phases), and
encode (address-encoding utilities for test vectors).

Exit codes: 0 success, 1 matrix mismatch or failed demo, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

from . import access, evaluation, identity, scenario, storage, vm
from .archetypes import (
    FT_ID,
    MARKET_ID,
    NFT_ID,
    SimConfig,
    architecture,
    compose,
    parse_tuple,
)
from .consensus import ConsensusRule, RuleKind
from .evaluation import (
    compare,
    diff_against_reference,
    matrix_json,
    matrix_markdown,
    report_json,
    run_scenario,
    run_sweep,
)
from .scenario import DEFAULT_FAULTS, nft_sale_script, parse_faults, parse_scenario

DEFAULT_SEED = 42
DEFAULT_NODES = 7

PHASE_BANNERS = (
    "[Π1] identity creation",
    "[Π2] transaction generation",
    "[Π3] contract execution",
    "[Π4] state consensus",
    "[Π5] state retrieval",
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="w3sim",
                                     description="Deterministic Web3 protocol and architecture simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"PRNG seed (default {DEFAULT_SEED}; W3SIM_SEED overrides the default)")
        p.add_argument("--nodes", type=int, default=DEFAULT_NODES, help="maintainer count")
        p.add_argument("--scenario", help="scenario script file")
        p.add_argument("--faults", help="fault plan file")
        p.add_argument("--config", help="flat key-value config file with sections")
        p.add_argument("--out", help="output path (file or directory)")
        p.add_argument("--format", choices=("json", "markdown"), default="json")

    sim = sub.add_parser("simulate", help="run one architecture and emit its metric report")
    common(sim)
    sim.add_argument("--type", type=int, dest="type_id", help="architecture type id 1..12")
    sim.add_argument("--tuple", dest="tuple_text", help="architecture tuple, e.g. A1,B2,C3")
    sim.add_argument("--dump-chain", help="write the confirmed chain as NDJSON to this path")
    sim.add_argument("--dump-events", help="write the event log as NDJSON to this path")

    sw = sub.add_parser("sweep", help="run all twelve types and emit reports plus the matrix")
    common(sw)
    sw.add_argument("--jobs", type=int, default=1, help="parallel type simulations")

    mx = sub.add_parser("matrix", help="sweep and diff against the reference evaluation")
    common(mx)
    mx.add_argument("--jobs", type=int, default=1)

    demo = sub.add_parser("demo", help="narrated NFT sale across the five protocol phases")
    common(demo)
    demo.add_argument("--type", type=int, dest="type_id", default=2,
                      help="architecture to demo (default Type2)")

    enc = sub.add_parser("encode", help="address-encoding utilities")
    enc.add_argument("--scheme", choices=("base58", "base16"), required=True)
    enc.add_argument("--hex", dest="hex_bytes", help="hex bytes to encode")
    enc.add_argument("--decode", help="text to decode back to hex")
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("W3SIM_SEED")
    if env is not None:
        return int(env)
    return DEFAULT_SEED


def _load_script(args):
    if args.scenario:
        with open(args.scenario, encoding="utf-8") as fh:
            return parse_scenario(fh.read())
    return nft_sale_script()


def _load_faults(args):
    if args.faults:
        with open(args.faults, encoding="utf-8") as fh:
            return parse_faults(fh.read())
    return DEFAULT_FAULTS


def _load_sim(args, seed: int) -> SimConfig:
    kwargs = {"seed": seed, "n_nodes": args.nodes}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        cp.read(args.config)
        if cp.has_section("consensus"):
            sec = cp["consensus"]
            rule_name = sec.get("rule", "bft").lower()
            kind = RuleKind.BFT_QUORUM if rule_name in ("bft", "bftquorum") else RuleKind.MAJORITY_CHAIN
            kwargs["rule"] = ConsensusRule(
                kind=kind,
                fraction=sec.getfloat("fraction", 2 / 3 if kind is RuleKind.BFT_QUORUM else 0.51),
                confirm_depth=sec.getint("confirm_depth", 6),
            )
            kwargs["block_interval"] = sec.getint("block_interval", 1)
        if cp.has_section("network"):
            sec = cp["network"]
            kwargs["n_nodes"] = sec.getint("nodes", kwargs["n_nodes"])
            kwargs["max_txs_per_block"] = sec.getint("max_txs_per_block", 8)
            kwargs["network_capacity"] = sec.getint("capacity", 4_000)
        if cp.has_section("storage"):
            sec = cp["storage"]
            kwargs["storage_nodes"] = sec.getint("nodes", 10)
            kwargs["replicas"] = sec.getint("replicas", 3)
            kwargs["inline_threshold"] = sec.getint("inline_threshold", 256)
            kwargs["inline_cap"] = sec.getint("inline_cap", 1024)
        if cp.has_section("access"):
            sec = cp["access"]
            kwargs["batch_size"] = sec.getint("batch_size", 10)
            kwargs["flush_interval"] = sec.getint("flush_interval", 5)
    return SimConfig(**kwargs)


def _write(path: str | None, default_name: str, content: str, out_dir_ok=True) -> str | None:
    if path is None:
        sys.stdout.write(content)
        return None
    target = path
    if out_dir_ok and (path.endswith(os.sep) or os.path.isdir(path)):
        os.makedirs(path, exist_ok=True)
        target = os.path.join(path, default_name)
    else:
        parent = os.path.dirname(target)
        if parent:
            os.makedirs(parent, exist_ok=True)
    with open(target, "w", encoding="utf-8") as fh:
        fh.write(content)
    return target


def _report_markdown(report) -> str:
    lines = [f"### Type{report.type_id} ({report.tuple_label}), seed {report.seed}", ""]
    for key, value in sorted(report.to_json_dict().items()):
        if key == "config":
            continue
        lines.append(f"- {key}: {value}")
    lines.append("")
    return "\n".join(lines)


def _pick_arch(args):
    if getattr(args, "tuple_text", None):
        return parse_tuple(args.tuple_text)
    type_id = getattr(args, "type_id", None)
    if type_id is None:
        raise SystemExit2("one of --type or --tuple is required")
    if not 1 <= type_id <= 12:
        raise SystemExit2(f"--type must be 1..12, got {type_id}")
    return architecture(type_id)


class SystemExit2(Exception):
    pass


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    arch = _pick_arch(args)
    sim = _load_sim(args, seed)
    report = run_scenario(arch, _load_script(args), _load_faults(args), seed=seed, sim=sim)
    content = report_json(report) if args.format == "json" else _report_markdown(report)
    _write(args.out, f"report_type{arch.type_id}.{'json' if args.format == 'json' else 'md'}", content)
    if args.dump_chain or args.dump_events:
        from .consensus import chain_ndjson
        run = evaluation._ScenarioRun(arch, _load_script(args), sim, scenario.NO_FAULTS)
        run.run()
        if args.dump_chain:
            _write(args.dump_chain, "chain.ndjson", chain_ndjson(run.topology.chain), out_dir_ok=False)
        if args.dump_events:
            _write(args.dump_events, "events.ndjson", vm.export_events_ndjson(run.topology.chain.state),
                   out_dir_ok=False)
    return 0


def _sweep_outputs(args, seed):
    sim = _load_sim(args, seed)
    reports = run_sweep(_load_script(args), _load_faults(args), seed=seed, sim=sim,
                        jobs=getattr(args, "jobs", 1))
    matrix = compare(reports, reports[1])
    return reports, matrix


def cmd_sweep(args) -> int:
    seed = _resolve_seed(args)
    reports, matrix = _sweep_outputs(args, seed)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    for type_id, report in sorted(reports.items()):
        with open(os.path.join(out, f"report_type{type_id}.json"), "w", encoding="utf-8") as fh:
            fh.write(report_json(report))
    content = matrix_json(matrix) if args.format == "json" else matrix_markdown(matrix)
    name = "matrix.json" if args.format == "json" else "matrix.md"
    with open(os.path.join(out, name), "w", encoding="utf-8") as fh:
        fh.write(content)
    print(f"wrote {len(reports)} reports and {name} to {out}")
    return 0


def cmd_matrix(args) -> int:
    seed = _resolve_seed(args)
    reports, matrix = _sweep_outputs(args, seed)
    mismatches = diff_against_reference(matrix)
    content = matrix_json(matrix) if args.format == "json" else matrix_markdown(matrix)
    if args.out:
        _write(args.out, "matrix.json" if args.format == "json" else "matrix.md", content)
    else:
        sys.stdout.write(content)
    if mismatches:
        print(f"{len(mismatches)} mismatch(es) against the reference evaluation:")
        for m in mismatches:
            print(f"  {m}")
        return 1
    print("matrix matches the reference evaluation on all rows")
    return 0


def cmd_demo(args) -> int:
    seed = _resolve_seed(args)
    arch = architecture(args.type_id)
    sim = _load_sim(args, seed)
    banners = PHASE_BANNERS

    topo_script = nft_sale_script(repetitions=1)
    alice = access.WalletClient.create(evaluation.actor_seed(seed, "alice"))
    bob = access.WalletClient.create(evaluation.actor_seed(seed, "bob"))
    funded = {alice.address.payload: 10_000, bob.address.payload: 10_000}
    topo = compose(arch, sim, funded=funded,
                   registered_users=(alice.address.payload, bob.address.payload))
    chain, fabric = topo.chain, topo.fabric

    print(f"Demo: NFT sale on Type{arch.type_id} ({arch.tuple_label}), seed {seed}")
    print(banners[0])
    print(f"  Alice address {alice.address.text}")
    print(f"        base58  {identity.derive_address(alice.keypair.public_key, identity.AddressScheme.BASE58_BTC).text}")
    print(f"  Bob   address {bob.address.text}")
    access.connect_wallet(alice, "nft-market")
    access.connect_wallet(bob, "nft-market")
    print("  wallets connected to service 'nft-market'")

    import random as _random
    data = _random.Random(seed).randbytes(768)
    token = (1).to_bytes(32, "big")
    mint_op = access.UserOp(NFT_ID, "mint", args=(token,), data=data)
    inline, ref = access.prepare_data(mint_op, fabric)
    print(banners[1])
    if isinstance(ref, storage.LinkedRef):
        print(f"  raw data ({len(data)} bytes) stored off-chain, cid {ref.cid.digest.hex()[:16]}…")
        print(f"  cid hooked on-chain inside the mint transaction")
    else:
        print(f"  raw data ({len(data)} bytes) carried inline in the mint transaction")
    mint_tx = access.submit_direct(alice, chain, mint_op, fabric, inline=inline)
    print(f"  mint tx {mint_tx.hex()[:16]}… signed by Alice and submitted")

    print(banners[2])
    print("  maintainers execute the mint against the token contract")
    print(banners[3])
    chain.run_until_drained()
    if ref is not None:
        ref = fabric.bind_hook(ref, mint_tx)
    owner = vm.query_state(chain.state, NFT_ID, "ownerOf", (token,))
    print(f"  mint confirmed at height {len(chain.confirmed_blocks) - 1}; owner is Alice: {owner == alice.address.payload}")

    price = 1_000
    list_tx = access.submit_direct(alice, chain, access.UserOp(
        MARKET_ID, "list", args=(token, price.to_bytes(16, "big"))), fabric)
    chain.run_until_drained()
    print(f"  listing confirmed (tx {list_tx.hex()[:12]}…, price {price})")

    supply_before = vm.query_state(chain.state, FT_ID, "totalSupply")
    buy_tx = access.submit_direct(bob, chain, access.UserOp(
        MARKET_ID, "buy", args=(token, price.to_bytes(16, "big"))), fabric)
    chain.run_until_drained()
    owner = vm.query_state(chain.state, NFT_ID, "ownerOf", (token,))
    alice_bal = vm.query_state(chain.state, FT_ID, "balanceOf", (alice.address.payload,))
    bob_bal = vm.query_state(chain.state, FT_ID, "balanceOf", (bob.address.payload,))
    supply_after = vm.query_state(chain.state, FT_ID, "totalSupply")
    print(f"  buy confirmed (tx {buy_tx.hex()[:12]}…): payment and ownership moved in one receipt")

    print(banners[4])
    retrieved = access.retrieve_state(chain, bob.address, NFT_ID)
    print(f"  retrieval for Bob returns confirming tx {retrieved.tx_id.hex()[:12]}… (buy: {retrieved.tx_id == buy_tx})")
    ok_owner = owner == bob.address.payload
    ok_supply = supply_before == supply_after == alice_bal + bob_bal
    integrity = True
    if isinstance(ref, storage.LinkedRef):
        blob = fabric.get(ref)
        integrity = bool(fabric.verify_integrity(ref, blob))
        print(f"  off-chain raw data integrity verifies: {integrity}")
    print(f"  NFT owner is Bob: {ok_owner}; supply conserved ({supply_after}): {ok_supply}")
    print(f"  balances: Alice {alice_bal}, Bob {bob_bal}")
    good = ok_owner and ok_supply and integrity and retrieved.tx_id == buy_tx
    print("demo complete" if good else "demo FAILED")
    return 0 if good else 1


def cmd_encode(args) -> int:
    if args.hex_bytes is None and args.decode is None:
        raise SystemExit2("encode requires --hex or --decode")
    if args.hex_bytes is not None:
        raw = bytes.fromhex(args.hex_bytes)
        out = identity.encode_base58(raw) if args.scheme == "base58" else identity.encode_base16(raw)
        print(out)
    if args.decode is not None:
        raw = (identity.decode_base58(args.decode) if args.scheme == "base58"
               else identity.decode_base16(args.decode))
        print(raw.hex())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "matrix": cmd_matrix,
        "demo": cmd_demo,
        "encode": cmd_encode,
    }
    try:
        return handlers[args.command](args)
    except SystemExit2 as err:
        parser.error(str(err))  # exits 2
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
