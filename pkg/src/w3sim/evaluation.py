"""Scenario-driven architecture evaluation.

Runs the NFT sale workload on a composed architecture, measures the
quantitative metrics (throughput, scaling, gas, availability, undetected
integrity breaks) and derives the rule-scored ordinals (security,
anonymity, confidentiality, usability, stakeholder benefits). A sweep
over all twelve types compares each one against the Type1 baseline and
diffs the resulting ordinal matrix against the pinned reference matrix.

Each quality attribute is measured under its own stimulus, in the spirit
of scenario-based trade-off analysis: throughput/gas on a fault-free run,
the scaling slope across node counts {4, 7, 10}, availability and
integrity under the fault plan. All sub-runs share one seed, so a report
is a pure function of (architecture, script, faults, seed, config).
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from random import Random

from . import access, vm
from .archetypes import (
    ALL_TYPES,
    NFT_ID,
    MARKET_ID,
    AccessMode,
    ArchitectureType,
    ComputeMode,
    FaultKnobs,
    SimConfig,
    StorageMode,
    architecture,
    compose,
)
from .scenario import (
    DEFAULT_FAULTS,
    NO_FAULTS,
    FaultPlan,
    ScenarioScript,
    Step,
    StepKind,
    nft_sale_script,
)
from .storage import InlineTooLarge, LinkedRef, Route, StorageError

SCALE_GRID = (4, 7, 10)
DEAD_BAND = 0.05  # relative dead-band for measured-sign computation
DRAIN_ROUNDS = 600


class ScenarioInfeasible(Exception):
    pass


# ---------------------------------------------------------------------------
# Scenario runner
# ---------------------------------------------------------------------------


@dataclass
class RunStats:
    ops_attempted: int = 0
    ops_succeeded: int = 0
    onchain_ops: int = 0
    txs_confirmed: int = 0
    ticks: int = 0
    gas_total: int = 0
    violations: int = 0
    infeasible_reason: str | None = None


def actor_seed(seed: int, name: str) -> bytes:
    return f"actor/{seed}/{name}".encode()


def _fault_knobs(plan: FaultPlan) -> FaultKnobs:
    return FaultKnobs(
        byzantine_maintainers=plan.byzantine_maintainers,
        byz_mode=plan.byz_mode,
        maintainer_crash_prob=plan.maintainer_crash_prob,
        storage_crash_prob=plan.storage_crash_prob,
        executor_behavior=plan.executor_behavior,
        tamper_target=plan.tamper_target,
    )


class _ScenarioRun:
    """One architecture, one script, one fault plan, one seed."""

    FUND = 10**12

    def __init__(self, arch: ArchitectureType, script: ScenarioScript,
                 sim: SimConfig, faults: FaultPlan):
        self.arch = arch
        self.script = script
        self.sim = sim
        self.faults = faults
        self.stats = RunStats()
        names = sorted({step.actor for step in script.steps})
        self.wallets = {
            name: access.WalletClient.create(actor_seed(sim.seed, name)) for name in names
        }
        funded = {w.address.payload: self.FUND for w in self.wallets.values()}
        registered = tuple(w.address.payload for _, w in sorted(self.wallets.items()))
        self.topology = compose(arch, sim, funded=funded, registered_users=registered,
                                faults=_fault_knobs(faults))
        if self.topology.agent is not None:
            self.topology.agent.behavior = faults.agent_behavior
        self.data_rng = Random(sim.seed ^ 0xDA7A)
        self.refs: dict[int, object] = {}
        self.pending: list[tuple[int, object]] = []  # (rep, tx_id or ticket)

    # -- step helpers -----------------------------------------------------

    def _token(self, rep: int) -> bytes:
        return rep.to_bytes(32, "big")

    def _submit(self, wallet: access.WalletClient, op: access.UserOp, rep: int,
                inline: bytes | None = None):
        topo = self.topology
        self.stats.ops_attempted += 1
        try:
            if topo.agent is not None:
                ticket = access.submit_via_agent(topo.agent, wallet.address.payload, op,
                                                 topo.chain, topo.fabric, inline=inline)
                self.pending.append((rep, ticket))
            else:
                tx_id = access.submit_direct(wallet, topo.chain, op, topo.fabric,
                                             self.sim.gas_schedule, inline=inline)
                self.pending.append((rep, tx_id))
        except InlineTooLarge as err:
            if topo.fabric.plan.route is Route.ON_CHAIN:
                raise ScenarioInfeasible(f"InlineTooLarge: {err}") from err
            # Hybrid/off-chain routes never inline oversized data; reaching
            # here means a fault, count the op as failed.
        except (StorageError, access.AccessError):
            pass  # op failed before reaching the chain

    def _drain(self):
        topo = self.topology
        if topo.agent is not None:
            access.flush(topo.agent, topo.chain, self.sim.gas_schedule)
        topo.chain.run_until_drained(DRAIN_ROUNDS)

    def _settle_wave(self):
        """Resolve every pending submission to success/failure."""
        self._drain()
        chain = self.topology.chain
        ok_tx = {c.tx.tx_id for c in chain.confirmations if c.receipt.success}
        ok_ops: set[tuple[bytes, int]] = set()
        for c in chain.confirmations:
            for ev in c.receipt.events:
                if ev.name == "OpOk":
                    ok_ops.add((bytes.fromhex(ev.field("origin")), int(ev.field("seq"))))
        for rep, handle in self.pending:
            if isinstance(handle, access.BundleTicket):
                good = (handle.origin, handle.seq) in ok_ops
            else:
                good = handle in ok_tx
            if good:
                self.stats.ops_succeeded += 1
                self.stats.onchain_ops += 1
        self.pending = []

    # -- steps --------------------------------------------------------------

    def run(self) -> RunStats:
        try:
            for step in self.script.steps:
                self._run_step_wave(step)
        except ScenarioInfeasible as err:
            self.stats.infeasible_reason = str(err)
        chain = self.topology.chain
        self.stats.txs_confirmed = len(chain.confirmations)
        self.stats.ticks = chain.now
        self.stats.gas_total = chain.gas_total
        self.stats.violations = self.topology.integrity_violations
        return self.stats

    def _run_step_wave(self, step: Step):
        wallet = self.wallets[step.actor]
        reps = self.script.repetitions
        kind = step.kind
        if kind is StepKind.CREATE_IDENTITY:
            return  # identities were derived when the wallet was built
        if kind is StepKind.CONNECT_WALLET:
            access.connect_wallet(wallet, "nft-market")
            return
        if kind is StepKind.MINT_NFT:
            size = step.param("data_size", 768)
            for rep in range(reps):
                data = self.data_rng.randbytes(size)
                op = access.UserOp(NFT_ID, "mint", args=(self._token(rep),), data=data)
                try:
                    inline, ref = access.prepare_data(op, self.topology.fabric)
                except InlineTooLarge as err:
                    if self.topology.fabric.plan.route is Route.ON_CHAIN:
                        raise ScenarioInfeasible(f"InlineTooLarge: {err}") from err
                    self.stats.ops_attempted += 1
                    continue
                except StorageError:
                    self.stats.ops_attempted += 1
                    continue
                self.refs[rep] = ref
                self._submit(wallet, op, rep, inline=inline)
            self._settle_wave()
            self._bind_hooks()
            return
        if kind is StepKind.LIST_NFT:
            price = step.param("price", 100)
            for rep in range(reps):
                op = access.UserOp(MARKET_ID, "list",
                                   args=(self._token(rep), price.to_bytes(16, "big")))
                self._submit(wallet, op, rep)
            self._settle_wave()
            return
        if kind is StepKind.BUY_NFT:
            price = step.param("price", 100)
            for rep in range(reps):
                op = access.UserOp(MARKET_ID, "buy",
                                   args=(self._token(rep), price.to_bytes(16, "big")))
                self._submit(wallet, op, rep)
            self._settle_wave()
            return
        if kind is StepKind.RETRIEVE_STATE:
            for rep in range(reps):
                self.stats.ops_attempted += 1
                if self._retrieve_ok(wallet, rep):
                    self.stats.ops_succeeded += 1
            return
        raise ValueError(f"unhandled step kind {kind}")

    def _bind_hooks(self):
        """Attach the confirmed mint tx as the hook for each linked ref."""
        chain = self.topology.chain
        minted: dict[bytes, bytes] = {}
        for c in chain.confirmations:
            for ev in c.receipt.events:
                if ev.name == "Mint":
                    minted[bytes.fromhex(ev.field("token_id"))] = c.tx.tx_id
        for rep, ref in list(self.refs.items()):
            if ref is not None and ref.hook_tx is None:
                tx_id = minted.get(self._token(rep))
                if tx_id is not None:
                    self.refs[rep] = self.topology.fabric.bind_hook(ref, tx_id)

    def _retrieve_ok(self, wallet: access.WalletClient, rep: int) -> bool:
        topo = self.topology
        token = self._token(rep)
        try:
            retrieved = access.retrieve_state(topo.chain, wallet.address, NFT_ID)
            owner = vm.query_state(topo.chain.state, NFT_ID, "ownerOf", (token,))
        except (access.NoConfirmedState, vm.QueryError):
            return False
        if owner != wallet.address.payload:
            return False
        if not retrieved.entries:
            return False
        ref = self.refs.get(rep)
        if isinstance(ref, LinkedRef):
            try:
                blob = topo.fabric.get(ref)
            except StorageError:
                return False
            return bool(topo.fabric.verify_integrity(ref, blob))
        return True


def run_raw(arch: ArchitectureType, script: ScenarioScript, sim: SimConfig,
            faults: FaultPlan) -> RunStats:
    return _ScenarioRun(arch, script, sim, faults).run()


# ---------------------------------------------------------------------------
# Metric reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricReport:
    type_id: int
    tuple_label: str
    seed: int
    nodes: int
    feasible: bool
    infeasible_reason: str | None
    tps: float
    scalability_slope: float
    gas_total: int
    availability: float
    security_violations: int
    anonymity_score: int
    confidentiality_score: int
    usability_score: int
    ops_attempted: int
    ops_succeeded: int
    onchain_ops: int
    txs_confirmed: int
    ops_per_tx: float
    ticks: int
    agent_used: bool
    hybrid_used: bool
    offchain_used: bool
    config: tuple[tuple[str, str], ...]

    def to_json_dict(self) -> dict:
        out = {}
        for key, value in self.__dict__.items():
            out[key] = dict(value) if key == "config" else value
        return out


def _config_snapshot(sim: SimConfig, script: ScenarioScript, faults: FaultPlan) -> tuple:
    items = {
        "n_nodes": sim.n_nodes,
        "block_interval": sim.block_interval,
        "max_txs_per_block": sim.max_txs_per_block,
        "network_capacity": sim.network_capacity,
        "gas_byte_equiv": sim.gas_byte_equiv,
        "batch_size": sim.batch_size,
        "replicas": sim.replicas,
        "inline_threshold": sim.inline_threshold,
        "inline_cap": sim.inline_cap,
        "storage_nodes": sim.storage_nodes,
        "offchain_fraction": sim.offchain_fraction,
        "repetitions": script.repetitions,
        "gas_base_tx": sim.gas_schedule.base_tx,
        "gas_per_storage_write": sim.gas_schedule.per_storage_write,
        "gas_per_storage_read": sim.gas_schedule.per_storage_read,
        "gas_per_event": sim.gas_schedule.per_event,
        "gas_per_inline_byte": sim.gas_schedule.per_inline_byte,
        "fault_storage_crash_prob": faults.storage_crash_prob,
        "fault_executor": faults.executor_behavior.value,
        "fault_agent": faults.agent_behavior.value,
        "fault_maintainer_crash_prob": faults.maintainer_crash_prob,
        "fault_byzantine": faults.byzantine_maintainers,
    }
    return tuple(sorted((k, str(v)) for k, v in items.items()))


def run_scenario(arch: ArchitectureType, script: ScenarioScript | None = None,
                 faults: FaultPlan | None = None, seed: int = 42,
                 sim: SimConfig | None = None, scale_grid=SCALE_GRID) -> MetricReport:
    """Measure one architecture; deterministic in (arch, script, faults, seed, sim)."""
    script = script or nft_sale_script()
    faults = faults if faults is not None else DEFAULT_FAULTS
    base = sim or SimConfig()
    base = replace(base, seed=seed)

    main = run_raw(arch, script, base, NO_FAULTS)
    scores = rule_scores(arch)
    common = dict(
        type_id=arch.type_id, tuple_label=arch.tuple_label, seed=seed, nodes=base.n_nodes,
        anonymity_score=scores.anonymity,
        confidentiality_score=scores.confidentiality,
        usability_score=scores.usability,
        agent_used=arch.access is AccessMode.AGENT,
        hybrid_used=arch.compute is ComputeMode.HYBRID,
        offchain_used=arch.storage is not StorageMode.ON_CHAIN,
        config=_config_snapshot(base, script, faults),
    )
    if main.infeasible_reason:
        return MetricReport(
            feasible=False, infeasible_reason=main.infeasible_reason,
            tps=0.0, scalability_slope=0.0, gas_total=0, availability=0.0,
            security_violations=0, ops_attempted=main.ops_attempted, ops_succeeded=0,
            onchain_ops=0, txs_confirmed=0, ops_per_tx=0.0, ticks=main.ticks, **common)

    grid_latency = {}
    for n in scale_grid:
        stats = run_raw(arch, script, replace(base, n_nodes=n), NO_FAULTS)
        grid_latency[n] = stats.ticks / stats.onchain_ops if stats.onchain_ops else None
    lo, hi = min(scale_grid), max(scale_grid)
    # Negated marginal per-op latency per added node: higher = scales better.
    # A plain tps difference is dominated by the tps level itself (faster
    # types fall more in absolute terms); the inverse-tps slope isolates
    # what one extra maintainer costs each confirmed operation.
    slope = 0.0
    if grid_latency[lo] is not None and grid_latency[hi] is not None:
        slope = -(grid_latency[hi] - grid_latency[lo]) / (hi - lo)

    faulted = run_raw(arch, script, base, faults)
    availability = (faulted.ops_succeeded / faulted.ops_attempted) if faulted.ops_attempted else 0.0

    return MetricReport(
        feasible=True, infeasible_reason=None,
        tps=main.onchain_ops / main.ticks if main.ticks else 0.0,
        scalability_slope=slope,
        gas_total=main.gas_total,
        availability=availability,
        security_violations=faulted.violations,
        ops_attempted=main.ops_attempted,
        ops_succeeded=main.ops_succeeded,
        onchain_ops=main.onchain_ops,
        txs_confirmed=main.txs_confirmed,
        ops_per_tx=main.onchain_ops / main.txs_confirmed if main.txs_confirmed else 0.0,
        ticks=main.ticks,
        **common)


# ---------------------------------------------------------------------------
# Rule-scored ordinals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleScores:
    security: int
    anonymity: int
    confidentiality: int
    availability: int
    usability: int
    gas: int


def rule_scores(arch: ArchitectureType) -> RuleScores:
    """Component-local ordinal rules, relative to the all-on-chain baseline."""
    offchain_storage = arch.storage is not StorageMode.ON_CHAIN
    hybrid_compute = arch.compute is ComputeMode.HYBRID
    agent = arch.access is AccessMode.AGENT
    modified = arch.modified_components()
    return RuleScores(
        security=-(1 if offchain_storage else 0) - (2 if hybrid_compute else 0),
        anonymity=-3 if agent else 0,
        confidentiality=2 if (hybrid_compute or offchain_storage) else 0,
        availability=-2 if (hybrid_compute or offchain_storage) else 0,
        usability=modified,
        gas=modified,
    )


def stakeholder_benefits(arch: ArchitectureType) -> tuple[int, int, int]:
    """(user, provider, maintainer) signed ordinals."""
    m = arch.modified_components()
    return (m, -m, -m)


# ---------------------------------------------------------------------------
# Ordinal matrix
# ---------------------------------------------------------------------------


MERGED_GROUPS: tuple[tuple[int, ...], ...] = ((1,), (2, 3), (4,), (5, 6), (7,), (8, 9), (10,), (11, 12))

PROPERTY_COLUMNS = ("performance", "scalability", "gas", "security", "anonymity",
                    "confidentiality", "availability", "usability")
STAKEHOLDER_COLUMNS = ("user", "provider", "maintainer")
MEASURED_COLUMNS = ("performance_sign", "scalability_sign", "gas_trend_sign", "availability_trend_sign")


def _group_label(group: tuple[int, ...]) -> str:
    return "Type" + "/".join(str(t) for t in group)


def _group_tuple_label(group: tuple[int, ...]) -> str:
    archs = [architecture(t) for t in group]
    a = archs[0]
    c = "/".join(str(x.storage.value) for x in archs)
    return f"A{a.access.value},B{a.compute.value},C{c}"


@dataclass(frozen=True)
class MatrixRow:
    label: str
    tuple_label: str
    types: tuple[int, ...]
    cells: tuple[tuple[str, int], ...]

    def cell(self, column: str) -> int:
        for key, value in self.cells:
            if key == column:
                return value
        raise KeyError(column)


@dataclass(frozen=True)
class OrdinalMatrix:
    rows: tuple[MatrixRow, ...]

    def row(self, label: str) -> MatrixRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def cell(self, label: str, column: str) -> int:
        return self.row(label).cell(column)


def _row(group, **cells) -> MatrixRow:
    return MatrixRow(
        label=_group_label(group),
        tuple_label=_group_tuple_label(group),
        types=group,
        cells=tuple(sorted(cells.items())),
    )


def _sign(dots: int) -> int:
    return (dots > 0) - (dots < 0)


def reference_matrix() -> OrdinalMatrix:
    """The pinned reference evaluation: signed dot counts per merged row.

    Measured-trend expectations are the sign of the corresponding dot count.
    """
    dots = {
        (1,): dict(performance=0, scalability=0, gas=0, security=0, anonymity=0,
                   confidentiality=0, availability=0, usability=0,
                   user=0, provider=0, maintainer=0),
        (2, 3): dict(performance=2, scalability=2, gas=1, security=-1, anonymity=0,
                     confidentiality=2, availability=-2, usability=1,
                     user=1, provider=-1, maintainer=-1),
        (4,): dict(performance=1, scalability=1, gas=1, security=-2, anonymity=0,
                   confidentiality=2, availability=-2, usability=1,
                   user=1, provider=-1, maintainer=-1),
        (5, 6): dict(performance=2, scalability=2, gas=2, security=-3, anonymity=0,
                     confidentiality=2, availability=-2, usability=2,
                     user=2, provider=-2, maintainer=-2),
        (7,): dict(performance=1, scalability=1, gas=1, security=0, anonymity=-3,
                   confidentiality=0, availability=0, usability=1,
                   user=1, provider=-1, maintainer=-1),
        (8, 9): dict(performance=2, scalability=2, gas=2, security=-1, anonymity=-3,
                     confidentiality=2, availability=-2, usability=2,
                     user=2, provider=-2, maintainer=-2),
        (10,): dict(performance=2, scalability=2, gas=2, security=-2, anonymity=-3,
                    confidentiality=2, availability=-2, usability=2,
                    user=2, provider=-2, maintainer=-2),
        (11, 12): dict(performance=3, scalability=3, gas=3, security=-3, anonymity=-3,
                       confidentiality=2, availability=-2, usability=3,
                       user=3, provider=-3, maintainer=-3),
    }
    rows = []
    for group in MERGED_GROUPS:
        cells = dict(dots[group])
        cells["performance_sign"] = _sign(cells["performance"])
        cells["scalability_sign"] = _sign(cells["scalability"])
        cells["gas_trend_sign"] = _sign(cells["gas"])
        cells["availability_trend_sign"] = _sign(cells["availability"])
        rows.append(_row(group, **cells))
    return OrdinalMatrix(rows=tuple(rows))


def banded_sign(value: float, baseline: float, eps: float = DEAD_BAND) -> int:
    """sign(value - baseline) with a relative dead-band around the baseline."""
    band = eps * max(abs(baseline), 1e-12)
    delta = value - baseline
    if delta > band:
        return 1
    if delta < -band:
        return -1
    return 0


def compare(reports: dict[int, MetricReport], baseline: MetricReport,
            eps: float = DEAD_BAND) -> OrdinalMatrix:
    """Build the measured matrix: rule columns from effective composition,
    measured columns as banded signs against the baseline report."""
    rows = []
    for group in MERGED_GROUPS:
        members = [reports[t] for t in group if t in reports]
        if not members or not all(m.feasible for m in members) or not baseline.feasible:
            continue  # infeasible runs carry no comparable metrics
        eff = _effective_arch(members[0])
        scores = rule_scores(eff)
        user, provider, maintainer = stakeholder_benefits(eff)

        def mean(attr):
            return sum(getattr(m, attr) for m in members) / len(members)

        cells = dict(
            performance=0, scalability=0,  # measured-only columns carry no rule dots
            gas=scores.gas, security=scores.security, anonymity=scores.anonymity,
            confidentiality=scores.confidentiality, availability=scores.availability,
            usability=scores.usability, user=user, provider=provider, maintainer=maintainer,
            performance_sign=banded_sign(mean("tps"), baseline.tps, eps),
            scalability_sign=banded_sign(mean("scalability_slope"), baseline.scalability_slope, eps),
            gas_trend_sign=-banded_sign(mean("gas_total"), baseline.gas_total, eps),
            availability_trend_sign=banded_sign(mean("availability"), baseline.availability, eps),
        )
        rows.append(_row(group, **cells))
    return OrdinalMatrix(rows=tuple(rows))


def _effective_arch(report: MetricReport) -> ArchitectureType:
    return architecture(_effective_type_id(report))


def _effective_type_id(report: MetricReport) -> int:
    a = 2 if report.agent_used else 1
    b = 2 if report.hybrid_used else 1
    c = 2 if report.offchain_used else 1
    for arch in ALL_TYPES:
        if (arch.access.value, arch.compute.value, min(arch.storage.value, 2)) == (a, b, c):
            return arch.type_id
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class Mismatch:
    row: str
    column: str
    expected: int
    measured: int

    def __str__(self) -> str:
        return f"{self.row}.{self.column}: expected {self.expected:+d}, measured {self.measured:+d}"


RULE_CHECK_COLUMNS = ("security", "anonymity", "confidentiality", "availability",
                      "usability", "gas", "user", "provider", "maintainer")


def diff_against_reference(measured: OrdinalMatrix,
                           reference: OrdinalMatrix | None = None) -> list[Mismatch]:
    """Exact equality on rule-scored columns, sign agreement on measured ones."""
    reference = reference or reference_matrix()
    mismatches = []
    for ref_row in reference.rows:
        try:
            got_row = measured.row(ref_row.label)
        except KeyError:
            mismatches.append(Mismatch(ref_row.label, "present", 1, 0))
            continue
        for column in RULE_CHECK_COLUMNS:
            if got_row.cell(column) != ref_row.cell(column):
                mismatches.append(Mismatch(ref_row.label, column,
                                           ref_row.cell(column), got_row.cell(column)))
        for column in MEASURED_COLUMNS:
            if got_row.cell(column) != ref_row.cell(column):
                mismatches.append(Mismatch(ref_row.label, column,
                                           ref_row.cell(column), got_row.cell(column)))
    return mismatches


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


def _sweep_one(args) -> tuple[int, MetricReport]:
    type_id, script, faults, seed, sim = args
    return type_id, run_scenario(architecture(type_id), script, faults, seed, sim)


def run_sweep(script: ScenarioScript | None = None, faults: FaultPlan | None = None,
              seed: int = 42, sim: SimConfig | None = None,
              jobs: int = 1) -> dict[int, MetricReport]:
    script = script or nft_sale_script()
    faults = faults if faults is not None else DEFAULT_FAULTS
    tasks = [(t, script, faults, seed, sim) for t in range(1, 13)]
    reports: dict[int, MetricReport] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for type_id, report in pool.map(_sweep_one, tasks):
                reports[type_id] = report
    else:
        for task in tasks:
            type_id, report = _sweep_one(task)
            reports[type_id] = report
    return reports


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def report_json(report: MetricReport) -> str:
    return json.dumps(report.to_json_dict(), sort_keys=True, indent=2) + "\n"


def matrix_json(matrix: OrdinalMatrix) -> str:
    rows = [
        {"label": r.label, "tuple": r.tuple_label, "types": list(r.types), "cells": dict(r.cells)}
        for r in matrix.rows
    ]
    return json.dumps({"rows": rows}, sort_keys=True, indent=2) + "\n"


def _fmt_cell(v: int) -> str:
    return f"{v:+d}" if v else "0"


def matrix_markdown(matrix: OrdinalMatrix, title: str = "Architecture evaluation") -> str:
    """Markdown table mirroring the published layout: properties then stakeholders."""
    header = ("| Architecture | Performance | Scalability | Gas Cost | Security | Anonymity "
              "| Confidentiality | Availability | Usability | Web3 User | Service Provider | BC Maintainer |")
    sep = "|" + "---|" * 12
    lines = [f"### {title}", "", header, sep]
    for r in matrix.rows:
        perf = _fmt_cell(r.cell("performance")) if r.cell("performance") else _fmt_cell(r.cell("performance_sign"))
        scal = _fmt_cell(r.cell("scalability")) if r.cell("scalability") else _fmt_cell(r.cell("scalability_sign"))
        cells = [
            f"{r.tuple_label} - {r.label}", perf, scal,
            _fmt_cell(r.cell("gas")), _fmt_cell(r.cell("security")), _fmt_cell(r.cell("anonymity")),
            _fmt_cell(r.cell("confidentiality")), _fmt_cell(r.cell("availability")),
            _fmt_cell(r.cell("usability")), _fmt_cell(r.cell("user")),
            _fmt_cell(r.cell("provider")), _fmt_cell(r.cell("maintainer")),
        ]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    lines.append("Measured trends (sign vs Type1 baseline):")
    lines.append("")
    lines.append("| Architecture | performance | scalability | gas | availability |")
    lines.append("|---|---|---|---|---|")
    for r in matrix.rows:
        lines.append("| {} | {} | {} | {} | {} |".format(
            r.label, _fmt_cell(r.cell("performance_sign")), _fmt_cell(r.cell("scalability_sign")),
            _fmt_cell(r.cell("gas_trend_sign")), _fmt_cell(r.cell("availability_trend_sign"))))
    lines.append("")
    return "\n".join(lines)
