"""Runs the protocol over grids of dimensions, channels and targets, checks the protocol's claims
on every run and writes machine-readable reports.

Reports are deterministic: the same request always produces the same bytes.
"""

# Core dependencies
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
from enum import Enum
import io
import json
import logging
import math
from pathlib import Path
import sys
from typing import Any, Sequence, TextIO

# Package dependencies
import numpy as np

# Project dependencies
from djrsp import __version__
from djrsp.bases import TargetState, target_vector
from djrsp.config import DEFAULT_TOLERANCES, Tolerances
from djrsp.errors import (
    BasisNotRealizable,
    InvalidChannel,
    InvalidConfig,
    InvalidRequest,
    IoFailure,
    NoCorrectionFound,
    ResidualEntanglement,
    UnpairablePairing,
)
from djrsp.gates import QUBIT_CORRECTIONS, ChannelSpec, Pairing, equal_up_to_phase
from djrsp.protocol import (
    EXACT_D2_CORRECTIONS,
    PRINTED_CORRECTIONS,
    Engine,
    PhaseGatePolicy,
    ProtocolConfig,
    ProtocolTranscript,
    correction_key,
    enumerate_branches,
    resolve_correction,
    sample_counts,
    sample_trajectory,
)
from djrsp.qudit import BranchRecord, UnitaryOp, embed_and_apply, fidelity, site_state


logger = logging.getLogger("DJRSP")

ADJACENT_PAIRING = "adjacent"
SHIFT_PAIRING = "shift"


############################################################
#### Requests ##############################################
############################################################


class Mode(Enum):
    """What the harness does with every cell of the grid"""

    ENUMERATE = "enumerate"
    """Enumerate every branch and report full transcripts, gate log included"""

    SAMPLE = "sample"
    """Sample single trajectories, or leaf counts when more than one shot is requested"""

    SWEEP = "sweep"
    """Enumerate every cell and report branches and summaries without gate logs"""

    CLAIMS = "claims"
    """Enumerate every cell and check each of the protocol's claims on it"""


class OutputFormat(Enum):
    JSON = "json"
    CSV = "csv"


@dataclass(frozen=True)
class RunRequest:
    """One invocation of the harness. Channels and targets apply to the dimensions matching
    their length; a dimension without a channel uses the default channel a_k ∝ k + 1.
    """

    mode: Mode
    dimensions: tuple[int, ...] = (2,)
    channels: tuple[tuple[float, ...], ...] = ()
    targets: tuple[TargetState, ...] = ()
    random_targets: int = 0
    equatorial: bool = False
    seed: int = 0
    shots: int = 1
    shift: int = 1
    pairing: str | Pairing = ADJACENT_PAIRING
    engine: Engine = Engine.AUTO
    phase_policy: PhaseGatePolicy = PhaseGatePolicy.PARITY
    output_format: OutputFormat = OutputFormat.JSON
    out: Path | None = None
    success_tolerance: float | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.dimensions:
            raise InvalidRequest("At least one dimension is required")
        if any(d < 2 for d in self.dimensions):
            raise InvalidRequest(f"Every dimension must be 2 or more, got {list(self.dimensions)}")
        if len(set(self.dimensions)) != len(self.dimensions):
            raise InvalidRequest(f"Dimensions must not repeat, got {list(self.dimensions)}")

        for coefficients in self.channels:
            if len(coefficients) not in self.dimensions:
                raise InvalidRequest(
                    f"Channel {list(coefficients)} has {len(coefficients)} coefficients, which "
                    f"matches none of the dimensions {list(self.dimensions)}"
                )
            try:
                ChannelSpec(coefficients)
            except InvalidChannel as error:
                raise InvalidRequest(str(error)) from error

        for target in self.targets:
            if target.d not in self.dimensions:
                raise InvalidRequest(
                    f"Target {target.describe()} has dimension {target.d}, which matches none of "
                    f"the dimensions {list(self.dimensions)}"
                )

        for d in self.dimensions:
            if self.random_targets == 0 and not any(target.d == d for target in self.targets):
                raise InvalidRequest(
                    f"No target for d = {d}; give one with a matching length or request random "
                    "targets"
                )

        if self.random_targets < 0:
            raise InvalidRequest(f"Random target count must be >= 0, got {self.random_targets}")
        if self.shots < 1:
            raise InvalidRequest(f"Shots must be >= 1, got {self.shots}")
        if self.workers < 1:
            raise InvalidRequest(f"Workers must be >= 1, got {self.workers}")
        if not all(1 <= self.shift <= d - 1 for d in self.dimensions):
            raise InvalidRequest(
                f"The shift must lie in [1, d - 1] for every dimension, got {self.shift} for "
                f"{list(self.dimensions)}"
            )
        if self.seed < 0:
            raise InvalidRequest(f"The seed must be non-negative, got {self.seed}")
        if self.success_tolerance is not None and not 0.0 < self.success_tolerance < 1.0:
            raise InvalidRequest(
                f"The success tolerance must lie in (0, 1), got {self.success_tolerance!r}"
            )

        if self.mode is Mode.SWEEP and not (
            self.channels or self.targets or self.random_targets
        ):
            raise InvalidRequest("A sweep needs at least one channel, target or random-target grid")

        if isinstance(self.pairing, str) and self.pairing not in (ADJACENT_PAIRING, SHIFT_PAIRING):
            raise InvalidRequest(
                f"Unknown pairing {self.pairing!r}; use {ADJACENT_PAIRING!r}, {SHIFT_PAIRING!r} "
                "or an explicit list of pairs"
            )

        if self.engine is Engine.EXACT_D2:
            if any(d != 2 for d in self.dimensions):
                raise InvalidRequest(
                    f"The exact two-qubit engine only runs d = 2, got {list(self.dimensions)}"
                )
            if self.phase_policy is not PhaseGatePolicy.PARITY:
                raise InvalidRequest("The exact two-qubit engine only supports the parity policy")

    @property
    def tolerances(self) -> Tolerances:
        if self.success_tolerance is None:
            return DEFAULT_TOLERANCES
        return DEFAULT_TOLERANCES.with_success(self.success_tolerance)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "dimensions": list(self.dimensions),
            "channels": [list(coefficients) for coefficients in self.channels],
            "targets": [target.describe() for target in self.targets],
            "random_targets": self.random_targets,
            "equatorial": self.equatorial,
            "seed": self.seed,
            "shots": self.shots,
            "shift": self.shift,
            "pairing": (
                self.pairing
                if isinstance(self.pairing, str)
                else [list(pair) for pair in self.pairing]
            ),
            "engine": self.engine.value,
            "phase_policy": self.phase_policy.value,
            "format": self.output_format.value,
            "success_tolerance": self.tolerances.success,
        }


############################################################
#### Cells and results #####################################
############################################################


@dataclass(frozen=True, order=True)
class Cell:
    """One (dimension, channel, target) combination of the grid"""

    d: int
    channel_index: int
    target_index: int
    channel: ChannelSpec = field(compare=False)
    target: TargetState = field(compare=False)

    @property
    def key(self) -> str:
        return f"d={self.d}/channel={self.channel_index}/target={self.target_index}"


class ClaimStatus(Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class ClaimResult:
    id: str
    cell: str
    expected: float | None
    measured: float | None
    residual: float | None
    status: ClaimStatus
    note: str = ""


@dataclass(frozen=True)
class ReportFinding:
    kind: str
    cell: str
    path: str
    detail: str


@dataclass(frozen=True, eq=False)
class CellResult:
    cell: Cell
    config: ProtocolConfig | None
    transcript: ProtocolTranscript | None = None
    error: ReportFinding | None = None


@dataclass(frozen=True, eq=False)
class SampleResult:
    cell: Cell
    seed: int
    shots: int
    trajectory: BranchRecord | None
    counts: dict[str, int]


@dataclass(frozen=True, eq=False)
class Report:
    version: str
    request: RunRequest
    runs: tuple[CellResult, ...]
    claims: tuple[ClaimResult, ...]
    findings: tuple[ReportFinding, ...]
    samples: tuple[SampleResult, ...]

    @property
    def all_claims_pass(self) -> bool:
        return all(claim.status is not ClaimStatus.FAIL for claim in self.claims)

    def to_dict(self) -> dict[str, Any]:
        include_gate_log = self.request.mode is Mode.ENUMERATE
        return {
            "version": self.version,
            "request": self.request.to_dict(),
            "runs": [_run_to_dict(result, include_gate_log) for result in self.runs],
            "claims": [_claim_to_dict(claim) for claim in self.claims],
            "findings": [
                {
                    "kind": finding.kind,
                    "cell": finding.cell,
                    "path": finding.path,
                    "detail": finding.detail,
                }
                for finding in self.findings
            ],
            "samples": [_sample_to_dict(sample) for sample in self.samples],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_csv(self) -> str:
        """One row per leaf of every enumerated run, then one row per sampled path"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["d", "channel", "target", "path", "probability", "correction", "fidelity"])

        def describe(cell: Cell) -> list[Any]:
            channel = ",".join(repr(value) for value in cell.channel.coefficients)
            return [cell.d, channel, cell.target.describe()]

        for result in self.runs:
            if result.transcript is None:
                continue
            for leaf in result.transcript.leaves:
                writer.writerow(
                    describe(result.cell)
                    + [
                        leaf.path_key,
                        repr(leaf.probability),
                        leaf.applied_correction or "",
                        "" if leaf.fidelity is None else repr(leaf.fidelity),
                    ]
                )

        for sample in self.samples:
            if sample.trajectory is not None:
                leaf = sample.trajectory
                writer.writerow(
                    describe(sample.cell)
                    + [
                        leaf.path_key,
                        repr(leaf.probability),
                        leaf.applied_correction or "",
                        "" if leaf.fidelity is None else repr(leaf.fidelity),
                    ]
                )
                continue
            for path, count in sample.counts.items():
                if count:
                    writer.writerow(
                        describe(sample.cell) + [path, repr(count / sample.shots), "", ""]
                    )

        return buffer.getvalue()

    def render(self, output_format: OutputFormat) -> str:
        match output_format:
            case OutputFormat.JSON:
                return self.to_json()
            case OutputFormat.CSV:
                return self.to_csv()


def _config_to_dict(config: ProtocolConfig) -> dict[str, Any]:
    return {
        "d": config.d,
        "channel": list(config.channel.coefficients),
        "target": {
            "magnitudes": list(config.target.magnitudes),
            "phases": list(config.target.phases),
        },
        "shift": config.shift,
        "engine": config.engine.value,
        "cu_pairing": (
            None if config.cu_pairing is None else [list(pair) for pair in config.cu_pairing]
        ),
        "phase_policy": config.phase_policy.value,
    }


def _leaf_to_dict(leaf: BranchRecord) -> dict[str, Any]:
    return {
        "path": leaf.path_key,
        "probability": leaf.probability,
        "correction": leaf.applied_correction,
        "fidelity": leaf.fidelity,
        "flags": list(leaf.flags),
    }


def _run_to_dict(result: CellResult, include_gate_log: bool) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "cell": result.cell.key,
        "config": None if result.config is None else _config_to_dict(result.config),
        "error": (
            None
            if result.error is None
            else {"kind": result.error.kind, "detail": result.error.detail}
        ),
    }

    transcript = result.transcript
    if transcript is None:
        payload.update(gate_log=[], normalization=None, branches=[], summary=None)
        return payload

    summary = transcript.summary
    conformance = transcript.conformance
    payload.update(
        gate_log=(
            [
                {
                    "name": entry.name,
                    "sites": list(entry.sites),
                    "actor": entry.actor.value,
                    "branch": entry.branch,
                }
                for entry in transcript.gate_log
            ]
            if include_gate_log
            else []
        ),
        normalization={
            "stated_prefactor": conformance.stated_prefactor,
            "required_prefactor": conformance.required_prefactor,
            "magnitude_residual": conformance.magnitude_residual,
            "sign_mismatches": list(conformance.sign_mismatches),
        },
        branches=[_leaf_to_dict(leaf) for leaf in transcript.leaves],
        summary={
            "total_success_probability": summary.total_success_probability,
            "min_fidelity": summary.min_fidelity,
            "mean_fidelity": summary.mean_fidelity,
            "leaf_probability_total": transcript.leaf_probability_total,
            "f_probabilities": list(summary.f_probabilities),
            "correction_table": dict(summary.correction_table),
            "failed_leaves": list(summary.failed_leaves),
        },
    )
    return payload


def _claim_to_dict(claim: ClaimResult) -> dict[str, Any]:
    return {
        "id": claim.id,
        "cell": claim.cell,
        "expected": claim.expected,
        "measured": claim.measured,
        "residual": claim.residual,
        "status": claim.status.value,
        "note": claim.note,
    }


def _sample_to_dict(sample: SampleResult) -> dict[str, Any]:
    return {
        "cell": sample.cell.key,
        "seed": sample.seed,
        "shots": sample.shots,
        "trajectory": None if sample.trajectory is None else _leaf_to_dict(sample.trajectory),
        "counts": dict(sample.counts),
    }


############################################################
#### Grid construction #####################################
############################################################


def default_channel(d: int) -> ChannelSpec:
    """a_k ∝ k + 1, so a_0 is the smallest coefficient"""
    return ChannelSpec.proportional([k + 1 for k in range(d)])


def pairing_for(request: RunRequest, d: int) -> Pairing | None:
    """The Controlled-U pairing of the request at dimension d, `None` for the shift partition"""
    if request.pairing == ADJACENT_PAIRING:
        return tuple((r, r + 1) for r in range(0, d - 1, 2))
    if request.pairing == SHIFT_PAIRING:
        return None
    assert not isinstance(request.pairing, str)
    return request.pairing


def build_cells(request: RunRequest) -> list[Cell]:
    """Every (dimension, channel, target) combination, in key order. Random targets are drawn
    from a generator seeded with (seed, d), so each dimension's targets are independent of the
    others in the request.
    """
    cells: list[Cell] = []
    for d in sorted(request.dimensions):
        channels = [ChannelSpec(c) for c in request.channels if len(c) == d] or [default_channel(d)]

        targets = [target for target in request.targets if target.d == d]
        rng = np.random.default_rng([request.seed, d])
        targets += [
            TargetState.random(d, rng, request.equatorial) for _ in range(request.random_targets)
        ]

        for channel_index, channel in enumerate(channels):
            for target_index, target in enumerate(targets):
                cells.append(Cell(d, channel_index, target_index, channel, target))

    return cells


def cell_seed(request: RunRequest, cell: Cell) -> int:
    """A per-cell seed derived from the request seed"""
    rng = np.random.default_rng([request.seed, cell.d, cell.channel_index, cell.target_index])
    return int(rng.integers(0, 2**63 - 1))


def configure(request: RunRequest, cell: Cell) -> ProtocolConfig:
    engine = request.engine
    if engine is Engine.AUTO:
        engine = Engine.EXACT_D2 if cell.d == 2 else Engine.GENERAL_D

    return ProtocolConfig(
        channel=cell.channel,
        target=cell.target,
        shift=request.shift,
        engine=engine,
        cu_pairing=pairing_for(request, cell.d) if engine is Engine.GENERAL_D else None,
        phase_policy=request.phase_policy,
        tolerances=request.tolerances,
    )


############################################################
#### Execution #############################################
############################################################


def _execute_cell(request: RunRequest, cell: Cell) -> tuple[CellResult, SampleResult | None]:
    logger.info(f"Running cell {cell.key} in {request.mode.value} mode")
    config: ProtocolConfig | None = None
    try:
        config = configure(request, cell)

        if request.mode is Mode.SAMPLE:
            seed = cell_seed(request, cell)
            if request.shots == 1:
                trajectory = sample_trajectory(config, seed)
                sample = SampleResult(cell, seed, 1, trajectory, {trajectory.path_key: 1})
            else:
                counts = sample_counts(config, seed, request.shots)
                sample = SampleResult(cell, seed, request.shots, None, counts)
            return CellResult(cell, config), sample

        return CellResult(cell, config, enumerate_branches(config)), None

    except (BasisNotRealizable, UnpairablePairing, InvalidConfig) as error:
        kind = {
            BasisNotRealizable: "basis-not-realizable",
            UnpairablePairing: "unpairable-pairing",
            InvalidConfig: "invalid-config",
        }[type(error)]
        logger.warning(f"Cell {cell.key}: {error}")
        return CellResult(cell, config, error=ReportFinding(kind, cell.key, "", str(error))), None


def execute(request: RunRequest) -> Report:
    """Runs every cell of the request and assembles the report without writing it"""
    cells = build_cells(request)
    if not cells:
        raise InvalidRequest("The request produces no runs")

    if request.workers > 1:
        with ThreadPoolExecutor(max_workers=request.workers) as executor:
            outcomes = list(executor.map(lambda cell: _execute_cell(request, cell), cells))
    else:
        outcomes = [_execute_cell(request, cell) for cell in cells]

    outcomes.sort(key=lambda outcome: outcome[0].cell)
    runs = tuple(result for result, _ in outcomes)
    samples = tuple(sample for _, sample in outcomes if sample is not None)

    findings: list[ReportFinding] = []
    for result in runs:
        if result.error is not None:
            findings.append(result.error)
        if result.transcript is not None:
            findings.extend(
                ReportFinding(finding.kind, result.cell.key, finding.path, finding.detail)
                for finding in result.transcript.findings
            )

    claims: list[ClaimResult] = []
    if request.mode is Mode.CLAIMS:
        claims, claim_findings = claim_suite(runs, request)
        findings.extend(claim_findings)

    if request.mode is Mode.SAMPLE:
        runs = ()

    return Report(__version__, request, runs, tuple(claims), tuple(findings), samples)


def run(request: RunRequest, stdout: TextIO | None = None) -> Report:
    """Executes the request and writes the report to `request.out`, or to `stdout` when no
    output path is given
    """
    report = execute(request)
    text = report.render(request.output_format)

    if request.out is None:
        (stdout or sys.stdout).write(text)
    else:
        try:
            request.out.write_text(text, encoding="utf-8")
        except OSError as error:
            raise IoFailure(f"Could not write the report to {request.out}: {error}") from error
        logger.info(f"Wrote report to {request.out}")

    return report


############################################################
#### Claims ################################################
############################################################


CLAIM_IDS = ("C1", "C2", "C3", "C4", "C5", "C6", "C7")


def _status(passed: bool) -> ClaimStatus:
    return ClaimStatus.PASS if passed else ClaimStatus.FAIL


def _compare(
    claim_id: str, cell: str, expected: float, measured: float, tolerance: float, note: str = ""
) -> ClaimResult:
    residual = abs(expected - measured)
    return ClaimResult(
        claim_id, cell, expected, measured, residual, _status(residual <= tolerance), note
    )


def _not_applicable(claim_id: str, cell: str, note: str) -> ClaimResult:
    return ClaimResult(claim_id, cell, None, None, None, ClaimStatus.NOT_APPLICABLE, note)


def _score(
    leaf: BranchRecord, correction: UnitaryOp, target: TargetState, tol: Tolerances
) -> float:
    assert leaf.post_state is not None
    corrected = embed_and_apply(leaf.post_state, correction.on("B"))
    return fidelity(corrected, target_vector(target), "B", tol)


def claim_suite(
    results: Sequence[CellResult], request: RunRequest
) -> tuple[list[ClaimResult], list[ReportFinding]]:
    """Checks every claim on every enumerated cell:

    - C1 total success probability is 1
    - C2 P(f=0) = Σ_{k≥1} (a_k² - a_0²)
    - C3 P(f=1) = 2 a_0²
    - C4 every μ and ν outcome has probability 1/d
    - C5 the printed two-qubit correction charts reach the target on every leaf
    - C6 the Weyl search agrees with the two-qubit correction table on every leaf
    - C7 sampled leaf counts lie within 3σ of the enumerated probabilities (when shots > 1)
    """
    tol = request.tolerances
    claims: list[ClaimResult] = []
    findings: list[ReportFinding] = []

    for result in results:
        transcript = result.transcript
        key = result.cell.key
        if transcript is None or result.config is None:
            claims.extend(_not_applicable(claim_id, key, "no run") for claim_id in CLAIM_IDS)
            continue

        config = result.config
        d = config.d
        a = config.channel.coefficients
        summary = transcript.summary

        claims.append(_compare("C1", key, 1.0, summary.total_success_probability, tol.success))

        p_zero, p_one = summary.f_probabilities
        note = ""
        if d > 2:
            identity_residual = 1.0 - (d - 2) * a[0] ** 2 - (p_zero + p_one)
            note = f"summary identity residual 1-(d-2)a_0²-(P0+P1) = {identity_residual!r}"

        expected = math.fsum(a_k**2 - a[0] ** 2 for a_k in a[1:])
        claims.append(_compare("C2", key, expected, p_zero, tol.completeness, note))
        claims.append(_compare("C3", key, 2 * a[0] ** 2, p_one, tol.completeness, note))

        deviation = max(
            (
                abs(probability - 1.0 / d)
                for node in transcript.nodes
                if node.basis in ("mu", "nu")
                for probability in node.probabilities
            ),
            default=0.0,
        )
        claims.append(_compare("C4", key, 0.0, deviation, tol.completeness))

        if d == 2:
            claims.append(_printed_charts(transcript, key, tol, findings))
            claims.append(_resolver_agreement(transcript, key, tol))
        else:
            claims.append(_not_applicable("C5", key, "two-qubit only"))
            claims.append(_not_applicable("C6", key, "two-qubit only"))

        if request.shots > 1:
            seed = cell_seed(request, result.cell)
            claims.append(_monte_carlo(transcript, config, seed, request.shots, key))
        else:
            claims.append(_not_applicable("C7", key, "needs more than one shot"))

    return claims, findings


def _printed_charts(
    transcript: ProtocolTranscript, key: str, tol: Tolerances, findings: list[ReportFinding]
) -> ClaimResult:
    live = [leaf for leaf in transcript.leaves if not leaf.pruned]
    agreeing = 0
    for leaf in live:
        label = PRINTED_CORRECTIONS[correction_key(leaf.outcome_path)]
        correction = UnitaryOp(("i",), QUBIT_CORRECTIONS[label], label, tolerances=tol)
        try:
            score = _score(leaf, correction, transcript.config.target, tol)
        except ResidualEntanglement as error:
            findings.append(
                ReportFinding("printed-table-mismatch", key, leaf.path_key, str(error))
            )
            continue

        if score >= 1.0 - tol.success:
            agreeing += 1
        else:
            findings.append(
                ReportFinding(
                    "printed-table-mismatch",
                    key,
                    leaf.path_key,
                    f"Printed correction {label} reaches fidelity {score!r}; "
                    f"{leaf.applied_correction} reaches {leaf.fidelity!r}",
                )
            )

    mismatches = len(live) - agreeing
    return ClaimResult(
        "C5",
        key,
        float(len(live)),
        float(agreeing),
        float(mismatches),
        _status(mismatches == 0),
        f"{agreeing} of {len(live)} leaves reach the target with the printed correction",
    )


def _resolver_agreement(transcript: ProtocolTranscript, key: str, tol: Tolerances) -> ClaimResult:
    live = [leaf for leaf in transcript.leaves if not leaf.pruned]
    target = transcript.config.target
    agreeing = 0
    ambiguous = 0

    for leaf in live:
        label = EXACT_D2_CORRECTIONS[correction_key(leaf.outcome_path)]
        stated = UnitaryOp(("i",), QUBIT_CORRECTIONS[label], label, tolerances=tol)
        try:
            assert leaf.post_state is not None
            bob_state = site_state(leaf.post_state, "B", tol)
            found = resolve_correction(bob_state, target_vector(target), 2, tol)
        except (ResidualEntanglement, NoCorrectionFound):
            continue

        if equal_up_to_phase(found.matrix, QUBIT_CORRECTIONS[label], tol.phase_agreement):
            agreeing += 1
        elif _score(leaf, stated, target, tol) >= 1.0 - tol.success:
            # Degenerate targets admit more than one correction
            agreeing += 1
            ambiguous += 1

    note = f"{agreeing} of {len(live)} leaves agree"
    if ambiguous:
        note += f", {ambiguous} of them admit several corrections"
    return ClaimResult(
        "C6",
        key,
        float(len(live)),
        float(agreeing),
        float(len(live) - agreeing),
        _status(agreeing == len(live)),
        note,
    )


def _monte_carlo(
    transcript: ProtocolTranscript, config: ProtocolConfig, seed: int, shots: int, key: str
) -> ClaimResult:
    counts = sample_counts(config, seed, shots)
    worst_sigma = 0.0
    worst_frequency = 0.0

    for leaf in transcript.leaves:
        count = counts[leaf.path_key]
        expected = shots * leaf.probability
        sigma = math.sqrt(shots * leaf.probability * (1.0 - leaf.probability))
        worst_frequency = max(worst_frequency, abs(count / shots - leaf.probability))
        if sigma > 0.0:
            worst_sigma = max(worst_sigma, abs(count - expected) / sigma)

    f_zero = math.fsum(count for path, count in counts.items() if path.startswith("f=0")) / shots
    return ClaimResult(
        "C7",
        key,
        3.0,
        worst_sigma,
        worst_frequency,
        _status(worst_sigma <= 3.0),
        f"{shots} shots, empirical P(f=0) = {f_zero!r}",
    )
