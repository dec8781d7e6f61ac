"""The deterministic joint remote state preparation protocol: channel preparation, Alice's
encoding circuit, the measurement cascade with both flag outcomes, Bob's corrections and the
transcript that records all of it.

Two engines run the same protocol. `ExactD2Engine` builds every gate from the literal two-qubit
matrices and takes Bob's corrections from a fixed table. `GeneralDEngine` builds every gate from
the general-d formulas and finds Bob's correction by searching the Weyl-Heisenberg family.
"""

# Core dependencies
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
import logging
import math
from typing import Callable, Mapping, Sequence


try:
    from typing import override
except ImportError:  # Python < 3.12: same runtime behavior as `typing.override`

    def override(method):  # type: ignore[no-untyped-def]
        try:
            method.__override__ = True
        except (AttributeError, TypeError):
            pass
        return method

# Package dependencies
import numpy as np
import numpy.typing as npt

# Project dependencies
from djrsp.bases import TargetState, mu_basis, nu_basis, target_vector
from djrsp.config import DEFAULT_TOLERANCES, Tolerances
from djrsp.errors import InvalidConfig, NoCorrectionFound, ResidualEntanglement
from djrsp.gates import (
    CNOT_2,
    CNOT_PRIMED_2,
    HADAMARD_2,
    ONE_SITE,
    PHASE_PAIR_2,
    QUBIT_CORRECTIONS,
    TWO_SITES,
    ChannelSpec,
    GateKind,
    GateSpec,
    Pairing,
    charlie_phase_qubit,
    controlled_u_qubit,
    weyl_corrections,
)
from djrsp.qudit import (
    PRUNED_FLAG,
    BranchRecord,
    ComplexArray,
    MeasurementBasis,
    Outcome,
    Party,
    QuditRegisterLayout,
    StateVector,
    UnitaryOp,
    embed_and_apply,
    fidelity,
    measure_exhaustive,
    site_state,
)


logger = logging.getLogger("DJRSP")

RESIDUAL_ENTANGLEMENT_FLAG = "residual-entanglement"
NO_CORRECTION_FLAG = "no-correction-found"

CorrectionKey = tuple[int, int, int, int | None]
"""(f outcome, μ outcome, ν outcome, g outcome or `None` in the f = 0 branch)"""


############################################################
#### Configuration #########################################
############################################################


class Engine(Enum):
    """Selects how gates and corrections are built"""

    AUTO = "auto"
    """`EXACT_D2` for two-level targets, `GENERAL_D` otherwise"""

    EXACT_D2 = "exact-d2"
    """Literal two-qubit matrices and the fixed correction table"""

    GENERAL_D = "general-d"
    """General-d gate formulas and the Weyl correction search"""


class PhaseGatePolicy(Enum):
    """Where Charlie applies the phase gate before measuring in the phase basis"""

    PARITY = "parity"
    """Only when the μ outcome index has the parity of the flag outcome"""

    F_ONE = "f-one"
    """In the whole f = 1 branch"""

    NEVER = "never"


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything needed to run the protocol once"""

    channel: ChannelSpec
    target: TargetState
    shift: int = 1
    engine: Engine = Engine.AUTO
    cu_pairing: Pairing | None = None
    phase_policy: PhaseGatePolicy = PhaseGatePolicy.PARITY
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self) -> None:
        d = self.channel.d
        if self.target.d != d:
            raise InvalidConfig(
                f"The channel has dimension {d} but the target has dimension {self.target.d}"
            )

        if not 1 <= self.shift <= d - 1:
            raise InvalidConfig(f"The shift must lie in [1, {d - 1}], got {self.shift}")

        if self.engine is Engine.AUTO:
            object.__setattr__(
                self, "engine", Engine.EXACT_D2 if d == 2 else Engine.GENERAL_D
            )

        if self.cu_pairing is not None:
            object.__setattr__(
                self, "cu_pairing", tuple((int(a), int(b)) for a, b in self.cu_pairing)
            )

        if self.engine is Engine.EXACT_D2:
            if d != 2:
                raise InvalidConfig(f"The exact two-qubit engine needs d = 2, got d = {d}")
            if self.cu_pairing is not None:
                raise InvalidConfig("An explicit Controlled-U pairing needs the general-d engine")
            if self.phase_policy is not PhaseGatePolicy.PARITY:
                raise InvalidConfig(
                    "The exact two-qubit engine always places the phase gate as in the "
                    f"two-qubit protocol, got policy {self.phase_policy.value!r}"
                )

    @property
    def d(self) -> int:
        return self.channel.d


############################################################
#### Transcript records ####################################
############################################################


@dataclass(frozen=True)
class GateLogEntry:
    name: str
    sites: tuple[str, ...]
    actor: Party
    branch: str
    """Outcome path the gate was applied in, empty during the encoding"""


@dataclass(frozen=True)
class ClassicalMessage:
    """A measurement result broadcast by its owner"""

    sender: Party
    receivers: tuple[Party, ...]
    outcome: Outcome
    branch: str


@dataclass(frozen=True)
class MeasurementNode:
    """One measurement in the tree, with the conditional probability of every outcome"""

    path: tuple[Outcome, ...]
    site: str
    basis: str
    probabilities: tuple[float, ...]
    completeness_residual: float
    measured_by: Party

    @property
    def path_key(self) -> str:
        return "/".join(str(outcome) for outcome in self.path)


@dataclass(frozen=True)
class Finding:
    """Something a run observed that is not an error, e.g. a leaf that kept entanglement"""

    kind: str
    path: str
    detail: str


@dataclass(frozen=True)
class EncodingConformance:
    """Compares the simulated encoded state with the closed-form ket written for it"""

    stated_prefactor: float
    """The normalization written in front of the closed-form ket, √(1/(d(d-1)))"""

    required_prefactor: float
    """The normalization the closed-form ket actually needs"""

    magnitude_residual: float
    """max | |simulated| - |normalized closed form| | over all amplitudes"""

    sign_mismatches: tuple[str, ...]
    """Basis kets whose sign differs from the closed form, relative to the first shared one"""


@dataclass(frozen=True)
class TranscriptSummary:
    total_success_probability: float
    min_fidelity: float | None
    mean_fidelity: float | None
    """Probability-weighted over unpruned leaves, a leaf without a fidelity counts as 0"""

    f_probabilities: tuple[float, ...]
    correction_table: Mapping[str, str]
    failed_leaves: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    """The full record of one enumeration. Leaves are sorted by outcome path."""

    config: ProtocolConfig
    gate_log: tuple[GateLogEntry, ...]
    messages: tuple[ClassicalMessage, ...]
    nodes: tuple[MeasurementNode, ...]
    leaves: tuple[BranchRecord, ...]
    findings: tuple[Finding, ...]
    conformance: EncodingConformance
    summary: TranscriptSummary

    @property
    def leaf_probability_total(self) -> float:
        return math.fsum(leaf.probability for leaf in self.leaves)

    def leaf(self, path_key: str) -> BranchRecord:
        for leaf in self.leaves:
            if leaf.path_key == path_key:
                return leaf
        raise KeyError(f"No leaf with path {path_key!r}")

    def nodes_at(self, site: str) -> list[MeasurementNode]:
        return [node for node in self.nodes if node.site == site]


@dataclass
class _Run:
    """Mutable bookkeeping for one pass through the protocol"""

    select: Callable[[list[BranchRecord]], list[BranchRecord]]
    gate_log: list[GateLogEntry] = field(default_factory=list)
    messages: list[ClassicalMessage] = field(default_factory=list)
    nodes: list[MeasurementNode] = field(default_factory=list)
    findings: list[Finding] = field(default_factory=list)


def _every_outcome(children: list[BranchRecord]) -> list[BranchRecord]:
    return children


############################################################
#### Correction tables #####################################
############################################################


EXACT_D2_CORRECTIONS: dict[CorrectionKey, str] = {
    (0, 0, 0, None): "iY",
    (0, 0, 1, None): "X",
    (0, 1, 0, None): "I",
    (0, 1, 1, None): "Z",
    (1, 0, 0, 0): "X",
    (1, 0, 0, 1): "I",
    (1, 0, 1, 0): "iY",
    (1, 0, 1, 1): "Z",
    (1, 1, 0, 0): "Z",
    (1, 1, 0, 1): "iY",
    (1, 1, 1, 0): "I",
    (1, 1, 1, 1): "X",
}
"""Bob's correction on every two-qubit leaf, obtained by working the circuit through by hand"""

PRINTED_CORRECTIONS: dict[CorrectionKey, str] = {
    (0, 0, 0, None): "Z",
    (0, 0, 1, None): "X",
    (0, 1, 0, None): "I",
    (0, 1, 1, None): "Z",
    (1, 0, 0, 0): "Z",
    (1, 0, 0, 1): "I",
    (1, 0, 1, 0): "Z",
    (1, 0, 1, 1): "I",
    (1, 1, 0, 0): "I",
    (1, 1, 0, 1): "iY",
    (1, 1, 1, 0): "I",
    (1, 1, 1, 1): "iY",
}
"""The two-qubit corrections as printed with the protocol, checked leaf by leaf by the harness"""


def correction_key(path: Sequence[Outcome]) -> CorrectionKey:
    """The table key of a complete two-qubit outcome path"""
    indices = {outcome.site: outcome.index for outcome in path}
    return (indices["f"], indices["A"], indices["e"], indices.get("g"))


def resolve_correction(
    bob_state: npt.ArrayLike,
    target: npt.ArrayLike,
    d: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> UnitaryOp:
    """Returns the first Weyl operator, in (a, b) order, that maps Bob's state onto the target
    up to global phase
    """
    state = np.asarray(bob_state, dtype=np.complex128).reshape(-1)
    reference = np.asarray(target, dtype=np.complex128).reshape(-1)

    best = 0.0
    for correction in weyl_corrections(d):
        overlap = abs(np.vdot(reference, correction.matrix @ state)) ** 2
        if overlap >= 1.0 - tolerances.success:
            return correction
        best = max(best, float(overlap))

    raise NoCorrectionFound(best)


############################################################
#### Closed-form encoded ket ###############################
############################################################


def stated_encoded_ket(channel: ChannelSpec) -> ComplexArray:
    """The closed-form encoded state as written, without its prefactor, on the layout
    (A, B, e, f, g):

        Σ_{r,k=1}^{d-1} [ a_0 (|r000⟩ + |00rr⟩ + |rk00⟩ + |0krr⟩)_ABeg |1⟩_f
                        + √(a_k² - a_0²) (|0k00⟩ + |rkrr⟩)_ABeg |0⟩_f ]
    """
    d = channel.d
    a = channel.coefficients
    ket = np.zeros(QuditRegisterLayout.protocol(d).dimensions, dtype=np.complex128)

    for r in range(1, d):
        for k in range(1, d):
            for A, B, e, g in ((r, 0, 0, 0), (0, 0, r, r), (r, k, 0, 0), (0, k, r, r)):
                ket[A, B, e, 1, g] += a[0]

            flattening = math.sqrt(max(0.0, a[k] ** 2 - a[0] ** 2))
            for A, B, e, g in ((0, k, 0, 0), (r, k, r, r)):
                ket[A, B, e, 0, g] += flattening

    return ket.reshape(-1)


def encoding_conformance(
    encoded: StateVector, channel: ChannelSpec, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> EncodingConformance:
    """Compares an encoded state with `stated_encoded_ket`"""
    d = channel.d
    stated = stated_encoded_ket(channel)
    required = 1.0 / float(np.linalg.norm(stated))
    amplitudes = encoded.amplitudes

    residual = float(np.max(np.abs(np.abs(amplitudes) - required * np.abs(stated))))

    zero = tolerances.zero_amplitude
    support = np.flatnonzero((np.abs(amplitudes) > zero) & (np.abs(stated) > zero))
    mismatches: list[str] = []
    if support.size:
        ratios = amplitudes[support] / stated[support]
        phases = ratios / np.abs(ratios)
        for index, phase in zip(support, phases):
            if abs(phase - phases[0]) > tolerances.phase_agreement:
                digits = np.unravel_index(index, encoded.layout.dimensions)
                mismatches.append("|" + "".join(str(int(digit)) for digit in digits) + "⟩")

    return EncodingConformance(
        stated_prefactor=math.sqrt(1.0 / (d * (d - 1))),
        required_prefactor=required,
        magnitude_residual=residual,
        sign_mismatches=tuple(mismatches),
    )


############################################################
#### Engines ###############################################
############################################################


class ProtocolEngine(ABC):
    """Runs the protocol for one configuration. Subclasses decide how gates are built, how Bob's
    correction is chosen and where Charlie's phase gate goes.
    """

    def __init__(self, config: ProtocolConfig) -> None:
        self._config = config
        self._tolerances = config.tolerances
        self._layout = QuditRegisterLayout.protocol(config.d)
        self._target = target_vector(config.target)

    @property
    def config(self) -> ProtocolConfig:
        return self._config

    @cached_property
    def _mu(self) -> MeasurementBasis:
        return mu_basis(self._config.target.amplitude_share, "A", self._tolerances)

    @cached_property
    def _nu(self) -> MeasurementBasis:
        return nu_basis(self._config.target.phase_share, "e", self._tolerances)

    @abstractmethod
    def _unitary(self, spec: GateSpec) -> UnitaryOp:
        """Builds the gate on the generic labels"""

    @abstractmethod
    def _correction(self, record: BranchRecord) -> UnitaryOp:
        """Chooses Bob's correction for a leaf. May raise `ResidualEntanglement` or
        `NoCorrectionFound`.
        """

    def _charlie_applies_phase(self, f: int, p: int) -> bool:
        match self._config.phase_policy:
            case PhaseGatePolicy.PARITY:
                return p % 2 == f
            case PhaseGatePolicy.F_ONE:
                return f == 1
            case PhaseGatePolicy.NEVER:
                return False

    ############################################################
    #### Public API ############################################
    ############################################################

    def prepare_initial(self) -> StateVector:
        """Σ_k a_k |kk⟩_AB ⊗ |0⟩_e |0⟩_f |0⟩_g"""
        amplitudes = np.zeros(self._layout.dimensions, dtype=np.complex128)
        for k, a_k in enumerate(self._config.channel.coefficients):
            amplitudes[k, k, 0, 0, 0] = a_k
        return StateVector(self._layout, amplitudes.reshape(-1), tolerances=self._tolerances)

    def encode(self, state: StateVector) -> StateVector:
        return self._encode(_Run(_every_outcome), state)

    def enumerate(self) -> ProtocolTranscript:
        """Runs every measurement branch and assembles the transcript"""
        run = _Run(_every_outcome)
        encoded = self._encode(run, self.prepare_initial())
        leaves = sorted(
            self._cascade(run, BranchRecord((), 1.0, encoded)), key=lambda leaf: leaf.outcome_path
        )

        total = math.fsum(leaf.probability for leaf in leaves)
        if abs(total - 1.0) > self._tolerances.completeness:
            logger.warning(f"Leaf probabilities sum to {total!r} for configuration {self._config}")

        summary = _summarize(leaves, run.nodes, self._tolerances)
        logger.debug(
            f"Enumerated {len(leaves)} leaves for d={self._config.d}, success probability "
            f"{summary.total_success_probability!r}"
        )

        return ProtocolTranscript(
            config=self._config,
            gate_log=tuple(run.gate_log),
            messages=tuple(run.messages),
            nodes=tuple(run.nodes),
            leaves=tuple(leaves),
            findings=tuple(run.findings),
            conformance=encoding_conformance(encoded, self._config.channel, self._tolerances),
            summary=summary,
        )

    def sample(self, seed: int) -> BranchRecord:
        """Walks a single trajectory, drawing each outcome from its conditional probability"""
        rng = np.random.default_rng(seed)

        def draw(children: list[BranchRecord]) -> list[BranchRecord]:
            weights = np.array([child.probability for child in children], dtype=np.float64)
            choice = rng.choice(len(children), p=weights / weights.sum())
            return [children[int(choice)]]

        run = _Run(draw)
        encoded = self._encode(run, self.prepare_initial())
        (leaf,) = self._cascade(run, BranchRecord((), 1.0, encoded))
        return leaf

    def run_branch(self, state: StateVector, f: int) -> list[BranchRecord]:
        """Runs the posterior measurements on a state already collapsed onto flag outcome `f`"""
        run = _Run(_every_outcome)
        root = BranchRecord((Outcome("f", f),), 1.0, state)
        branch = self._branch_zero_f if f == 0 else self._branch_one_f
        return sorted(branch(run, root), key=lambda leaf: leaf.outcome_path)

    ############################################################
    #### Protocol steps ########################################
    ############################################################

    def _apply(
        self, run: _Run, record: BranchRecord, spec: GateSpec, sites: tuple[str, ...], actor: Party
    ) -> BranchRecord:
        assert record.post_state is not None
        op = replace(self._unitary(spec).on(*sites), tolerances=self._tolerances)
        run.gate_log.append(GateLogEntry(op.name, sites, actor, record.path_key))
        logger.debug(f"{actor.value} applies {op.name} on {sites} in branch [{record.path_key}]")
        return replace(record, post_state=embed_and_apply(record.post_state, op))

    def _encode(self, run: _Run, state: StateVector) -> StateVector:
        d = self._config.d
        shift = self._config.shift
        cnot = GateSpec(GateKind.CNOT_D, d)
        steps = (
            (GateSpec(GateKind.HADAMARD_D, d), ("A",)),
            (GateSpec(GateKind.PHASE_PAIR_D, d), ("A", "B")),
            (cnot, ("A", "e")),
            (
                GateSpec(
                    GateKind.CONTROLLED_U,
                    d,
                    shift=shift,
                    channel=self._config.channel,
                    pairing=self._config.cu_pairing,
                ),
                ("A", "B"),
            ),
            (GateSpec(GateKind.CNOT_PRIMED_D, d, shift=shift), ("e", "A")),
            (GateSpec(GateKind.CNOT_D, d, target_dimension=2), ("A", "f")),
            (cnot, ("e", "g")),
            (cnot, ("e", "A")),
        )

        record = BranchRecord((), 1.0, state)
        for spec, sites in steps:
            record = self._apply(run, record, spec, sites, Party.ALICE)

        assert record.post_state is not None
        return record.post_state

    def _measure(
        self,
        run: _Run,
        parent: BranchRecord,
        basis: MeasurementBasis,
        measured_by: Party,
        receivers: tuple[Party, ...],
    ) -> list[BranchRecord]:
        assert parent.post_state is not None
        records = measure_exhaustive(parent.post_state, basis, self._tolerances)
        probabilities = tuple(record.probability for record in records)
        run.nodes.append(
            MeasurementNode(
                path=parent.outcome_path,
                site=basis.site,
                basis=basis.name,
                probabilities=probabilities,
                completeness_residual=abs(math.fsum(probabilities) - 1.0),
                measured_by=measured_by,
            )
        )

        children = [
            BranchRecord(
                parent.outcome_path + record.outcome_path,
                parent.probability * record.probability,
                record.post_state,
                flags=record.flags,
            )
            for record in records
        ]

        selected = run.select(children)
        for child in selected:
            if child.pruned:
                run.findings.append(
                    Finding(
                        "pruned-branch",
                        child.path_key,
                        f"Outcome probability {child.probability!r} is below the floor of "
                        f"{self._tolerances.probability_floor!r}",
                    )
                )
            elif receivers:
                run.messages.append(
                    ClassicalMessage(
                        measured_by, receivers, child.outcome_path[-1], parent.path_key
                    )
                )
        return selected

    def _cascade(self, run: _Run, root: BranchRecord) -> list[BranchRecord]:
        flag = MeasurementBasis.computational("f", 2, self._tolerances)
        leaves: list[BranchRecord] = []
        for record in self._measure(run, root, flag, Party.ALICE, (Party.CHARLIE, Party.BOB)):
            if record.pruned:
                leaves.append(record)
            elif record.outcome_path[-1].index == 0:
                leaves.extend(self._branch_zero_f(run, record))
            else:
                leaves.extend(self._branch_one_f(run, record))
        return leaves

    def _sender_measurements(
        self, run: _Run, record: BranchRecord, f: int
    ) -> tuple[list[BranchRecord], list[BranchRecord]]:
        """Alice's μ measurement, Charlie's phase gate and ν measurement. Returns the pruned
        leaves and the records still to be completed by Bob.
        """
        d = self._config.d
        phase = GateSpec(GateKind.CHARLIE_PHASE, d, phases=self._config.target.phases)
        pruned: list[BranchRecord] = []
        live: list[BranchRecord] = []

        for mu_record in self._measure(
            run, record, self._mu, Party.ALICE, (Party.CHARLIE, Party.BOB)
        ):
            if mu_record.pruned:
                pruned.append(mu_record)
                continue

            if self._charlie_applies_phase(f, mu_record.outcome_path[-1].index):
                mu_record = self._apply(run, mu_record, phase, ("e",), Party.CHARLIE)

            for nu_record in self._measure(run, mu_record, self._nu, Party.CHARLIE, (Party.BOB,)):
                (pruned if nu_record.pruned else live).append(nu_record)

        return pruned, live

    def _branch_zero_f(self, run: _Run, record: BranchRecord) -> list[BranchRecord]:
        d = self._config.d
        cnot = GateSpec(GateKind.CNOT_D, d)
        record = self._apply(run, record, cnot, ("g", "B"), Party.BOB)
        record = self._apply(run, record, cnot, ("B", "g"), Party.BOB)

        leaves, live = self._sender_measurements(run, record, 0)
        for nu_record in live:
            nu_record = self._apply(
                run, nu_record, GateSpec(GateKind.HADAMARD_D, d), ("B",), Party.BOB
            )
            nu_record = self._apply(
                run, nu_record, GateSpec(GateKind.BOB_PHASE, d), ("B",), Party.BOB
            )
            leaves.append(self._finish(run, nu_record))
        return leaves

    def _branch_one_f(self, run: _Run, record: BranchRecord) -> list[BranchRecord]:
        d = self._config.d
        record = self._apply(run, record, GateSpec(GateKind.CNOT_D, d), ("B", "g"), Party.BOB)

        leaves, live = self._sender_measurements(run, record, 1)
        ancilla = MeasurementBasis.computational("g", d, self._tolerances)
        for nu_record in live:
            for g_record in self._measure(run, nu_record, ancilla, Party.BOB, ()):
                leaves.append(g_record if g_record.pruned else self._finish(run, g_record))
        return leaves

    def _finish(self, run: _Run, record: BranchRecord) -> BranchRecord:
        """Applies Bob's correction and scores the leaf against the target"""
        assert record.post_state is not None
        try:
            correction = self._correction(record)
            corrected = embed_and_apply(
                record.post_state, replace(correction.on("B"), tolerances=self._tolerances)
            )
            value = fidelity(corrected, self._target, "B", self._tolerances)
        except ResidualEntanglement as error:
            logger.warning(f"Leaf [{record.path_key}]: {error}")
            run.findings.append(Finding(RESIDUAL_ENTANGLEMENT_FLAG, record.path_key, str(error)))
            return replace(record, flags=record.flags + (RESIDUAL_ENTANGLEMENT_FLAG,))
        except NoCorrectionFound as error:
            logger.warning(f"Leaf [{record.path_key}]: {error}")
            run.findings.append(Finding(NO_CORRECTION_FLAG, record.path_key, str(error)))
            return replace(record, flags=record.flags + (NO_CORRECTION_FLAG,))

        run.gate_log.append(GateLogEntry(correction.name, ("B",), Party.BOB, record.path_key))
        return replace(record, applied_correction=correction.name, fidelity=value)


class ExactD2Engine(ProtocolEngine):
    """Two-qubit engine built from the literal matrices and the fixed correction table"""

    @override
    def _unitary(self, spec: GateSpec) -> UnitaryOp:
        match spec.kind:
            case GateKind.HADAMARD_D | GateKind.BOB_PHASE:
                return UnitaryOp(ONE_SITE, HADAMARD_2, spec.name)
            case GateKind.PHASE_PAIR_D:
                return UnitaryOp(TWO_SITES, PHASE_PAIR_2, spec.name)
            case GateKind.CNOT_D:
                return UnitaryOp(TWO_SITES, CNOT_2, spec.name)
            case GateKind.CNOT_PRIMED_D:
                return UnitaryOp(TWO_SITES, CNOT_PRIMED_2, spec.name)
            case GateKind.CONTROLLED_U:
                alpha, beta = self._config.channel.coefficients
                return UnitaryOp(TWO_SITES, controlled_u_qubit(alpha, beta), spec.name)
            case GateKind.CHARLIE_PHASE:
                theta = spec.phases[1] - spec.phases[0]
                return UnitaryOp(ONE_SITE, charlie_phase_qubit(theta), spec.name)
            case _:
                return spec.realize()

    @override
    def _correction(self, record: BranchRecord) -> UnitaryOp:
        label = EXACT_D2_CORRECTIONS[correction_key(record.outcome_path)]
        return UnitaryOp(ONE_SITE, QUBIT_CORRECTIONS[label], label)


class GeneralDEngine(ProtocolEngine):
    """Engine for any dimension, built from the general-d gate formulas"""

    @override
    def _unitary(self, spec: GateSpec) -> UnitaryOp:
        return spec.realize()

    @override
    def _correction(self, record: BranchRecord) -> UnitaryOp:
        assert record.post_state is not None
        bob_state = site_state(record.post_state, "B", self._tolerances)
        return resolve_correction(bob_state, self._target, self._config.d, self._tolerances)


def engine_for(config: ProtocolConfig) -> ProtocolEngine:
    """Returns the engine selected by the configuration"""
    if config.engine is Engine.EXACT_D2:
        return ExactD2Engine(config)
    return GeneralDEngine(config)


############################################################
#### Summary ###############################################
############################################################


def _summarize(
    leaves: Sequence[BranchRecord], nodes: Sequence[MeasurementNode], tolerances: Tolerances
) -> TranscriptSummary:
    live = [leaf for leaf in leaves if not leaf.pruned]
    scores = [leaf.fidelity if leaf.fidelity is not None else 0.0 for leaf in live]
    weight = math.fsum(leaf.probability for leaf in live)

    root = next((node for node in nodes if node.site == "f" and not node.path), None)

    return TranscriptSummary(
        total_success_probability=math.fsum(
            leaf.probability for leaf in leaves if leaf.succeeded(tolerances)
        ),
        min_fidelity=min(scores) if scores else None,
        mean_fidelity=(
            math.fsum(leaf.probability * score for leaf, score in zip(live, scores)) / weight
            if weight > 0.0
            else None
        ),
        f_probabilities=root.probabilities if root is not None else (),
        correction_table={
            leaf.path_key: leaf.applied_correction
            for leaf in live
            if leaf.applied_correction is not None
        },
        failed_leaves=tuple(leaf.path_key for leaf in live if not leaf.succeeded(tolerances)),
    )


############################################################
#### Module-level operations ###############################
############################################################


def prepare_initial(config: ProtocolConfig) -> StateVector:
    return engine_for(config).prepare_initial()


def alice_encoding(state: StateVector, config: ProtocolConfig) -> StateVector:
    """Alice's encoding circuit, in application order H_A, P_AB, C_Ae, CU_AB, C'_eA, C_Af,
    C_eg, C_eA
    """
    return engine_for(config).encode(state)


def run_branch_zero_f(state: StateVector, config: ProtocolConfig) -> list[BranchRecord]:
    """The f = 0 sub-tree. Leaf probabilities are conditional on the flag outcome."""
    return engine_for(config).run_branch(state, 0)


def run_branch_one_f(state: StateVector, config: ProtocolConfig) -> list[BranchRecord]:
    """The f = 1 sub-tree. Leaf probabilities are conditional on the flag outcome."""
    return engine_for(config).run_branch(state, 1)


def enumerate_branches(config: ProtocolConfig) -> ProtocolTranscript:
    return engine_for(config).enumerate()


def sample_trajectory(config: ProtocolConfig, seed: int) -> BranchRecord:
    return engine_for(config).sample(seed)


def sample_counts(config: ProtocolConfig, seed: int, shots: int) -> dict[str, int]:
    """Draws `shots` complete runs at once from the enumerated leaf distribution. Every leaf
    appears in the result, in transcript order, even when it was never drawn.
    """
    if shots < 1:
        raise InvalidConfig(f"The number of shots must be positive, got {shots}")

    transcript = enumerate_branches(config)
    probabilities = np.array([leaf.probability for leaf in transcript.leaves], dtype=np.float64)
    counts = np.random.default_rng(seed).multinomial(shots, probabilities / probabilities.sum())
    return {leaf.path_key: int(count) for leaf, count in zip(transcript.leaves, counts)}
