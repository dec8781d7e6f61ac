"""Dense state-vector simulation over registers whose sites may have different dimensions.

Amplitudes are stored row-major over the sites in layout order, so the first-listed site is
the most significant digit of the flat index. Every operation returns a new value; states,
gates and bases are immutable once constructed.
"""

# Core dependencies
from dataclasses import dataclass, field, replace
from enum import Enum
import logging
import math
from typing import Mapping, Sequence

# Package dependencies
import numpy as np
import numpy.typing as npt

# Project dependencies
from djrsp.config import DEFAULT_TOLERANCES, Tolerances
from djrsp.errors import (
    DimensionMismatch,
    InvalidLayout,
    NonOrthonormalBasis,
    NonUnitaryMatrix,
    ResidualEntanglement,
    UnknownSite,
    UnnormalizedState,
)


logger = logging.getLogger("DJRSP")

ComplexArray = npt.NDArray[np.complex128]

PRUNED_FLAG = "pruned"


############################################################
#### Register layout #######################################
############################################################


class Party(Enum):
    """The communicating parties that own the registers once they are distributed"""

    ALICE = "Alice"
    """First sender, holds the amplitude information"""

    CHARLIE = "Charlie"
    """Second sender, holds the phase information"""

    BOB = "Bob"
    """Receiver, reconstructs the target state"""


@dataclass(frozen=True)
class Site:
    label: str
    dimension: int
    owner: Party


@dataclass(frozen=True)
class QuditRegisterLayout:
    """An ordered list of sites. The order fixes the amplitude ordering of every state on it."""

    sites: tuple[Site, ...]

    def __post_init__(self) -> None:
        if not self.sites:
            raise InvalidLayout("A register layout needs at least one site")

        labels = [site.label for site in self.sites]
        if len(set(labels)) != len(labels):
            raise InvalidLayout(f"Site labels must be unique, got {labels}")

        for site in self.sites:
            if site.dimension < 2:
                raise InvalidLayout(
                    f"Site {site.label} has dimension {site.dimension}; every site needs "
                    "dimension 2 or more"
                )

    @classmethod
    def protocol(cls, d: int) -> "QuditRegisterLayout":
        """The five registers of the joint preparation protocol in ket order A, B, e, f, g,
        labelled with the party holding each one after distribution
        """
        return cls(
            (
                Site("A", d, Party.ALICE),
                Site("B", d, Party.BOB),
                Site("e", d, Party.CHARLIE),
                Site("f", 2, Party.ALICE),
                Site("g", d, Party.BOB),
            )
        )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(site.label for site in self.sites)

    @property
    def dimensions(self) -> tuple[int, ...]:
        return tuple(site.dimension for site in self.sites)

    @property
    def total_dimension(self) -> int:
        """The dimension of the product space, i.e. the number of amplitudes"""
        return math.prod(self.dimensions)

    def index(self, label: str) -> int:
        """Returns the position of the site in the layout"""
        for position, site in enumerate(self.sites):
            if site.label == label:
                return position

        raise UnknownSite(f"Unknown site {label!r}. Valid sites are {list(self.labels)}")

    def dimension(self, label: str) -> int:
        return self.sites[self.index(label)].dimension

    def owner(self, label: str) -> Party:
        return self.sites[self.index(label)].owner

    def owned_by(self, party: Party) -> tuple[str, ...]:
        """The labels of all sites held by the party"""
        return tuple(site.label for site in self.sites if site.owner is party)


############################################################
#### States and gates ######################################
############################################################


@dataclass(frozen=True, eq=False)
class StateVector:
    """A normalized pure state on a register layout"""

    layout: QuditRegisterLayout
    amplitudes: ComplexArray
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, kw_only=True, repr=False)

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)

        if amplitudes.size != self.layout.total_dimension:
            raise DimensionMismatch(
                f"Expected {self.layout.total_dimension} amplitudes for sites "
                f"{list(self.layout.labels)}, got {amplitudes.size}"
            )

        norm = float(np.linalg.norm(amplitudes))
        if abs(norm - 1.0) > self.tolerances.norm:
            raise UnnormalizedState(f"State vectors must have unit norm, got norm {norm!r}")

        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def normalized(
        cls,
        layout: QuditRegisterLayout,
        amplitudes: npt.ArrayLike,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> tuple["StateVector", float]:
        """Builds a state from an unnormalized ket. Returns the state and the constant the
        ket was multiplied by.
        """
        vector = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            raise UnnormalizedState("The zero vector cannot be normalized into a state")

        return cls(layout, vector / norm, tolerances=tolerances), 1.0 / norm

    @classmethod
    def basis_state(
        cls,
        layout: QuditRegisterLayout,
        values: Mapping[str, int],
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> "StateVector":
        """The computational basis state with the given site values; omitted sites are 0"""
        for label in values:
            layout.index(label)

        digits = tuple(values.get(label, 0) for label in layout.labels)
        amplitudes = np.zeros(layout.total_dimension, dtype=np.complex128)
        amplitudes[np.ravel_multi_index(digits, layout.dimensions)] = 1.0
        return cls(layout, amplitudes, tolerances=tolerances)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> ComplexArray:
        """The amplitudes viewed with one axis per site"""
        return self.amplitudes.reshape(self.layout.dimensions)

    def amplitude(self, values: Mapping[str, int]) -> complex:
        """The amplitude of a computational basis state; omitted sites are 0"""
        digits = tuple(values.get(label, 0) for label in self.layout.labels)
        return complex(self.tensor()[digits])


@dataclass(frozen=True, eq=False)
class UnitaryOp:
    """A unitary acting on an ordered list of sites. Constructors build gates on generic
    labels; `on` rebinds them to the sites of a layout.
    """

    target_sites: tuple[str, ...]
    matrix: ComplexArray
    name: str = ""
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, kw_only=True, repr=False)

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.complex128)

        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch(f"Gate {self.name} needs a square matrix, got {matrix.shape}")

        if len(set(self.target_sites)) != len(self.target_sites):
            raise DimensionMismatch(f"Gate {self.name} repeats a site: {self.target_sites}")

        defect = unitarity_defect(matrix)
        if defect > self.tolerances.unitarity:
            raise NonUnitaryMatrix(
                f"Gate {self.name} is not unitary: max |U†U - I| = {defect:.3e} exceeds "
                f"{self.tolerances.unitarity:.1e}"
            )

        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "target_sites", tuple(self.target_sites))

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    def on(self, *sites: str) -> "UnitaryOp":
        """Returns the same gate acting on the given sites"""
        if len(sites) != len(self.target_sites):
            raise DimensionMismatch(
                f"Gate {self.name} acts on {len(self.target_sites)} sites, got {list(sites)}"
            )
        return replace(self, target_sites=tuple(sites))


def unitarity_defect(matrix: npt.ArrayLike) -> float:
    """max |U†U - I| over all entries"""
    array = np.asarray(matrix, dtype=np.complex128)
    identity = np.eye(array.shape[0], dtype=np.complex128)
    return float(np.max(np.abs(array.conj().T @ array - identity)))


############################################################
#### Measurement records ###################################
############################################################


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """A projective measurement on one site. Rows of `vectors` are the basis vectors."""

    site: str
    vectors: ComplexArray
    name: str = "computational"
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, kw_only=True, repr=False)

    def __post_init__(self) -> None:
        vectors = np.array(self.vectors, dtype=np.complex128)

        if vectors.ndim != 2 or vectors.shape[0] != vectors.shape[1]:
            raise NonOrthonormalBasis(
                f"Basis {self.name} needs as many vectors as the site dimension, got shape "
                f"{vectors.shape}"
            )

        gram = vectors.conj() @ vectors.T
        defect = float(np.max(np.abs(gram - np.eye(vectors.shape[0]))))
        if defect > self.tolerances.orthonormality:
            raise NonOrthonormalBasis(
                f"Basis {self.name} is not orthonormal: max |G - I| = {defect:.3e}"
            )

        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @classmethod
    def computational(
        cls, site: str, dimension: int, tolerances: Tolerances = DEFAULT_TOLERANCES
    ) -> "MeasurementBasis":
        return cls(site, np.eye(dimension, dtype=np.complex128), tolerances=tolerances)

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[0])


@dataclass(frozen=True, order=True)
class Outcome:
    """One measurement result: which site, which basis vector, in which basis"""

    site: str
    index: int
    basis: str = "computational"

    def __str__(self) -> str:
        if self.basis == "computational":
            return f"{self.site}={self.index}"
        return f"{self.site}.{self.basis}={self.index}"


@dataclass(frozen=True, eq=False)
class BranchRecord:
    """A node of the measurement tree. `post_state` is the collapsed, renormalized state, or
    `None` when the branch fell below the probability floor and was pruned.
    """

    outcome_path: tuple[Outcome, ...]
    probability: float
    post_state: StateVector | None
    applied_correction: str | None = None
    fidelity: float | None = None
    flags: tuple[str, ...] = ()

    @property
    def pruned(self) -> bool:
        return PRUNED_FLAG in self.flags

    @property
    def path_key(self) -> str:
        return "/".join(str(outcome) for outcome in self.outcome_path)

    def succeeded(self, tolerances: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return self.fidelity is not None and self.fidelity >= 1.0 - tolerances.success


############################################################
#### Operations ############################################
############################################################


def embed_and_apply(state: StateVector, op: UnitaryOp) -> StateVector:
    """Applies the gate on its target sites and the identity everywhere else"""
    layout = state.layout
    axes = [layout.index(label) for label in op.target_sites]
    dimensions = [layout.dimensions[axis] for axis in axes]

    if op.dimension != math.prod(dimensions):
        raise DimensionMismatch(
            f"Gate {op.name} has size {op.dimension} but sites {list(op.target_sites)} span "
            f"{math.prod(dimensions)} levels"
        )

    count = len(axes)
    gate = op.matrix.reshape(dimensions + dimensions)
    product = np.tensordot(gate, state.tensor(), axes=(list(range(count, 2 * count)), axes))

    # tensordot puts the target axes first, in gate order
    remaining = [axis for axis in range(len(layout.sites)) if axis not in axes]
    result = np.transpose(product, np.argsort([*axes, *remaining]))
    return StateVector(layout, result.reshape(-1), tolerances=state.tolerances)


def measure_exhaustive(
    state: StateVector, basis: MeasurementBasis, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> list[BranchRecord]:
    """Projects the state onto every vector of the basis. Returns one record per outcome, in
    basis order, with the outcome probability and the renormalized collapsed state.
    """
    layout = state.layout
    axis = layout.index(basis.site)
    dimension = layout.dimensions[axis]

    if basis.dimension != dimension:
        raise DimensionMismatch(
            f"Basis {basis.name} has {basis.dimension} vectors but site {basis.site} has "
            f"dimension {dimension}"
        )

    rest_shape = [size for position, size in enumerate(layout.dimensions) if position != axis]
    matrix = np.moveaxis(state.tensor(), axis, 0).reshape(dimension, -1)

    records: list[BranchRecord] = []
    for index, vector in enumerate(basis.vectors):
        outcome = Outcome(basis.site, index, basis.name)
        reduced = vector.conj() @ matrix
        probability = float(np.vdot(reduced, reduced).real)

        if probability < tolerances.probability_floor:
            logger.debug(f"Pruned outcome {outcome} with probability {probability:.3e}")
            records.append(BranchRecord((outcome,), probability, None, flags=(PRUNED_FLAG,)))
            continue

        collapsed = np.outer(vector, reduced / math.sqrt(probability))
        collapsed = np.moveaxis(collapsed.reshape([dimension, *rest_shape]), 0, axis)
        collapsed_state = StateVector(layout, collapsed, tolerances=tolerances)
        records.append(BranchRecord((outcome,), probability, collapsed_state))

    total = math.fsum(record.probability for record in records)
    if abs(total - 1.0) > tolerances.completeness:
        logger.warning(
            f"Outcome probabilities of basis {basis.name} on site {basis.site} sum to {total!r}"
        )

    return records


def reduced_density_matrix(state: StateVector, site: str) -> ComplexArray:
    """The reduced state of one site, tracing out every other site"""
    axis = state.layout.index(site)
    dimension = state.layout.dimensions[axis]
    matrix = np.moveaxis(state.tensor(), axis, 0).reshape(dimension, -1)
    return matrix @ matrix.conj().T


def site_state(
    state: StateVector, site: str, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> ComplexArray:
    """The pure state of a site that is in a product state with the rest of the register. The
    global phase is fixed so that the first nonzero entry is real and positive.
    """
    rho = reduced_density_matrix(state, site)
    purity = float(np.real(np.trace(rho @ rho)))
    if purity < 1.0 - tolerances.purity:
        raise ResidualEntanglement(site, purity)

    _, eigenvectors = np.linalg.eigh(rho)
    return fix_global_phase(eigenvectors[:, -1])


def fidelity(
    state: StateVector,
    reference_site_state: npt.ArrayLike,
    site: str,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """|<reference|site state>|^2 for a site that is not entangled with the rest"""
    reference = np.asarray(reference_site_state, dtype=np.complex128).reshape(-1)
    dimension = state.layout.dimension(site)
    if reference.size != dimension:
        raise DimensionMismatch(
            f"Reference has {reference.size} entries but site {site} has dimension {dimension}"
        )

    rho = reduced_density_matrix(state, site)
    purity = float(np.real(np.trace(rho @ rho)))
    if purity < 1.0 - tolerances.purity:
        raise ResidualEntanglement(site, purity)

    value = float(np.real(np.vdot(reference, rho @ reference)))
    return min(max(value, 0.0), 1.0)


def fix_global_phase(
    vector: npt.ArrayLike, threshold: float = DEFAULT_TOLERANCES.zero_amplitude
) -> ComplexArray:
    """Multiplies the vector by the phase that makes its first nonzero entry real positive"""
    array = np.asarray(vector, dtype=np.complex128)
    for entry in array:
        if abs(entry) > threshold:
            return array * (abs(entry) / entry)
    return array.copy()


def normalize_rows(vectors: Sequence[npt.ArrayLike]) -> ComplexArray:
    """Applies `fix_global_phase` to every row"""
    return np.array([fix_global_phase(vector) for vector in vectors], dtype=np.complex128)
