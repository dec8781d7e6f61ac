"""Constructors for every unitary used by the protocol, for arbitrary dimension and as the
literal two-qubit matrices, plus the Weyl-Heisenberg correction family.

Constructors return gates on the generic labels `i` (and `j` for two-site gates, `i` being the
control and the most significant digit). Use `UnitaryOp.on` to place them on register sites.
"""

# Core dependencies
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
import math
from typing import Sequence

# Package dependencies
import numpy as np
import numpy.typing as npt

# Project dependencies
from djrsp.config import DEFAULT_TOLERANCES
from djrsp.errors import InvalidChannel, UnpairablePairing
from djrsp.qudit import ComplexArray, UnitaryOp


ONE_SITE = ("i",)
TWO_SITES = ("i", "j")

Pairing = tuple[tuple[int, int], ...]


############################################################
#### Channel ###############################################
############################################################


@dataclass(frozen=True)
class ChannelSpec:
    """The shared entangled resource Σ_k a_k |kk⟩ between Alice and Bob. Coefficients are real
    and positive, and a_0 must be the smallest of them.
    """

    coefficients: tuple[float, ...]

    def __post_init__(self) -> None:
        coefficients = tuple(float(value) for value in self.coefficients)
        object.__setattr__(self, "coefficients", coefficients)

        if len(coefficients) < 2:
            raise InvalidChannel(
                f"A channel needs at least two coefficients, got {list(coefficients)}"
            )

        if any(not math.isfinite(value) or value <= 0.0 for value in coefficients):
            raise InvalidChannel(
                f"Channel coefficients must be positive real numbers, got {list(coefficients)}"
            )

        total = math.fsum(value**2 for value in coefficients)
        if abs(total - 1.0) > DEFAULT_TOLERANCES.normalization:
            raise InvalidChannel(
                f"Channel coefficients must satisfy Σ a_k² = 1, got {total!r} for "
                f"{list(coefficients)}"
            )

        # Equality is allowed, it is the maximally entangled channel
        a_0 = coefficients[0]
        for k, a_k in enumerate(coefficients[1:], start=1):
            if a_0 > a_k + DEFAULT_TOLERANCES.coefficient_order:
                raise InvalidChannel(
                    f"a_0 = {a_0!r} exceeds a_{k} = {a_k!r}; a_0 must be the smallest "
                    "coefficient so that √(a_k² - a_0²) is real"
                )

    @classmethod
    def qubit(cls, alpha: float) -> "ChannelSpec":
        """The two-qubit channel α|00⟩ + β|11⟩ with β = √(1 - α²)"""
        if not 0.0 < alpha <= math.sqrt(0.5):
            raise InvalidChannel(f"α must lie in (0, 1/√2] for a valid channel, got {alpha!r}")
        return cls((alpha, math.sqrt(1.0 - alpha**2)))

    @classmethod
    def proportional(cls, weights: Sequence[float]) -> "ChannelSpec":
        """Normalizes the given weights into channel coefficients"""
        norm = math.sqrt(math.fsum(float(weight) ** 2 for weight in weights))
        if norm == 0.0:
            raise InvalidChannel("Channel weights must not all be zero")
        return cls(tuple(float(weight) / norm for weight in weights))

    @classmethod
    def uniform(cls, d: int) -> "ChannelSpec":
        """The maximally entangled channel, all a_k = 1/√d"""
        return cls((1.0 / math.sqrt(d),) * d)

    @property
    def d(self) -> int:
        return len(self.coefficients)

    @property
    def is_maximally_entangled(self) -> bool:
        a_0 = self.coefficients[0]
        return all(
            abs(a_k - a_0) <= DEFAULT_TOLERANCES.coefficient_order for a_k in self.coefficients
        )


############################################################
#### General-d gates #######################################
############################################################


def hadamard(d: int) -> UnitaryOp:
    """Generalized Hadamard (discrete Fourier) gate, entry (r, k) = e^{2πikr/d}/√d"""
    indices = np.arange(d)
    matrix = np.exp(2j * np.pi * np.outer(indices, indices) / d) / math.sqrt(d)
    return UnitaryOp(ONE_SITE, matrix, "H")


def bob_phase(d: int) -> UnitaryOp:
    """Bob's phase gate, the inverse of `hadamard`: entry (r, k) = e^{-2πikr/d}/√d"""
    indices = np.arange(d)
    matrix = np.exp(-2j * np.pi * np.outer(indices, indices) / d) / math.sqrt(d)
    return UnitaryOp(ONE_SITE, matrix, "P_B")


def phase_pair(d: int) -> UnitaryOp:
    """Two-site diagonal phase gate with entry e^{-2πikr/d} on |r, k⟩"""
    indices = np.arange(d)
    diagonal = np.exp(-2j * np.pi * np.outer(indices, indices) / d).reshape(-1)
    return UnitaryOp(TWO_SITES, np.diag(diagonal), "P")


def _permutation(
    dimensions: tuple[int, int], mapping: dict[tuple[int, int], tuple[int, int]]
) -> ComplexArray:
    """Builds the permutation matrix sending |source⟩ to |mapping[source]⟩"""
    size = dimensions[0] * dimensions[1]
    matrix = np.zeros((size, size), dtype=np.complex128)
    for source, destination in mapping.items():
        matrix[
            np.ravel_multi_index(destination, dimensions), np.ravel_multi_index(source, dimensions)
        ] = 1.0
    return matrix


def cnot(d: int, target_dimension: int | None = None) -> UnitaryOp:
    """Generalized C-NOT: control value r shifts the target by r.

    When the target has a different dimension (the two-level flag register), any nonzero control
    shifts it by one instead.
    """
    target = d if target_dimension is None else target_dimension
    mapping: dict[tuple[int, int], tuple[int, int]] = {}
    for r in range(d):
        for k in range(target):
            shift = r if target == d else int(r != 0)
            mapping[(r, k)] = (r, (k + shift) % target)

    name = "CNOT" if target_dimension is None else "CNOT_flag"
    return UnitaryOp(TWO_SITES, _permutation((d, target), mapping), name)


def cnot_primed(d: int, shift: int = 1) -> UnitaryOp:
    """C-NOT that acts only when the control is |0⟩, shifting the target by `shift`"""
    mapping: dict[tuple[int, int], tuple[int, int]] = {}
    for r in range(d):
        for k in range(d):
            mapping[(r, k)] = (r, (k + shift) % d if r == 0 else k)
    return UnitaryOp(TWO_SITES, _permutation((d, d), mapping), "CNOT'")


def level_pairing(
    d: int, shift: int = 1, pairing: Sequence[Sequence[int]] | None = None
) -> Pairing:
    """The disjoint pairs of A-levels rotated by `controlled_u`.

    An explicit pairing is validated and returned. Otherwise the pairs (r, r ⊕ s) are used, which
    only partition the levels when d is even and s = d/2 (d = 2, s = 1 included).
    """
    if pairing is not None:
        if any(len(pair) != 2 for pair in pairing):
            raise UnpairablePairing(f"Every entry of a pairing must be a pair, got {list(pairing)}")

        pairs = tuple((int(pair[0]), int(pair[1])) for pair in pairing)
        used: list[int] = []
        for pair in pairs:
            if pair[0] == pair[1]:
                raise UnpairablePairing(f"Pair {pair} must name two distinct levels")
            used.extend(pair)

        if any(level < 0 or level >= d for level in used):
            raise UnpairablePairing(f"Pairing {list(pairs)} names levels outside 0..{d - 1}")
        if len(set(used)) != len(used):
            raise UnpairablePairing(f"Pairing {list(pairs)} uses a level more than once")
        return pairs

    if d % 2 != 0 or 2 * shift != d:
        raise UnpairablePairing(
            f"The pairs (r, r ⊕ {shift}) do not partition the {d} levels into disjoint "
            "two-level rotations; this needs an even d with shift d/2, or an explicit pairing"
        )
    return tuple((r, r + shift) for r in range(shift))


def controlled_u(
    channel: ChannelSpec, shift: int = 1, pairing: Sequence[Sequence[int]] | None = None
) -> UnitaryOp:
    """Controlled-U on (A, B). For each B value k, rotates every pair of A levels (r, r') by the
    angle with cosine a_0/a_k:

        |r k⟩  → c|r k⟩ + s|r' k⟩
        |r' k⟩ → c|r' k⟩ - s|r k⟩

    Levels outside the pairing are left unchanged.
    """
    d = channel.d
    pairs = level_pairing(d, shift, pairing)
    a_0 = channel.coefficients[0]

    matrix = np.eye(d * d, dtype=np.complex128)
    for k, a_k in enumerate(channel.coefficients):
        cosine = a_0 / a_k
        sine = math.sqrt(max(0.0, 1.0 - cosine**2))
        for r, r_paired in pairs:
            low, high = r * d + k, r_paired * d + k
            matrix[low, low] = cosine
            matrix[high, high] = cosine
            matrix[high, low] = sine
            matrix[low, high] = -sine

    return UnitaryOp(TWO_SITES, matrix, "CU")


def charlie_phase(phases: Sequence[float]) -> UnitaryOp:
    """Charlie's diagonal phase gate with entry e^{2i(θ_r - θ_0)} on |r⟩"""
    thetas = np.asarray(phases, dtype=np.float64)
    diagonal = np.exp(2j * (thetas - thetas[0]))
    return UnitaryOp(ONE_SITE, np.diag(diagonal), "P(theta)")


############################################################
#### Weyl-Heisenberg corrections ###########################
############################################################


def shift_operator(d: int) -> ComplexArray:
    """X|k⟩ = |k ⊕ 1⟩"""
    return np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)


def clock_operator(d: int) -> ComplexArray:
    """Z|k⟩ = e^{2πik/d}|k⟩"""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def weyl_label(a: int, b: int) -> str:
    """Names X^a Z^b, e.g. "I", "X", "XZ" or "X^2Z" """
    if a == 0 and b == 0:
        return "I"

    def power(symbol: str, exponent: int) -> str:
        if exponent == 0:
            return ""
        return symbol if exponent == 1 else f"{symbol}^{exponent}"

    return power("X", a) + power("Z", b)


def weyl(d: int, a: int, b: int) -> UnitaryOp:
    """The Weyl operator X^a Z^b"""
    matrix = np.linalg.matrix_power(shift_operator(d), a) @ np.linalg.matrix_power(
        clock_operator(d), b
    )
    return UnitaryOp(ONE_SITE, matrix, weyl_label(a, b))


@lru_cache(maxsize=None)
def _weyl_family(d: int) -> tuple[UnitaryOp, ...]:
    return tuple(weyl(d, a, b) for a in range(d) for b in range(d))


def weyl_corrections(d: int) -> list[UnitaryOp]:
    """All d² operators X^a Z^b in lexicographic (a, b) order"""
    return list(_weyl_family(d))


def equal_up_to_phase(
    first: npt.ArrayLike, second: npt.ArrayLike, atol: float = DEFAULT_TOLERANCES.phase_agreement
) -> bool:
    """Whether two matrices of the same shape differ only by a global phase"""
    left = np.asarray(first, dtype=np.complex128)
    right = np.asarray(second, dtype=np.complex128)
    if left.shape != right.shape:
        return False

    overlap = np.vdot(left, right)
    if abs(overlap) < atol:
        return False
    phase = overlap / abs(overlap)
    return bool(np.allclose(left * phase, right, atol=atol))


############################################################
#### Literal two-qubit forms ###############################
############################################################


SQRT_HALF = math.sqrt(0.5)

IDENTITY_2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

HADAMARD_2 = SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=np.complex128)
PHASE_PAIR_2 = np.diag([1, 1, 1, -1]).astype(np.complex128)
CNOT_2 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
CNOT_PRIMED_2 = np.array(
    [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=np.complex128
)

QUBIT_CORRECTIONS: dict[str, ComplexArray] = {
    "I": IDENTITY_2,
    "X": PAULI_X,
    "Z": PAULI_Z,
    "iY": 1j * PAULI_Y,
}
"""The corrections named in the two-qubit correction tables"""


def controlled_u_qubit(alpha: float, beta: float) -> ComplexArray:
    """The two-qubit Controlled-U on the basis |00⟩, |01⟩, |10⟩, |11⟩ of (A, B)"""
    ratio = alpha / beta
    sine = math.sqrt(max(0.0, 1.0 - ratio**2))
    return np.array(
        [
            [1, 0, 0, 0],
            [0, ratio, 0, -sine],
            [0, 0, 1, 0],
            [0, sine, 0, ratio],
        ],
        dtype=np.complex128,
    )


def charlie_phase_qubit(theta: float) -> ComplexArray:
    """|0⟩⟨0| + e^{2iθ}|1⟩⟨1|"""
    return np.diag([1.0, np.exp(2j * theta)]).astype(np.complex128)


############################################################
#### Gate specifications ###################################
############################################################


class GateKind(Enum):
    """Every gate family the protocol uses"""

    HADAMARD_D = "H"
    """Generalized Hadamard on one qudit"""

    PHASE_PAIR_D = "P"
    """Two-qudit diagonal phase gate"""

    CNOT_D = "CNOT"
    """Generalized C-NOT, optionally onto the two-level flag"""

    CNOT_PRIMED_D = "CNOT'"
    """C-NOT acting when the control is |0⟩"""

    CONTROLLED_U = "CU"
    """The channel-dependent Controlled-U"""

    CHARLIE_PHASE = "P(theta)"
    """Charlie's phase gate built from the target phases"""

    BOB_PHASE = "P_B"
    """Bob's inverse Fourier gate"""

    PAULI_X = "X"
    PAULI_Y = "Y"
    PAULI_Z = "Z"

    WEYL_X = "WX"
    """The shift operator X"""

    WEYL_Z = "WZ"
    """The clock operator Z"""


@dataclass(frozen=True)
class GateSpec:
    """A gate described by its family and parameters, realized into a matrix on demand"""

    kind: GateKind
    d: int
    shift: int = 1
    channel: ChannelSpec | None = None
    phases: tuple[float, ...] = ()
    target_dimension: int | None = None
    pairing: Pairing | None = None

    @property
    def name(self) -> str:
        """The gate-log name, which tells the flag C-NOT apart from the d-level one"""
        if self.kind is GateKind.CNOT_D and self.target_dimension is not None:
            return "CNOT_flag"
        return self.kind.value

    def realize(self) -> UnitaryOp:
        """Builds the gate from the general-d formulas"""
        match self.kind:
            case GateKind.HADAMARD_D:
                return hadamard(self.d)
            case GateKind.PHASE_PAIR_D:
                return phase_pair(self.d)
            case GateKind.CNOT_D:
                return cnot(self.d, self.target_dimension)
            case GateKind.CNOT_PRIMED_D:
                return cnot_primed(self.d, self.shift)
            case GateKind.CONTROLLED_U:
                if self.channel is None:
                    raise InvalidChannel("A Controlled-U gate needs a channel")
                return controlled_u(self.channel, self.shift, self.pairing)
            case GateKind.CHARLIE_PHASE:
                return charlie_phase(self.phases)
            case GateKind.BOB_PHASE:
                return bob_phase(self.d)
            case GateKind.PAULI_X:
                return UnitaryOp(ONE_SITE, PAULI_X, "X")
            case GateKind.PAULI_Y:
                return UnitaryOp(ONE_SITE, PAULI_Y, "Y")
            case GateKind.PAULI_Z:
                return UnitaryOp(ONE_SITE, PAULI_Z, "Z")
            case GateKind.WEYL_X:
                return weyl(self.d, 1, 0)
            case GateKind.WEYL_Z:
                return weyl(self.d, 0, 1)
