"""The target state, its split between the two senders, and the two measurement bases the
senders use to transfer their share of it.
"""

# Core dependencies
from dataclasses import dataclass
import math
from typing import Sequence

# Package dependencies
import numpy as np
import numpy.typing as npt

# Project dependencies
from djrsp.config import DEFAULT_TOLERANCES, Tolerances
from djrsp.errors import BasisNotRealizable, InvalidTarget
from djrsp.qudit import ComplexArray, MeasurementBasis, normalize_rows


############################################################
#### Target and shares #####################################
############################################################


def _check_magnitudes(magnitudes: tuple[float, ...]) -> None:
    if len(magnitudes) < 2:
        raise InvalidTarget(f"A target needs at least two coefficients, got {list(magnitudes)}")

    if any(not math.isfinite(value) or value < 0.0 for value in magnitudes):
        raise InvalidTarget(f"Magnitudes must be non-negative, got {list(magnitudes)}")

    total = math.fsum(value**2 for value in magnitudes)
    if abs(total - 1.0) > DEFAULT_TOLERANCES.normalization:
        raise InvalidTarget(
            f"Target magnitudes must satisfy Σ |x_k|² = 1, got {total!r} for {list(magnitudes)}"
        )


def _check_phases(phases: tuple[float, ...]) -> None:
    if any(not math.isfinite(value) for value in phases):
        raise InvalidTarget(f"Phases must be finite, got {list(phases)}")

    if phases and phases[0] != 0.0:
        raise InvalidTarget(
            f"The global phase is fixed by θ_0 = 0, got θ_0 = {phases[0]!r}. Subtract θ_0 from "
            "every phase or build the target with `TargetState.from_amplitudes`"
        )


@dataclass(frozen=True)
class AmplitudeShare:
    """Alice's knowledge of the target: the magnitudes |x_k|"""

    magnitudes: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "magnitudes", tuple(float(value) for value in self.magnitudes))
        _check_magnitudes(self.magnitudes)

    @property
    def d(self) -> int:
        return len(self.magnitudes)

    @property
    def is_equatorial(self) -> bool:
        """Whether every magnitude equals 1/√d"""
        uniform = 1.0 / math.sqrt(self.d)
        return all(
            abs(value - uniform) <= DEFAULT_TOLERANCES.overlap for value in self.magnitudes
        )


@dataclass(frozen=True)
class PhaseShare:
    """Charlie's knowledge of the target: the phases θ_k, with θ_0 = 0"""

    phases: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "phases", tuple(float(value) for value in self.phases))
        if len(self.phases) < 2:
            raise InvalidTarget(f"A target needs at least two phases, got {list(self.phases)}")
        _check_phases(self.phases)

    @property
    def d(self) -> int:
        return len(self.phases)


@dataclass(frozen=True)
class TargetState:
    """The state Σ_k |x_k| e^{iθ_k} |k⟩ to be prepared at Bob's register"""

    magnitudes: tuple[float, ...]
    phases: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "magnitudes", tuple(float(value) for value in self.magnitudes))
        object.__setattr__(self, "phases", tuple(float(value) for value in self.phases))

        if len(self.magnitudes) != len(self.phases):
            raise InvalidTarget(
                f"Got {len(self.magnitudes)} magnitudes but {len(self.phases)} phases"
            )
        _check_magnitudes(self.magnitudes)
        _check_phases(self.phases)

    @classmethod
    def qubit(cls, x_0: float, theta: float) -> "TargetState":
        """The two-level target x_0|0⟩ + |x_1| e^{iθ}|1⟩ with real x_0"""
        if not 0.0 <= x_0 <= 1.0:
            raise InvalidTarget(f"x_0 must lie in [0, 1], got {x_0!r}")
        return cls((x_0, math.sqrt(1.0 - x_0**2)), (0.0, theta))

    @classmethod
    def from_amplitudes(cls, amplitudes: npt.ArrayLike) -> "TargetState":
        """Normalizes a complex vector and removes its global phase so that θ_0 = 0. If x_0 is
        zero the remaining phases are kept as given.
        """
        vector = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            raise InvalidTarget("The zero vector is not a valid target")

        vector = vector / norm
        reference = float(np.angle(vector[0])) if abs(vector[0]) > 0.0 else 0.0
        phases = np.where(np.abs(vector) > 0.0, np.angle(vector) - reference, 0.0)
        phases[0] = 0.0
        return cls(tuple(np.abs(vector).tolist()), tuple(np.mod(phases, 2 * np.pi).tolist()))

    @classmethod
    def random(cls, d: int, rng: np.random.Generator, equatorial: bool = False) -> "TargetState":
        """Draws a Haar-random target, or a random-phase target with equal magnitudes"""
        phases = rng.uniform(0.0, 2 * np.pi, size=d)
        phases[0] = 0.0

        if equatorial:
            magnitudes = np.full(d, 1.0 / math.sqrt(d))
        else:
            gaussian = rng.normal(size=d) + 1j * rng.normal(size=d)
            magnitudes = np.abs(gaussian) / float(np.linalg.norm(gaussian))

        return cls(tuple(magnitudes.tolist()), tuple(phases.tolist()))

    @property
    def d(self) -> int:
        return len(self.magnitudes)

    @property
    def amplitude_share(self) -> AmplitudeShare:
        return AmplitudeShare(self.magnitudes)

    @property
    def phase_share(self) -> PhaseShare:
        return PhaseShare(self.phases)

    def describe(self) -> str:
        """The `magnitudes@phases` text accepted on the command line"""
        magnitudes = ",".join(repr(value) for value in self.magnitudes)
        phases = ",".join(repr(value) for value in self.phases)
        return f"{magnitudes}@{phases}"


def target_vector(target: TargetState) -> ComplexArray:
    """The target as a unit vector with entries |x_k| e^{iθ_k}"""
    magnitudes = np.asarray(target.magnitudes, dtype=np.float64)
    phases = np.asarray(target.phases, dtype=np.float64)
    return (magnitudes * np.exp(1j * phases)).astype(np.complex128)


############################################################
#### Measurement bases #####################################
############################################################


def _quaternion_design(magnitudes: Sequence[float]) -> ComplexArray:
    """The real 4x4 orthogonal design. Every row is orthogonal to the others for any entries."""
    x_0, x_1, x_2, x_3 = magnitudes
    return np.array(
        [
            [x_0, x_1, x_2, x_3],
            [x_1, -x_0, x_3, -x_2],
            [x_2, -x_3, -x_0, x_1],
            [x_3, x_2, -x_1, -x_0],
        ],
        dtype=np.complex128,
    )


def mu_basis(
    share: AmplitudeShare, site: str = "A", tolerances: Tolerances = DEFAULT_TOLERANCES
) -> MeasurementBasis:
    """Alice's amplitude basis {|μ_p⟩}. Its overlaps with the computational basis carry the
    target magnitudes, see `expected_overlaps`.

    Constructions are tried in order: the two-level rotation basis, the Fourier basis for
    equatorial magnitudes, then the four-level orthogonal design. Anything else has no supported
    construction and raises `BasisNotRealizable`.
    """
    d = share.d
    magnitudes = share.magnitudes

    if d == 2:
        x_0, x_1 = magnitudes
        rows = np.array([[x_0, x_1], [x_1, -x_0]], dtype=np.complex128)
    elif share.is_equatorial:
        indices = np.arange(d)
        rows = np.exp(-2j * np.pi * np.outer(indices, indices) / d) / math.sqrt(d)
    elif d == 4:
        rows = _quaternion_design(magnitudes)
    else:
        raise BasisNotRealizable(
            f"No orthonormal basis with overlaps |x_(k+p) mod {d}| is known for d = {d} and "
            f"magnitudes {list(magnitudes)}; only d = 2, d = 4 and equatorial magnitudes are "
            "supported"
        )

    return MeasurementBasis(site, normalize_rows(rows), "mu", tolerances=tolerances)


def expected_overlaps(share: AmplitudeShare) -> npt.NDArray[np.float64]:
    """The overlap magnitudes |⟨μ_p|k⟩| (row p, column k) that `mu_basis` certifies: cyclic
    |x_(k+p) mod d| for two levels and equatorial magnitudes, |x_(k XOR p)| for the four-level
    orthogonal design
    """
    d = share.d
    magnitudes = np.asarray(share.magnitudes, dtype=np.float64)
    p, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")

    if d == 4 and not share.is_equatorial:
        return magnitudes[np.bitwise_xor(p, k)]
    return magnitudes[(k + p) % d]


def nu_basis(
    share: PhaseShare, site: str = "e", tolerances: Tolerances = DEFAULT_TOLERANCES
) -> MeasurementBasis:
    """Charlie's phase basis, |ν_q⟩ = (1/√d) Σ_r e^{i(θ_r + 2πrq/d)} |r⟩"""
    d = share.d
    phases = np.asarray(share.phases, dtype=np.float64)
    r, q = np.meshgrid(np.arange(d), np.arange(d), indexing="xy")
    rows = np.exp(1j * (phases[r] + 2 * np.pi * r * q / d)) / math.sqrt(d)
    return MeasurementBasis(site, normalize_rows(rows), "nu", tolerances=tolerances)
