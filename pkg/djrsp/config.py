"""Numerical thresholds shared by the simulator, the protocol engines and the harness"""

# Core dependencies
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """All absolute tolerances used by the simulator, the protocol engines and the harness"""

    unitarity: float = 1e-12
    """Maximum entry of |U†U - I| accepted when a gate is constructed"""

    norm: float = 1e-12
    """Maximum deviation of a state vector's Euclidean norm from 1"""

    orthonormality: float = 1e-12
    """Maximum entry of |G - I| for the Gram matrix G of a measurement basis"""

    completeness: float = 1e-12
    """Maximum deviation from 1 of the outcome probabilities of one measurement"""

    probability_floor: float = 1e-14
    """Branches less likely than this are pruned and flagged rather than renormalized"""

    purity: float = 1e-10
    """A reduced single-site state counts as pure when its purity is at least 1 - purity"""

    success: float = 1e-9
    """A leaf succeeds when its post-correction fidelity is at least 1 - success"""

    weyl_orthogonality: float = 1e-9
    """Tolerance on |tr(W_i† W_j)| - d δ_ij for the Weyl correction family"""

    overlap: float = 1e-10
    """Tolerance on the overlap-magnitude property of the amplitude basis"""

    normalization: float = 1e-12
    """Tolerance on the normalization of user-supplied channel and target coefficients"""

    coefficient_order: float = 1e-15
    """Slack when checking that a_0 is the smallest channel coefficient, or that all are equal"""

    zero_amplitude: float = 1e-12
    """Amplitudes at or below this magnitude count as zero when fixing or comparing phases"""

    phase_agreement: float = 1e-9
    """Maximum distance between two unit phases, or two matrices up to a global phase, that
    still counts as equal
    """

    def with_success(self, success: float) -> "Tolerances":
        """Returns a copy with the success-fidelity tolerance replaced"""
        return replace(self, success=success)


DEFAULT_TOLERANCES = Tolerances()
