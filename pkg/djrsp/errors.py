"""Exceptions raised by the simulator, the gate constructors, the protocol engines and the
harness. Bad inputs derive from `ValueError`, failures of a protocol state from `RuntimeError`.
"""


class DJRSPError(Exception):
    """Base class for every error raised by this package"""


############################################################
#### Register and state errors #############################
############################################################


class UnknownSite(DJRSPError, ValueError):
    """A site label is not part of the register layout"""


class InvalidLayout(DJRSPError, ValueError):
    """A register layout has a repeated label or a site of dimension below two"""


class UnnormalizedState(DJRSPError, ValueError):
    """A state vector does not have unit norm"""


class DimensionMismatch(DJRSPError, ValueError):
    """A matrix or vector does not match the dimension of the sites it acts on"""


class NonUnitaryMatrix(DJRSPError, ValueError):
    """A gate matrix fails the unitarity check"""


class NonOrthonormalBasis(DJRSPError, ValueError):
    """A measurement basis fails the orthonormality check"""


class ResidualEntanglement(DJRSPError, RuntimeError):
    """A site is still entangled with the rest of the register, so it has no pure state"""

    def __init__(self, site: str, purity: float) -> None:
        super().__init__(
            f"Site {site} is entangled with the rest of the register (reduced-state purity "
            f"{purity:.12f}), so its fidelity against a pure reference is undefined"
        )
        self.site = site
        self.purity = purity


############################################################
#### Protocol input errors #################################
############################################################


class InvalidChannel(DJRSPError, ValueError):
    """The channel coefficients are not normalized, not positive or a_0 is not minimal"""


class InvalidTarget(DJRSPError, ValueError):
    """The target magnitudes or phases are malformed"""


class InvalidConfig(DJRSPError, ValueError):
    """A protocol configuration combines incompatible settings"""


class UnpairablePairing(DJRSPError, ValueError):
    """The Controlled-U level pairing does not form disjoint two-level rotations"""


class BasisNotRealizable(DJRSPError, ValueError):
    """No supported construction yields the amplitude basis for these magnitudes"""


class NoCorrectionFound(DJRSPError, RuntimeError):
    """No Weyl operator maps Bob's state onto the target"""

    def __init__(self, best_fidelity: float) -> None:
        super().__init__(
            f"No Weyl correction reaches the target; the best achievable fidelity is "
            f"{best_fidelity:.12f}"
        )
        self.best_fidelity = best_fidelity


############################################################
#### Harness errors ########################################
############################################################


class InvalidRequest(DJRSPError, ValueError):
    """A harness request is malformed"""


class IoFailure(DJRSPError, RuntimeError):
    """A report could not be written"""
