"""A qudit state-vector simulator and verification harness for deterministic joint remote state
preparation over non-maximally entangled channels.

Two senders prepare a known state at a receiver: Alice knows the magnitudes of the target's
coefficients and Charlie knows their phases. The simulator runs every measurement branch of the
protocol and checks that the receiver ends up holding the target on each one.
"""

__version__ = "0.1.0"
