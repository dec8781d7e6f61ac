# Package dependencies
import numpy as np
import pytest

# Project dependencies
from djrsp.bases import TargetState
from djrsp.gates import ChannelSpec
from djrsp.protocol import ProtocolConfig, ProtocolTranscript, enumerate_branches


ALPHA = 0.6
X_0 = 0.6
THETA = 1.0


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)


@pytest.fixture
def qubit_channel() -> ChannelSpec:
    return ChannelSpec.qubit(ALPHA)


@pytest.fixture
def qubit_target() -> TargetState:
    """A target off every Pauli axis, so each leaf has exactly one Pauli correction"""
    return TargetState.qubit(X_0, THETA)


@pytest.fixture
def qubit_config(qubit_channel: ChannelSpec, qubit_target: TargetState) -> ProtocolConfig:
    return ProtocolConfig(channel=qubit_channel, target=qubit_target)


@pytest.fixture
def qubit_transcript(qubit_config: ProtocolConfig) -> ProtocolTranscript:
    return enumerate_branches(qubit_config)
