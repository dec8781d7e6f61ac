# Core dependencies
import math

# Package dependencies
import numpy as np
import pytest

# Project dependencies
from djrsp.bases import (
    AmplitudeShare,
    PhaseShare,
    TargetState,
    expected_overlaps,
    mu_basis,
    nu_basis,
    target_vector,
)
from djrsp.errors import BasisNotRealizable, InvalidTarget


############################################################
#### Targets ###############################################
############################################################


@pytest.mark.parametrize(
    "magnitudes, phases",
    [
        ((0.6, 0.6), (0.0, 0.0)),
        ((0.6, 0.8), (0.3, 1.0)),
        ((0.6, 0.8), (0.0,)),
        ((1.0,), (0.0,)),
        ((-0.6, 0.8), (0.0, 0.0)),
        ((0.6, 0.8), (0.0, math.inf)),
    ],
)
def test_invalid_targets(magnitudes: tuple[float, ...], phases: tuple[float, ...]) -> None:
    with pytest.raises(InvalidTarget):
        TargetState(magnitudes, phases)


def test_qubit_target(qubit_target: TargetState) -> None:
    assert qubit_target.magnitudes == pytest.approx((0.6, 0.8))
    assert qubit_target.phases == (0.0, 1.0)
    assert qubit_target.describe() == "0.6,0.8@0.0,1.0"
    np.testing.assert_allclose(target_vector(qubit_target), [0.6, 0.8 * np.exp(1j)])

    with pytest.raises(InvalidTarget):
        TargetState.qubit(1.2, 0.0)


def test_targets_from_amplitudes() -> None:
    target = TargetState.from_amplitudes([1j, 1j])
    assert target.magnitudes == pytest.approx((math.sqrt(0.5), math.sqrt(0.5)))
    assert target.phases == pytest.approx((0.0, 0.0))

    target = TargetState.from_amplitudes([3.0, -4.0])
    assert target.magnitudes == pytest.approx((0.6, 0.8))
    assert target.phases == pytest.approx((0.0, math.pi))

    with pytest.raises(InvalidTarget):
        TargetState.from_amplitudes([0.0, 0.0])


@pytest.mark.parametrize("equatorial", [False, True])
def test_random_targets(rng: np.random.Generator, equatorial: bool) -> None:
    for d in range(2, 6):
        target = TargetState.random(d, rng, equatorial)

        assert target.d == d
        assert target.phases[0] == 0.0
        assert math.fsum(value**2 for value in target.magnitudes) == pytest.approx(1.0)
        assert target.amplitude_share.is_equatorial == equatorial


def test_shares_split_the_target(qubit_target: TargetState) -> None:
    assert qubit_target.amplitude_share == AmplitudeShare((0.6, 0.8))
    assert qubit_target.phase_share == PhaseShare((0.0, 1.0))

    with pytest.raises(InvalidTarget):
        PhaseShare((0.5, 1.0))

    with pytest.raises(InvalidTarget):
        AmplitudeShare((0.5, 0.5))


############################################################
#### Amplitude basis #######################################
############################################################


@pytest.mark.parametrize(
    "magnitudes",
    [
        (0.6, 0.8),
        (1.0, 0.0),
        (0.5, 0.5, 0.5, 0.5),
        (0.1, 0.3, 0.5, math.sqrt(0.65)),
        (1 / math.sqrt(3),) * 3,
        (1 / math.sqrt(5),) * 5,
    ],
)
def test_amplitude_basis_overlaps(magnitudes: tuple[float, ...]) -> None:
    share = AmplitudeShare(magnitudes)
    basis = mu_basis(share)

    assert basis.site == "A"
    assert basis.name == "mu"
    np.testing.assert_allclose(np.abs(basis.vectors), expected_overlaps(share), atol=1e-10)


@pytest.mark.parametrize("x_0", np.linspace(0.05, 0.95, 19))
def test_qubit_amplitude_basis_closed_form(x_0: float) -> None:
    x_1 = math.sqrt(1.0 - x_0**2)
    basis = mu_basis(AmplitudeShare((x_0, x_1)))

    np.testing.assert_allclose(basis.vectors, [[x_0, x_1], [x_1, -x_0]], atol=1e-15)


def test_four_level_design_uses_xor_overlaps() -> None:
    magnitudes = (0.1, 0.3, 0.5, math.sqrt(0.65))
    overlaps = expected_overlaps(AmplitudeShare(magnitudes))

    assert overlaps[1, 0] == pytest.approx(0.3)
    assert overlaps[2, 1] == pytest.approx(math.sqrt(0.65))
    assert overlaps[3, 1] == pytest.approx(0.5)


@pytest.mark.parametrize(
    "magnitudes",
    [
        (0.6, 0.8, 0.0),
        (0.2, 0.4, 0.4, 0.4, math.sqrt(0.48)),
    ],
)
def test_unsupported_amplitude_bases(magnitudes: tuple[float, ...]) -> None:
    with pytest.raises(BasisNotRealizable):
        mu_basis(AmplitudeShare(magnitudes))


def test_amplitude_basis_rows_start_real() -> None:
    basis = mu_basis(AmplitudeShare((1 / math.sqrt(3),) * 3))

    for row in basis.vectors:
        assert row[0].imag == pytest.approx(0.0)
        assert row[0].real > 0.0


############################################################
#### Phase basis ###########################################
############################################################


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_phase_basis(rng: np.random.Generator, d: int) -> None:
    target = TargetState.random(d, rng)
    phases = np.asarray(target.phases)
    basis = nu_basis(target.phase_share)

    assert basis.site == "e"
    assert basis.name == "nu"
    np.testing.assert_allclose(np.abs(basis.vectors), np.full((d, d), 1 / math.sqrt(d)))
    np.testing.assert_allclose(basis.vectors[0], np.exp(1j * phases) / math.sqrt(d), atol=1e-12)

    # Each vector is the first one shifted by the clock operator
    clock = np.exp(2j * np.pi * np.arange(d) / d)
    np.testing.assert_allclose(basis.vectors[1], basis.vectors[0] * clock, atol=1e-12)


@pytest.mark.parametrize("d", range(2, 9))
def test_phase_basis_is_orthonormal_for_any_phases(d: int) -> None:
    rng = np.random.default_rng(100 + d)
    for _ in range(1000):
        phases = (0.0, *rng.uniform(0, 2 * np.pi, d - 1))
        vectors = nu_basis(PhaseShare(phases)).vectors

        gram = vectors.conj() @ vectors.T
        assert np.max(np.abs(gram - np.eye(d))) < 1e-12
