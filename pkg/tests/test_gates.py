# Core dependencies
import math

# Package dependencies
import numpy as np
import pytest

# Project dependencies
from djrsp.errors import InvalidChannel, UnpairablePairing
from djrsp.gates import (
    CNOT_2,
    CNOT_PRIMED_2,
    HADAMARD_2,
    PHASE_PAIR_2,
    QUBIT_CORRECTIONS,
    ChannelSpec,
    GateKind,
    GateSpec,
    bob_phase,
    charlie_phase,
    charlie_phase_qubit,
    clock_operator,
    cnot,
    cnot_primed,
    controlled_u,
    controlled_u_qubit,
    equal_up_to_phase,
    hadamard,
    level_pairing,
    phase_pair,
    shift_operator,
    weyl,
    weyl_corrections,
    weyl_label,
)
from djrsp.qudit import UnitaryOp, unitarity_defect


############################################################
#### Channels ##############################################
############################################################


@pytest.mark.parametrize(
    "coefficients",
    [
        (1.0,),
        (0.6, 0.6),
        (0.8, 0.6),
        (-0.6, 0.8),
        (0.0, 1.0),
        (math.nan, 1.0),
    ],
)
def test_invalid_channels(coefficients: tuple[float, ...]) -> None:
    with pytest.raises(InvalidChannel):
        ChannelSpec(coefficients)


def test_channel_constructors() -> None:
    qubit = ChannelSpec.qubit(0.6)
    assert qubit.coefficients == pytest.approx((0.6, 0.8))
    assert not qubit.is_maximally_entangled

    assert ChannelSpec.uniform(3).is_maximally_entangled
    assert ChannelSpec.qubit(math.sqrt(0.5)).is_maximally_entangled

    proportional = ChannelSpec.proportional([1, 2, 3])
    assert proportional.d == 3
    assert proportional.coefficients[0] == pytest.approx(1 / math.sqrt(14))

    with pytest.raises(InvalidChannel):
        ChannelSpec.qubit(0.8)


############################################################
#### General-d gates #######################################
############################################################


def _general_gates(d: int) -> list[UnitaryOp]:
    channel = ChannelSpec.proportional([k + 1 for k in range(d)])
    pairing = tuple((r, r + 1) for r in range(0, d - 1, 2))
    rng = np.random.default_rng(d)
    return [
        hadamard(d),
        bob_phase(d),
        phase_pair(d),
        cnot(d),
        cnot(d, target_dimension=2),
        *(cnot_primed(d, shift) for shift in range(1, d)),
        controlled_u(channel, pairing=pairing),
        charlie_phase(np.concatenate([[0.0], rng.uniform(0, 2 * np.pi, d - 1)])),
        *weyl_corrections(d),
    ]


@pytest.mark.parametrize("d", range(2, 9))
def test_every_gate_is_unitary(d: int) -> None:
    for gate in _general_gates(d):
        assert unitarity_defect(gate.matrix) < 1e-12, gate.name


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_bob_phase_undoes_hadamard(d: int) -> None:
    np.testing.assert_allclose(bob_phase(d).matrix @ hadamard(d).matrix, np.eye(d), atol=1e-12)


def test_general_gates_reduce_to_the_qubit_matrices() -> None:
    np.testing.assert_allclose(hadamard(2).matrix, HADAMARD_2, atol=1e-15)
    np.testing.assert_allclose(bob_phase(2).matrix, HADAMARD_2, atol=1e-15)
    np.testing.assert_allclose(phase_pair(2).matrix, PHASE_PAIR_2, atol=1e-15)
    np.testing.assert_allclose(cnot(2).matrix, CNOT_2)
    np.testing.assert_allclose(cnot(2, target_dimension=2).matrix, CNOT_2)
    np.testing.assert_allclose(cnot_primed(2).matrix, CNOT_PRIMED_2)
    np.testing.assert_allclose(
        controlled_u(ChannelSpec.qubit(0.6)).matrix, controlled_u_qubit(0.6, 0.8), atol=1e-15
    )
    np.testing.assert_allclose(charlie_phase((0.0, 1.0)).matrix, charlie_phase_qubit(1.0))


def test_qubit_controlled_u_entries() -> None:
    matrix = controlled_u_qubit(0.6, 0.8)

    assert matrix[1, 1] == pytest.approx(0.75)
    assert matrix[3, 3] == pytest.approx(0.75)
    assert matrix[3, 1] == pytest.approx(0.661438, abs=1e-6)
    assert matrix[1, 3] == pytest.approx(-0.661438, abs=1e-6)
    np.testing.assert_allclose(matrix[[0, 2]][:, [0, 2]], np.eye(2))


def test_cnot_adds_the_control() -> None:
    matrix = cnot(3).matrix

    # |1, 2⟩ → |1, 0⟩
    assert matrix[3, 5] == 1.0
    assert cnot(3).name == "CNOT"


def test_flag_cnot_marks_any_nonzero_control() -> None:
    gate = cnot(3, target_dimension=2)

    assert gate.name == "CNOT_flag"
    assert gate.dimension == 6
    assert cnot(2, target_dimension=2).name == "CNOT_flag"
    assert gate.matrix[1, 0] == 0.0
    assert gate.matrix[0, 0] == 1.0
    # |2, 0⟩ → |2, 1⟩
    assert gate.matrix[5, 4] == 1.0


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_cnot_twice_shifts_by_twice_the_control(d: int) -> None:
    twice = cnot(d).matrix @ cnot(d).matrix

    for r in range(d):
        for k in range(d):
            expected = np.zeros(d * d)
            expected[r * d + (k + 2 * r) % d] = 1.0
            np.testing.assert_array_equal(twice[:, r * d + k], expected)


def test_primed_cnot_acts_on_control_zero() -> None:
    matrix = cnot_primed(3, shift=2).matrix

    # |0, 1⟩ → |0, 0⟩ and |1, 1⟩ is left alone
    assert matrix[0, 1] == 1.0
    assert matrix[4, 4] == 1.0


def test_phase_pair_diagonal() -> None:
    diagonal = np.diag(phase_pair(3).matrix)

    assert diagonal[1 * 3 + 2] == pytest.approx(np.exp(-4j * np.pi / 3))
    assert diagonal[2 * 3 + 0] == pytest.approx(1.0)


def test_charlie_phase_is_relative_to_the_first_level() -> None:
    np.testing.assert_allclose(
        np.diag(charlie_phase((0.5, 1.0, 2.0)).matrix), np.exp(2j * np.array([0.0, 0.5, 1.5]))
    )


@pytest.mark.parametrize("d", range(2, 9))
def test_charlie_phase_has_unit_modulus_entries(d: int) -> None:
    rng = np.random.default_rng(d)
    for _ in range(20):
        matrix = charlie_phase(rng.uniform(0, 2 * np.pi, d)).matrix

        np.testing.assert_allclose(np.abs(np.diag(matrix)), np.ones(d), atol=1e-15)
        np.testing.assert_array_equal(matrix - np.diag(np.diag(matrix)), np.zeros((d, d)))


############################################################
#### Controlled-U pairing ##################################
############################################################


def test_shift_pairing() -> None:
    assert level_pairing(2, 1) == ((0, 1),)
    assert level_pairing(4, 2) == ((0, 2), (1, 3))


@pytest.mark.parametrize("d, shift", [(3, 1), (4, 1), (5, 2)])
def test_shift_pairing_needs_half_the_dimension(d: int, shift: int) -> None:
    with pytest.raises(UnpairablePairing):
        level_pairing(d, shift)


@pytest.mark.parametrize(
    "pairing",
    [
        ((0, 0),),
        ((0, 1), (1, 2)),
        ((0, 3),),
        ((0, 1, 2),),
    ],
)
def test_invalid_explicit_pairings(pairing: tuple[tuple[int, ...], ...]) -> None:
    with pytest.raises(UnpairablePairing):
        level_pairing(3, pairing=pairing)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_controlled_u_is_the_identity_on_a_uniform_channel(d: int) -> None:
    pairing = tuple((r, r + 1) for r in range(0, d - 1, 2))
    matrix = controlled_u(ChannelSpec.uniform(d), pairing=pairing).matrix

    np.testing.assert_allclose(matrix, np.eye(d * d), atol=1e-15)


def test_unpaired_levels_are_left_alone() -> None:
    channel = ChannelSpec.proportional([1, 2, 3])
    matrix = controlled_u(channel, pairing=((0, 1),)).matrix

    for k in range(3):
        row = 2 * 3 + k
        assert matrix[row, row] == 1.0
        assert np.count_nonzero(matrix[row]) == 1

    cosine = channel.coefficients[0] / channel.coefficients[2]
    assert matrix[2, 2] == pytest.approx(cosine)
    assert matrix[1 * 3 + 2, 2] == pytest.approx(math.sqrt(1 - cosine**2))


############################################################
#### Weyl corrections ######################################
############################################################


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_weyl_family_is_orthogonal(d: int) -> None:
    family = weyl_corrections(d)
    assert len(family) == d * d

    for i, first in enumerate(family):
        for j, second in enumerate(family):
            overlap = abs(np.trace(first.matrix.conj().T @ second.matrix))
            assert overlap == pytest.approx(d if i == j else 0.0, abs=1e-9)


def test_shift_and_clock() -> None:
    np.testing.assert_allclose(shift_operator(3) @ np.eye(3)[0], np.eye(3)[1])
    np.testing.assert_allclose(shift_operator(3) @ np.eye(3)[2], np.eye(3)[0])
    np.testing.assert_allclose(np.diag(clock_operator(4)), [1, 1j, -1, -1j], atol=1e-15)


def test_weyl_labels() -> None:
    assert weyl_label(0, 0) == "I"
    assert weyl_label(1, 0) == "X"
    assert weyl_label(0, 1) == "Z"
    assert weyl_label(1, 1) == "XZ"
    assert weyl_label(2, 1) == "X^2Z"
    assert [gate.name for gate in weyl_corrections(2)] == ["I", "Z", "X", "XZ"]


def test_qubit_weyl_family_is_the_pauli_group() -> None:
    for label, matrix in QUBIT_CORRECTIONS.items():
        assert any(equal_up_to_phase(gate.matrix, matrix) for gate in weyl_corrections(2)), label

    assert equal_up_to_phase(weyl(2, 1, 1).matrix, QUBIT_CORRECTIONS["iY"])


def test_equal_up_to_phase() -> None:
    x = QUBIT_CORRECTIONS["X"]

    assert equal_up_to_phase(x, -1j * x)
    assert not equal_up_to_phase(x, QUBIT_CORRECTIONS["Z"])
    assert not equal_up_to_phase(x, np.eye(3))


############################################################
#### Gate specifications ###################################
############################################################


@pytest.mark.parametrize(
    "kind, name",
    [
        (GateKind.HADAMARD_D, "H"),
        (GateKind.PHASE_PAIR_D, "P"),
        (GateKind.CNOT_D, "CNOT"),
        (GateKind.CNOT_PRIMED_D, "CNOT'"),
        (GateKind.BOB_PHASE, "P_B"),
        (GateKind.PAULI_X, "X"),
        (GateKind.PAULI_Y, "Y"),
        (GateKind.PAULI_Z, "Z"),
        (GateKind.WEYL_X, "X"),
        (GateKind.WEYL_Z, "Z"),
    ],
)
def test_gate_specs_realize(kind: GateKind, name: str) -> None:
    assert GateSpec(kind, 2).realize().name == name


def test_gate_spec_names_the_flag_cnot() -> None:
    flag = GateSpec(GateKind.CNOT_D, 2, target_dimension=2)

    assert flag.name == "CNOT_flag"
    assert flag.realize().name == "CNOT_flag"
    assert GateSpec(GateKind.CNOT_D, 2).name == "CNOT"
    assert GateSpec(GateKind.CHARLIE_PHASE, 2).name == "P(theta)"


def test_gate_spec_with_parameters() -> None:
    channel = ChannelSpec.qubit(0.6)

    gate = GateSpec(GateKind.CONTROLLED_U, 2, channel=channel).realize()
    np.testing.assert_allclose(gate.matrix, controlled_u_qubit(0.6, 0.8), atol=1e-15)

    phase = GateSpec(GateKind.CHARLIE_PHASE, 2, phases=(0.0, 1.0)).realize()
    np.testing.assert_allclose(phase.matrix, charlie_phase_qubit(1.0))

    with pytest.raises(InvalidChannel):
        GateSpec(GateKind.CONTROLLED_U, 2).realize()
