# Core dependencies
import math

# Package dependencies
import numpy as np
import pytest

# Project dependencies
from djrsp.config import Tolerances
from djrsp.errors import (
    DimensionMismatch,
    InvalidLayout,
    NonOrthonormalBasis,
    NonUnitaryMatrix,
    ResidualEntanglement,
    UnknownSite,
    UnnormalizedState,
)
from djrsp.gates import cnot
from djrsp.qudit import (
    BranchRecord,
    MeasurementBasis,
    Outcome,
    Party,
    QuditRegisterLayout,
    Site,
    StateVector,
    UnitaryOp,
    embed_and_apply,
    fidelity,
    fix_global_phase,
    measure_exhaustive,
    reduced_density_matrix,
    site_state,
)


def _layout(*dimensions: int) -> QuditRegisterLayout:
    labels = "abcdefgh"
    return QuditRegisterLayout(
        tuple(Site(labels[i], d, Party.ALICE) for i, d in enumerate(dimensions))
    )


def _random_unitary(rng: np.random.Generator, size: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
    return q


def _random_state(rng: np.random.Generator, layout: QuditRegisterLayout) -> StateVector:
    size = layout.total_dimension
    state, _ = StateVector.normalized(layout, rng.normal(size=size) + 1j * rng.normal(size=size))
    return state


############################################################
#### Layouts ###############################################
############################################################


def test_protocol_layout() -> None:
    layout = QuditRegisterLayout.protocol(3)

    assert layout.labels == ("A", "B", "e", "f", "g")
    assert layout.dimensions == (3, 3, 3, 2, 3)
    assert layout.total_dimension == 162
    assert layout.index("f") == 3
    assert layout.owner("e") is Party.CHARLIE
    assert layout.owned_by(Party.BOB) == ("B", "g")
    assert layout.owned_by(Party.ALICE) == ("A", "f")


def test_unknown_site() -> None:
    with pytest.raises(UnknownSite):
        QuditRegisterLayout.protocol(2).index("C")


@pytest.mark.parametrize(
    "sites",
    [
        (),
        (Site("a", 2, Party.ALICE), Site("a", 3, Party.BOB)),
        (Site("a", 1, Party.ALICE),),
    ],
)
def test_invalid_layouts(sites: tuple[Site, ...]) -> None:
    with pytest.raises(InvalidLayout):
        QuditRegisterLayout(sites)


############################################################
#### States ################################################
############################################################


def test_state_validation() -> None:
    layout = _layout(2, 3)

    with pytest.raises(UnnormalizedState):
        StateVector(layout, np.ones(6))

    with pytest.raises(DimensionMismatch):
        StateVector(layout, np.array([1.0, 0.0]))


def test_state_is_read_only() -> None:
    state = StateVector.basis_state(_layout(2), {"a": 1})

    with pytest.raises(ValueError):
        state.amplitudes[0] = 1.0


def test_normalized_returns_the_factor() -> None:
    state, factor = StateVector.normalized(_layout(2), [3.0, 4.0])

    assert factor == pytest.approx(0.2)
    np.testing.assert_allclose(state.amplitudes, [0.6, 0.8])


def test_basis_state_orders_the_first_site_most_significant() -> None:
    state = StateVector.basis_state(_layout(2, 3), {"a": 1, "b": 2})

    assert state.amplitudes[5] == 1.0
    assert state.amplitude({"a": 1, "b": 2}) == 1.0
    assert state.amplitude({"a": 0, "b": 2}) == 0.0


############################################################
#### Gates #################################################
############################################################


def test_unitary_validation() -> None:
    with pytest.raises(NonUnitaryMatrix):
        UnitaryOp(("i",), np.array([[1.0, 1.0], [0.0, 1.0]]), "shear")

    with pytest.raises(DimensionMismatch):
        UnitaryOp(("i",), np.eye(2)[:, :1], "thin")

    with pytest.raises(DimensionMismatch):
        UnitaryOp(("i", "i"), np.eye(4), "repeated")


def test_gate_must_match_its_sites() -> None:
    state = StateVector.basis_state(_layout(2, 3), {})

    with pytest.raises(DimensionMismatch):
        embed_and_apply(state, UnitaryOp(("i",), np.eye(2)).on("b"))


def test_cnot_with_control_on_the_later_site() -> None:
    state = StateVector.basis_state(_layout(2, 2), {"b": 1})
    result = embed_and_apply(state, cnot(2).on("b", "a"))

    assert result.amplitude({"a": 1, "b": 1}) == pytest.approx(1.0)


def test_flag_cnot_on_mixed_dimensions() -> None:
    layout = _layout(3, 2, 3)
    state = StateVector.basis_state(layout, {"a": 2, "c": 1})
    result = embed_and_apply(state, cnot(3, target_dimension=2).on("a", "b"))

    assert result.amplitude({"a": 2, "b": 1, "c": 1}) == pytest.approx(1.0)


def test_embedding_matches_the_kronecker_product(rng: np.random.Generator) -> None:
    layout = _layout(2, 3)
    state = _random_state(rng, layout)
    matrix = _random_unitary(rng, 2)

    result = embed_and_apply(state, UnitaryOp(("a",), matrix))

    np.testing.assert_allclose(result.amplitudes, np.kron(matrix, np.eye(3)) @ state.amplitudes)


def test_embedding_on_reversed_sites(rng: np.random.Generator) -> None:
    layout = _layout(2, 3)
    state = _random_state(rng, layout)
    matrix = _random_unitary(rng, 6)

    result = embed_and_apply(state, UnitaryOp(("b", "a"), matrix))

    expected = np.einsum("ijkl,lk->ji", matrix.reshape(3, 2, 3, 2), state.tensor())
    np.testing.assert_allclose(result.tensor(), expected, atol=1e-12)


def test_gates_preserve_the_norm(rng: np.random.Generator) -> None:
    layout = _layout(2, 3, 2)
    state = _random_state(rng, layout)

    for _ in range(20):
        state = embed_and_apply(state, UnitaryOp(("c", "a"), _random_unitary(rng, 4)))
        state = embed_and_apply(state, UnitaryOp(("b",), _random_unitary(rng, 3)))

    assert state.norm == pytest.approx(1.0, abs=1e-12)


############################################################
#### Measurements ##########################################
############################################################


def test_non_orthonormal_basis() -> None:
    with pytest.raises(NonOrthonormalBasis):
        MeasurementBasis("a", np.array([[1.0, 0.0], [1.0, 0.0]]))

    with pytest.raises(NonOrthonormalBasis):
        MeasurementBasis("a", np.eye(3)[:2])


def test_outcome_labels() -> None:
    assert str(Outcome("f", 0)) == "f=0"
    assert str(Outcome("A", 1, "mu")) == "A.mu=1"

    record = BranchRecord((Outcome("f", 1), Outcome("A", 0, "mu")), 0.5, None)
    assert record.path_key == "f=1/A.mu=0"


def test_measuring_a_bell_pair() -> None:
    layout = _layout(2, 2)
    bell = StateVector(layout, np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2))

    records = measure_exhaustive(bell, MeasurementBasis.computational("a", 2))

    assert [record.probability for record in records] == pytest.approx([0.5, 0.5])
    for index, record in enumerate(records):
        assert record.outcome_path == (Outcome("a", index),)
        assert record.post_state is not None
        assert abs(record.post_state.amplitude({"a": index, "b": index})) == pytest.approx(1.0)


def test_measuring_in_a_rotated_basis() -> None:
    state = StateVector.basis_state(_layout(2), {})
    plus_minus = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)

    records = measure_exhaustive(state, MeasurementBasis("a", plus_minus, "x"))

    assert [record.probability for record in records] == pytest.approx([0.5, 0.5])
    for vector, record in zip(plus_minus, records):
        assert record.post_state is not None
        np.testing.assert_allclose(record.post_state.amplitudes, vector, atol=1e-12)


def test_impossible_outcomes_are_pruned() -> None:
    state = StateVector.basis_state(_layout(2, 2), {"b": 1})

    kept, pruned = measure_exhaustive(state, MeasurementBasis.computational("a", 2))

    assert not kept.pruned
    assert kept.probability == pytest.approx(1.0)
    assert pruned.pruned
    assert pruned.post_state is None
    assert pruned.probability == 0.0


@pytest.mark.parametrize("site", ["a", "b"])
def test_collapse_is_idempotent(rng: np.random.Generator, site: str) -> None:
    layout = _layout(3, 2)
    state = _random_state(rng, layout)
    dimension = layout.dimension(site)
    basis = MeasurementBasis(site, _random_unitary(rng, dimension).T, "random")

    for record in measure_exhaustive(state, basis):
        assert record.post_state is not None
        again = measure_exhaustive(record.post_state, basis)
        index = record.outcome_path[0].index

        assert again[index].probability == pytest.approx(1.0, abs=1e-12)
        assert again[index].post_state is not None
        np.testing.assert_allclose(
            again[index].post_state.amplitudes, record.post_state.amplitudes, atol=1e-12
        )
        for other in again:
            if other is not again[index]:
                assert other.probability < 1e-12


def test_basis_must_match_the_site() -> None:
    state = StateVector.basis_state(_layout(2, 3), {})

    with pytest.raises(DimensionMismatch):
        measure_exhaustive(state, MeasurementBasis.computational("b", 2))


############################################################
#### Reduced states ########################################
############################################################


def test_site_state_of_a_product() -> None:
    first = np.array([1.0, 1.0j]) / math.sqrt(2)
    second = np.array([0.6j, 0.8])
    state = StateVector(_layout(2, 2), np.kron(first, second))

    np.testing.assert_allclose(site_state(state, "b"), [0.6, -0.8j], atol=1e-12)
    assert fidelity(state, [1.0, 0.0], "b") == pytest.approx(0.36)
    assert fidelity(state, second, "b") == pytest.approx(1.0)


def test_entangled_site_has_no_pure_state() -> None:
    bell = StateVector(_layout(2, 2), np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2))

    np.testing.assert_allclose(reduced_density_matrix(bell, "a"), np.eye(2) / 2)

    with pytest.raises(ResidualEntanglement) as error:
        site_state(bell, "b")
    assert error.value.purity == pytest.approx(0.5)

    with pytest.raises(ResidualEntanglement):
        fidelity(bell, [1.0, 0.0], "a")


def test_fix_global_phase() -> None:
    np.testing.assert_allclose(fix_global_phase([0.0, -1.0j, 1.0]), [0.0, 1.0, 1.0j])
    np.testing.assert_allclose(fix_global_phase([0.0, 0.0]), [0.0, 0.0])


############################################################
#### Tolerances ############################################
############################################################


def test_states_gates_and_bases_carry_their_tolerances() -> None:
    loose = Tolerances(norm=1e-3, unitarity=1e-3, orthonormality=1e-3)
    layout = _layout(2)
    nearly = np.array([1.0 + 1e-6, 0.0])

    with pytest.raises(UnnormalizedState):
        StateVector(layout, nearly)
    state = StateVector(layout, nearly, tolerances=loose)

    with pytest.raises(NonUnitaryMatrix):
        UnitaryOp(("a",), np.eye(2) * (1.0 + 1e-6))
    gate = UnitaryOp(("a",), np.eye(2) * (1.0 + 1e-6), tolerances=loose)
    assert gate.on("b").tolerances is loose

    with pytest.raises(NonOrthonormalBasis):
        MeasurementBasis("a", np.eye(2) * (1.0 + 1e-6))
    MeasurementBasis("a", np.eye(2) * (1.0 + 1e-6), tolerances=loose)

    assert embed_and_apply(state, gate.on("a")).tolerances is loose
    kept, _ = measure_exhaustive(state, MeasurementBasis.computational("a", 2), loose)
    assert kept.post_state is not None
    assert kept.post_state.tolerances is loose
