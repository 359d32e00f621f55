from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qig.algebra import (
    BlockMatrix,
    HermitianElement,
    MatrixAlgebra,
    PositiveFunctional,
    SelfAdjointFunctional,
    diagonal_element,
    diagonal_state,
    eig_herm,
    from_dense,
    mat_exp,
    mat_fn,
    mat_log,
    mat_pow,
    mat_sqrt,
    operator_norm,
    pairing,
    schatten_norm,
    spectral_split,
    support_projection,
    to_dense,
    trace_distance,
)
from qig.errors import DomainError, QigValidationError
from qig.testing.sampling import instance_rng, random_hermitian, random_state

from tests.scenarios.states import MIXED, QUBIT, mixed_element, mixed_state, qubit_state


def test_algebra_rejects_empty_and_nonpositive_blocks():
    with pytest.raises(QigValidationError):
        MatrixAlgebra(())
    with pytest.raises(QigValidationError) as excinfo:
        MatrixAlgebra((2, 0))
    assert excinfo.value.field == "block_dims[1]"


def test_algebra_shape_helpers():
    algebra = MatrixAlgebra((2, 1, 3))
    assert algebra.dim == 6
    assert algebra.offsets() == [0, 2, 3, 6]
    assert not algebra.is_commutative
    assert MatrixAlgebra.diagonal(3).is_commutative
    assert algebra.unit_density().trace == pytest.approx(6.0)


def test_eig_herm_on_diagonal_and_pauli_x():
    spec = eig_herm(HermitianElement(QUBIT, (np.diag([1.0, 2.0]),)))
    np.testing.assert_allclose(spec.eigenvalues[0], [1.0, 2.0])
    np.testing.assert_allclose(np.abs(spec.eigenvectors[0]), np.eye(2))

    pauli_x = HermitianElement(QUBIT, (np.array([[0.0, 1.0], [1.0, 0.0]]),))
    np.testing.assert_allclose(eig_herm(pauli_x).eigenvalues[0], [-1.0, 1.0], atol=1e-15)


def test_eig_herm_reconstructs_random_element():
    rng = instance_rng(11)
    x = random_hermitian(rng, MatrixAlgebra.full(5))
    rebuilt = eig_herm(x).reconstruct()[0]
    assert np.linalg.norm(rebuilt - x.blocks[0]) / np.linalg.norm(x.blocks[0]) < 1e-10


def test_non_hermitian_input_is_rejected():
    with pytest.raises(QigValidationError) as excinfo:
        HermitianElement(QUBIT, (np.array([[0.0, 1.0], [0.0, 0.0]]),))
    assert excinfo.value.field == "blocks[0]"
    with pytest.raises(QigValidationError):
        eig_herm(BlockMatrix(QUBIT, (np.array([[0.0, 1.0], [0.0, 0.0]]),)))


def test_rounding_asymmetry_is_symmetrized_and_recorded():
    block = np.array([[1.0, 0.2 + 1e-14], [0.2, 1.0]])
    x = HermitianElement(QUBIT, (block,))
    assert 0 < x.asymmetry < 1e-12
    np.testing.assert_array_equal(x.blocks[0], x.blocks[0].conj().T)


def test_positive_functional_rejects_negative_eigenvalue():
    with pytest.raises(QigValidationError):
        PositiveFunctional(QUBIT, (np.diag([1.0, -0.1]),))


def test_rounding_negative_eigenvalue_is_clipped():
    rho = PositiveFunctional(QUBIT, (np.diag([1.0, -1e-14]),))
    assert not rho.faithful()
    root = mat_sqrt(rho)
    np.testing.assert_allclose(root.blocks[0], np.diag([1.0, 0.0]), atol=1e-15)


def test_exp_log_inverse_pair():
    rho = qubit_state()
    assert mat_exp(mat_log(rho)).allclose(rho, atol=1e-10)


def test_sqrt_of_diagonal():
    x = HermitianElement(QUBIT, (np.diag([4.0, 9.0]),))
    np.testing.assert_allclose(mat_fn(x, np.sqrt).blocks[0], np.diag([2.0, 3.0]))


def test_power_law_on_random_faithful_state():
    rho = random_state(instance_rng(3), MatrixAlgebra((3, 2)))
    p, q = 3.0, 1.5
    lhs = mat_pow(rho, 1 / (2 * p)) @ mat_pow(rho, 1 / (2 * q))
    rhs = mat_pow(rho, 1 / (2 * p) + 1 / (2 * q))
    assert lhs.allclose(rhs, atol=1e-12)


def test_log_of_non_faithful_state_raises_domain_error():
    rho = PositiveFunctional(QUBIT, (np.diag([1.0, 0.0]),))
    with pytest.raises(DomainError) as excinfo:
        mat_log(rho)
    assert excinfo.value.value == 0.0


def test_functional_calculus_commutes_with_direct_sums():
    x = mixed_element()
    blockwise = mat_fn(x, np.exp)
    dense = to_dense(x)
    lam, u = np.linalg.eigh(dense)
    whole = u @ np.diag(np.exp(lam)) @ u.conj().T
    np.testing.assert_allclose(to_dense(blockwise), whole, atol=1e-12)


def test_pairing_examples():
    rho = mixed_state()
    assert pairing(MIXED.identity(), rho) == pytest.approx(rho.trace)
    assert pairing(mixed_element(), MIXED.zeros(SelfAdjointFunctional)) == 0.0
    assert pairing(diagonal_element([1.0, -1.0]), diagonal_state([0.25, 0.75])) == pytest.approx(-0.5)


def test_pairing_rejects_algebra_mismatch():
    with pytest.raises(QigValidationError):
        pairing(QUBIT.identity(), mixed_state())


def test_pairing_is_bounded_by_operator_and_trace_norms():
    rng = instance_rng(5)
    for _ in range(10):
        a = random_hermitian(rng, MIXED, scale=2.0)
        psi = random_hermitian(rng, MIXED).as_functional()
        assert abs(pairing(a, psi)) <= operator_norm(a) * schatten_norm(psi, 1) + 1e-12


def test_schatten_norm_examples():
    x = HermitianElement(QUBIT, (np.diag([3.0, -4.0]),))
    assert schatten_norm(x, 1) == pytest.approx(7.0)
    assert schatten_norm(x, 2) == pytest.approx(5.0)
    assert schatten_norm(x, math.inf) == pytest.approx(4.0)
    with pytest.raises(QigValidationError):
        schatten_norm(x, 0.5)


def test_holder_inequality_on_random_pairs():
    rng = instance_rng(17)
    algebra = MatrixAlgebra.full(4)
    for _ in range(20):
        h = random_hermitian(rng, algebra, scale=float(rng.uniform(0.1, 3.0)))
        k = random_hermitian(rng, algebra, scale=float(rng.uniform(0.1, 3.0)))
        assert schatten_norm(h @ k, 1) <= schatten_norm(h, 2) * schatten_norm(k, 2) + 1e-12


def test_arithmetic_keeps_kinds():
    rho = mixed_state()
    assert type(rho + rho) is PositiveFunctional
    assert type(rho - rho) is SelfAdjointFunctional
    assert type(rho * -1.0) is SelfAdjointFunctional
    assert type(rho * 2.0) is PositiveFunctional
    assert type(mixed_element() + mixed_element()) is HermitianElement
    assert type(mixed_element() * 1j) is BlockMatrix
    with pytest.raises(TypeError):
        mixed_element() + rho
    assert (rho * 2.0).trace == pytest.approx(2 * rho.trace)


def test_spectral_split_recovers_functional():
    psi = random_hermitian(instance_rng(8), MatrixAlgebra.full(3)).as_functional()
    plus, minus = spectral_split(psi)
    assert (plus - minus).allclose(psi, atol=1e-12)
    assert pairing(support_projection(plus), minus) == pytest.approx(0.0, abs=1e-12)


def test_from_dense_pinches_off_diagonal_blocks():
    dense = np.arange(9.0).reshape(3, 3)
    x = from_dense(MIXED, dense)
    np.testing.assert_array_equal(x.blocks[0], dense[:2, :2])
    np.testing.assert_array_equal(x.blocks[1], dense[2:, 2:])


def test_trace_distance_of_diagonal_states():
    assert trace_distance(diagonal_state([0.5, 0.5]), diagonal_state([0.25, 0.75])) == pytest.approx(0.5)


@given(st.lists(st.floats(min_value=-5.0, max_value=5.0), min_size=1, max_size=6))
def test_exp_on_commutative_algebra_is_pointwise(values):
    x = diagonal_element(values)
    result = mat_exp(x)
    np.testing.assert_allclose([b[0, 0].real for b in result.blocks], np.exp(values), rtol=1e-13)


@given(
    st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=3, max_size=3),
    st.lists(st.floats(min_value=0.01, max_value=2.0), min_size=3, max_size=3),
)
def test_pairing_on_commutative_algebra_is_dot_product(a, w):
    assert pairing(diagonal_element(a), diagonal_state(w)) == pytest.approx(float(np.dot(a, w)), abs=1e-12)
