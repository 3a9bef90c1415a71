import numpy as np
import pytest

from twinpi.linalg import NumericalError, solve_checked


def test_residual_contract_on_well_conditioned_systems():
    rng = np.random.default_rng(0)
    for _ in range(25):
        n = int(rng.integers(2, 30))
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=n)
        x = solve_checked(a, b)
        assert np.max(np.abs(a @ x - b)) <= 1e-10 * (1 + np.max(np.abs(b)))


def test_consistent_singular_system_is_resolved_by_jitter():
    rng = np.random.default_rng(1)
    basis = rng.normal(size=(6, 3))
    a = basis @ basis.T  # rank 3, exactly singular
    b = a @ rng.normal(size=6)  # rhs in the range
    x = solve_checked(a, b)
    assert np.max(np.abs(a @ x - b)) <= 1e-6 * (1 + np.max(np.abs(b)))


def test_inconsistent_singular_system_fails_with_condition_estimate():
    a = np.zeros((3, 3))
    a[0, 0] = 1.0
    b = np.array([1.0, 1.0, 1.0])  # unreachable: rows 2..3 are zero
    with pytest.raises(NumericalError, match="cond"):
        solve_checked(a, b)


def test_shape_validation():
    with pytest.raises(ValueError, match="square"):
        solve_checked(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError, match="rhs"):
        solve_checked(np.eye(3), np.ones(4))


def test_exact_solution_of_integer_system():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    x = solve_checked(a, np.array([3.0, 4.0]))
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-14)
