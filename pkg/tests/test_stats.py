import numpy as np
import pytest

from oracles import student_t_cdf_quadrature
from simam.errors import DegenerateTest, DomainError
from simam.stats import network_rmse, paired_t_test, per_node_mse, per_node_rmse, student_t_cdf


def test_network_rmse():
    A = np.random.default_rng(0).standard_normal((9, 9))
    assert network_rmse(A, A) == 0.0
    assert network_rmse([[1.0], [0.0]], [[0.0], [1.0]]) == pytest.approx(np.sqrt(2))
    B = np.random.default_rng(1).standard_normal((9, 9))
    assert network_rmse(A, B) == pytest.approx(np.linalg.norm(A - B, "fro") / 3, rel=1e-14)
    with pytest.raises(DomainError):
        network_rmse(A, B[:3])


def test_per_node_errors():
    p = np.zeros((2, 1))
    a = np.array([[3.0], [4.0]])
    np.testing.assert_allclose(per_node_rmse(p, a), [np.sqrt(12.5)])
    np.testing.assert_allclose(per_node_mse(p, a), [12.5])
    np.testing.assert_array_equal(per_node_rmse(a, a), [0.0])


def test_t_cdf_spot_values():
    assert student_t_cdf(0.0, 5) == 0.5
    assert student_t_cdf(1.0, 1) == pytest.approx(0.75, abs=1e-15)  # Cauchy
    for t, df in [(-2.49, 77), (1.3, 3), (-5.5, 200)]:
        assert abs(student_t_cdf(t, df) - student_t_cdf_quadrature(t, df)) <= 1e-12


def test_t_test_examples():
    a = np.array([1.0, 2.0, 3.0])
    with pytest.raises(DegenerateTest):
        paired_t_test(a, a)
    d = np.array([-1.0, 1.0, -2.0, 2.0])
    t, p, n = paired_t_test(d, np.zeros(4))
    assert t == 0.0 and p == 0.5 and n == 4
    with pytest.raises(DomainError):
        paired_t_test(a, a, alternative="sideways")


def test_t_test_reference_magnitude():
    # n = 78 pairs with t = -2.49 exactly
    rng = np.random.default_rng(0)
    d = rng.standard_normal(78)
    d = (d - d.mean()) / d.std(ddof=1)
    d += -2.49 / np.sqrt(78)
    t, p, n = paired_t_test(d, np.zeros(78), "less")
    assert t == pytest.approx(-2.49, abs=1e-12) and n == 78
    assert p == pytest.approx(0.0074, abs=1e-4)
    assert p == pytest.approx(student_t_cdf_quadrature(-2.49, 77), abs=1e-12)
    t2, p2, _ = paired_t_test(d, np.zeros(78), "two_sided")
    assert p2 == pytest.approx(2 * p, rel=1e-12)
    _, pg, _ = paired_t_test(d, np.zeros(78), "greater")
    assert p + pg == pytest.approx(1.0, abs=1e-12)
