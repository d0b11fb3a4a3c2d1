import numpy as np
import pytest

from mentor_curriculum.netcore import grad_check, max_relative_error, numeric_gradient, substream, worst_error


def test_numeric_gradient_of_quadratic():
    x = np.array([1.0, -2.0, 0.5])
    n = numeric_gradient(lambda: float(np.sum(x**2)), x)
    assert np.allclose(n, 2.0 * x, atol=1e-8)


def test_linear_function_error_at_machine_precision():
    rng = substream(0, "test.gc.linear")
    c = rng.normal(size=8)
    x = rng.normal(size=8)
    report = grad_check(lambda: float(c @ x), {"x": x}, {"x": c})
    assert worst_error(report) < 1e-9


def test_corrupted_gradient_fails():
    rng = substream(1, "test.gc.corrupt")
    c = rng.normal(size=8)
    x = rng.normal(size=8)
    report = grad_check(lambda: float(c @ x), {"x": x}, {"x": c * 1.01})
    assert worst_error(report) > 1e-5


def test_non_finite_loss_raises():
    x = np.array([1.0])
    with pytest.raises(ValueError):
        grad_check(lambda: float("nan"), {"x": x}, {"x": np.array([0.0])})


def test_non_finite_analytic_raises():
    x = np.array([1.0])
    with pytest.raises(ValueError):
        grad_check(lambda: float(x[0]), {"x": x}, {"x": np.array([np.inf])})


def test_relative_error_shape_check():
    with pytest.raises(ValueError):
        max_relative_error(np.zeros(3), np.zeros(4))


def test_relative_error_of_equal_arrays_is_zero():
    a = np.array([1.0, 2.0])
    assert max_relative_error(a, a.copy()) == 0.0
