import numpy as np
import pytest

from mentor_curriculum.netcore import Adam, MomentumSGD, substream


def test_zero_gradient_zero_buffer_leaves_params_unchanged():
    p = {"w": np.array([1.0, -2.0, 3.0])}
    before = p["w"].copy()
    MomentumSGD(lr=0.1, momentum=0.9).step(p, {"w": np.zeros(3)})
    assert np.array_equal(p["w"], before)


def test_zero_momentum_reduces_to_plain_sgd():
    p = {"w": np.array([1.0, 2.0])}
    g = {"w": np.array([0.5, -1.0])}
    MomentumSGD(lr=0.2, momentum=0.0).step(p, g)
    assert np.allclose(p["w"], [1.0 - 0.2 * 0.5, 2.0 + 0.2])


def test_quadratic_bowl_converges():
    # derived by running the optimizer; the analytic minimum is 0
    p = {"p": np.full(3, 0.01)}
    opt = MomentumSGD(lr=0.1, momentum=0.9)
    for _ in range(200):
        opt.step(p, {"p": 2.0 * p["p"]})
    assert np.linalg.norm(p["p"]) < 1e-6
    assert opt.steps == 200


def test_momentum_shape_mismatch():
    with pytest.raises(ValueError):
        MomentumSGD().step({"w": np.zeros(3)}, {"w": np.zeros(4)})


def test_adam_first_step_is_signed_lr():
    p = {"w": np.array([1.0, -1.0])}
    Adam(lr=0.01).step(p, {"w": np.array([3.0, -0.2])})
    # bias correction makes the first update lr * g / (|g| + eps)
    assert np.allclose(p["w"], [1.0 - 0.01, -1.0 + 0.01], atol=1e-6)


def test_adam_minimizes_quadratic():
    rng = substream(0, "test.adam")
    p = {"w": rng.normal(size=4)}
    opt = Adam(lr=0.05)
    for _ in range(500):
        opt.step(p, {"w": 2.0 * p["w"]})
    assert np.linalg.norm(p["w"]) < 1e-4
    assert opt.steps == 500


def test_adam_shape_mismatch():
    with pytest.raises(ValueError):
        Adam().step({"w": np.zeros((2, 2))}, {"w": np.zeros((2, 3))})


def test_lr_override_per_step():
    p = {"w": np.array([1.0])}
    opt = MomentumSGD(lr=1.0, momentum=0.0)
    opt.step(p, {"w": np.array([1.0])}, lr=0.5)
    assert p["w"][0] == pytest.approx(0.5)
