import numpy as np
import pytest

from src.nn.backprop import backward, rmse_loss
from src.nn.config import ACTIVATIONS, TrainConfig
from src.nn.gradcheck import check_gradients
from src.nn.network import forward, init_network, predict
from src.utils.errors import ShapeError, StaleCacheError


def test_rmse_zero_for_perfect_reconstruction(rng):
    x = rng.normal(size=(4, 3))
    assert rmse_loss(x, x) == 0.0


def test_rmse_constant_error():
    assert rmse_loss(np.full((3, 4), 5.0), np.full((3, 4), 3.0)) == pytest.approx(2.0)


def test_rmse_matches_elementwise_loop(rng):
    a, b = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    total = 0.0
    for i in range(5):
        for j in range(3):
            total += (a[i, j] - b[i, j]) ** 2
    assert rmse_loss(a, b) == pytest.approx(np.sqrt(total / 15), rel=1e-12)


def test_rmse_shape_mismatch():
    with pytest.raises(ShapeError):
        rmse_loss(np.zeros((2, 3)), np.zeros((3, 2)))


def test_zero_error_gives_pure_l2_gradient(rng):
    net = init_network([3, 4, 3], config=TrainConfig(seed=1))
    batch = rng.normal(size=(6, 3))
    targets = predict(net, batch)
    _, cache = forward(net, batch)
    grads = backward(net, cache, targets, l2_lambda=0.1)
    for layer, g in zip(net.layers, grads.layers):
        np.testing.assert_allclose(g.weights, 0.1 * layer.weights, atol=1e-15)
        np.testing.assert_allclose(g.biases, 0.0, atol=1e-15)


def test_stale_cache_rejected(rng):
    net = init_network([3, 2, 3])
    batch = rng.normal(size=(2, 3))
    _, cache = forward(net, batch)
    net.touch()
    with pytest.raises(StaleCacheError):
        backward(net, cache, batch)


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(2024)
    for i in range(20):
        depth = int(rng.integers(3, 7))
        shape = [int(w) for w in rng.integers(2, 17, size=depth + 1)]
        activation = ACTIVATIONS[i % len(ACTIVATIONS)]
        net = init_network(shape, activation=activation,
                           config=TrainConfig(seed=i, init='uniform_scaled', output_activation='tanh'))
        batch = rng.normal(size=(3, shape[0]))
        targets = rng.normal(size=(3, shape[-1]))
        result = check_gradients(net, batch, targets, l2_lambda=1e-3)
        assert result.max_relative_error < 1e-5, (shape, activation, result.relative_errors)
