import numpy as np
import pytest

from _helpers import fd_grad, rel_err
from aeddqn.exceptions import ConfigError, ShapeMismatchError, StateError
from aeddqn.nn import Conv2D, Dense, Network, ReLU, Sigmoid
from aeddqn.rng import SeededRng

FD_TOL = 1e-4
STEP = 1e-5


def _conv_4loop(x, kernel, bias, stride):
    """Direct convolution oracle: loops over batch, channel, and window."""
    b, c, h, w = x.shape
    f, _, kh, kw = kernel.shape
    oh = (h - kh) // stride + 1
    ow = (w - kw) // stride + 1
    out = np.zeros((b, f, oh, ow))
    for bi in range(b):
        for fi in range(f):
            for oy in range(oh):
                for ox in range(ow):
                    window = x[bi, :, oy * stride : oy * stride + kh, ox * stride : ox * stride + kw]
                    out[bi, fi, oy, ox] = np.sum(window * kernel[fi]) + bias[fi]
    return out


# ---------------------------------------------------------------- forward


def test_dense_identity_weights():
    layer = Dense(2, 2)
    layer.w = np.eye(2)
    assert layer.forward(np.array([[1.0, 2.0]])).tolist() == [[1.0, 2.0]]


def test_relu_definition():
    assert ReLU().forward(np.array([[-1.0, 0.0, 3.0]])).tolist() == [[0.0, 0.0, 3.0]]


def test_sigmoid_values():
    out = Sigmoid().forward(np.array([[0.0, 100.0, -100.0]]))
    assert out[0, 0] == 0.5
    assert out[0, 1] == pytest.approx(1.0)
    assert out[0, 2] == pytest.approx(0.0)


def test_conv_all_ones_window_sum():
    layer = Conv2D(1, 1, 2, stride=1)
    layer.kernel = np.ones((1, 1, 2, 2))
    out = layer.forward(np.ones((1, 1, 3, 3)))
    assert out.shape == (1, 1, 2, 2)
    assert np.array_equal(out, np.full((1, 1, 2, 2), 4.0))


def test_conv_output_shape_arithmetic():
    layer = Conv2D(1, 3, 2, stride=2)
    assert layer.forward(np.zeros((5, 1, 4, 4))).shape == (5, 3, 2, 2)


def test_conv_dirac_kernel_crops_input():
    rng = SeededRng(3)
    x = rng.uniform(2 * 1 * 5 * 5).reshape(2, 1, 5, 5)
    layer = Conv2D(1, 1, 2, stride=1)
    layer.kernel = np.zeros((1, 1, 2, 2))
    layer.kernel[0, 0, 1, 0] = 1.0
    out = layer.forward(x)
    assert np.array_equal(out[:, 0], x[:, 0, 1:5, 0:4])


def test_conv_matches_4loop_oracle():
    rng = SeededRng(21)
    for stride in (1, 2, 3):
        x = rng.uniform(2 * 3 * 7 * 6).reshape(2, 3, 7, 6) - 0.5
        layer = Conv2D(3, 4, 2, stride=stride, rng=rng)
        expected = _conv_4loop(x, layer.kernel, layer.b, stride)
        assert np.max(np.abs(layer.forward(x) - expected)) < 1e-12


def test_conv_kernel_larger_than_input():
    with pytest.raises(ConfigError, match="exceeds"):
        Conv2D(1, 1, 5).forward(np.zeros((1, 1, 3, 3)))


def test_forward_is_deterministic():
    rng = SeededRng(5)
    net = Network([Dense(6, 4, rng), ReLU(), Dense(4, 2, rng)])
    x = SeededRng(1).uniform(3 * 6).reshape(3, 6)
    assert np.array_equal(net.forward(x), net.forward(x))


def test_network_shape_error_names_layer_index():
    net = Network([Dense(4, 3), ReLU(), Dense(5, 2)])
    with pytest.raises(ShapeMismatchError, match="layer 2"):
        net.forward(np.zeros((2, 4)))


def test_network_construction_validates_shapes():
    with pytest.raises(ShapeMismatchError, match="layer 1"):
        Network([Dense(4, 3), Dense(2, 2)], input_shape=(None, 4))


def test_backward_before_forward():
    with pytest.raises(StateError):
        Network([Dense(2, 2)]).backward(np.zeros((1, 2)))
    with pytest.raises(StateError):
        ReLU().backward(np.zeros(3))


# ---------------------------------------------------------------- gradients


def _check_net_grads(net, x, seed, tol=FD_TOL):
    """Analytic grads of sum(forward(x)*r) vs central finite differences."""
    out = net.forward(x)
    r = SeededRng(seed).uniform(out.size).reshape(out.shape) - 0.5

    def scalar():
        return float(np.sum(net.forward(x) * r))

    net.forward(x)
    grad_x = net.backward(r)
    for name, p, g in net.param_list():
        assert rel_err(g, fd_grad(scalar, p, STEP)) < tol, name
    assert rel_err(grad_x, fd_grad(scalar, x, STEP)) < tol


def test_dense_linear_case_analytic():
    # loss = w*x  =>  dL/dw = x
    layer = Dense(1, 1)
    layer.w = np.array([[2.0]])
    net = Network([layer])
    x = np.array([[3.5]])
    net.forward(x)
    net.backward(np.ones((1, 1)))
    assert layer.grad_w[0, 0] == 3.5


def test_sigmoid_gradient_at_zero():
    layer = Sigmoid()
    layer.forward(np.array([0.0]))
    assert layer.backward(np.array([1.0]))[0] == 0.25


@pytest.mark.parametrize("seed", range(10))
def test_dense_gradients_match_fd(seed):
    rng = SeededRng(100 + seed)
    net = Network([Dense(5, 4, rng)])
    x = rng.uniform(3 * 5).reshape(3, 5) - 0.5
    _check_net_grads(net, x, seed)


@pytest.mark.parametrize("seed", range(10))
def test_conv_gradients_match_fd(seed):
    rng = SeededRng(200 + seed)
    stride = 1 + seed % 2
    net = Network([Conv2D(2, 3, 2, stride=stride, rng=rng)])
    x = rng.uniform(2 * 2 * 5 * 5).reshape(2, 2, 5, 5) - 0.5
    _check_net_grads(net, x, seed)


@pytest.mark.parametrize("seed", range(10))
def test_sigmoid_gradients_match_fd(seed):
    rng = SeededRng(300 + seed)
    net = Network([Dense(4, 3, rng), Sigmoid()])
    x = rng.uniform(2 * 4).reshape(2, 4) - 0.5
    _check_net_grads(net, x, seed)


@pytest.mark.parametrize("seed", range(10))
def test_relu_gradients_match_fd(seed):
    # keep inputs away from the kink, where finite differences are invalid
    rng = SeededRng(400 + seed)
    x = rng.uniform(3 * 6).reshape(3, 6) - 0.5
    x = np.where(np.abs(x) < 1e-3, x + 2e-3, x)
    net = Network([ReLU()])
    _check_net_grads(net, x, seed)


def _two_layer_net_away_from_kinks(seed):
    """Random Dense-ReLU-Dense net whose ReLU preactivations avoid zero."""
    for attempt in range(50):
        rng = SeededRng(seed * 1000 + attempt)
        dense1, dense2 = Dense(4, 6, rng), Dense(6, 3, rng)
        net = Network([dense1, ReLU(), dense2])
        x = rng.uniform(2 * 4).reshape(2, 4) - 0.5
        if np.min(np.abs(dense1.forward(x))) > 1e-3:
            return net, x
    raise AssertionError("could not find a kink-free configuration")


@pytest.mark.parametrize("seed", range(10))
def test_two_layer_net_gradients_match_fd(seed):
    net, x = _two_layer_net_away_from_kinks(seed)
    _check_net_grads(net, x, seed)
