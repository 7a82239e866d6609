"""Autodiff engine: op correctness against finite differences and identities."""

import numpy as np
import pytest

from gairlab.errors import ShapeError
from gairlab.nn import tensor as T
from gairlab.nn.tensor import Tensor, backward, zero_grads


def finite_diff(loss_fn, arrays, epsilon=1e-6):
    """Central-difference gradients of a scalar loss over a list of arrays."""
    grads = []
    for a in arrays:
        g = np.zeros_like(a)
        flat = a.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = loss_fn()
            flat[i] = orig - epsilon
            down = loss_fn()
            flat[i] = orig
            gf[i] = (up - down) / (2 * epsilon)
        grads.append(g)
    return grads


def check_op(build_loss, arrays, rtol=1e-5, atol=1e-7):
    params = [Tensor(a, requires_grad=True) for a in arrays]
    loss = build_loss(*params)
    backward(loss)
    fd = finite_diff(lambda: float(build_loss(*[Tensor(p.data) for p in params]).data), arrays)
    for p, g in zip(params, fd):
        assert p.grad is not None
        np.testing.assert_allclose(p.grad, g, rtol=rtol, atol=atol)


RNG = np.random.default_rng(7)


def test_add_mul_broadcast_grads():
    a = RNG.normal(size=(3, 4))
    b = RNG.normal(size=(4,))
    check_op(lambda x, y: ((x + y) * (x * 2.0 - 1.0)).sum(), [a, b])


def test_matmul_grads():
    a = RNG.normal(size=(3, 5))
    b = RNG.normal(size=(5, 2))
    check_op(lambda x, y: T.matmul(x, y).sum(), [a, b])


def test_batched_matmul_grads():
    a = RNG.normal(size=(2, 3, 4))
    b = RNG.normal(size=(2, 4, 3))
    check_op(lambda x, y: (T.matmul(x, y) ** 2.0).sum(), [a, b])


def test_unary_op_grads():
    a = RNG.normal(size=(4, 3)) * 0.5
    check_op(lambda x: (T.tanh(x) + T.exp(x)).sum(), [a])
    check_op(lambda x: T.relu(x).sum(), [a + 0.05])  # keep away from the kink
    check_op(lambda x: T.log(T.exp(x) + 1.0).sum(), [a])


def test_softmax_grads():
    a = RNG.normal(size=(3, 6))
    w = RNG.normal(size=(3, 6))
    check_op(lambda x: (T.softmax(x, axis=-1) * w).sum(), [a])


def test_softmax_rows_are_normalized():
    x = Tensor(RNG.normal(size=(5, 9)) * 10.0)
    y = T.softmax(x, axis=-1)
    np.testing.assert_allclose(y.data.sum(axis=-1), np.ones(5), rtol=1e-12)
    assert (y.data > 0).all()


def test_reduction_and_reshape_grads():
    a = RNG.normal(size=(2, 3, 4))
    check_op(lambda x: x.mean(axis=(1, 2)).sum(), [a])
    check_op(lambda x: x.reshape((6, 4)).sum(axis=0).mean(), [a])
    check_op(lambda x: x.transpose((2, 0, 1)).sum(), [a])


def test_concat_and_slice_grads():
    a = RNG.normal(size=(3, 2))
    b = RNG.normal(size=(3, 4))
    check_op(lambda x, y: T.concat([x, y], axis=1)[:, 1:5].sum(), [a, b])


def test_gather_grads():
    a = RNG.normal(size=(5, 4))
    idx = np.array([0, 3, 1, 1, 2])
    check_op(lambda x: (T.gather(x, idx) ** 2.0).sum(), [a])


def test_take_rows_grads():
    table = RNG.normal(size=(6, 3))
    idx = np.array([2, 2, 0, 5])
    check_op(lambda x: T.take_rows(x, idx).sum(), [table])


def test_minimum_grads_and_tie_routing():
    a = RNG.normal(size=(4,))
    b = RNG.normal(size=(4,))
    check_op(lambda x, y: T.minimum(x, y).sum(), [a, b])
    # on exact ties the gradient goes to the first argument
    ta = Tensor(np.ones(3), requires_grad=True)
    tb = Tensor(np.ones(3), requires_grad=True)
    backward(T.minimum(ta, tb).sum())
    np.testing.assert_array_equal(ta.grad, np.ones(3))
    np.testing.assert_array_equal(tb.grad, np.zeros(3))


def test_grad_accumulates_across_backward_calls():
    x = Tensor(np.array([2.0]), requires_grad=True)
    backward((x * 3.0).sum())
    backward((x * 3.0).sum())
    np.testing.assert_allclose(x.grad, [6.0])
    zero_grads([x])
    assert x.grad is None


def test_backward_rejects_non_scalar():
    x = Tensor(np.ones((2, 2)), requires_grad=True)
    with pytest.raises(ShapeError):
        backward(x * 2.0)


def test_constant_subgraphs_skip_closures():
    a = Tensor(np.ones(3))
    b = Tensor(np.ones(3))
    out = a * b + 2.0
    assert not out.requires_grad and out._backward is None


def test_diamond_graph_accumulates_once_per_path():
    # y = x*x + x  =>  dy/dx = 2x + 1
    x = Tensor(np.array([3.0]), requires_grad=True)
    y = x * x + x
    backward(y.sum())
    np.testing.assert_allclose(x.grad, [7.0])
