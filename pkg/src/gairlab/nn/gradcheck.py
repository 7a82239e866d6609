"""Finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tensor, backward, zero_grads


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: dict[str, Tensor],
    epsilon: float = 1e-5,
) -> float:
    """Max relative error between autodiff and central differences.

    ``loss_fn`` must rebuild the graph from ``params`` on every call and be
    deterministic (freeze any noise before calling). The relative error for
    each coordinate is ``|ad - fd| / max(1e-6, |fd|)``. The absolute floor
    sits above the roundoff noise of central differences themselves
    (~eps_machine * |loss| / (2 * epsilon)); without it, coordinates whose
    true gradient is near zero would be scored on that noise rather than on
    the gradient.
    """
    zero_grads(params.values())
    loss = loss_fn()
    backward(loss)
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
    }
    zero_grads(params.values())

    worst = 0.0
    for name, p in params.items():
        flat = p.data.reshape(-1)
        ad_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = float(loss_fn().data)
            flat[i] = orig - epsilon
            down = float(loss_fn().data)
            flat[i] = orig
            fd = (up - down) / (2.0 * epsilon)
            rel = abs(ad_flat[i] - fd) / max(1e-6, abs(fd))
            worst = max(worst, rel)
    return worst
