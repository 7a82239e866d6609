"""Minimal reverse-mode autodiff with the few layers the agents need."""

from .tensor import (  # noqa: F401
    Tensor,
    backward,
    concat,
    gather,
    grads_or_zeros,
    minimum,
    softmax,
    take_rows,
    tanh,
    zero_grads,
)
from .layers import (  # noqa: F401
    LayerSpec,
    Mlp,
    attention_forward,
    attention_forward_np,
    clone_params,
    dense_forward,
    init_params,
    layer_norm_forward,
)
from .optim import Adam, AdamState, adam_step  # noqa: F401
from .gradcheck import grad_check  # noqa: F401
from .checkpoint import load_params, load_params_into, save_params  # noqa: F401
