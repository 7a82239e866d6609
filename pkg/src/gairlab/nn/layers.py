"""Layer definitions: dense stacks, layer norm, multi-head self-attention.

Parameters are plain ``dict[str, Tensor]`` keyed by dotted names. Every
forward function takes the dict explicitly so online and target copies of a
network run through identical code, and checkpointing is just serializing
the dict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigurationError, ShapeError
from . import tensor as T
from .tensor import Array, Tensor

LAYER_KINDS = ("dense", "layer-norm", "attention")
ACTIVATIONS = ("identity", "relu", "tanh", "softmax", "sigmoid")

LN_EPS = 1e-5


@dataclass(frozen=True)
class LayerSpec:
    """Shape/arity description of a single layer."""

    kind: str
    input_dim: int
    output_dim: int
    activation: str = "identity"
    heads: int = 1

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ConfigurationError(f"unknown layer kind {self.kind!r}")
        if self.input_dim <= 0 or self.output_dim <= 0:
            raise ConfigurationError(
                f"layer dims must be positive, got {self.input_dim}x{self.output_dim}"
            )
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if self.kind == "attention":
            if self.input_dim != self.output_dim:
                raise ConfigurationError("attention layers are square (residual)")
            if self.heads < 1 or self.input_dim % self.heads != 0:
                raise ConfigurationError(
                    f"heads={self.heads} must divide model dim {self.input_dim}"
                )


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> Array:
    """Glorot-uniform weight draw: U(-a, a), a = sqrt(6 / (fan_in+fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(spec: LayerSpec, seed: int, prefix: str = "") -> dict[str, Tensor]:
    """Fresh parameters for one layer; weights Glorot, biases/offsets zero."""
    rng = np.random.Generator(np.random.PCG64(seed))
    p = prefix + "." if prefix else ""
    d_in, d_out = spec.input_dim, spec.output_dim
    if spec.kind == "dense":
        return {
            f"{p}W": Tensor(glorot(rng, d_in, d_out), requires_grad=True),
            f"{p}b": Tensor(np.zeros(d_out), requires_grad=True),
        }
    if spec.kind == "layer-norm":
        return {
            f"{p}gain": Tensor(np.ones(d_in), requires_grad=True),
            f"{p}bias": Tensor(np.zeros(d_in), requires_grad=True),
        }
    # attention: pre-norm residual block
    params: dict[str, Tensor] = {
        f"{p}ln_gain": Tensor(np.ones(d_in), requires_grad=True),
        f"{p}ln_bias": Tensor(np.zeros(d_in), requires_grad=True),
    }
    for name in ("Wq", "Wk", "Wv", "Wo"):
        params[f"{p}{name}"] = Tensor(glorot(rng, d_in, d_in), requires_grad=True)
        if name == "Wk":
            # no key bias: softmax is invariant to a per-query constant shift
            # of the scores, so a key bias could never affect the output
            continue
        params[f"{p}b{name[1:].lower()}"] = Tensor(np.zeros(d_in), requires_grad=True)
    return params


# -- activations -------------------------------------------------------------


def apply_activation(x: Tensor, name: str) -> Tensor:
    if name == "identity":
        return x
    if name == "relu":
        return T.relu(x)
    if name == "tanh":
        return T.tanh(x)
    if name == "softmax":
        return T.softmax(x, axis=-1)
    if name == "sigmoid":
        return T.power(T.exp(-x) + 1.0, -1.0)
    raise ConfigurationError(f"unknown activation {name!r}")


def apply_activation_np(x: Array, name: str) -> Array:
    if name == "identity":
        return x
    if name == "relu":
        return np.maximum(x, 0.0)
    if name == "tanh":
        return np.tanh(x)
    if name == "softmax":
        e = np.exp(x - x.max(axis=-1, keepdims=True))
        return e / e.sum(axis=-1, keepdims=True)
    if name == "sigmoid":
        return (np.exp(-x) + 1.0) ** -1.0
    raise ConfigurationError(f"unknown activation {name!r}")


# -- forward passes ----------------------------------------------------------


def dense_forward(params: dict[str, Tensor], x: Tensor, activation: str = "identity", prefix: str = "") -> Tensor:
    p = prefix + "." if prefix else ""
    out = T.matmul(x, params[f"{p}W"]) + params[f"{p}b"]
    return apply_activation(out, activation)


def layer_norm_forward(params: dict[str, Tensor], x: Tensor, prefix: str = "") -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then affine."""
    p = prefix + "." if prefix else ""
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = T.power(var + LN_EPS, -0.5)
    return centered * inv * params[f"{p}gain"] + params[f"{p}bias"]


def layer_norm_np(params: dict[str, Tensor], x: Array, prefix: str = "") -> Array:
    p = prefix + "." if prefix else ""
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = (var + LN_EPS) ** -0.5
    return centered * inv * params[f"{p}gain"].data + params[f"{p}bias"].data


def attention_forward(
    params: dict[str, Tensor],
    x: Tensor,
    heads: int,
    prefix: str = "",
    return_weights: bool = False,
):
    """Pre-norm residual self-attention: ``y = x + MHA(LN(x))``.

    ``x`` has shape (T, d) or (B, T, d); output shape matches. Attention
    weights, if requested, come back as a plain array (B, heads, T, T).
    """
    p = prefix + "." if prefix else ""
    squeeze = x.ndim == 2
    if squeeze:
        x = x.reshape((1,) + x.shape)
    if x.ndim != 3:
        raise ShapeError(f"attention expects (B, T, d) tokens, got {x.shape}")
    batch, tokens, dim = x.shape
    if dim % heads != 0:
        raise ConfigurationError(f"heads={heads} must divide model dim {dim}")
    head_dim = dim // heads

    h = layer_norm_forward({"gain": params[f"{p}ln_gain"], "bias": params[f"{p}ln_bias"]}, x)

    def project(name: str, bias: str | None) -> Tensor:
        out = T.matmul(h, params[f"{p}{name}"])
        if bias is not None:
            out = out + params[f"{p}{bias}"]
        out = out.reshape((batch, tokens, heads, head_dim))
        return out.transpose((0, 2, 1, 3))  # (B, H, T, dh)

    q = project("Wq", "bq")
    k = project("Wk", None)
    v = project("Wv", "bv")

    scores = T.matmul(q, k.transpose((0, 1, 3, 2))) * (1.0 / np.sqrt(head_dim))
    weights = T.softmax(scores, axis=-1)
    context = T.matmul(weights, v)  # (B, H, T, dh)
    context = context.transpose((0, 2, 1, 3)).reshape((batch, tokens, dim))
    projected = T.matmul(context, params[f"{p}Wo"]) + params[f"{p}bo"]
    out = x + projected
    if squeeze:
        out = out.reshape((tokens, dim))
    if return_weights:
        return out, weights.data
    return out


def attention_forward_np(params: dict[str, Tensor], x: Array, heads: int, prefix: str = "") -> Array:
    """Graph-free twin of :func:`attention_forward` (same arithmetic)."""
    p = prefix + "." if prefix else ""
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    batch, tokens, dim = x.shape
    head_dim = dim // heads
    h = layer_norm_np({"gain": params[f"{p}ln_gain"], "bias": params[f"{p}ln_bias"]}, x)

    def project(name: str, bias: str | None) -> Array:
        out = h @ params[f"{p}{name}"].data
        if bias is not None:
            out = out + params[f"{p}{bias}"].data
        return out.reshape(batch, tokens, heads, head_dim).transpose(0, 2, 1, 3)

    q, k, v = project("Wq", "bq"), project("Wk", None), project("Wv", "bv")
    scores = q @ k.transpose(0, 1, 3, 2) * (1.0 / np.sqrt(head_dim))
    e = np.exp(scores - scores.max(axis=-1, keepdims=True))
    weights = e / e.sum(axis=-1, keepdims=True)
    context = (weights @ v).transpose(0, 2, 1, 3).reshape(batch, tokens, dim)
    out = x + context @ params[f"{p}Wo"].data + params[f"{p}bo"].data
    return out[0] if squeeze else out


# -- dense stacks ------------------------------------------------------------


class Mlp:
    """A plain dense stack with named parameters and a graph-free fast path."""

    def __init__(
        self,
        dims: Sequence[int],
        *,
        hidden_activation: str = "relu",
        output_activation: str = "identity",
        seed: int = 0,
        prefix: str = "mlp",
    ):
        if len(dims) < 2:
            raise ConfigurationError("an MLP needs at least input and output dims")
        self.dims = tuple(int(d) for d in dims)
        self.prefix = prefix
        self.activations = [hidden_activation] * (len(dims) - 2) + [output_activation]
        rng = np.random.Generator(np.random.PCG64(seed))
        self.params: dict[str, Tensor] = {}
        for i, (d_in, d_out) in enumerate(zip(self.dims[:-1], self.dims[1:])):
            if d_in <= 0 or d_out <= 0:
                raise ConfigurationError(f"layer dims must be positive, got {dims}")
            self.params[f"{prefix}.W{i}"] = Tensor(glorot(rng, d_in, d_out), requires_grad=True)
            self.params[f"{prefix}.b{i}"] = Tensor(np.zeros(d_out), requires_grad=True)

    @property
    def n_layers(self) -> int:
        return len(self.dims) - 1

    def forward(self, params: dict[str, Tensor], x: Tensor) -> Tensor:
        for i, act in enumerate(self.activations):
            x = T.matmul(x, params[f"{self.prefix}.W{i}"]) + params[f"{self.prefix}.b{i}"]
            x = apply_activation(x, act)
        return x

    def forward_np(self, params: dict[str, Tensor], x: Array) -> Array:
        for i, act in enumerate(self.activations):
            x = x @ params[f"{self.prefix}.W{i}"].data + params[f"{self.prefix}.b{i}"].data
            x = apply_activation_np(x, act)
        return x


def clone_params(params: dict[str, Tensor]) -> dict[str, Tensor]:
    """Deep copy used to spawn target networks (grads not copied)."""
    return {k: Tensor(v.data.copy(), requires_grad=True) for k, v in params.items()}


ForwardFn = Callable[[dict[str, Tensor], Tensor], Tensor]
