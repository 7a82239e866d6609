"""Token-based attention networks for policies and denoisers.

Observations are split into entity tokens — UAV position, user position,
power/progress scalars, and one token per antenna element (magnitude,
phase) — each projected into a shared model dimension with a learned
entity-type embedding. Antenna tokens carry no positional identity, so the
encoder is permutation-invariant across them under mean pooling.
Observations that are not raw environment vectors (e.g. VAE latents) fall
back to fixed-width chunk tokens, each with its own type embedding.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from ..nn import tensor as T
from ..nn.layers import LayerSpec, attention_forward, attention_forward_np, glorot, init_params
from ..nn.tensor import Tensor
from ..seeding import SeedBank

Array = np.ndarray

ENTITY_SCALAR_GROUPS = (("uav", 0, 2), ("user", 2, 4), ("power", 4, 7))
CHUNK_WIDTH = 4


class TokenLayout:
    """How a flat observation vector becomes a token sequence."""

    def __init__(self, in_dim: int, antenna_count: int | None):
        self.in_dim = int(in_dim)
        if antenna_count is not None and in_dim == 2 * antenna_count + 7:
            self.antenna_count = int(antenna_count)
            self.scalar_groups = [(name, slice(a, b)) for name, a, b in ENTITY_SCALAR_GROUPS]
            self.antenna_slice = slice(7, 7 + 2 * antenna_count)
        else:
            self.antenna_count = 0
            self.antenna_slice = None
            n_chunks = max(2, -(-in_dim // CHUNK_WIDTH))
            if in_dim < 2:
                raise ConfigurationError(f"cannot tokenize a {in_dim}-dim observation")
            pieces = np.array_split(np.arange(in_dim), n_chunks)
            self.scalar_groups = [
                (f"chunk{i}", slice(int(p[0]), int(p[-1]) + 1)) for i, p in enumerate(pieces)
            ]

    @property
    def n_tokens(self) -> int:
        return len(self.scalar_groups) + self.antenna_count

    def init_params(self, rng: np.random.Generator, model_dim: int, prefix: str) -> dict[str, Tensor]:
        params: dict[str, Tensor] = {}
        for name, sl in self.scalar_groups:
            width = sl.stop - sl.start
            params[f"{prefix}.{name}.W"] = Tensor(glorot(rng, width, model_dim), requires_grad=True)
            params[f"{prefix}.{name}.b"] = Tensor(np.zeros(model_dim), requires_grad=True)
            params[f"{prefix}.{name}.type"] = Tensor(np.zeros(model_dim), requires_grad=True)
        if self.antenna_count:
            params[f"{prefix}.ant.W"] = Tensor(glorot(rng, 2, model_dim), requires_grad=True)
            params[f"{prefix}.ant.b"] = Tensor(np.zeros(model_dim), requires_grad=True)
            params[f"{prefix}.ant.type"] = Tensor(np.zeros(model_dim), requires_grad=True)
        return params

    def tokens_graph(self, params: dict[str, Tensor], x: Tensor, prefix: str) -> Tensor:
        batch = x.shape[0]
        pieces = []
        for name, sl in self.scalar_groups:
            tok = T.matmul(x[:, sl], params[f"{prefix}.{name}.W"])
            tok = tok + params[f"{prefix}.{name}.b"] + params[f"{prefix}.{name}.type"]
            pieces.append(tok.reshape((batch, 1, tok.shape[-1])))
        if self.antenna_count:
            ant = x[:, self.antenna_slice].reshape((batch, self.antenna_count, 2))
            tok = T.matmul(ant, params[f"{prefix}.ant.W"])
            pieces.append(tok + params[f"{prefix}.ant.b"] + params[f"{prefix}.ant.type"])
        return T.concat(pieces, axis=1)

    def tokens_np(self, params: dict[str, Tensor], x: Array, prefix: str) -> Array:
        batch = x.shape[0]
        pieces = []
        for name, sl in self.scalar_groups:
            tok = x[:, sl] @ params[f"{prefix}.{name}.W"].data
            tok = tok + params[f"{prefix}.{name}.b"].data + params[f"{prefix}.{name}.type"].data
            pieces.append(tok[:, None, :])
        if self.antenna_count:
            ant = x[:, self.antenna_slice].reshape(batch, self.antenna_count, 2)
            tok = ant @ params[f"{prefix}.ant.W"].data
            pieces.append(tok + params[f"{prefix}.ant.b"].data + params[f"{prefix}.ant.type"].data)
        return np.concatenate(pieces, axis=1)


class TokenEncoder:
    """Attention actor network: tokens -> blocks -> mean pool -> head."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        bank: SeedBank,
        *,
        antenna_count: int | None = None,
        model_dim: int = 64,
        heads: int = 2,
        blocks: int = 2,
        prefix: str = "tok",
        seed_name: str = "token-actor-init",
    ):
        if model_dim % heads != 0:
            raise ConfigurationError(f"heads={heads} must divide model dim {model_dim}")
        self.layout = TokenLayout(in_dim, antenna_count)
        self.model_dim = model_dim
        self.heads = heads
        self.n_blocks = blocks
        self.prefix = prefix
        rng = np.random.Generator(np.random.PCG64(bank.seed_for(seed_name)))
        self.params = self.layout.init_params(rng, model_dim, prefix)
        spec = LayerSpec("attention", model_dim, model_dim, heads=heads)
        for i in range(blocks):
            self.params.update(
                init_params(spec, bank.seed_for(f"{seed_name}-attn{i}"), prefix=f"{prefix}.attn{i}")
            )
        self.params[f"{prefix}.head.W"] = Tensor(glorot(rng, model_dim, out_dim), requires_grad=True)
        self.params[f"{prefix}.head.b"] = Tensor(np.zeros(out_dim), requires_grad=True)

    def forward(self, params: dict[str, Tensor], x: Tensor) -> Tensor:
        tokens = self.layout.tokens_graph(params, x, self.prefix)
        for i in range(self.n_blocks):
            tokens = attention_forward(params, tokens, self.heads, prefix=f"{self.prefix}.attn{i}")
        pooled = tokens.mean(axis=1)
        return T.matmul(pooled, params[f"{self.prefix}.head.W"]) + params[f"{self.prefix}.head.b"]

    def forward_np(self, params: dict[str, Tensor], x: Array) -> Array:
        tokens = self.layout.tokens_np(params, x, self.prefix)
        for i in range(self.n_blocks):
            tokens = attention_forward_np(params, tokens, self.heads, prefix=f"{self.prefix}.attn{i}")
        pooled = tokens.mean(axis=1)
        return pooled @ params[f"{self.prefix}.head.W"].data + params[f"{self.prefix}.head.b"].data


class TransformerDenoiser:
    """Attention denoiser: observation tokens + noisy-action and step tokens.

    The head reads the noisy-action token's final embedding rather than a
    pool over all tokens: the prediction target (the injected noise) is a
    function of the action sample first, so the sample must stay a
    first-class input to the head instead of one voice among dozens of
    context tokens.
    """

    def __init__(
        self,
        obs_dim: int,
        chain_dim: int,
        steps: int,
        bank: SeedBank,
        *,
        antenna_count: int | None = None,
        model_dim: int = 64,
        heads: int = 2,
        blocks: int = 2,
        prefix: str = "tden",
    ):
        if model_dim % heads != 0:
            raise ConfigurationError(f"heads={heads} must divide model dim {model_dim}")
        self.layout = TokenLayout(obs_dim, antenna_count)
        self.model_dim = model_dim
        self.heads = heads
        self.n_blocks = blocks
        self.steps = steps
        self.prefix = prefix
        rng = np.random.Generator(np.random.PCG64(bank.seed_for("gdm-denoiser-init")))
        self.params = self.layout.init_params(rng, model_dim, prefix)
        p = prefix
        self.params[f"{p}.act.W"] = Tensor(glorot(rng, chain_dim, model_dim), requires_grad=True)
        self.params[f"{p}.act.b"] = Tensor(np.zeros(model_dim), requires_grad=True)
        self.params[f"{p}.act.type"] = Tensor(np.zeros(model_dim), requires_grad=True)
        self.params[f"{p}.step.table"] = Tensor(glorot(rng, steps, model_dim), requires_grad=True)
        spec = LayerSpec("attention", model_dim, model_dim, heads=heads)
        for i in range(blocks):
            self.params.update(
                init_params(
                    spec, bank.seed_for(f"gdm-denoiser-attn{i}"), prefix=f"{p}.attn{i}"
                )
            )
        self.params[f"{p}.head.W"] = Tensor(glorot(rng, model_dim, chain_dim), requires_grad=True)
        self.params[f"{p}.head.b"] = Tensor(np.zeros(chain_dim), requires_grad=True)

    def forward(self, params: dict[str, Tensor], x_t: Tensor, obs: Array, k_feat: Array) -> Tensor:
        p = self.prefix
        batch = obs.shape[0]
        obs_tokens = self.layout.tokens_graph(params, Tensor(obs), p)
        act = T.matmul(x_t, params[f"{p}.act.W"]) + params[f"{p}.act.b"] + params[f"{p}.act.type"]
        step = T.matmul(Tensor(k_feat), params[f"{p}.step.table"])
        tokens = T.concat(
            [
                obs_tokens,
                act.reshape((batch, 1, self.model_dim)),
                step.reshape((batch, 1, self.model_dim)),
            ],
            axis=1,
        )
        for i in range(self.n_blocks):
            tokens = attention_forward(params, tokens, self.heads, prefix=f"{p}.attn{i}")
        act_out = tokens[:, self.layout.n_tokens]
        return T.matmul(act_out, params[f"{p}.head.W"]) + params[f"{p}.head.b"]

    def forward_np(self, params: dict[str, Tensor], x: Array, obs: Array, k_feat: Array) -> Array:
        p = self.prefix
        obs_tokens = self.layout.tokens_np(params, obs, p)
        act = x @ params[f"{p}.act.W"].data + params[f"{p}.act.b"].data + params[f"{p}.act.type"].data
        step = k_feat @ params[f"{p}.step.table"].data
        tokens = np.concatenate([obs_tokens, act[:, None, :], step[:, None, :]], axis=1)
        for i in range(self.n_blocks):
            tokens = attention_forward_np(params, tokens, self.heads, prefix=f"{p}.attn{i}")
        act_out = tokens[:, self.layout.n_tokens]
        return act_out @ params[f"{p}.head.W"].data + params[f"{p}.head.b"].data
