"""Diffusion-model action sampler used as a drop-in TD3 policy.

The policy network is a conditional denoiser: acting runs the reverse
diffusion chain from Gaussian noise, conditioned on the observation, and
squashes the result with tanh. Training maximizes the twin-critic minimum
through the full differentiable chain, plus a small denoising regularizer
toward replayed actions.

Discrete and hybrid spaces diffuse over block-factored logits (move,
BS power level, UAV power level) and decode with a per-block argmax; the
argmax is invariant under tanh, so the squashed head decodes identically.
"""

from __future__ import annotations

from typing import Callable, Protocol

import numpy as np

from ..errors import ConfigurationError
from ..nn import tensor as T
from ..nn.layers import Mlp, clone_params
from ..nn.optim import Adam
from ..nn.tensor import Tensor, backward, zero_grads
from ..rl.config import Td3Config
from ..rl.spaces import AgentSpace, block_slices, logits_to_discrete_index
from ..seeding import SeedBank

Array = np.ndarray

# magnitude of the signed one-hot encoding used when projecting stored
# discrete choices into the (pre-squash) chain space for the regularizer
BLOCK_TARGET_SCALE = 0.9


class NoiseSchedule:
    """Variance schedule of the diffusion chain (1-based step indexing)."""

    def __init__(self, betas: Array):
        betas = np.asarray(betas, dtype=np.float64).reshape(-1)
        if betas.size == 0:
            raise ConfigurationError("a noise schedule needs at least one step")
        if not ((betas > 0.0) & (betas < 1.0)).all():
            raise ConfigurationError("all betas must lie in (0, 1)")
        self.betas = betas
        self.alphas = 1.0 - betas
        self.alpha_bars = np.cumprod(self.alphas)
        if not (np.diff(self.alpha_bars) < 0.0).all():
            raise ConfigurationError("cumulative alpha must be strictly decreasing")

    @classmethod
    def linear(cls, steps: int = 5, beta_start: float = 1e-4, beta_end: float = 0.1) -> "NoiseSchedule":
        if steps < 1:
            raise ConfigurationError(f"schedule needs steps >= 1, got {steps}")
        if steps == 1:
            return cls(np.array([beta_end]))
        return cls(np.linspace(beta_start, beta_end, steps))

    @property
    def steps(self) -> int:
        return self.betas.size

    def at(self, k: int) -> tuple[float, float, float]:
        """(beta_k, alpha_k, alpha_bar_k) for step k in 1..K."""
        return float(self.betas[k - 1]), float(self.alphas[k - 1]), float(self.alpha_bars[k - 1])

    def forward_marginal(self, x0: Array, eps: Array, k) -> Array:
        """Noised sample sqrt(abar_k)*x0 + sqrt(1-abar_k)*eps at step(s) k."""
        abar = self.alpha_bars[np.asarray(k) - 1]
        abar = np.reshape(abar, (-1, 1)) if np.ndim(abar) else abar
        return np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * eps


class Denoiser(Protocol):
    """Conditional noise predictor eps_hat(x_k, state, step)."""

    params: dict[str, Tensor]

    def forward(self, params: dict[str, Tensor], x_t: Tensor, obs: Array, k_feat: Array) -> Tensor: ...

    def forward_np(self, params: dict[str, Tensor], x: Array, obs: Array, k_feat: Array) -> Array: ...


class MlpDenoiser:
    """Dense denoiser over [noisy-action, observation, one-hot step]."""

    def __init__(self, obs_dim: int, chain_dim: int, steps: int, bank: SeedBank, hidden_sizes=(64, 64)):
        self.net = Mlp(
            [chain_dim + obs_dim + steps, *hidden_sizes, chain_dim],
            prefix="denoiser",
            seed=bank.seed_for("gdm-denoiser-init"),
        )
        self.params = self.net.params

    def forward(self, params: dict[str, Tensor], x_t: Tensor, obs: Array, k_feat: Array) -> Tensor:
        joined = T.concat([x_t, Tensor(np.concatenate([obs, k_feat], axis=1))], axis=1)
        return self.net.forward(params, joined)

    def forward_np(self, params: dict[str, Tensor], x: Array, obs: Array, k_feat: Array) -> Array:
        return self.net.forward_np(params, np.concatenate([x, obs, k_feat], axis=1))


DenoiserFactory = Callable[[int, int, int, SeedBank], Denoiser]


def chain_dim_for(space: AgentSpace) -> int:
    """Width of the vector the diffusion chain runs over."""
    if space.kind == "discrete":
        return int(sum(space.blocks))
    return space.head_dim


def actions_to_chain_targets(space: AgentSpace, actions: Array) -> Array:
    """Stored agent actions -> pre-squash chain-space regression targets.

    Continuous components pass through; discrete choices become signed
    one-hots at +-BLOCK_TARGET_SCALE so tanh of a perfect reconstruction
    decodes back to the same choice.
    """
    actions = np.atleast_2d(actions)
    s = BLOCK_TARGET_SCALE
    if space.kind == "continuous":
        return actions
    if space.kind == "hybrid":
        moves = np.full((actions.shape[0], space.n_moves), -s)
        moves[np.arange(actions.shape[0]), actions[:, 0].astype(np.int64)] = s
        return np.concatenate([moves, actions[:, 1:]], axis=1)
    _, l1, l2 = space.blocks
    idx = actions[:, 0].astype(np.int64)
    choices = np.stack([idx // (l1 * l2), (idx // l2) % l1, idx % l2], axis=1)
    out = np.full((actions.shape[0], sum(space.blocks)), -s)
    for col, sl in enumerate(block_slices(space.blocks)):
        out[np.arange(actions.shape[0]), sl.start + choices[:, col]] = s
    return out


class DiffusionPolicy:
    """Reverse-chain action sampler satisfying the agent's policy interface."""

    provides_target_actions = True

    def __init__(
        self,
        obs_dim: int,
        space: AgentSpace,
        td3: Td3Config,
        bank: SeedBank,
        *,
        schedule: NoiseSchedule | None = None,
        eta: float = 0.05,
        lr: float | None = None,
        hidden_sizes=(64, 64),
        denoiser_factory: DenoiserFactory | None = None,
    ):
        if eta < 0.0:
            raise ConfigurationError(f"denoising weight eta must be >= 0, got {eta}")
        self.space = space
        self.td3 = td3
        self.schedule = schedule or NoiseSchedule.linear()
        self.eta = float(eta)
        self.chain_dim = chain_dim_for(space)
        factory = denoiser_factory or (
            lambda o, c, k, b: MlpDenoiser(o, c, k, b, hidden_sizes=hidden_sizes)
        )
        self.denoiser = factory(obs_dim, self.chain_dim, self.schedule.steps, bank)
        self.params = self.denoiser.params
        self.target_params = clone_params(self.params)
        self.opt = Adam(self.params, lr=lr if lr is not None else td3.actor_lr)
        self.rng_act = bank.generator("gdm-act")
        self.rng_target = bank.generator("gdm-target")
        self.rng_train = bank.generator("gdm-train")

    # -- sampling -------------------------------------------------------------

    def _k_onehot(self, k: int, batch: int) -> Array:
        feat = np.zeros((batch, self.schedule.steps))
        feat[:, k - 1] = 1.0
        return feat

    def draw_chain_noise(self, batch: int, rng: np.random.Generator) -> tuple[Array, Array]:
        """(x_K, per-step noise for k = K..2) for one reverse pass."""
        x_init = rng.standard_normal((batch, self.chain_dim))
        z = rng.standard_normal((max(self.schedule.steps - 1, 0), batch, self.chain_dim))
        return x_init, z

    def chain_graph(self, params: dict[str, Tensor], obs: Array, x_init: Array, z: Array) -> Tensor:
        """Differentiable reverse chain; returns pre-squash x_0."""
        x = Tensor(x_init)
        for i, k in enumerate(range(self.schedule.steps, 0, -1)):
            beta, alpha, abar = self.schedule.at(k)
            eps_hat = self.denoiser.forward(params, x, obs, self._k_onehot(k, obs.shape[0]))
            x = (x - (beta / np.sqrt(1.0 - abar)) * eps_hat) * (1.0 / np.sqrt(alpha))
            if k > 1:
                x = x + np.sqrt(beta) * Tensor(z[i])
        return x

    def chain_np(self, params: dict[str, Tensor], obs: Array, rng: np.random.Generator) -> Array:
        """Graph-free reverse chain; returns pre-squash x_0."""
        x = rng.standard_normal((obs.shape[0], self.chain_dim))
        for k in range(self.schedule.steps, 0, -1):
            beta, alpha, abar = self.schedule.at(k)
            eps_hat = self.denoiser.forward_np(params, x, obs, self._k_onehot(k, obs.shape[0]))
            x = (x - (beta / np.sqrt(1.0 - abar)) * eps_hat) / np.sqrt(alpha)
            if k > 1:
                x = x + np.sqrt(beta) * rng.standard_normal(x.shape)
        return x

    def sample_head_np(self, obs: Array, rng: np.random.Generator, target: bool = False) -> Array:
        params = self.target_params if target else self.params
        return np.tanh(self.chain_np(params, np.atleast_2d(obs), rng))

    # -- the policy interface ---------------------------------------------------

    def act(self, obs: Array, mode: str, epsilon: float, eval_rng=None) -> Array:
        # the chain's own noise is the exploration mechanism; no extra
        # epsilon-greedy or Gaussian perturbation is layered on top
        rng = eval_rng if (mode == "eval" and eval_rng is not None) else self.rng_act
        return self.decode_head_np(self.sample_head_np(obs, rng))[0]

    def target_head_np(self, obs: Array) -> Array:
        return self.sample_head_np(obs, self.rng_target, target=True)

    def decode_head_np(self, head: Array) -> Array:
        head = np.atleast_2d(head)
        if self.space.kind == "continuous":
            return head
        if self.space.kind == "discrete":
            idx = logits_to_discrete_index(self.space.blocks, head)
            return idx.reshape(-1, 1).astype(np.float64)
        moves = head[:, : self.space.n_moves].argmax(axis=1, keepdims=True)
        return np.concatenate([moves.astype(np.float64), head[:, self.space.n_moves :]], axis=1)

    def update(self, critic, obs: Array, batch) -> float:
        zero_grads(self.params.values())
        zero_grads(critic.all_params())
        x_init, z = self.draw_chain_noise(obs.shape[0], self.rng_train)
        x0 = self.chain_graph(self.params, obs, x_init, z)
        loss = -self._expected_min_q(critic, obs, x0)
        if self.eta > 0.0:
            loss = loss + self.eta * self._denoising_penalty(obs, batch.actions)
        backward(loss)
        self.opt.step()
        return float(loss.data)

    def _expected_min_q(self, critic, obs: Array, x0: Tensor) -> Tensor:
        obs_t = Tensor(obs)
        if self.space.kind == "continuous":
            act_t = T.tanh(x0)
            q1 = critic.q_graph(critic.params1, critic.net1, obs_t, act_t)
            q2 = critic.q_graph(critic.params2, critic.net2, obs_t, act_t)
            return T.minimum(q1, q2).mean()
        if self.space.kind == "hybrid":
            moves = self.space.n_moves
            rep = T.concat([T.softmax(x0[:, :moves], axis=-1), T.tanh(x0[:, moves:])], axis=1)
            q1 = critic.q_graph(critic.params1, critic.net1, obs_t, rep)
            q2 = critic.q_graph(critic.params2, critic.net2, obs_t, rep)
            return T.minimum(q1, q2).mean()
        # discrete: expectation of the head values under the factored
        # block softmax of the pre-squash logits
        b, (m, l1, l2) = obs.shape[0], self.space.blocks
        s0, s1, s2 = block_slices(self.space.blocks)
        w = (
            T.softmax(x0[:, s0], axis=-1).reshape((b, m, 1, 1))
            * T.softmax(x0[:, s1], axis=-1).reshape((b, 1, l1, 1))
            * T.softmax(x0[:, s2], axis=-1).reshape((b, 1, 1, l2))
        ).reshape((b, m * l1 * l2))
        q1 = (w * critic.heads_graph(critic.params1, critic.net1, obs_t)).sum(axis=1)
        q2 = (w * critic.heads_graph(critic.params2, critic.net2, obs_t)).sum(axis=1)
        return T.minimum(q1, q2).mean()

    def _denoising_penalty(self, obs: Array, actions: Array) -> Tensor:
        """Mean squared error of the noise prediction on replayed actions."""
        targets = actions_to_chain_targets(self.space, actions)
        b = targets.shape[0]
        k = self.rng_train.integers(1, self.schedule.steps + 1, size=b)
        eps = self.rng_train.standard_normal((b, self.chain_dim))
        noisy = self.schedule.forward_marginal(targets, eps, k)
        k_feat = np.zeros((b, self.schedule.steps))
        k_feat[np.arange(b), k - 1] = 1.0
        eps_hat = self.denoiser.forward(self.params, Tensor(noisy), obs, k_feat)
        diff = eps_hat - Tensor(eps)
        return (diff * diff).sum(axis=1).mean()

    def soft_update_target(self, tau: float) -> None:
        from ..rl.td3 import soft_update

        soft_update(self.target_params, self.params, tau)

    def named_params(self) -> dict[str, Tensor]:
        out = dict(self.params)
        out.update({f"target::{k}": v for k, v in self.target_params.items()})
        return out
