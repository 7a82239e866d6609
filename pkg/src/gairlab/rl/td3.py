"""Twin Delayed DDPG (TD3) over the three action spaces.

Continuous follows the standard recipe (twin critics, min-target, delayed
deterministic actor, target smoothing). Discrete keeps the same twin-critic
machinery over per-action value heads with epsilon-greedy acting and a
softmax-relaxed actor gradient; targets use the argmax of the elementwise
minimum of the two target heads (clipped double Q-learning). Hybrid glues a
5-way move head to continuous power heads.

Plugin hook points are constructor arguments: an alternative policy object
(diffusion), a critic-update hook (adversarial critic), a state encoder
(VAE compression) and a hybrid-action decoder (latent powers).
"""

from __future__ import annotations

from typing import Callable, Protocol

import numpy as np

from ..errors import ConfigurationError, UsageError
from ..nn.layers import Mlp, clone_params
from ..nn.optim import Adam
from ..nn import tensor as T
from ..nn.tensor import Tensor, backward, zero_grads
from ..seeding import SeedBank
from .buffer import Batch, ReplayBuffer, Transition
from .config import Td3Config
from .spaces import AgentSpace, critic_repr, logits_to_discrete_index, one_hot

Array = np.ndarray


def bellman_target(rewards: Array, dones: Array, gamma: float, min_target_q: Array) -> Array:
    """r + (1 - done) * gamma * min(Q1', Q2')."""
    if not 0.0 < gamma < 1.0:
        raise ConfigurationError(f"gamma must be in (0, 1), got {gamma}")
    return rewards + (1.0 - dones) * gamma * min_target_q


def soft_update(target: dict[str, Tensor], online: dict[str, Tensor], tau: float) -> None:
    """target <- (1 - tau) * target + tau * online, elementwise."""
    for name, src in online.items():
        dst = target[name]
        if dst.data.shape != src.data.shape:
            raise UsageError(f"soft_update shape mismatch at {name}")
        dst.data *= 1.0 - tau
        dst.data += tau * src.data


class ActorNet(Protocol):
    """Anything that maps observations to a pre-activation action head."""

    params: dict[str, Tensor]

    def forward(self, params: dict[str, Tensor], x: Tensor) -> Tensor: ...

    def forward_np(self, params: dict[str, Tensor], x: Array) -> Array: ...


class Policy(Protocol):
    """What the agent needs from a policy (MLP, transformer, or diffusion)."""

    provides_target_actions: bool

    def act(self, obs: Array, mode: str, epsilon: float, eval_rng=None) -> Array: ...

    def target_head_np(self, obs: Array) -> Array: ...

    def decode_head_np(self, head: Array) -> Array: ...

    def update(self, critic: "TwinCritic", obs: Array, batch: Batch) -> float: ...

    def soft_update_target(self, tau: float) -> None: ...

    def named_params(self) -> dict[str, Tensor]: ...


class DeterministicActorPolicy:
    """The vanilla TD3 policy over any actor network (MLP or token encoder)."""

    def __init__(self, net: ActorNet, space: AgentSpace, td3: Td3Config, bank: SeedBank):
        self.net = net
        self.space = space
        self.td3 = td3
        self.params = net.params
        self.target_params = clone_params(net.params)
        self.opt = Adam(self.params, lr=td3.actor_lr)
        self.rng_act = bank.generator("policy-act")

    # discrete-mode targets use the double-Q argmax rule, not the actor
    @property
    def provides_target_actions(self) -> bool:
        return self.space.kind != "discrete"

    # -- forward helpers ---------------------------------------------------

    def _activate_np(self, head: Array) -> Array:
        if self.space.kind == "continuous":
            return np.tanh(head)
        if self.space.kind == "discrete":
            return head  # logits
        moves = self.space.n_moves
        return np.concatenate([head[:, :moves], np.tanh(head[:, moves:])], axis=1)

    def head_np(self, obs: Array, target: bool = False) -> Array:
        params = self.target_params if target else self.params
        return self._activate_np(self.net.forward_np(params, np.atleast_2d(obs)))

    def target_head_np(self, obs: Array) -> Array:
        return self.head_np(obs, target=True)

    def decode_head_np(self, head: Array) -> Array:
        head = np.atleast_2d(head)
        if self.space.kind == "continuous":
            return head
        if self.space.kind == "discrete":
            return head.argmax(axis=1, keepdims=True).astype(np.float64)
        moves = head[:, : self.space.n_moves].argmax(axis=1, keepdims=True)
        return np.concatenate([moves.astype(np.float64), head[:, self.space.n_moves :]], axis=1)

    # -- acting -------------------------------------------------------------

    def act(self, obs: Array, mode: str, epsilon: float, eval_rng=None) -> Array:
        head = self.head_np(obs)[0]
        kind = self.space.kind
        if kind == "continuous":
            if mode == "train":
                noise = self.rng_act.normal(0.0, self.td3.exploration_noise, size=head.shape)
                head = head + noise
            return np.clip(head, -1.0, 1.0)
        if kind == "discrete":
            greedy = int(head.argmax())
            if mode == "train" and self.rng_act.uniform() < epsilon:
                return np.array([self.rng_act.integers(self.space.n_actions)], dtype=np.float64)
            return np.array([greedy], dtype=np.float64)
        # hybrid: epsilon-greedy move + Gaussian-perturbed powers
        moves = self.space.n_moves
        move = int(head[:moves].argmax())
        params = head[moves:]
        if mode == "train":
            if self.rng_act.uniform() < epsilon:
                move = int(self.rng_act.integers(moves))
            params = params + self.rng_act.normal(0.0, self.td3.exploration_noise, size=params.shape)
        return np.concatenate([[float(move)], np.clip(params, -1.0, 1.0)])

    # -- learning -----------------------------------------------------------

    def update(self, critic: "TwinCritic", obs: Array, batch: Batch) -> float:
        zero_grads(self.params.values())
        zero_grads(critic.all_params())
        obs_t = Tensor(obs)
        head = self.net.forward(self.params, obs_t)
        kind = self.space.kind
        if kind == "continuous":
            action_t = T.tanh(head)
            loss = -critic.q_graph(critic.params1, critic.net1, obs_t, action_t).mean()
        elif kind == "discrete":
            probs = T.softmax(head, axis=-1)
            q1 = critic.heads_graph(critic.params1, critic.net1, obs_t)
            loss = -(probs * q1).sum(axis=1).mean()
        else:
            moves = self.space.n_moves
            rep = T.concat([T.softmax(head[:, :moves], axis=-1), T.tanh(head[:, moves:])], axis=1)
            loss = -critic.q_graph(critic.params1, critic.net1, obs_t, rep).mean()
        backward(loss)
        self.opt.step()
        return float(loss.data)

    def soft_update_target(self, tau: float) -> None:
        soft_update(self.target_params, self.params, tau)

    def named_params(self) -> dict[str, Tensor]:
        out = dict(self.params)
        out.update({f"target::{k}": v for k, v in self.target_params.items()})
        return out


class TwinCritic:
    """Two independent value networks plus their target copies.

    Continuous/hybrid critics take (obs, action-repr) and emit one value;
    discrete critics take obs and emit one value per table action.
    """

    def __init__(self, obs_dim: int, space: AgentSpace, td3: Td3Config, bank: SeedBank):
        self.space = space
        self.heads_style = space.kind == "discrete"
        out_dim = space.n_actions if self.heads_style else 1
        in_dim = obs_dim + (0 if self.heads_style else space.critic_repr_dim)
        dims = [in_dim, *td3.hidden_sizes, out_dim]
        self.net1 = Mlp(dims, prefix="critic1", seed=bank.seed_for("critic1-init"))
        self.net2 = Mlp(dims, prefix="critic2", seed=bank.seed_for("critic2-init"))
        self.params1 = self.net1.params
        self.params2 = self.net2.params
        self.target1 = clone_params(self.params1)
        self.target2 = clone_params(self.params2)
        self.opt = Adam({**self.params1, **self.params2}, lr=td3.critic_lr)

    def all_params(self):
        return list(self.params1.values()) + list(self.params2.values())

    # -- numpy paths (targets, acting) --------------------------------------

    def q_np(self, params: dict[str, Tensor], net: Mlp, obs: Array, rep: Array) -> Array:
        return net.forward_np(params, np.concatenate([obs, rep], axis=1))[:, 0]

    def heads_np(self, params: dict[str, Tensor], net: Mlp, obs: Array) -> Array:
        return net.forward_np(params, obs)

    def min_target_np(self, obs: Array, rep: Array) -> Array:
        q1 = self.q_np(self.target1, self.net1, obs, rep)
        q2 = self.q_np(self.target2, self.net2, obs, rep)
        return np.minimum(q1, q2)

    def min_target_heads_np(self, obs: Array) -> Array:
        q1 = self.heads_np(self.target1, self.net1, obs)
        q2 = self.heads_np(self.target2, self.net2, obs)
        return np.minimum(q1, q2)

    # -- graph paths (losses) ------------------------------------------------

    def q_graph(self, params: dict[str, Tensor], net: Mlp, obs_t: Tensor, act_t: Tensor) -> Tensor:
        joined = T.concat([obs_t, act_t], axis=1)
        return net.forward(params, joined)[:, 0]

    def heads_graph(self, params: dict[str, Tensor], net: Mlp, obs_t: Tensor) -> Tensor:
        return net.forward(params, obs_t)

    def q_of_actions_graph(self, params: dict[str, Tensor], net: Mlp, obs_t: Tensor, actions: Array) -> Tensor:
        """Q(s, a) for stored batch actions, per critic net."""
        if self.heads_style:
            idx = actions[:, 0].astype(np.int64)
            return T.gather(self.heads_graph(params, net, obs_t), idx)
        rep = critic_repr(self.space, actions)
        return self.q_graph(params, net, obs_t, Tensor(rep))

    # -- vanilla regression ----------------------------------------------------

    def update_mse(self, obs: Array, actions: Array, targets: Array) -> tuple[float, float]:
        zero_grads(self.all_params())
        obs_t = Tensor(obs)
        y = Tensor(targets)
        q1 = self.q_of_actions_graph(self.params1, self.net1, obs_t, actions)
        q2 = self.q_of_actions_graph(self.params2, self.net2, obs_t, actions)
        d1 = q1 - y
        d2 = q2 - y
        loss1 = (d1 * d1).mean()
        loss2 = (d2 * d2).mean()
        backward(loss1 + loss2)
        self.opt.step()
        return float(loss1.data), float(loss2.data)

    def soft_update_targets(self, tau: float) -> None:
        soft_update(self.target1, self.params1, tau)
        soft_update(self.target2, self.params2, tau)

    def named_params(self) -> dict[str, Tensor]:
        out = {**self.params1, **self.params2}
        out.update({f"target::{k}": v for k, v in {**self.target1, **self.target2}.items()})
        return out


CriticUpdater = Callable[[TwinCritic, Array, Array, Array], dict[str, float]]


class Td3Agent:
    """TD3 with optional generative-model plugins wired at construction."""

    def __init__(
        self,
        obs_dim: int,
        space: AgentSpace,
        td3: Td3Config,
        seed: int,
        *,
        total_steps: int = 0,
        actor_net_factory: Callable[[int, int, SeedBank], ActorNet] | None = None,
        policy_factory: Callable[["Td3Agent"], Policy] | None = None,
        critic_updater: CriticUpdater | None = None,
        state_encoder=None,
        hybrid_adapter=None,
    ):
        self.space = space
        self.td3 = td3
        self.bank = SeedBank(seed)
        self.raw_obs_dim = obs_dim
        self.state_encoder = state_encoder
        self.hybrid_adapter = hybrid_adapter
        self.obs_dim = state_encoder.latent_dim if state_encoder is not None else obs_dim
        self.total_steps = int(total_steps)

        if policy_factory is not None:
            self.policy: Policy = policy_factory(self)
        else:
            factory = actor_net_factory or (
                lambda in_dim, head_dim, bank: Mlp(
                    [in_dim, *td3.hidden_sizes, head_dim],
                    prefix="actor",
                    seed=bank.seed_for("actor-init"),
                )
            )
            net = factory(self.obs_dim, space.head_dim, self.bank)
            self.policy = DeterministicActorPolicy(net, space, td3, self.bank)

        self.critic = TwinCritic(self.obs_dim, space, td3, self.bank)
        self.critic_updater = critic_updater
        aux_dim = 2 if hybrid_adapter is not None else 0
        self.buffer = ReplayBuffer(td3.buffer_capacity, obs_dim, space.action_dim, aux_dim)
        self.rng_sample = self.bank.generator("batch-sample")
        self.rng_target = self.bank.generator("target-noise")
        self.rng_warmup = self.bank.generator("warmup-act")
        self.env_steps = 0
        self.update_calls = 0
        self.critic_updates = 0
        self.actor_updates = 0

    # -- observation interface ----------------------------------------------

    def encode_obs(self, obs: Array) -> Array:
        if self.state_encoder is None:
            return obs
        return self.state_encoder.encode_np(obs)

    @property
    def wants_aux(self) -> bool:
        return self.hybrid_adapter is not None

    # -- acting ----------------------------------------------------------------

    def epsilon(self) -> float:
        if self.total_steps <= 0:
            return self.td3.eps_end
        return self.td3.epsilon_at(self.env_steps, self.total_steps)

    def select_action(self, obs: Array, mode: str = "train", eval_rng=None) -> Array:
        enc = self.encode_obs(obs)
        return self.policy.act(enc, mode, self.epsilon(), eval_rng=eval_rng)

    def random_action(self) -> Array:
        rng = self.rng_warmup
        kind = self.space.kind
        if kind == "continuous":
            return rng.uniform(-1.0, 1.0, size=4)
        if kind == "discrete":
            return np.array([rng.integers(self.space.n_actions)], dtype=np.float64)
        move = float(rng.integers(self.space.n_moves))
        return np.concatenate([[move], rng.uniform(-1.0, 1.0, size=self.space.param_dim)])

    def to_env_action(self, agent_action: Array, obs: Array) -> Array:
        """Agent-space action -> what the environment decodes."""
        if self.hybrid_adapter is None:
            if self.space.kind == "discrete":
                return np.asarray(agent_action).reshape(-1)[:1]
            return agent_action
        move = int(agent_action[0])
        z = np.asarray(agent_action[1:], dtype=np.float64)
        powers = self.hybrid_adapter.decode_np(self.encode_obs(obs), move, z)
        return np.concatenate([[float(move)], powers])

    # -- experience ---------------------------------------------------------------

    def record(
        self,
        obs: Array,
        action: Array,
        reward: float,
        next_obs: Array,
        done: bool,
        aux: Array | None = None,
    ) -> None:
        self.buffer.push(Transition(obs, action, reward, next_obs, done, aux))
        self.env_steps += 1

    # -- learning -------------------------------------------------------------------

    def compute_targets(self, batch: Batch, next_obs: Array) -> Array:
        td3 = self.td3
        if not self.policy.provides_target_actions:
            # discrete double-Q rule: argmax of the elementwise min of targets
            min_heads = self.critic.min_target_heads_np(next_obs)
            min_q = min_heads[np.arange(min_heads.shape[0]), min_heads.argmax(axis=1)]
            return bellman_target(batch.rewards, batch.dones, td3.gamma, min_q)

        head = self.policy.target_head_np(next_obs)
        kind = self.space.kind
        if kind == "continuous":
            noise = np.clip(
                self.rng_target.normal(0.0, td3.target_noise, size=head.shape),
                -td3.noise_clip,
                td3.noise_clip,
            )
            rep = np.clip(head + noise, -1.0, 1.0)
            min_q = self.critic.min_target_np(next_obs, rep)
        elif kind == "hybrid":
            moves = self.space.n_moves
            params = head[:, moves:]
            noise = np.clip(
                self.rng_target.normal(0.0, td3.target_noise, size=params.shape),
                -td3.noise_clip,
                td3.noise_clip,
            )
            params = np.clip(params + noise, -1.0, 1.0)
            rep = np.concatenate([one_hot(head[:, :moves].argmax(axis=1), moves), params], axis=1)
            min_q = self.critic.min_target_np(next_obs, rep)
        else:
            # discrete space with a target policy (diffusion): no smoothing
            idx = logits_to_discrete_index(self.space.blocks, head)
            rows = np.arange(idx.shape[0])
            q1 = self.critic.heads_np(self.critic.target1, self.critic.net1, next_obs)[rows, idx]
            q2 = self.critic.heads_np(self.critic.target2, self.critic.net2, next_obs)[rows, idx]
            min_q = np.minimum(q1, q2)
        return bellman_target(batch.rewards, batch.dones, td3.gamma, min_q)

    def update(self) -> dict[str, float]:
        """One critic step, plus a delayed policy/target step.

        When ``update_every > 1`` only every n-th call does work, thinning
        the gradient-step schedule without touching the acting schedule.
        """
        if len(self.buffer) < self.td3.batch_size:
            return {}
        self.update_calls += 1
        if (self.update_calls - 1) % self.td3.update_every != 0:
            return {}
        batch = self.buffer.sample(self.td3.batch_size, self.rng_sample)
        metrics: dict[str, float] = {}
        if self.state_encoder is not None:
            metrics.update(self.state_encoder.train_step(batch.states))
        obs = self.encode_obs_batch(batch.states)
        next_obs = self.encode_obs_batch(batch.next_states)

        targets = self.compute_targets(batch, next_obs)
        if self.critic_updater is not None:
            metrics.update(self.critic_updater(self.critic, obs, batch.actions, targets))
        else:
            l1, l2 = self.critic.update_mse(obs, batch.actions, targets)
            metrics["critic1_loss"] = l1
            metrics["critic2_loss"] = l2
        self.critic_updates += 1

        if self.critic_updates % self.td3.policy_delay == 0:
            metrics["actor_loss"] = self.policy.update(self.critic, obs, batch)
            self.actor_updates += 1
            if self.hybrid_adapter is not None:
                metrics.update(self.hybrid_adapter.train_step(obs, batch))
            self.policy.soft_update_target(self.td3.tau)
            self.critic.soft_update_targets(self.td3.tau)
        return metrics

    def encode_obs_batch(self, states: Array) -> Array:
        if self.state_encoder is None:
            return states
        return self.state_encoder.encode_np(states)

    # -- persistence -----------------------------------------------------------------

    def named_params(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for k, v in self.policy.named_params().items():
            out[f"policy/{k}"] = v
        for k, v in self.critic.named_params().items():
            out[f"critic/{k}"] = v
        for extra_name, extra in (
            ("encoder", self.state_encoder),
            ("hybrid", self.hybrid_adapter),
            ("value-adversary", self.critic_updater),
        ):
            if extra is not None and hasattr(extra, "named_params"):
                for k, v in extra.named_params().items():
                    out[f"{extra_name}/{k}"] = v
        return out
