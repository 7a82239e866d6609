"""Least-squares adversarial training for the value networks.

A discriminator D(s, a, q) -> (0, 1) learns to separate Bellman targets
(real) from the critics' current estimates (fake); the critics double as
generators, minimizing the usual regression loss plus a weighted
least-squares adversarial term that pulls their estimates toward what the
discriminator accepts as target-like. With the adversarial weight at zero
the critic update degenerates to the vanilla regression bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from ..nn import tensor as T
from ..nn.layers import Mlp
from ..nn.optim import Adam
from ..nn.tensor import Tensor, backward, zero_grads
from ..rl.config import Td3Config
from ..rl.spaces import AgentSpace, critic_repr, one_hot
from ..seeding import SeedBank

Array = np.ndarray


class LeastSquaresValueAdversary:
    """Critic-update hook implementing the adversarial value objective."""

    def __init__(
        self,
        obs_dim: int,
        space: AgentSpace,
        td3: Td3Config,
        bank: SeedBank,
        *,
        lambda_adv: float = 0.1,
        lambda_mse: float = 1.0,
        hidden_sizes=(64, 64),
        lr: float | None = None,
    ):
        if lambda_adv < 0.0 or lambda_mse < 0.0:
            raise ConfigurationError("adversarial and anchor weights must be >= 0")
        self.space = space
        self.lambda_adv = float(lambda_adv)
        self.lambda_mse = float(lambda_mse)
        a_dim = space.n_actions if space.kind == "discrete" else space.critic_repr_dim
        self.disc = Mlp(
            [obs_dim + a_dim + 1, *hidden_sizes, 1],
            output_activation="sigmoid",
            prefix="disc",
            seed=bank.seed_for("disc-init"),
        )
        self.opt = Adam(self.disc.params, lr=lr if lr is not None else td3.critic_lr)

    # -- representations -------------------------------------------------------

    def action_repr(self, actions: Array) -> Array:
        if self.space.kind == "discrete":
            return one_hot(np.atleast_2d(actions)[:, 0], self.space.n_actions)
        return critic_repr(self.space, actions)

    def _q_np(self, critic, params, net, obs: Array, actions: Array, rep: Array) -> Array:
        if critic.heads_style:
            heads = critic.heads_np(params, net, obs)
            idx = np.atleast_2d(actions)[:, 0].astype(np.int64)
            return heads[np.arange(heads.shape[0]), idx]
        return critic.q_np(params, net, obs, rep)

    def _disc_graph(self, obs_rep: Array, q_col: Tensor) -> Tensor:
        joined = T.concat([Tensor(obs_rep), q_col], axis=1)
        return self.disc.forward(self.disc.params, joined)[:, 0]

    # -- the CriticUpdater hook ---------------------------------------------------

    def __call__(self, critic, obs: Array, actions: Array, targets: Array) -> dict[str, float]:
        rep = self.action_repr(actions)
        obs_rep = np.concatenate([obs, rep], axis=1)
        b = obs.shape[0]

        # 1) discriminator step: targets are real, current estimates are fake
        q1 = self._q_np(critic, critic.params1, critic.net1, obs, actions, rep)
        q2 = self._q_np(critic, critic.params2, critic.net2, obs, actions, rep)
        zero_grads(self.disc.params.values())
        d_real = self._disc_graph(obs_rep, Tensor(targets.reshape(b, 1)))
        d_fake1 = self._disc_graph(obs_rep, Tensor(q1.reshape(b, 1)))
        d_fake2 = self._disc_graph(obs_rep, Tensor(q2.reshape(b, 1)))
        real_term = ((d_real - 1.0) * (d_real - 1.0)).mean()
        fake_term = 0.5 * ((d_fake1 * d_fake1).mean() + (d_fake2 * d_fake2).mean())
        disc_loss = real_term + fake_term
        backward(disc_loss)
        self.opt.step()

        # 2) generator step: regression anchor plus the adversarial pull
        zero_grads(critic.all_params())
        zero_grads(self.disc.params.values())
        obs_t = Tensor(obs)
        y = Tensor(targets)
        q1g = critic.q_of_actions_graph(critic.params1, critic.net1, obs_t, actions)
        q2g = critic.q_of_actions_graph(critic.params2, critic.net2, obs_t, actions)
        d1 = q1g - y
        d2 = q2g - y
        loss1 = (d1 * d1).mean()
        loss2 = (d2 * d2).mean()
        g1 = self._disc_graph(obs_rep, q1g.reshape((b, 1)))
        g2 = self._disc_graph(obs_rep, q2g.reshape((b, 1)))
        adv = 0.5 * (((g1 - 1.0) * (g1 - 1.0)).mean() + ((g2 - 1.0) * (g2 - 1.0)).mean())
        total = self.lambda_mse * (loss1 + loss2) + self.lambda_adv * adv
        backward(total)
        critic.opt.step()
        return {
            "critic1_loss": float(loss1.data),
            "critic2_loss": float(loss2.data),
            "disc_loss": float(disc_loss.data),
            "adv_q_loss": float(adv.data),
        }

    def named_params(self) -> dict[str, Tensor]:
        return dict(self.disc.params)
