"""Learned latent space for the continuous half of hybrid actions.

A conditional VAE embeds each discrete move in a small table and learns to
decode (state, move-embedding, latent z) into the two transmit-power
components. The agent's continuous head then outputs z instead of raw
powers, so different moves can map the same latent to different optimal
powers. Training reconstructs the powers actually applied in replayed
transitions, conditioned on their state and move.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, UsageError
from ..nn import tensor as T
from ..nn.layers import Mlp, glorot
from ..nn.optim import Adam
from ..nn.tensor import Tensor, backward, zero_grads
from ..rl.buffer import Batch
from ..seeding import SeedBank

Array = np.ndarray

N_MOVES = 5
N_POWERS = 2


class HybridLatentModel:
    """Move-embedding table plus conditional encoder/decoder networks."""

    def __init__(
        self,
        state_dim: int,
        *,
        embed_dim: int = 6,
        z_dim: int = 4,
        beta_kl: float = 0.1,
        hidden_sizes=(64, 64),
        seed: int = 0,
    ):
        if embed_dim < 1 or z_dim < 1:
            raise ConfigurationError("embedding and latent dims must be >= 1")
        if beta_kl < 0.0:
            raise ConfigurationError(f"beta_kl must be >= 0, got {beta_kl}")
        self.state_dim = int(state_dim)
        self.embed_dim = int(embed_dim)
        self.z_dim = int(z_dim)
        self.beta_kl = float(beta_kl)
        rng = np.random.Generator(np.random.PCG64(seed))
        self.embed = Tensor(glorot(rng, N_MOVES, embed_dim), requires_grad=True)
        self.encoder = Mlp(
            [state_dim + embed_dim + N_POWERS, *hidden_sizes, 2 * z_dim],
            prefix="hyb-enc",
            seed=seed + 1,
        )
        self.decoder = Mlp(
            [state_dim + embed_dim + z_dim, *hidden_sizes, N_POWERS],
            prefix="hyb-dec",
            seed=seed + 2,
        )
        self.params = {"hyb-embed": self.embed, **self.encoder.params, **self.decoder.params}

    def _embed_rows(self, moves: Array) -> Array:
        moves = np.asarray(moves, dtype=np.int64).reshape(-1)
        if moves.size and (moves.min() < 0 or moves.max() >= N_MOVES):
            raise UsageError(f"move index out of range [0, {N_MOVES}): {moves}")
        return moves

    # -- decoding (acting path) --------------------------------------------------

    def decode_np(self, states: Array, moves, z: Array) -> Array:
        """tanh(decoder(state, embed[move], z)) -> power components in [-1, 1]."""
        states = np.atleast_2d(states)
        z = np.atleast_2d(z)
        rows = self._embed_rows(moves)
        emb = self.embed.data[rows]
        joined = np.concatenate([states, emb, z], axis=1)
        return np.tanh(self.decoder.forward_np(self.decoder.params, joined))

    # -- conditional-VAE training graph -------------------------------------------

    def loss_graph(self, states: Array, moves: Array, powers: Array, eps: Array):
        """(total, reconstruction, kl) over (state, move, applied-powers) triples.

        Per-sample quantities averaged over the batch: reconstruction sums
        over power components, KL over latent coordinates, keeping
        ``beta_kl`` on the same scale for any target width.
        """
        rows = self._embed_rows(moves)
        x = Tensor(np.atleast_2d(states))
        p = Tensor(np.atleast_2d(powers))
        emb = T.take_rows(self.embed, rows)
        enc_in = T.concat([x, emb, p], axis=1)
        enc = self.encoder.forward(self.encoder.params, enc_in)
        mu = enc[:, : self.z_dim]
        logvar = enc[:, self.z_dim :]
        z = mu + T.exp(0.5 * logvar) * Tensor(eps)
        dec_in = T.concat([x, emb, z], axis=1)
        recon_p = T.tanh(self.decoder.forward(self.decoder.params, dec_in))
        diff = recon_p - p
        recon = (diff * diff).sum(axis=1).mean()
        kl = (0.5 * (T.exp(logvar) + mu * mu - 1.0 - logvar)).sum(axis=1).mean()
        return recon + self.beta_kl * kl, recon, kl

    def encode_np(self, states: Array, moves, powers: Array) -> tuple[Array, Array]:
        """(mu, logvar) of z given a (state, move, powers) triple."""
        rows = self._embed_rows(moves)
        joined = np.concatenate(
            [np.atleast_2d(states), self.embed.data[rows], np.atleast_2d(powers)], axis=1
        )
        out = self.encoder.forward_np(self.encoder.params, joined)
        return out[:, : self.z_dim], out[:, self.z_dim :]


class HybridLatentAdapter:
    """Agent-facing adapter: latent decoding plus one online train step."""

    def __init__(self, model: HybridLatentModel, bank: SeedBank, *, lr: float = 1e-3):
        self.model = model
        self.opt = Adam(model.params, lr=lr)
        self.rng = bank.generator("hybrid-train")

    @property
    def z_dim(self) -> int:
        return self.model.z_dim

    def decode_np(self, enc_obs: Array, move: int, z: Array) -> Array:
        return self.model.decode_np(enc_obs, [move], z)[0]

    def train_step(self, obs: Array, batch: Batch) -> dict[str, float]:
        if batch.aux is None:
            raise UsageError("hybrid-latent training needs applied-power aux data")
        moves = batch.actions[:, 0]
        eps = self.rng.standard_normal((obs.shape[0], self.model.z_dim))
        zero_grads(self.model.params.values())
        total, recon, kl = self.model.loss_graph(obs, moves, batch.aux, eps)
        backward(total)
        self.opt.step()
        return {
            "hybrid_loss": float(total.data),
            "hybrid_recon": float(recon.data),
            "hybrid_kl": float(kl.data),
        }

    def named_params(self) -> dict[str, Tensor]:
        return dict(self.model.params)
