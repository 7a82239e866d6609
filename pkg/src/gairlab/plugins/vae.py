"""Variational autoencoder that compresses observations for the agent.

The encoder maps an observation to a diagonal-Gaussian posterior over a
low-dimensional latent; the agent consumes the posterior mean as its
state. Training runs online against replayed observations — one gradient
step per agent update — with the usual reconstruction + weighted-KL
objective.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, NumericError
from ..nn import tensor as T
from ..nn.layers import Mlp
from ..nn.optim import Adam
from ..nn.tensor import Tensor, backward, zero_grads
from ..seeding import SeedBank

Array = np.ndarray


class VaeModel:
    """Encoder/decoder pair with a weighted ELBO objective."""

    def __init__(
        self,
        state_dim: int,
        latent_dim: int = 16,
        *,
        beta_kl: float = 0.5,
        hidden_sizes=(64, 64),
        seed: int = 0,
    ):
        if latent_dim < 1:
            raise ConfigurationError(f"latent dim must be >= 1, got {latent_dim}")
        if latent_dim >= state_dim:
            raise ConfigurationError(
                f"latent dim {latent_dim} must be smaller than state dim {state_dim}"
            )
        if beta_kl < 0.0:
            raise ConfigurationError(f"beta_kl must be >= 0, got {beta_kl}")
        self.state_dim = int(state_dim)
        self.latent_dim = int(latent_dim)
        self.beta_kl = float(beta_kl)
        self.encoder = Mlp([state_dim, *hidden_sizes, 2 * latent_dim], prefix="vae-enc", seed=seed)
        self.decoder = Mlp([latent_dim, *hidden_sizes, state_dim], prefix="vae-dec", seed=seed + 1)
        self.params = {**self.encoder.params, **self.decoder.params}

    # -- numpy paths -----------------------------------------------------------

    def encode_np(self, states: Array) -> tuple[Array, Array]:
        """(mu, logvar) of the posterior for a batch of states."""
        out = self.encoder.forward_np(self.encoder.params, np.atleast_2d(states))
        return out[:, : self.latent_dim], out[:, self.latent_dim :]

    def decode_np(self, z: Array) -> Array:
        return self.decoder.forward_np(self.decoder.params, np.atleast_2d(z))

    def reconstruct_np(self, states: Array) -> Array:
        """Deterministic round trip through the posterior mean."""
        mu, _ = self.encode_np(states)
        return self.decode_np(mu)

    def sample_np(self, states: Array, rng: np.random.Generator) -> tuple[Array, Array, Array]:
        """(mu, logvar, z) with z reparameterized: mu + exp(logvar/2) * eps."""
        mu, logvar = self.encode_np(states)
        z = mu + np.exp(0.5 * logvar) * rng.standard_normal(mu.shape)
        return mu, logvar, z

    # -- training graph -----------------------------------------------------------

    def loss_graph(self, states: Array, eps: Array) -> tuple[Tensor, Tensor, Tensor]:
        """(total, reconstruction, kl) for one reparameterized sample.

        Both terms are per-sample quantities averaged over the batch: the
        reconstruction error sums over state coordinates and the KL sums
        over latent coordinates, so ``beta_kl`` trades them off on the
        same scale regardless of the state width.
        """
        x = Tensor(np.atleast_2d(states))
        enc = self.encoder.forward(self.encoder.params, x)
        mu = enc[:, : self.latent_dim]
        logvar = enc[:, self.latent_dim :]
        z = mu + T.exp(0.5 * logvar) * Tensor(eps)
        recon_x = self.decoder.forward(self.decoder.params, z)
        diff = recon_x - x
        recon = (diff * diff).sum(axis=1).mean()
        kl = (0.5 * (T.exp(logvar) + mu * mu - 1.0 - logvar)).sum(axis=1).mean()
        return recon + self.beta_kl * kl, recon, kl


def normalized_mse(original: Array, reconstructed: Array) -> float:
    """Reconstruction MSE scaled by the per-component variance of the data."""
    original = np.atleast_2d(original)
    reconstructed = np.atleast_2d(reconstructed)
    err = float(np.mean((reconstructed - original) ** 2))
    spread = float(np.mean((original - original.mean(axis=0)) ** 2))
    if spread == 0.0:
        raise NumericError("data has zero variance; normalized MSE is undefined")
    return err / spread


class VaeStateEncoder:
    """Agent-facing adapter: deterministic encoding + one online train step."""

    def __init__(self, model: VaeModel, bank: SeedBank, *, lr: float = 1e-3):
        self.model = model
        self.opt = Adam(model.params, lr=lr)
        self.rng = bank.generator("vae-train")

    @property
    def latent_dim(self) -> int:
        return self.model.latent_dim

    def encode_np(self, obs: Array) -> Array:
        mu, _ = self.model.encode_np(obs)
        return mu[0] if np.ndim(obs) == 1 else mu

    def train_step(self, states: Array) -> dict[str, float]:
        states = np.atleast_2d(states)
        eps = self.rng.standard_normal((states.shape[0], self.model.latent_dim))
        zero_grads(self.model.params.values())
        total, recon, kl = self.model.loss_graph(states, eps)
        if not np.isfinite(total.data):
            raise NumericError("VAE loss diverged (non-finite ELBO)")
        backward(total)
        self.opt.step()
        return {
            "vae_loss": float(total.data),
            "vae_recon": float(recon.data),
            "vae_kl": float(kl.data),
        }

    def nmse(self, states: Array) -> float:
        return normalized_mse(states, self.model.reconstruct_np(states))

    def named_params(self) -> dict[str, Tensor]:
        return dict(self.model.params)
