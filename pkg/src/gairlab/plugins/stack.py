"""Declarative enhancement stacks and their composition into agents.

A stack is a set of flags (plus plugin hyperparameters) naming which
generative-model enhancements wrap the base TD3 agent. Composition wires
them in a fixed internal order — state compression first, then the policy
choice, then the critic-update choice — so declaring flags in any order
yields the same agent. An empty stack composes to the vanilla agent.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from ..env.config import EnvConfig
from ..errors import ConfigurationError
from ..rl.config import Td3Config
from ..rl.spaces import agent_space_for
from ..rl.td3 import Td3Agent
from ..seeding import SeedBank
from .attention import TokenEncoder, TransformerDenoiser
from .diffusion import DiffusionPolicy, NoiseSchedule
from .gan import LeastSquaresValueAdversary
from .hybrid_latent import HybridLatentAdapter, HybridLatentModel
from .vae import VaeModel, VaeStateEncoder

FLAG_ORDER = (
    "gdm_policy",
    "gan_critic",
    "transformer_actor",
    "transformer_denoiser",
    "vae_state",
    "vae_hybrid_action",
)


@dataclass(frozen=True)
class EnhancementStack:
    """Which enhancements are active, and their hyperparameters."""

    gdm_policy: bool = False
    gan_critic: bool = False
    transformer_actor: bool = False
    transformer_denoiser: bool = False
    vae_state: bool = False
    vae_hybrid_action: bool = False

    gdm_steps: int = 5
    gdm_beta_start: float = 1e-4
    gdm_beta_end: float = 0.1
    gdm_eta: float = 0.05
    gan_lambda_adv: float = 0.1
    gan_lambda_mse: float = 1.0
    vae_latent_dim: int = 16
    vae_beta_kl: float = 0.5
    vae_lr: float = 1e-3
    hybrid_embed_dim: int = 6
    hybrid_z_dim: int = 4
    hybrid_beta_kl: float = 0.1
    hybrid_lr: float = 1e-3
    attention_dim: int = 64
    attention_heads: int = 2
    attention_blocks: int = 2

    def __post_init__(self):
        if self.gdm_policy and self.transformer_actor:
            raise ConfigurationError(
                "gdm-policy and transformer-actor are mutually exclusive: the "
                "diffusion chain replaces the actor (use transformer-denoiser "
                "to put attention inside it)"
            )
        if self.transformer_denoiser and not self.gdm_policy:
            raise ConfigurationError("transformer-denoiser requires gdm-policy")
        if self.gdm_steps < 1:
            raise ConfigurationError(f"gdm_steps must be >= 1, got {self.gdm_steps}")
        if self.gdm_eta < 0.0:
            raise ConfigurationError(f"gdm_eta must be >= 0, got {self.gdm_eta}")
        if self.gan_lambda_adv < 0.0 or self.gan_lambda_mse < 0.0:
            raise ConfigurationError("GAN loss weights must be >= 0")
        if self.vae_latent_dim < 1 or self.hybrid_z_dim < 1 or self.hybrid_embed_dim < 1:
            raise ConfigurationError("latent and embedding dims must be >= 1")
        if self.attention_dim < self.attention_heads or self.attention_heads < 1:
            raise ConfigurationError("attention needs heads >= 1 and dim >= heads")
        if self.attention_dim % self.attention_heads != 0:
            raise ConfigurationError(
                f"attention_heads={self.attention_heads} must divide "
                f"attention_dim={self.attention_dim}"
            )

    # -- identity ---------------------------------------------------------------

    def active_flags(self) -> tuple[str, ...]:
        return tuple(name for name in FLAG_ORDER if getattr(self, name))

    def label(self) -> str:
        """Short run label, e.g. 'vanilla' or 'gdm+gan+vae-state'."""
        short = {
            "gdm_policy": "gdm",
            "gan_critic": "gan",
            "transformer_actor": "tfa",
            "transformer_denoiser": "tfd",
            "vae_state": "vae",
            "vae_hybrid_action": "hyb",
        }
        active = self.active_flags()
        return "+".join(short[f] for f in active) if active else "vanilla"

    def validate_for_space(self, action_space: str) -> None:
        if self.vae_hybrid_action and action_space != "hybrid":
            raise ConfigurationError(
                f"vae-hybrid-action requires the hybrid action space, got {action_space!r}"
            )

    # -- serialization --------------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EnhancementStack":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown stack keys: {sorted(unknown)}")
        return cls(**data)


def compose_agent(
    env_config: EnvConfig,
    stack: EnhancementStack,
    td3: Td3Config,
    seed: int,
    *,
    total_steps: int = 0,
) -> Td3Agent:
    """Wire a stack of enhancements around the base agent.

    The wiring order is fixed regardless of how flags were declared:
    observation compression first (it changes every later input width),
    then the policy (MLP, token encoder, or diffusion chain), then the
    critic-update rule, then the hybrid-action decoder.
    """
    stack.validate_for_space(env_config.action_space)
    bank = SeedBank(seed)  # same master seed the agent derives its streams from

    state_encoder = None
    if stack.vae_state:
        model = VaeModel(
            env_config.obs_dim,
            stack.vae_latent_dim,
            beta_kl=stack.vae_beta_kl,
            seed=bank.seed_for("vae-init"),
        )
        state_encoder = VaeStateEncoder(model, bank, lr=stack.vae_lr)
    agent_obs_dim = stack.vae_latent_dim if stack.vae_state else env_config.obs_dim

    hybrid_adapter = None
    hybrid_z_dim = None
    if stack.vae_hybrid_action:
        hybrid_z_dim = stack.hybrid_z_dim
        hybrid_model = HybridLatentModel(
            agent_obs_dim,
            embed_dim=stack.hybrid_embed_dim,
            z_dim=stack.hybrid_z_dim,
            beta_kl=stack.hybrid_beta_kl,
            seed=bank.seed_for("hybrid-init"),
        )
        hybrid_adapter = HybridLatentAdapter(hybrid_model, bank, lr=stack.hybrid_lr)

    space = agent_space_for(env_config, hybrid_z_dim=hybrid_z_dim)

    policy_factory = None
    actor_net_factory = None
    if stack.gdm_policy:
        schedule = NoiseSchedule.linear(stack.gdm_steps, stack.gdm_beta_start, stack.gdm_beta_end)
        denoiser_factory = None
        if stack.transformer_denoiser:
            denoiser_factory = lambda o, c, k, b: TransformerDenoiser(
                o,
                c,
                k,
                b,
                antenna_count=env_config.antenna_count,
                model_dim=stack.attention_dim,
                heads=stack.attention_heads,
                blocks=stack.attention_blocks,
            )
        policy_factory = lambda agent: DiffusionPolicy(
            agent.obs_dim,
            agent.space,
            td3,
            agent.bank,
            schedule=schedule,
            eta=stack.gdm_eta,
            denoiser_factory=denoiser_factory,
        )
    elif stack.transformer_actor:
        actor_net_factory = lambda in_dim, head_dim, b: TokenEncoder(
            in_dim,
            head_dim,
            b,
            antenna_count=env_config.antenna_count,
            model_dim=stack.attention_dim,
            heads=stack.attention_heads,
            blocks=stack.attention_blocks,
        )

    critic_updater = None
    if stack.gan_critic:
        critic_updater = LeastSquaresValueAdversary(
            agent_obs_dim,
            space,
            td3,
            bank,
            lambda_adv=stack.gan_lambda_adv,
            lambda_mse=stack.gan_lambda_mse,
        )

    return Td3Agent(
        env_config.obs_dim,
        space,
        td3,
        seed,
        total_steps=total_steps,
        actor_net_factory=actor_net_factory,
        policy_factory=policy_factory,
        critic_updater=critic_updater,
        state_encoder=state_encoder,
        hybrid_adapter=hybrid_adapter,
    )
