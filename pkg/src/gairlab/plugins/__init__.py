"""Generative-model enhancements composable over the base agent."""

from .attention import TokenEncoder, TokenLayout, TransformerDenoiser
from .diffusion import (
    DiffusionPolicy,
    MlpDenoiser,
    NoiseSchedule,
    actions_to_chain_targets,
    chain_dim_for,
)
from .gan import LeastSquaresValueAdversary
from .hybrid_latent import HybridLatentAdapter, HybridLatentModel
from .stack import EnhancementStack, compose_agent
from .vae import VaeModel, VaeStateEncoder, normalized_mse

__all__ = [
    "DiffusionPolicy",
    "EnhancementStack",
    "HybridLatentAdapter",
    "HybridLatentModel",
    "LeastSquaresValueAdversary",
    "MlpDenoiser",
    "NoiseSchedule",
    "TokenEncoder",
    "TokenLayout",
    "TransformerDenoiser",
    "VaeModel",
    "VaeStateEncoder",
    "actions_to_chain_targets",
    "chain_dim_for",
    "compose_agent",
    "normalized_mse",
]
