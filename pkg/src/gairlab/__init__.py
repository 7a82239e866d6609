"""gairlab: generative-model-enhanced TD3 on a near-field UAV relay task."""

__version__ = "0.1.0"
