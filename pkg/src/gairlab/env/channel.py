"""Radio propagation: spherical-wave array channel and free-space links.

The BS array is modeled element-by-element with exact 3-D distances, so
wavefront curvature inside the Rayleigh region comes out of the geometry
rather than an expansion. The UAV→user hop uses the scalar plane-wave
(free-space) power gain.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, NumericError
from .config import EnvConfig

Array = np.ndarray


def rayleigh_distance(aperture: float, wavelength: float) -> float:
    """Near/far-field boundary 2D²/λ for aperture D."""
    if aperture <= 0 or wavelength <= 0:
        raise ConfigurationError(
            f"aperture and wavelength must be positive, got D={aperture}, lam={wavelength}"
        )
    return 2.0 * aperture * aperture / wavelength


def element_positions(config: EnvConfig) -> Array:
    """(N, 3) element coordinates: along x, centered on the BS, at z = 0."""
    n = config.antenna_count
    offsets = (np.arange(n) - (n - 1) / 2.0) * config.spacing
    bs_x, bs_y = config.bs_position
    pos = np.zeros((n, 3))
    pos[:, 0] = bs_x + offsets
    pos[:, 1] = bs_y
    return pos


def near_field_channel(config: EnvConfig, uav_xy: Array) -> Array:
    """Spherical-wave BS→UAV channel, one complex coefficient per element.

    h_n = (lam / (4 pi r_n)) * exp(-j 2 pi r_n / lam), with r_n the exact
    3-D distance from element n to the UAV at the configured altitude.
    """
    uav_xy = np.asarray(uav_xy, dtype=np.float64)
    uav = np.array([uav_xy[0], uav_xy[1], config.altitude])
    deltas = uav[None, :] - element_positions(config)
    r = np.sqrt((deltas * deltas).sum(axis=1))
    if np.any(r == 0.0):
        raise NumericError("UAV coincides with an antenna element (r_n = 0)")
    lam = config.wavelength
    return (lam / (4.0 * np.pi * r)) * np.exp(-2j * np.pi * r / lam)


def far_field_gain(config: EnvConfig, uav_xy: Array, user_xy: Array) -> float:
    """Free-space power gain (lam/(4 pi r))² between UAV and ground user."""
    uav_xy = np.asarray(uav_xy, dtype=np.float64)
    user_xy = np.asarray(user_xy, dtype=np.float64)
    dx = uav_xy[0] - user_xy[0]
    dy = uav_xy[1] - user_xy[1]
    r = float(np.sqrt(dx * dx + dy * dy + config.altitude * config.altitude))
    if r == 0.0:
        raise NumericError("UAV coincides with the user (r = 0)")
    lam = config.wavelength
    return (lam / (4.0 * np.pi * r)) ** 2


def two_hop_rate(h: Array, gain: float, p_bs: float, p_uav: float, noise_power: float) -> float:
    """Half-duplex decode-and-forward rate in bits/s/Hz.

    The BS beamforms with maximum-ratio transmission (weights h*/|h|), so
    hop 1 sees SNR = p_bs * ||h||^2 / noise; hop 2 is the scalar link.
    """
    if p_bs < 0 or p_uav < 0:
        raise ConfigurationError(f"powers must be nonnegative, got {p_bs}, {p_uav}")
    if noise_power <= 0:
        raise ConfigurationError("noise_power must be positive")
    snr1 = p_bs * float(np.vdot(h, h).real) / noise_power
    snr2 = p_uav * gain / noise_power
    return 0.5 * min(np.log2(1.0 + snr1), np.log2(1.0 + snr2))


def channel_features(h: Array) -> tuple[Array, Array]:
    """Observation features of a channel vector: magnitudes and phases.

    Phases are consecutive-element phase differences (element 0 pinned to
    0), each in (-pi, pi]. With half-wavelength spacing the path-length
    difference between neighbours is at most lam/2, so these never wrap and
    vary smoothly with UAV position — unlike absolute phases, which alias
    at sub-wavelength scale and would make the state features effectively
    random. The common absolute phase carries no rate information under
    maximum-ratio transmission.
    """
    mags = np.abs(h)
    phases = np.zeros_like(mags)
    if h.shape[0] > 1:
        diffs = np.angle(h[1:] * np.conj(h[:-1]))
        diffs = np.where(diffs <= -np.pi, diffs + 2.0 * np.pi, diffs)
        phases[1:] = diffs
    return mags, phases
