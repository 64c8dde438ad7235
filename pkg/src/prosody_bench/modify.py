"""Pure prosody and speaker transforms on ParamTrack.

Five operations: word-level pitch/intensity scaling on a frame range,
utterance-level pitch/intensity range scaling over the voiced frames, and
a frequency-axis warp of the spectral envelope.  Inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, NonPositiveIntensity, RangeOutOfBounds
from .vocoder import ParamTrack

# floor for f0 values driven negative by aggressive range expansion; keeps
# the voiced/unvoiced partition invariant under modification
F0_FLOOR_AFTER_SCALE_HZ = 1.0


@dataclass(frozen=True)
class ScaleFactors:
    """Pitch (alpha), intensity (beta) and frequency-warp (gamma) scales."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.gamma > 0):
            raise InvariantViolation("scale factors must be positive")


def _check_range(track: ParamTrack, frames: tuple[int, int]):
    start, end = frames
    if not (0 <= start < end <= track.n_frames):
        raise RangeOutOfBounds(
            f"frame range [{start}, {end}) invalid for T={track.n_frames}"
        )
    return start, end


def modify_word_pitch(
    track: ParamTrack, frames: tuple[int, int], alpha: float
) -> ParamTrack:
    """Multiply f0 by alpha inside the half-open frame range."""
    start, end = _check_range(track, frames)
    if not alpha > 0:
        raise InvariantViolation("alpha must be positive")
    out = track.copy()
    out.f0[start:end] *= alpha
    return out


def modify_word_intensity(
    track: ParamTrack, frames: tuple[int, int], beta: float
) -> ParamTrack:
    """Multiply sp by beta, uniformly over frequency, inside the range."""
    start, end = _check_range(track, frames)
    if not beta > 0:
        raise InvariantViolation("beta must be positive")
    out = track.copy()
    out.sp[start:end] *= beta
    return out


def modify_utterance_pitch_range(track: ParamTrack, alpha: float) -> ParamTrack:
    """Scale the deviation of voiced f0 from its utterance mean by alpha.

    Unvoiced frames are untouched.  Results that would fall to or below
    zero are floored at 1 Hz so the voiced set stays stable.
    """
    if not alpha > 0:
        raise InvariantViolation("alpha must be positive")
    out = track.copy()
    voiced = out.f0 > 0
    if not voiced.any():
        return out
    mu = out.f0[voiced].mean()
    scaled = alpha * (out.f0[voiced] - mu) + mu
    out.f0[voiced] = np.maximum(scaled, F0_FLOOR_AFTER_SCALE_HZ)
    return out


def modify_utterance_intensity_range(track: ParamTrack, beta: float) -> ParamTrack:
    """Scale the log-intensity deviation of voiced frames by beta.

    Frame intensity is the mean of the sp row; the scaling is applied in
    log space and each voiced row is multiplied by the resulting ratio.
    """
    if not beta > 0:
        raise InvariantViolation("beta must be positive")
    out = track.copy()
    voiced = out.f0 > 0
    if not voiced.any():
        return out
    intensity = out.sp.mean(axis=1)
    if np.any(intensity[voiced] <= 0):
        raise NonPositiveIntensity("voiced frame with non-positive intensity")
    log_int = np.log(intensity[voiced])
    mu = log_int.mean()
    ratio = np.exp(beta * (log_int - mu) + mu - log_int)
    out.sp[voiced] *= ratio[:, None]
    return out


def warp_speaker(track: ParamTrack, gamma: float) -> ParamTrack:
    """Stretch sp along the frequency axis by gamma (vocal-tract warp).

    Each output bin f reads the source position f/gamma with linear
    interpolation; source indices past the last bin clamp to it.
    """
    if not gamma > 0:
        raise InvariantViolation("gamma must be positive")
    out = track.copy()
    n_bins = track.n_bins
    src = np.arange(n_bins) / gamma
    lo = np.floor(src).astype(int)
    frac = src - lo
    lo = np.minimum(lo, n_bins - 1)
    hi = np.minimum(lo + 1, n_bins - 1)
    # clamped bins take the last-bin value exactly
    frac = np.where(lo == n_bins - 1, 0.0, frac)
    out.sp = (1.0 - frac) * track.sp[:, lo] + frac * track.sp[:, hi]
    return out
