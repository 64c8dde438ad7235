"""Frame-wise feature matrices: native log-mel extraction, moving-average
smoothing, per-utterance normalization and binary feature-file I/O.

The native extractor reads the spectral envelope directly, so external
model features and desk-scale native features flow through one interface.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    EvenWindow,
    InvariantViolation,
    IoFailure,
    NonFiniteValue,
    TooFewBins,
    TooShort,
)
from .vocoder import ParamTrack

FEATURE_MAGIC = b"PBFT"
FEATURE_VERSION = 1

_LOG_FLOOR = 1e-30


@dataclass
class FeatureMatrix:
    """A (T', D) matrix of real-valued frame features."""

    data: np.ndarray
    frame_period_ms: float
    source_tag: str

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def validate(self):
        if self.data.ndim != 2 or self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise InvariantViolation("feature matrix must be (T'>=1, D>=1)")
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteValue("feature matrix contains non-finite values")
        if not self.frame_period_ms > 0:
            raise InvariantViolation("frame_period_ms must be positive")


def _hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_bins: int, sample_rate_hz: int) -> np.ndarray:
    """Triangular mel filters as an (n_mels, n_bins) weight matrix."""
    nyquist = sample_rate_hz / 2.0
    mel_points = np.linspace(_hz_to_mel(0.0), _hz_to_mel(nyquist), n_mels + 2)
    bin_pos = _mel_to_hz(mel_points) / nyquist * (n_bins - 1)
    weights = np.zeros((n_mels, n_bins))
    bins = np.arange(n_bins)
    for m in range(n_mels):
        left, center, right = bin_pos[m], bin_pos[m + 1], bin_pos[m + 2]
        up = (bins - left) / max(center - left, 1e-9)
        down = (right - bins) / max(right - center, 1e-9)
        weights[m] = np.clip(np.minimum(up, down), 0.0, None)
    return weights


def extract_logmel(
    track: ParamTrack, n_mels: int = 40, use_f0_channel: bool = False
) -> FeatureMatrix:
    """Log mel-filterbank energies of the spectral envelope.

    Appends a log(1 + f0) channel when requested, so pitch changes are
    visible to the native feature path.
    """
    if n_mels < 8:
        raise InvariantViolation("n_mels must be >= 8")
    if track.n_bins < n_mels:
        raise TooFewBins(
            f"{track.n_bins} spectral bins cannot support {n_mels} mel filters"
        )
    weights = mel_filterbank(n_mels, track.n_bins, track.sample_rate_hz)
    energies = track.sp @ weights.T
    data = np.log(np.maximum(energies, _LOG_FLOOR))
    if use_f0_channel:
        data = np.column_stack([data, np.log1p(track.f0)])
    feat = FeatureMatrix(data, track.frame_period_ms, "native_logmel")
    feat.validate()
    return feat


def moving_average(feat: FeatureMatrix, window: int) -> FeatureMatrix:
    """Boundary-clamped moving average over the time axis.

    The window W = 2w + 1 must be odd; edge frames average over the
    clamped index range, so the divisor shrinks near the boundaries.
    """
    if window < 1 or window % 2 == 0:
        raise EvenWindow(f"window must be odd and >= 1, got {window}")
    if window == 1:
        return FeatureMatrix(
            feat.data.copy(), feat.frame_period_ms, feat.source_tag
        )
    n = feat.n_frames
    w = (window - 1) // 2
    idx = np.arange(n)
    start = np.maximum(0, idx - w)
    end = np.minimum(n - 1, idx + w)
    csum = np.vstack([np.zeros((1, feat.dim)), np.cumsum(feat.data, axis=0)])
    out = (csum[end + 1] - csum[start]) / (end - start + 1)[:, None]
    return FeatureMatrix(out, feat.frame_period_ms, feat.source_tag)


def normalize_per_utterance(feat: FeatureMatrix) -> FeatureMatrix:
    """Zero-mean, unit-variance per dimension (population std).

    Dimensions with vanishing variance are centered only.
    """
    if feat.n_frames < 2:
        raise TooShort("need at least two frames to normalize")
    mean = feat.data.mean(axis=0)
    std = feat.data.std(axis=0)
    centered = feat.data - mean
    out = np.where(std < 1e-8, centered, centered / np.where(std < 1e-8, 1.0, std))
    return FeatureMatrix(out, feat.frame_period_ms, feat.source_tag)


def write_features(feat: FeatureMatrix, path):
    """Write a feature matrix to the little-endian "PBFT" format."""
    feat.validate()
    tag = feat.source_tag.encode("utf-8")
    header = struct.pack(
        "<4sHIIdH",
        FEATURE_MAGIC,
        FEATURE_VERSION,
        feat.n_frames,
        feat.dim,
        feat.frame_period_ms,
        len(tag),
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(tag)
            fh.write(feat.data.astype("<f4").tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def ingest_features(path) -> FeatureMatrix:
    """Read a "PBFT" feature file."""
    header_size = struct.calcsize("<4sHIIdH")
    try:
        with open(path, "rb") as fh:
            header = fh.read(header_size)
            if len(header) < header_size:
                raise BadMagic(f"{path}: truncated header")
            magic, version, n_frames, dim, frame_period_ms, tag_len = (
                struct.unpack("<4sHIIdH", header)
            )
            if magic != FEATURE_MAGIC:
                raise BadMagic(f"{path}: bad magic {magic!r}")
            if version != FEATURE_VERSION:
                raise BadMagic(f"{path}: unsupported version {version}")
            tag = fh.read(tag_len).decode("utf-8")
            payload = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    expected = 4 * n_frames * dim
    if len(payload) != expected:
        raise DimensionMismatch(
            f"{path}: payload {len(payload)} bytes, header implies {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValue(f"{path}: non-finite feature values")
    return FeatureMatrix(data.reshape(n_frames, dim), frame_period_ms, tag)
