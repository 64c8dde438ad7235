"""Three-component parameter representation of speech.

Speech is decomposed into a fundamental-frequency contour (f0, Hz, 0 at
unvoiced frames), a frame-wise spectral envelope (sp, linear power) and a
frame-wise aperiodicity (ap, noise-to-harmonic ratio in [0, 1]).  A
simplified analysis/synthesis pair operates on this representation, and
tracks round-trip bit-exactly through a small binary file format.

The analyzer is deliberately lightweight: normalized-autocorrelation pitch
tracking plus a cepstrally smoothed STFT power envelope.  It is not a
full vocoder reimplementation and makes no perceptual-quality claims.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    EmptyAudio,
    InvariantViolation,
    IoFailure,
    UnsupportedSampleRate,
)

PARAM_MAGIC = b"PBPT"
PARAM_VERSION = 1

DEFAULT_FRAME_PERIOD_MS = 5.0
DEFAULT_FFT_SIZE = 512
DEFAULT_CEPSTRAL_ORDER = 40
F0_FLOOR_HZ = 50.0
F0_CEIL_HZ = 500.0
VOICING_THRESHOLD = 0.3

# guards float slop in seconds->frame index conversion (e.g. 0.1*1000/5
# evaluating to 20.000000000000004)
_FRAME_EPS = 1e-9


@dataclass(frozen=True)
class Segment:
    """A labelled time span in seconds, start inclusive / end exclusive."""

    start_s: float
    end_s: float
    label: str

    def __post_init__(self):
        if self.start_s < 0 or not self.end_s > self.start_s:
            raise InvariantViolation(
                f"bad segment [{self.start_s}, {self.end_s})"
            )


@dataclass
class ParamTrack:
    """Frame-wise vocoder parameters.

    Attributes
    ----------
    f0 : (T,) array
        Fundamental frequency in Hz, 0.0 at unvoiced frames.
    sp : (T, F) array
        Spectral envelope, non-negative linear power.
    ap : (T, F) array
        Aperiodicity in [0, 1].
    frame_period_ms : float
        Frame hop in milliseconds.
    sample_rate_hz : int
    """

    f0: np.ndarray
    sp: np.ndarray
    ap: np.ndarray
    frame_period_ms: float
    sample_rate_hz: int

    @property
    def n_frames(self) -> int:
        return self.f0.shape[0]

    @property
    def n_bins(self) -> int:
        return self.sp.shape[1]

    def validate(self):
        f0, sp, ap = self.f0, self.sp, self.ap
        if f0.ndim != 1 or sp.ndim != 2 or ap.ndim != 2:
            raise InvariantViolation("f0 must be 1-D, sp/ap 2-D")
        if not (f0.shape[0] == sp.shape[0] == ap.shape[0]):
            raise InvariantViolation("frame counts disagree")
        if sp.shape[1] != ap.shape[1]:
            raise InvariantViolation("bin counts disagree")
        if np.any(f0 < 0):
            raise InvariantViolation("negative f0")
        if np.any(sp < 0):
            raise InvariantViolation("negative spectral envelope")
        if np.any(ap < 0) or np.any(ap > 1):
            raise InvariantViolation("aperiodicity outside [0, 1]")
        if not self.frame_period_ms > 0:
            raise InvariantViolation("frame_period_ms must be positive")
        if not self.sample_rate_hz > 0:
            raise InvariantViolation("sample_rate_hz must be positive")

    def copy(self) -> "ParamTrack":
        return ParamTrack(
            self.f0.copy(), self.sp.copy(), self.ap.copy(),
            self.frame_period_ms, self.sample_rate_hz,
        )


def segment_to_frames(seg: Segment, frame_period_ms: float) -> tuple[int, int]:
    """Convert a second-domain segment to a half-open frame range."""
    if not frame_period_ms > 0:
        raise InvariantViolation("frame_period_ms must be positive")
    start = math.floor(seg.start_s * 1000.0 / frame_period_ms + _FRAME_EPS)
    end = math.ceil(seg.end_s * 1000.0 / frame_period_ms - _FRAME_EPS)
    return start, end


def _frame_centers(n_frames: int, hop: float) -> np.ndarray:
    return np.round(np.arange(n_frames) * hop).astype(int)


def _autocorr_f0(segment: np.ndarray, sr: int) -> tuple[float, float]:
    """Estimate (f0, confidence) for one analysis segment.

    Uses the biased autocorrelation of the windowed segment; the peak lag
    within [sr/F0_CEIL, sr/F0_FLOOR] is refined parabolically.
    """
    n = len(segment)
    seg = segment - segment.mean()
    spec = np.fft.rfft(seg, 2 * n)
    ac = np.fft.irfft(spec * np.conj(spec))[:n]
    if ac[0] <= 1e-12:
        return 0.0, 0.0
    r = ac / ac[0]
    lag_min = max(2, int(sr / F0_CEIL_HZ))
    lag_max = min(n - 2, int(math.ceil(sr / F0_FLOOR_HZ)))
    if lag_max <= lag_min:
        return 0.0, 0.0
    window = r[lag_min:lag_max + 1]
    peak = int(np.argmax(window)) + lag_min
    conf = float(r[peak])
    if conf < VOICING_THRESHOLD:
        return 0.0, conf
    # parabolic refinement around the integer peak
    y0, y1, y2 = r[peak - 1], r[peak], r[peak + 1]
    denom = y0 - 2.0 * y1 + y2
    delta = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
    delta = float(np.clip(delta, -0.5, 0.5))
    f0 = sr / (peak + delta)
    return float(np.clip(f0, F0_FLOOR_HZ, F0_CEIL_HZ)), conf


def analyze(
    audio,
    sample_rate_hz: int,
    frame_period_ms: float = DEFAULT_FRAME_PERIOD_MS,
    fft_size: int = DEFAULT_FFT_SIZE,
    cepstral_order: int = DEFAULT_CEPSTRAL_ORDER,
) -> ParamTrack:
    """Decompose mono PCM into a ParamTrack.

    f0 comes from normalized autocorrelation clamped to [50, 500] Hz with
    frames below the voicing-confidence threshold set to 0; sp from a
    cepstrally smoothed STFT power spectrum; ap is a per-frame noise ratio
    broadcast across bins.
    """
    audio = np.asarray(audio, dtype=np.float64).ravel()
    if audio.size == 0:
        raise EmptyAudio("cannot analyze zero-length audio")
    if sample_rate_hz < 8000:
        raise UnsupportedSampleRate(
            f"sample rate {sample_rate_hz} below 8000 Hz"
        )
    sr = int(sample_rate_hz)
    duration_ms = audio.size / sr * 1000.0
    n_frames = int(math.ceil(duration_ms / frame_period_ms))
    hop = sr * frame_period_ms / 1000.0
    n_bins = fft_size // 2 + 1

    # pitch window long enough for ~3 periods at the f0 floor
    f0_win = min(int(0.064 * sr), max(fft_size, int(3 * sr / F0_FLOOR_HZ)))
    pad = max(f0_win, fft_size)
    padded = np.concatenate(
        [np.zeros(pad), audio, np.zeros(pad + int(hop) + 1)]
    )
    centers = _frame_centers(n_frames, hop) + pad

    f0 = np.zeros(n_frames)
    conf = np.zeros(n_frames)
    window = np.hanning(fft_size)
    sp = np.empty((n_frames, n_bins))
    for t, c in enumerate(centers):
        f0[t], conf[t] = _autocorr_f0(
            padded[c - f0_win // 2: c + f0_win // 2], sr
        )
        frame = padded[c - fft_size // 2: c + fft_size // 2] * window
        power = np.abs(np.fft.rfft(frame)) ** 2
        log_power = np.log(power + 1e-12)
        cep = np.fft.irfft(log_power, n=fft_size)
        cep[cepstral_order:fft_size - cepstral_order] = 0.0
        sp[t] = np.exp(np.fft.rfft(cep, n=fft_size).real[:n_bins])

    ap_scalar = np.clip(1.0 - conf, 0.0, 1.0)
    ap = np.repeat(ap_scalar[:, None], n_bins, axis=1)
    track = ParamTrack(f0, sp, ap, float(frame_period_ms), sr)
    track.validate()
    return track


def synthesize(track: ParamTrack, seed: int = 0) -> np.ndarray:
    """Resynthesize PCM from a ParamTrack.

    Voiced frames are excited by a pulse train at f0, unvoiced frames by
    white noise; both are filtered frame-wise by sqrt(sp) via windowed
    overlap-add.  Deterministic for a fixed seed.
    """
    track.validate()
    sr = track.sample_rate_hz
    hop = sr * track.frame_period_ms / 1000.0
    n_frames = track.n_frames
    n_out = int(round(n_frames * hop))
    fft_size = 2 * (track.n_bins - 1)

    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(n_out)
    excitation = np.zeros(n_out)
    boundaries = _frame_centers(n_frames + 1, hop)
    phase = 0.0
    for t in range(n_frames):
        lo, hi = boundaries[t], min(boundaries[t + 1], n_out)
        if track.f0[t] > 0:
            step = track.f0[t] / sr
            for n in range(lo, hi):
                phase += step
                if phase >= 1.0:
                    phase -= 1.0
                    # unit-energy-per-period pulse
                    excitation[n] = math.sqrt(1.0 / step)
        else:
            excitation[lo:hi] = noise[lo:hi]
            phase = 0.0

    window = np.hanning(fft_size)
    half = fft_size // 2
    padded = np.concatenate([np.zeros(half), excitation, np.zeros(fft_size)])
    out = np.zeros(n_out + fft_size + half)
    wsum = np.zeros_like(out)
    centers = _frame_centers(n_frames, hop) + half
    for t, c in enumerate(centers):
        seg = padded[c - half: c + half] * window
        spec = np.fft.rfft(seg) * np.sqrt(track.sp[t])
        out[c - half: c + half] += np.fft.irfft(spec) * window
        wsum[c - half: c + half] += window ** 2
    out = out[half: half + n_out] / np.maximum(wsum[half: half + n_out], 1e-8)
    return out


def write_param_track(track: ParamTrack, path):
    """Write a track to the little-endian "PBPT" binary format."""
    track.validate()
    header = struct.pack(
        "<4sHIIdI",
        PARAM_MAGIC,
        PARAM_VERSION,
        track.n_frames,
        track.n_bins,
        track.frame_period_ms,
        track.sample_rate_hz,
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(track.f0.astype("<f4").tobytes())
            fh.write(track.sp.astype("<f4").tobytes())
            fh.write(track.ap.astype("<f4").tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_param_track(path) -> ParamTrack:
    """Read a track written by :func:`write_param_track`."""
    header_size = struct.calcsize("<4sHIIdI")
    try:
        with open(path, "rb") as fh:
            header = fh.read(header_size)
            payload = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if len(header) < header_size:
        raise BadMagic(f"{path}: truncated header")
    magic, version, n_frames, n_bins, frame_period_ms, sr = struct.unpack(
        "<4sHIIdI", header
    )
    if magic != PARAM_MAGIC:
        raise BadMagic(f"{path}: bad magic {magic!r}")
    if version != PARAM_VERSION:
        raise BadMagic(f"{path}: unsupported version {version}")
    expected = 4 * (n_frames + 2 * n_frames * n_bins)
    if len(payload) != expected:
        raise DimensionMismatch(
            f"{path}: payload {len(payload)} bytes, header implies {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    f0 = data[:n_frames]
    sp = data[n_frames: n_frames + n_frames * n_bins].reshape(n_frames, n_bins)
    ap = data[n_frames + n_frames * n_bins:].reshape(n_frames, n_bins)
    track = ParamTrack(f0, sp, ap, frame_period_ms, int(sr))
    track.validate()
    return track
