"""Deterministic synthetic corpus generation.

Builds ParamTracks from per-phone spectral templates, per-speaker base-f0
offsets and vocal-tract warp factors, with every sentence realized by
every speaker and full word/phone alignment tiers.  Mimics a same-text
multi-speaker corpus at desk scale.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import SpecTooSmall
from .manifest import UtteranceManifest, write_manifest
from .modify import warp_speaker
from .vocoder import ParamTrack, Segment, write_param_track

_VOICED_PHONES = ["aa", "iy", "uw", "eh", "ow", "ah", "ae", "er", "ih", "uh"]
_UNVOICED_PHONES = ["sh", "ss"]

AP_VOICED = 0.2
AP_UNVOICED = 0.9
CROSSFADE_FRAMES = 4


def _phone_templates(rng, n_bins):
    """Unit-mean-power spectral template per phone.

    Unit mean power keeps per-frame intensity flat across an utterance,
    which keeps utterance-level intensity range scaling a near no-op.
    """
    templates = {}
    for phone in _VOICED_PHONES + _UNVOICED_PHONES:
        shape = np.full(n_bins, 0.05)
        for _ in range(3):
            center = rng.uniform(0.03, 0.6) * n_bins
            width = rng.uniform(0.02, 0.08) * n_bins
            height = rng.uniform(2.0, 8.0)
            shape += height * np.exp(-0.5 * ((np.arange(n_bins) - center) / width) ** 2)
        templates[phone] = shape / shape.mean()
    return templates


def _make_sentence(rng, n_phones):
    """A phone sequence with durations (frames) and a word partition."""
    n_unvoiced = max(1, n_phones // 4)
    labels = list(rng.choice(_VOICED_PHONES, size=n_phones))
    for pos in rng.choice(n_phones, size=n_unvoiced, replace=False):
        labels[pos] = str(rng.choice(_UNVOICED_PHONES))
    durations = rng.integers(16, 33, size=n_phones).tolist()
    words = []
    i = 0
    while i < n_phones:
        size = int(rng.integers(2, 4))
        words.append((i, min(i + size, n_phones)))
        i += size
    phase = float(rng.uniform(0, 2 * np.pi))
    return labels, durations, words, phase


def _build_track(sentence, templates, base_f0, warp, frame_period_ms,
                 sample_rate_hz, n_bins):
    labels, durations, _, phase = sentence
    n_frames = int(sum(durations))
    sp = np.empty((n_frames, n_bins))
    f0 = np.zeros(n_frames)
    ap = np.empty((n_frames, n_bins))
    pos = 0
    spans = []
    for label, dur in zip(labels, durations):
        spans.append((pos, pos + dur, label))
        template = templates[label]
        voiced = label in _VOICED_PHONES
        sp[pos:pos + dur] = template
        ap[pos:pos + dur] = AP_VOICED if voiced else AP_UNVOICED
        if voiced:
            rel = (np.arange(pos, pos + dur)) / n_frames
            f0[pos:pos + dur] = (
                base_f0 + 25.0 * np.sin(2 * np.pi * 1.7 * rel + phase)
                - 12.0 * rel
            )
        pos += dur
    # short linear crossfade at phone boundaries keeps sp smooth without
    # changing per-frame mean power
    for (s0, e0, _), (s1, _, _) in zip(spans, spans[1:]):
        for j in range(1, CROSSFADE_FRAMES + 1):
            t = e0 - j
            if t <= s0:
                break
            mix = 0.5 * j / (CROSSFADE_FRAMES + 1)
            sp[t] = (1.0 - mix) * sp[t] + mix * sp[s1]
    track = ParamTrack(f0, sp, ap, frame_period_ms, sample_rate_hz)
    if warp != 1.0:
        track = warp_speaker(track, warp)
    # warping perturbs row means; renormalize so every frame has exactly
    # unit mean power regardless of speaker
    track.sp /= track.sp.mean(axis=1, keepdims=True)
    track.validate()
    return track, spans


def generate_synthetic_corpus(
    n_speakers: int,
    n_sentences: int,
    phones_per_sentence: int,
    seed: int,
    out_dir,
    f0_spread_hz: float = 12.0,
    warp_spread: float = 0.06,
    accent_groups: int = 2,
    frame_period_ms: float = 5.0,
    sample_rate_hz: int = 16000,
    n_bins: int = 257,
):
    """Generate parameter files plus a manifest; returns the manifest path.

    Setting ``f0_spread_hz`` and ``warp_spread`` to 0 makes every
    speaker's rendition of a sentence identical.
    """
    if n_speakers < 2 or n_sentences < 2 or phones_per_sentence < 3:
        raise SpecTooSmall(
            "need >= 2 speakers, >= 2 sentences, >= 3 phones per sentence"
        )
    os.makedirs(out_dir, exist_ok=True)
    param_dir = os.path.join(out_dir, "params")
    os.makedirs(param_dir, exist_ok=True)

    rng = np.random.default_rng(seed)
    templates = _phone_templates(rng, n_bins)
    sentences = [_make_sentence(rng, phones_per_sentence)
                 for _ in range(n_sentences)]

    half = (n_speakers - 1) / 2.0
    entries = []
    for spk in range(n_speakers):
        rel = 0.0 if n_speakers == 1 else (spk - half) / max(half, 1.0)
        base_f0 = 130.0 + f0_spread_hz * spk
        warp = 1.0 + warp_spread * rel
        accent = f"acc{spk % accent_groups}"
        speaker_id = f"spk{spk:02d}"
        for sent_idx, sentence in enumerate(sentences):
            sentence_id = f"sent{sent_idx:02d}"
            utt_id = f"{speaker_id}_{sentence_id}"
            track, spans = _build_track(
                sentence, templates, base_f0, warp,
                frame_period_ms, sample_rate_hz, n_bins,
            )
            path = os.path.join(param_dir, f"{utt_id}.pbpt")
            write_param_track(track, path)

            to_s = frame_period_ms / 1000.0
            phone_segments = [
                Segment(s * to_s, e * to_s, label) for s, e, label in spans
            ]
            word_segments = []
            labels, durations, words, _ = sentence
            for w_idx, (p0, p1) in enumerate(words):
                start = spans[p0][0] * to_s
                end = spans[p1 - 1][1] * to_s
                word_segments.append(
                    Segment(start, end, f"w{w_idx}_" + "-".join(labels[p0:p1]))
                )
            entries.append(UtteranceManifest(
                utterance_id=utt_id,
                speaker_id=speaker_id,
                sentence_id=sentence_id,
                audio_or_param_path=path,
                word_segments=word_segments,
                phone_segments=phone_segments,
                accent_tag=accent,
            ))
    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    write_manifest(entries, manifest_path)
    return manifest_path
