"""Run utterances through a pretrained speech model and write per-layer
frame features as PBFT files."""

from __future__ import annotations

import json
import os
import wave
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AudioDecodeError,
    LayerOutOfRange,
    ManifestBroken,
    ModelNotFound,
)
from .pbft import write_pbft

SAMPLE_RATE = 16000


@dataclass
class ExportJob:
    model_id: str
    layers: list
    manifest_path: str
    out_dir: str
    device_hint: str = "cpu"


@dataclass
class Utterance:
    utterance_id: str
    audio_path: str


def load_manifest(path):
    """Read the JSONL manifest; only id + audio path matter here."""
    base = os.path.dirname(os.path.abspath(path))
    utterances = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ManifestBroken(f"cannot read manifest {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
            utt_id = str(raw["utterance_id"])
            audio = str(raw["audio_or_param_path"])
        except (json.JSONDecodeError, KeyError) as exc:
            raise ManifestBroken(f"{path}:{lineno}: {exc}") from exc
        if not os.path.isabs(audio):
            audio = os.path.join(base, audio)
        utterances.append(Utterance(utt_id, audio))
    if not utterances:
        raise ManifestBroken(f"{path}: empty manifest")
    return utterances


def read_wav(path) -> np.ndarray:
    """16 kHz mono 16-bit PCM WAV to float32 in [-1, 1]."""
    try:
        with wave.open(os.fspath(path), "rb") as wf:
            if wf.getframerate() != SAMPLE_RATE:
                raise AudioDecodeError(
                    f"{path}: need {SAMPLE_RATE} Hz, got {wf.getframerate()}"
                )
            if wf.getnchannels() != 1:
                raise AudioDecodeError(f"{path}: need mono audio")
            if wf.getsampwidth() != 2:
                raise AudioDecodeError(f"{path}: need 16-bit PCM")
            raw = wf.readframes(wf.getnframes())
    except (OSError, wave.Error, EOFError) as exc:
        raise AudioDecodeError(f"{path}: {exc}") from exc
    audio = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    if len(audio) == 0:
        raise AudioDecodeError(f"{path}: empty audio")
    return audio


def load_model(model_id: str):
    """Resolve a model id (hub name or local path) to an eval-mode model."""
    from transformers import AutoModel

    try:
        model = AutoModel.from_pretrained(model_id, output_hidden_states=True)
    except (OSError, ValueError, EnvironmentError) as exc:
        raise ModelNotFound(f"cannot load model {model_id!r}: {exc}") from exc
    model.eval()
    return model


def frame_period_ms_of(model) -> float:
    """Frame hop implied by the conv feature extractor's stride product."""
    strides = getattr(model.config, "conv_stride", None)
    if not strides:
        raise ModelNotFound(
            f"model {model.config.model_type!r} has no conv_stride; "
            "cannot derive a frame rate"
        )
    hop = int(np.prod(strides))
    return 1000.0 * hop / SAMPLE_RATE


def export_features(job: ExportJob) -> str:
    """Export per-(utterance, layer) PBFT files; returns the log path.

    Files are named ``<utterance_id>.L<layer>.pbft`` with source tag
    ``<model_id>:L<layer>``; the export log records the model id verbatim
    plus every emitted shape.
    """
    import torch

    utterances = load_manifest(job.manifest_path)
    model = load_model(job.model_id)
    depth = int(model.config.num_hidden_layers)
    for layer in job.layers:
        if not 1 <= int(layer) <= depth:
            raise LayerOutOfRange(
                f"layer {layer} outside [1, {depth}] for {job.model_id!r}"
            )
    frame_period_ms = frame_period_ms_of(model)
    device = torch.device(job.device_hint if torch.cuda.is_available()
                          and job.device_hint.startswith("cuda") else "cpu")
    model.to(device)

    os.makedirs(job.out_dir, exist_ok=True)
    log = {
        "model_id": job.model_id,
        "model_revision": getattr(model.config, "_name_or_path", job.model_id),
        "num_hidden_layers": depth,
        "frame_period_ms": frame_period_ms,
        "layers": [int(layer) for layer in job.layers],
        "files": [],
    }
    with torch.no_grad():
        for utt in utterances:
            audio = read_wav(utt.audio_path)
            inputs = torch.from_numpy(audio)[None, :].to(device)
            outputs = model(inputs)
            # hidden_states[0] is the conv front-end output; transformer
            # layer L (1-based) lives at index L
            hidden = outputs.hidden_states
            for layer in job.layers:
                feats = hidden[int(layer)][0].cpu().numpy()
                name = f"{utt.utterance_id}.L{int(layer)}.pbft"
                path = os.path.join(job.out_dir, name)
                write_pbft(feats, frame_period_ms,
                           f"{job.model_id}:L{int(layer)}", path)
                log["files"].append({
                    "utterance_id": utt.utterance_id,
                    "layer": int(layer),
                    "path": name,
                    "n_frames": int(feats.shape[0]),
                    "dim": int(feats.shape[1]),
                    "n_samples": int(len(audio)),
                })
    log_path = os.path.join(job.out_dir, "export_log.json")
    with open(log_path, "w", encoding="utf-8") as fh:
        json.dump(log, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return log_path
