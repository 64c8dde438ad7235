import json
import os
import wave

import numpy as np
import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A tiny randomly initialized wav2vec2-style model saved locally."""
    import torch
    from transformers import Wav2Vec2Config, Wav2Vec2Model

    torch.manual_seed(0)
    config = Wav2Vec2Config(
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        num_feat_extract_layers=3,
        conv_dim=(32, 32, 32),
        conv_kernel=(10, 3, 3),
        conv_stride=(5, 4, 4),  # hop = 80 samples = 5 ms at 16 kHz
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
    )
    model = Wav2Vec2Model(config)
    out = tmp_path_factory.mktemp("tiny_model")
    model.save_pretrained(out)
    return str(out)


def write_wav(path, audio, sample_rate=16000):
    pcm = np.clip(audio * 32767.0, -32768, 32767).astype("<i2")
    with wave.open(os.fspath(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())


@pytest.fixture(scope="session")
def wav_corpus(tmp_path_factory):
    """Three short WAV utterances plus a JSONL manifest."""
    out = tmp_path_factory.mktemp("wavs")
    rng = np.random.default_rng(3)
    entries = []
    for i, n_samples in enumerate([16000, 12000, 8800]):
        t = np.arange(n_samples) / 16000.0
        audio = (0.5 * np.sin(2 * np.pi * (120 + 40 * i) * t)
                 + 0.05 * rng.standard_normal(n_samples))
        name = f"utt{i:02d}.wav"
        write_wav(out / name, audio)
        entries.append({"utterance_id": f"utt{i:02d}",
                        "audio_or_param_path": name})
    manifest = out / "manifest.jsonl"
    manifest.write_text("\n".join(json.dumps(e) for e in entries) + "\n")
    return str(manifest)
