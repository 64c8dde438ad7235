import json
import os

import numpy as np
import pytest

from ssl_exporter import (
    AudioDecodeError,
    ExportJob,
    LayerOutOfRange,
    ManifestBroken,
    ModelNotFound,
    export_features,
    frame_period_ms_of,
    load_manifest,
    read_wav,
    write_pbft,
)

# consumer-side reader, imported only to validate the file contract
from prosody_bench.features import ingest_features

from conftest import write_wav


def run_export(model_dir, manifest, out_dir, layers=(1, 2)):
    job = ExportJob(model_id=model_dir, layers=list(layers),
                    manifest_path=manifest, out_dir=str(out_dir))
    return export_features(job)


class TestPbftWriter:
    def test_consumer_can_ingest(self, tmp_path, rng=np.random.default_rng(1)):
        data = rng.standard_normal((7, 5)).astype(np.float32)
        path = tmp_path / "x.pbft"
        write_pbft(data, 20.0, "m:L3", path)
        feat = ingest_features(path)
        assert np.allclose(feat.data, data, atol=1e-7)
        assert feat.frame_period_ms == 20.0
        assert feat.source_tag == "m:L3"

    def test_no_partial_file_on_failure(self, tmp_path):
        bad = np.full((3, 2), np.nan, dtype=np.float32)
        path = tmp_path / "x.pbft"
        with pytest.raises(ValueError):
            write_pbft(bad, 20.0, "t", path)
        assert not path.exists()
        assert list(tmp_path.iterdir()) == []


class TestAudio:
    def test_wrong_rate_rejected(self, tmp_path):
        path = tmp_path / "a.wav"
        write_wav(path, np.zeros(800), sample_rate=8000)
        with pytest.raises(AudioDecodeError):
            read_wav(path)

    def test_not_a_wav(self, tmp_path):
        path = tmp_path / "a.wav"
        path.write_bytes(b"garbage")
        with pytest.raises(AudioDecodeError):
            read_wav(path)

    def test_round_trip_range(self, tmp_path):
        path = tmp_path / "a.wav"
        audio = 0.25 * np.sin(np.linspace(0, 20, 1600))
        write_wav(path, audio)
        back = read_wav(path)
        assert back.dtype == np.float32
        assert np.allclose(back, audio, atol=1e-4)


class TestManifest:
    def test_loads(self, wav_corpus):
        utts = load_manifest(wav_corpus)
        assert [u.utterance_id for u in utts] == ["utt00", "utt01", "utt02"]
        assert all(os.path.isabs(u.audio_path) for u in utts)

    def test_bad_json(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text("{broken\n")
        with pytest.raises(ManifestBroken):
            load_manifest(path)

    def test_empty(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text("\n")
        with pytest.raises(ManifestBroken):
            load_manifest(path)


class TestExport:
    def test_files_match_log_and_ingest(self, tiny_model_dir, wav_corpus,
                                        tmp_path):
        log_path = run_export(tiny_model_dir, wav_corpus, tmp_path / "out")
        log = json.loads(open(log_path).read())
        assert log["num_hidden_layers"] == 2
        assert len(log["files"]) == 6  # 3 utterances x 2 layers
        for rec in log["files"]:
            path = os.path.join(os.path.dirname(log_path), rec["path"])
            assert rec["path"] == f"{rec['utterance_id']}.L{rec['layer']}.pbft"
            feat = ingest_features(path)
            assert feat.n_frames == rec["n_frames"]
            assert feat.dim == rec["dim"] == 32
            assert feat.source_tag == f"{tiny_model_dir}:L{rec['layer']}"
            assert np.all(np.isfinite(feat.data))

    def test_frame_rate_consistent_with_duration(self, tiny_model_dir,
                                                 wav_corpus, tmp_path):
        log_path = run_export(tiny_model_dir, wav_corpus, tmp_path / "out")
        log = json.loads(open(log_path).read())
        fpms = log["frame_period_ms"]
        assert fpms == pytest.approx(5.0)  # stride product 80 at 16 kHz
        for rec in log["files"]:
            duration_ms = 1000.0 * rec["n_samples"] / 16000.0
            assert abs(duration_ms - rec["n_frames"] * fpms) <= fpms + 1e-6

    def test_repeat_export_agrees(self, tiny_model_dir, wav_corpus, tmp_path):
        log1 = run_export(tiny_model_dir, wav_corpus, tmp_path / "r1",
                          layers=(2,))
        log2 = run_export(tiny_model_dir, wav_corpus, tmp_path / "r2",
                          layers=(2,))
        for rec in json.loads(open(log1).read())["files"]:
            a = ingest_features(tmp_path / "r1" / rec["path"]).data
            b = ingest_features(tmp_path / "r2" / rec["path"]).data
            assert np.max(np.abs(a - b)) <= 1e-5

    def test_layer_out_of_range(self, tiny_model_dir, wav_corpus, tmp_path):
        with pytest.raises(LayerOutOfRange):
            run_export(tiny_model_dir, wav_corpus, tmp_path / "out",
                       layers=(3,))
        with pytest.raises(LayerOutOfRange):
            run_export(tiny_model_dir, wav_corpus, tmp_path / "out",
                       layers=(0,))

    def test_model_not_found(self, wav_corpus, tmp_path):
        with pytest.raises(ModelNotFound):
            run_export(str(tmp_path / "nope"), wav_corpus, tmp_path / "out")

    def test_frame_period_requires_conv_frontend(self, tiny_model_dir):
        from ssl_exporter.export import load_model

        model = load_model(tiny_model_dir)
        assert frame_period_ms_of(model) == pytest.approx(5.0)


class TestCli:
    def test_export_command(self, tiny_model_dir, wav_corpus, tmp_path,
                            capsys):
        from ssl_exporter.cli import main

        out = str(tmp_path / "out")
        assert main(["export", "--model", tiny_model_dir,
                     "--layers", "1,2", "--manifest", wav_corpus,
                     "--out", out]) == 0
        printed = capsys.readouterr().out.strip()
        assert printed.endswith("export_log.json")
        assert os.path.exists(printed)

    def test_bad_layers(self, tiny_model_dir, wav_corpus, tmp_path, capsys):
        from ssl_exporter.cli import main

        assert main(["export", "--model", tiny_model_dir,
                     "--layers", "abc", "--manifest", wav_corpus,
                     "--out", str(tmp_path)]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "BadLayerList"

    def test_error_reported(self, wav_corpus, tmp_path, capsys):
        from ssl_exporter.cli import main

        assert main(["export", "--model", str(tmp_path / "missing"),
                     "--layers", "1", "--manifest", wav_corpus,
                     "--out", str(tmp_path / "out")]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ModelNotFound"
