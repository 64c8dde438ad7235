"""Experiment orchestration: runs the configured evaluation end-to-end
over a manifest-driven corpus and aggregates per-utterance metrics."""

from __future__ import annotations

import dataclasses
from collections import defaultdict

import numpy as np

from . import modify
from .config import ExperimentConfig
from .errors import ConfigInvalid, ProsodyBenchError, UtteranceSetMismatch, ZeroVariance
from .features import (
    FeatureMatrix,
    extract_logmel,
    ingest_features,
    moving_average,
    normalize_per_utterance,
)
from .manifest import load_manifest
from .metrics import MetricsReport, mter, paired_t_test, pnmi, segment_ter, ter, cluster_histogram
from .quantizer import kmeans_assign, kmeans_train
from .vocoder import ParamTrack, analyze, read_param_track, segment_to_frames, synthesize

_WORD_KINDS = {"word_pitch": modify.modify_word_pitch,
               "word_intensity": modify.modify_word_intensity}
_UTT_KINDS = {"utt_pitch": modify.modify_utterance_pitch_range,
              "utt_intensity": modify.modify_utterance_intensity_range,
              "speaker_warp": modify.warp_speaker}


def _condition_id(kind, tag, k, scale, window):
    return f"{kind}|src={tag}|k={k}|scale={scale:g}|W={window}"


def _load_track(entry) -> ParamTrack:
    return read_param_track(entry.audio_or_param_path)


class _Pipeline:
    """Feature extraction + postprocessing shared by all conditions."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.native = config.feature_source == "native_logmel"
        self.pattern = (
            None if self.native else config.feature_source.split(":", 1)[1]
        )

    def features_for_entry(self, entry, track) -> FeatureMatrix:
        if self.native:
            return self._native(track)
        feat = ingest_features(
            self.pattern.format(utterance_id=entry.utterance_id)
        )
        return self._postprocess(feat)

    def features_for_track(self, track) -> FeatureMatrix:
        if not self.native:
            raise ConfigInvalid(
                "modification experiments need feature_source=native_logmel; "
                "external features cannot be recomputed for modified tracks"
            )
        return self._native(track)

    def _native(self, track) -> FeatureMatrix:
        cfg = self.config
        if cfg.audio_round_trip:
            audio = synthesize(track, seed=cfg.seed)
            track = analyze(
                audio, track.sample_rate_hz,
                frame_period_ms=track.frame_period_ms,
            )
        feat = extract_logmel(track, cfg.n_mels, cfg.use_f0_channel)
        return self._postprocess(feat)

    def _postprocess(self, feat: FeatureMatrix) -> FeatureMatrix:
        cfg = self.config
        if cfg.ma_position == "before_norm" and cfg.ma_window > 1:
            feat = moving_average(feat, cfg.ma_window)
        if cfg.normalization == "per_utterance":
            feat = normalize_per_utterance(feat)
        if cfg.ma_position == "after_norm" and cfg.ma_window > 1:
            feat = moving_average(feat, cfg.ma_window)
        return feat

    @property
    def source_tag(self) -> str:
        return "native_logmel" if self.native else self.pattern


def _train_models(config, pipeline):
    entries = load_manifest(config.kmeans_train_manifest)
    pool = []
    for entry in entries:
        track = _load_track(entry)
        pool.append(pipeline.features_for_entry(entry, track).data)
    samples = np.vstack(pool)
    if samples.shape[0] > config.max_train_frames:
        rng = np.random.default_rng([config.seed, 1])
        idx = np.sort(rng.choice(
            samples.shape[0], size=config.max_train_frames, replace=False
        ))
        samples = samples[idx]
    models = {}
    for k in config.cluster_sizes:
        models[k] = kmeans_train(
            samples, k, seed=config.seed,
            max_iters=config.kmeans_max_iters, tol=config.kmeans_tol,
            restarts=config.kmeans_restarts,
            feature_tag=pipeline.source_tag,
        )
    return models


def _prepare_eval(config, pipeline, models):
    entries = load_manifest(config.eval_manifest)
    prepared = []
    for entry in entries:
        track = _load_track(entry)
        feat = pipeline.features_for_entry(entry, track)
        base_tokens = {
            k: kmeans_assign(m, feat, entry.utterance_id)
            for k, m in models.items()
        }
        prepared.append((entry, track, base_tokens))
    return prepared


def _run_word_kind(config, pipeline, models, prepared, window):
    mod_fn = _WORD_KINDS[config.experiment_kind]
    reports, records = [], []
    for k, model in models.items():
        for scale in config.scale_grid:
            utt_word, utt_ctrl = [], []
            for entry, track, base_tokens in prepared:
                base = base_tokens[k]
                n_frames = track.n_frames
                ctrl_track = mod_fn(track, (0, n_frames), scale)
                ctrl_tokens = kmeans_assign(
                    model, pipeline.features_for_track(ctrl_track),
                    entry.utterance_id,
                )
                word_vals, ctrl_vals = [], []
                for seg in entry.word_segments:
                    start, end = segment_to_frames(seg, track.frame_period_ms)
                    start, end = max(start, 0), min(end, n_frames)
                    if end <= start:
                        continue
                    mod_track = mod_fn(track, (start, end), scale)
                    mod_tokens = kmeans_assign(
                        model, pipeline.features_for_track(mod_track),
                        entry.utterance_id,
                    )
                    word_vals.append(segment_ter(base, mod_tokens, seg))
                    ctrl_vals.append(segment_ter(base, ctrl_tokens, seg))
                if not word_vals:
                    continue
                utt_word.append((entry.utterance_id, float(np.mean(word_vals))))
                utt_ctrl.append((entry.utterance_id, float(np.mean(ctrl_vals))))
            cid = _condition_id(config.experiment_kind, pipeline.source_tag,
                               k, scale, window)
            for entry_vals, metric in (
                (utt_word, "word_segment_ter"),
                (utt_ctrl, "utterance_control_segment_ter"),
            ):
                for utt_id, value in entry_vals:
                    records.append(_record(utt_id, cid, config,
                                           k, pipeline, scale, window,
                                           metric, value))
            reports.append(MetricsReport(
                condition_id=cid,
                values={
                    "word_segment_ter": float(np.mean([v for _, v in utt_word])),
                    "utterance_control_segment_ter": float(
                        np.mean([v for _, v in utt_ctrl])),
                },
                n_items=len(utt_word),
                kind=config.experiment_kind, k=k,
                source_tag=pipeline.source_tag, scale=scale, window=window,
            ))
    return reports, records


def _run_utt_kind(config, pipeline, models, prepared, window):
    mod_fn = _UTT_KINDS[config.experiment_kind]
    reports, records = [], []
    for k, model in models.items():
        for scale in config.scale_grid:
            cid = _condition_id(config.experiment_kind, pipeline.source_tag,
                                k, scale, window)
            vals = []
            for entry, track, base_tokens in prepared:
                mod_track = mod_fn(track, scale)
                mod_tokens = kmeans_assign(
                    model, pipeline.features_for_track(mod_track),
                    entry.utterance_id,
                )
                value = ter(base_tokens[k], mod_tokens)
                vals.append(value)
                records.append(_record(entry.utterance_id, cid, config, k,
                                       pipeline, scale, window,
                                       "utterance_ter", value))
            reports.append(MetricsReport(
                condition_id=cid,
                values={"utterance_ter": float(np.mean(vals))},
                n_items=len(vals),
                kind=config.experiment_kind, k=k,
                source_tag=pipeline.source_tag, scale=scale, window=window,
            ))
    return reports, records


def _run_speaker_pairs(config, pipeline, models, prepared, window):
    groups = defaultdict(list)
    for entry, track, base_tokens in prepared:
        groups[entry.sentence_id].append((entry, base_tokens))
    reports, records = [], []
    for k in models:
        cid = _condition_id("real_speaker_pairs", pipeline.source_tag,
                            k, 1.0, window)
        all_vals, accent_vals = [], []
        for sentence_id in sorted(groups):
            members = groups[sentence_id]
            if len(members) < 2:
                continue
            seqs = [tokens[k] for _, tokens in members]
            value = mter(seqs, dedup=config.dedup_for_mter)
            all_vals.append(value)
            records.append(_record(f"sentence:{sentence_id}", cid, config, k,
                                   pipeline, 1.0, window, "mter", value))
            by_accent = defaultdict(list)
            for entry, tokens in members:
                by_accent[entry.accent_tag].append(tokens[k])
            sub = [mter(seqs_a, dedup=config.dedup_for_mter)
                   for tag, seqs_a in sorted(by_accent.items(),
                                             key=lambda kv: str(kv[0]))
                   if len(seqs_a) >= 2]
            if sub:
                value = float(np.mean(sub))
                accent_vals.append(value)
                records.append(_record(f"sentence:{sentence_id}", cid, config,
                                       k, pipeline, 1.0, window,
                                       "mter_same_accent", value))
        values = {"mter": float(np.mean(all_vals))}
        if accent_vals:
            values["mter_same_accent"] = float(np.mean(accent_vals))
        reports.append(MetricsReport(
            condition_id=cid, values=values, n_items=len(all_vals),
            kind="real_speaker_pairs", k=k, source_tag=pipeline.source_tag,
            scale=1.0, window=window,
        ))
    return reports, records


def _phone_labels_for(entry, tokens):
    """Nearest-segment phone label for each token frame, via seconds."""
    labels = []
    segs = entry.phone_segments
    fpms = tokens.frame_period_ms
    j = 0
    for i in range(len(tokens)):
        t = (i + 0.5) * fpms / 1000.0
        while j + 1 < len(segs) and t >= segs[j].end_s:
            j += 1
        labels.append(segs[j].label if segs else "sil")
    return labels


def _run_pnmi(config, pipeline, models, prepared, window):
    reports, records = [], []
    for k in models:
        seqs = [tokens[k] for _, _, tokens in prepared]
        phones = [_phone_labels_for(entry, tokens[k])
                  for entry, _, tokens in prepared]
        value = pnmi(seqs, phones)
        cid = _condition_id("pnmi", pipeline.source_tag, k, 1.0, window)
        records.append(_record("corpus", cid, config, k, pipeline, 1.0,
                               window, "pnmi", value))
        reports.append(MetricsReport(
            condition_id=cid, values={"pnmi": value}, n_items=len(seqs),
            kind="pnmi", k=k, source_tag=pipeline.source_tag,
            scale=1.0, window=window,
        ))
    return reports, records


def _run_cluster_hist(config, pipeline, models, prepared, window):
    reports, records = [], []
    for k in models:
        seqs = [tokens[k] for _, _, tokens in prepared]
        freq = cluster_histogram(seqs, k)
        cid = _condition_id("cluster_hist", pipeline.source_tag, k, 1.0,
                            window)
        values = {f"freq_rank_{r:05d}": float(v) for r, v in enumerate(freq)}
        n_tokens = int(sum(len(s) for s in seqs))
        for r, v in enumerate(freq):
            records.append(_record("corpus", cid, config, k, pipeline,
                                   float(r), window, "sorted_cluster_freq",
                                   float(v)))
        reports.append(MetricsReport(
            condition_id=cid, values=values, n_items=n_tokens,
            kind="cluster_hist", k=k, source_tag=pipeline.source_tag,
            scale=1.0, window=window,
        ))
    return reports, records


def _record(utterance_id, condition_id, config, k, pipeline, scale, window,
            metric, value):
    return {
        "utterance_id": utterance_id,
        "condition_id": condition_id,
        "kind": config.experiment_kind,
        "k": int(k),
        "source_tag": pipeline.source_tag,
        "scale": float(scale),
        "window": int(window),
        "metric": metric,
        "value": float(value),
    }


_KIND_RUNNERS = {
    "word_pitch": _run_word_kind,
    "word_intensity": _run_word_kind,
    "utt_pitch": _run_utt_kind,
    "utt_intensity": _run_utt_kind,
    "speaker_warp": _run_utt_kind,
    "real_speaker_pairs": _run_speaker_pairs,
    "pnmi": _run_pnmi,
    "cluster_hist": _run_cluster_hist,
}


def run_experiment(config: ExperimentConfig):
    """Execute the configured experiment; returns (reports, raw records)."""
    if config.experiment_kind == "ma_sweep":
        reports, records = [], []
        for window in config.ma_windows:
            for kind in config.ma_base_kinds:
                sub = dataclasses.replace(
                    config, experiment_kind=kind, ma_window=window
                )
                r, rec = _run_single(sub)
                reports.extend(r)
                records.extend(rec)
        return reports, records
    return _run_single(config)


def _run_single(config: ExperimentConfig):
    pipeline = _Pipeline(config)
    try:
        models = _train_models(config, pipeline)
        prepared = _prepare_eval(config, pipeline, models)
        runner = _KIND_RUNNERS[config.experiment_kind]
        return runner(config, pipeline, models, prepared, config.ma_window)
    except ProsodyBenchError:
        raise
    except (OSError, KeyError, IndexError) as exc:
        raise ConfigInvalid(f"experiment failed: {exc}") from exc


def compare_conditions(records_a, records_b):
    """Pair per-utterance values across two runs and t-test each row.

    Rows are grouped by (kind, k, source_tag, scale, window, metric); a
    zero-variance pairing is reported as not significant with p = 1.
    """
    def index(records):
        out = {}
        for rec in records:
            key = (rec["utterance_id"], rec["kind"], rec["k"],
                   rec["source_tag"], rec["scale"], rec["window"],
                   rec["metric"])
            out[key] = rec["value"]
        return out

    idx_a, idx_b = index(records_a), index(records_b)
    ids_a = {k[0] for k in idx_a}
    ids_b = {k[0] for k in idx_b}
    if ids_a != ids_b:
        raise UtteranceSetMismatch(
            f"utterance sets differ: {sorted(ids_a ^ ids_b)[:5]} ..."
        )
    groups = defaultdict(list)
    for key in idx_a:
        if key in idx_b:
            groups[key[1:]].append(key[0])
    rows = []
    for group_key in sorted(groups, key=str):
        kind, k, tag, scale, window, metric = group_key
        utts = sorted(groups[group_key])
        if len(utts) < 2:
            continue
        x = [idx_a[(u, *group_key)] for u in utts]
        y = [idx_b[(u, *group_key)] for u in utts]
        try:
            t, p = paired_t_test(x, y)
            significant = p < 0.05
        except ZeroVariance:
            t, p, significant = 0.0, 1.0, False
        rows.append({
            "kind": kind, "k": k, "source_tag": tag, "scale": scale,
            "window": window, "metric": metric,
            "mean_a": float(np.mean(x)), "mean_b": float(np.mean(y)),
            "t": t, "p": p, "significant": significant, "n": len(utts),
        })
    return rows
