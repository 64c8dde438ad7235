"""Command-line interface for the benchmarking toolkit."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import modify as modify_ops
from .config import load_config
from .corpus import generate_synthetic_corpus
from .errors import ConfigInvalid, ProsodyBenchError
from .features import (
    extract_logmel,
    ingest_features,
    moving_average,
    normalize_per_utterance,
    write_features,
)
from .harness import compare_conditions, run_experiment
from .manifest import load_manifest
from .quantizer import kmeans_assign, kmeans_train, load_model, save_model
from .report import emit_report, read_report_csv, write_comparison_csv
from .vocoder import read_param_track, segment_to_frames, write_param_track, Segment


def _add_synth_corpus(sub):
    p = sub.add_parser("synth-corpus", help="generate a synthetic corpus")
    p.add_argument("--speakers", type=int, required=True)
    p.add_argument("--sentences", type=int, required=True)
    p.add_argument("--phones-per-sentence", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--f0-spread", type=float, default=12.0)
    p.add_argument("--warp-spread", type=float, default=0.06)
    p.add_argument("--accent-groups", type=int, default=2)
    p.set_defaults(func=_cmd_synth_corpus)


def _cmd_synth_corpus(args):
    path = generate_synthetic_corpus(
        args.speakers, args.sentences, args.phones_per_sentence,
        args.seed, args.out_dir,
        f0_spread_hz=args.f0_spread, warp_spread=args.warp_spread,
        accent_groups=args.accent_groups,
    )
    print(path)


def _add_modify(sub):
    p = sub.add_parser("modify", help="apply one prosody/speaker transform")
    p.add_argument("--input", required=True, dest="input_path")
    p.add_argument("--output", required=True, dest="output_path")
    p.add_argument("--op", required=True, choices=[
        "word_pitch", "word_intensity", "utt_pitch", "utt_intensity",
        "speaker_warp",
    ])
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("--start-s", type=float, default=None)
    p.add_argument("--end-s", type=float, default=None)
    p.set_defaults(func=_cmd_modify)


def _cmd_modify(args):
    track = read_param_track(args.input_path)
    if args.op in ("word_pitch", "word_intensity"):
        if args.start_s is None or args.end_s is None:
            raise ConfigInvalid("--start-s/--end-s required for word-level ops")
        frames = segment_to_frames(
            Segment(args.start_s, args.end_s, "cli"), track.frame_period_ms
        )
        frames = (max(frames[0], 0), min(frames[1], track.n_frames))
        fn = (modify_ops.modify_word_pitch if args.op == "word_pitch"
              else modify_ops.modify_word_intensity)
        out = fn(track, frames, args.scale)
    elif args.op == "utt_pitch":
        out = modify_ops.modify_utterance_pitch_range(track, args.scale)
    elif args.op == "utt_intensity":
        out = modify_ops.modify_utterance_intensity_range(track, args.scale)
    else:
        out = modify_ops.warp_speaker(track, args.scale)
    write_param_track(out, args.output_path)


def _add_extract(sub):
    p = sub.add_parser("extract", help="extract native log-mel features")
    p.add_argument("--input", required=True, dest="input_path")
    p.add_argument("--output", required=True, dest="output_path")
    p.add_argument("--n-mels", type=int, default=40)
    p.add_argument("--no-f0-channel", action="store_true")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--ma-window", type=int, default=1)
    p.set_defaults(func=_cmd_extract)


def _cmd_extract(args):
    track = read_param_track(args.input_path)
    feat = extract_logmel(track, args.n_mels, not args.no_f0_channel)
    if args.normalize:
        feat = normalize_per_utterance(feat)
    if args.ma_window > 1:
        feat = moving_average(feat, args.ma_window)
    write_features(feat, args.output_path)


def _add_kmeans_train(sub):
    p = sub.add_parser("kmeans-train", help="train a k-means token model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, dest="output_path")
    p.add_argument("--n-mels", type=int, default=40)
    p.add_argument("--no-f0-channel", action="store_true")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--ma-window", type=int, default=1)
    p.add_argument("--max-frames", type=int, default=200_000)
    p.add_argument("--restarts", type=int, default=1)
    p.set_defaults(func=_cmd_kmeans_train)


def _cmd_kmeans_train(args):
    entries = load_manifest(args.manifest)
    pool = []
    for entry in entries:
        track = read_param_track(entry.audio_or_param_path)
        feat = extract_logmel(track, args.n_mels, not args.no_f0_channel)
        if args.normalize:
            feat = normalize_per_utterance(feat)
        if args.ma_window > 1:
            feat = moving_average(feat, args.ma_window)
        pool.append(feat.data)
    samples = np.vstack(pool)
    if samples.shape[0] > args.max_frames:
        rng = np.random.default_rng([args.seed, 1])
        idx = np.sort(rng.choice(samples.shape[0], size=args.max_frames,
                                 replace=False))
        samples = samples[idx]
    model = kmeans_train(samples, args.k, seed=args.seed,
                         restarts=args.restarts, feature_tag="native_logmel")
    save_model(model, args.output_path)
    print(json.dumps({"k": model.k, "dim": model.dim,
                      "final_inertia": model.inertia_history[-1]}))


def _add_tokenize(sub):
    p = sub.add_parser("tokenize", help="assign tokens to a feature file")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--output", required=True, dest="output_path")
    p.add_argument("--utterance-id", default="")
    p.add_argument("--dedup", action="store_true")
    p.set_defaults(func=_cmd_tokenize)


def _cmd_tokenize(args):
    from .quantizer import deduplicate

    model = load_model(args.model)
    feat = ingest_features(args.features)
    seq = kmeans_assign(model, feat, args.utterance_id)
    if args.dedup:
        seq = deduplicate(seq)
    with open(args.output_path, "w", encoding="utf-8") as fh:
        json.dump({
            "utterance_id": seq.utterance_id,
            "frame_period_ms": seq.frame_period_ms,
            "tokens": [int(t) for t in seq.tokens],
        }, fh, sort_keys=True)
        fh.write("\n")


def _add_eval(sub):
    p = sub.add_parser("eval", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=_cmd_eval)


def _cmd_eval(args):
    config = load_config(args.config, seed=args.seed)
    reports, records = run_experiment(config)
    written = emit_report(reports, records, args.out_dir, config=config,
                          figures=args.figures)
    for path in written:
        print(path)


def _add_compare(sub):
    p = sub.add_parser("compare", help="paired t-test between two runs")
    p.add_argument("--a", required=True, help="raw_records.jsonl of run A")
    p.add_argument("--b", required=True, help="raw_records.jsonl of run B")
    p.add_argument("--output", required=True, dest="output_path")
    p.set_defaults(func=_cmd_compare)


def _load_records(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _cmd_compare(args):
    rows = compare_conditions(_load_records(args.a), _load_records(args.b))
    write_comparison_csv(rows, args.output_path)
    print(args.output_path)


def _add_report(sub):
    p = sub.add_parser("report", help="render figures from emitted CSVs")
    p.add_argument("--in-dir", required=True)
    p.set_defaults(func=_cmd_report)


def _cmd_report(args):
    import glob
    import os

    from . import plots

    rendered = []
    for csv_path in sorted(glob.glob(os.path.join(args.in_dir, "*.csv"))):
        kind = os.path.splitext(os.path.basename(csv_path))[0]
        rows = read_report_csv(csv_path)
        out_png = os.path.join(args.in_dir, f"{kind}.png")
        if plots.render_rows(rows, kind, out_png):
            rendered.append(out_png)
            print(out_png)
    if not rendered:
        print("no report CSVs found", file=sys.stderr)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="prosody-bench",
        description="Benchmark prosody sensitivity of discrete speech tokens",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for add in (_add_synth_corpus, _add_modify, _add_extract,
                _add_kmeans_train, _add_tokenize, _add_eval, _add_compare,
                _add_report):
        add(sub)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ProsodyBenchError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
