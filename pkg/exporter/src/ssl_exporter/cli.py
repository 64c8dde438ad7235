"""CLI: run a pretrained model over a manifest and dump PBFT features."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ExporterError
from .export import ExportJob, export_features


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ssl-exporter",
        description="Export per-layer speech-model features to PBFT files",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="run a model over a manifest")
    p.add_argument("--model", required=True, help="hub id or local path")
    p.add_argument("--layers", required=True,
                   help="comma-separated 1-based layer indices, e.g. 9,10,11,12")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--device", default="cpu")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        layers = [int(x) for x in args.layers.split(",") if x.strip()]
        if not layers:
            raise ValueError("no layers given")
    except ValueError as exc:
        print(json.dumps({"error": "BadLayerList", "message": str(exc)}),
              file=sys.stderr)
        return 1
    job = ExportJob(
        model_id=args.model, layers=layers,
        manifest_path=args.manifest, out_dir=args.out,
        device_hint=args.device,
    )
    try:
        log_path = export_features(job)
    except ExporterError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    print(log_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
