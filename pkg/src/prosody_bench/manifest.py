"""Manifest loading: one JSON record per utterance with file paths and
word/phone alignments in seconds."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import InvariantViolation, ManifestBroken
from .vocoder import Segment


@dataclass
class UtteranceManifest:
    utterance_id: str
    speaker_id: str
    sentence_id: str
    audio_or_param_path: str
    word_segments: list = field(default_factory=list)
    phone_segments: list = field(default_factory=list)
    accent_tag: str | None = None

    def validate(self, check_paths: bool = True):
        for tier in (self.word_segments, self.phone_segments):
            prev_end = -1.0
            for seg in tier:
                if seg.start_s < prev_end:
                    raise ManifestBroken(
                        f"{self.utterance_id}: overlapping or unordered "
                        f"segment {seg.label!r} at {seg.start_s}"
                    )
                prev_end = seg.end_s
        if check_paths and not os.path.exists(self.audio_or_param_path):
            raise ManifestBroken(
                f"{self.utterance_id}: missing file {self.audio_or_param_path}"
            )


def _segments_from_json(raw, utterance_id):
    segments = []
    for item in raw:
        try:
            segments.append(
                Segment(float(item["start_s"]), float(item["end_s"]),
                        str(item["label"]))
            )
        except (KeyError, TypeError, ValueError, InvariantViolation) as exc:
            raise ManifestBroken(
                f"{utterance_id}: bad segment record {item!r}"
            ) from exc
    return segments


def load_manifest(path, check_paths: bool = True):
    """Load a JSON Lines manifest; paths are resolved relative to it."""
    base = os.path.dirname(os.path.abspath(path))
    entries = []
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
        except json.JSONDecodeError as exc:
            raise ManifestBroken(f"{path}:{lineno}: bad JSON") from exc
        try:
            utt_id = str(raw["utterance_id"])
            file_path = str(raw["audio_or_param_path"])
            if not os.path.isabs(file_path):
                file_path = os.path.join(base, file_path)
            entry = UtteranceManifest(
                utterance_id=utt_id,
                speaker_id=str(raw["speaker_id"]),
                sentence_id=str(raw["sentence_id"]),
                audio_or_param_path=file_path,
                word_segments=_segments_from_json(
                    raw.get("word_segments", []), utt_id
                ),
                phone_segments=_segments_from_json(
                    raw.get("phone_segments", []), utt_id
                ),
                accent_tag=raw.get("accent_tag"),
            )
        except KeyError as exc:
            raise ManifestBroken(
                f"{path}:{lineno}: missing field {exc}"
            ) from exc
        entry.validate(check_paths=check_paths)
        entries.append(entry)
    if not entries:
        raise ManifestBroken(f"{path}: empty manifest")
    return entries


def write_manifest(entries, path):
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            rel = os.path.relpath(entry.audio_or_param_path, base)
            record = {
                "utterance_id": entry.utterance_id,
                "speaker_id": entry.speaker_id,
                "sentence_id": entry.sentence_id,
                "accent_tag": entry.accent_tag,
                "audio_or_param_path": rel,
                "word_segments": [
                    {"start_s": s.start_s, "end_s": s.end_s, "label": s.label}
                    for s in entry.word_segments
                ],
                "phone_segments": [
                    {"start_s": s.start_s, "end_s": s.end_s, "label": s.label}
                    for s in entry.phone_segments
                ],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
