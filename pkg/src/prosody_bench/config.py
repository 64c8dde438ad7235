"""Declarative experiment configuration loaded from a YAML file."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import yaml

from .errors import ConfigInvalid

EXPERIMENT_KINDS = (
    "word_pitch",
    "word_intensity",
    "utt_pitch",
    "utt_intensity",
    "speaker_warp",
    "real_speaker_pairs",
    "pnmi",
    "cluster_hist",
    "ma_sweep",
)

# grids anchored on the scale factors used throughout the evaluation
DEFAULT_ALPHA_GRID = [1.0, 1.05, 1.15, 1.3]
DEFAULT_BETA_GRID = [1.0, 1.5, 2.2, 3.0]
DEFAULT_GAMMA_GRID = [0.85, 0.95, 1.0, 1.05, 1.15]
DEFAULT_MA_WINDOWS = [1, 3, 5, 7, 9, 11, 13]


@dataclass
class ExperimentConfig:
    experiment_kind: str
    kmeans_train_manifest: str
    eval_manifest: str
    scale_grid: list = field(default_factory=list)
    cluster_sizes: list = field(default_factory=lambda: [100])
    ma_windows: list = field(default_factory=lambda: list(DEFAULT_MA_WINDOWS))
    feature_source: str = "native_logmel"
    seed: int = 0
    normalization: str = "none"
    dedup_for_mter: bool = True
    # feature pipeline knobs
    n_mels: int = 40
    use_f0_channel: bool = True
    ma_window: int = 1
    ma_position: str = "after_norm"
    # tokenizer knobs
    max_train_frames: int = 200_000
    kmeans_restarts: int = 1
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-4
    # ma_sweep repeats these kinds across ma_windows
    ma_base_kinds: list = field(default_factory=lambda: ["word_pitch", "speaker_warp"])
    # route modified tracks through synthesize+analyze instead of reading
    # features straight off the modified parameters
    audio_round_trip: bool = False

    def __post_init__(self):
        if self.experiment_kind not in EXPERIMENT_KINDS:
            raise ConfigInvalid(
                f"unknown experiment_kind {self.experiment_kind!r}"
            )
        if not self.scale_grid:
            self.scale_grid = _default_grid(self.experiment_kind)
        if not self.scale_grid or not self.cluster_sizes:
            raise ConfigInvalid("scale_grid and cluster_sizes must be non-empty")
        if any(s <= 0 for s in self.scale_grid):
            raise ConfigInvalid("scale factors must be positive")
        if any(k < 1 for k in self.cluster_sizes):
            raise ConfigInvalid("cluster sizes must be >= 1")
        if self.normalization not in ("none", "per_utterance"):
            raise ConfigInvalid(f"unknown normalization {self.normalization!r}")
        if self.ma_position not in ("before_norm", "after_norm"):
            raise ConfigInvalid(f"unknown ma_position {self.ma_position!r}")
        if self.ma_window < 1 or self.ma_window % 2 == 0:
            raise ConfigInvalid("ma_window must be odd and >= 1")
        if self.experiment_kind == "ma_sweep":
            if any(w < 1 or w % 2 == 0 for w in self.ma_windows):
                raise ConfigInvalid("ma_windows must all be odd and >= 1")
            bad = [k for k in self.ma_base_kinds
                   if k not in EXPERIMENT_KINDS or k == "ma_sweep"]
            if bad:
                raise ConfigInvalid(f"bad ma_base_kinds {bad}")
        if not (self.feature_source == "native_logmel"
                or self.feature_source.startswith("external:")):
            raise ConfigInvalid(
                f"feature_source must be 'native_logmel' or 'external:<pattern>'"
            )

    def to_dict(self) -> dict:
        return asdict(self)


def _default_grid(kind: str):
    if kind in ("word_pitch", "utt_pitch"):
        return list(DEFAULT_ALPHA_GRID)
    if kind in ("word_intensity", "utt_intensity"):
        return list(DEFAULT_BETA_GRID)
    if kind == "speaker_warp":
        return list(DEFAULT_GAMMA_GRID)
    return [1.0]


def load_config(path, **overrides) -> ExperimentConfig:
    """Load an ExperimentConfig from YAML, applying keyword overrides."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigInvalid(f"cannot load config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigInvalid(f"{path}: config must be a mapping")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(f"{path}: unknown config keys {sorted(unknown)}")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigInvalid(f"{path}: {exc}") from exc
