"""Toolkit for measuring how sensitive discrete speech tokens are to
controlled prosody and speaker modifications in the vocoder-parameter
domain."""

from .config import ExperimentConfig, load_config
from .corpus import generate_synthetic_corpus
from .features import (
    FeatureMatrix,
    extract_logmel,
    ingest_features,
    moving_average,
    normalize_per_utterance,
    write_features,
)
from .harness import compare_conditions, run_experiment
from .manifest import UtteranceManifest, load_manifest, write_manifest
from .metrics import (
    MetricsReport,
    cluster_histogram,
    levenshtein,
    mter,
    paired_t_test,
    pnmi,
    segment_ter,
    ter,
)
from .modify import (
    ScaleFactors,
    modify_utterance_intensity_range,
    modify_utterance_pitch_range,
    modify_word_intensity,
    modify_word_pitch,
    warp_speaker,
)
from .quantizer import (
    KMeansModel,
    TokenSequence,
    deduplicate,
    kmeans_assign,
    kmeans_train,
    load_model,
    save_model,
)
from .report import emit_report
from .vocoder import (
    ParamTrack,
    Segment,
    analyze,
    read_param_track,
    segment_to_frames,
    synthesize,
    write_param_track,
)

__version__ = "0.1.0"
