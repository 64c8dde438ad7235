from .errors import (
    AudioDecodeError,
    ExporterError,
    LayerOutOfRange,
    ManifestBroken,
    ModelNotFound,
)
from .export import (
    ExportJob,
    Utterance,
    export_features,
    frame_period_ms_of,
    load_manifest,
    read_wav,
)
from .pbft import write_pbft

__version__ = "0.1.0"

__all__ = [
    "AudioDecodeError",
    "ExporterError",
    "ExportJob",
    "LayerOutOfRange",
    "ManifestBroken",
    "ModelNotFound",
    "Utterance",
    "export_features",
    "frame_period_ms_of",
    "load_manifest",
    "read_wav",
    "write_pbft",
    "__version__",
]
