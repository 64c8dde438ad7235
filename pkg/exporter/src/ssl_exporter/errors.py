class ExporterError(Exception):
    """Base class for all exporter failures."""


class ModelNotFound(ExporterError):
    pass


class AudioDecodeError(ExporterError):
    pass


class LayerOutOfRange(ExporterError):
    pass


class ManifestBroken(ExporterError):
    pass
