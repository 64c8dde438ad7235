"""Exception hierarchy shared by all toolkit modules."""


class ProsodyBenchError(Exception):
    """Base class for all toolkit errors."""


# --- audio / parameter analysis ---

class EmptyAudio(ProsodyBenchError):
    pass


class UnsupportedSampleRate(ProsodyBenchError):
    pass


class InvariantViolation(ProsodyBenchError):
    """A domain type failed its own validation."""


# --- binary file I/O ---

class IoFailure(ProsodyBenchError):
    pass


class BadMagic(ProsodyBenchError):
    pass


class DimensionMismatch(ProsodyBenchError):
    pass


class NonFiniteValue(ProsodyBenchError):
    pass


# --- prosody modification ---

class RangeOutOfBounds(ProsodyBenchError):
    pass


class NonPositiveIntensity(ProsodyBenchError):
    pass


# --- feature pipeline ---

class TooFewBins(ProsodyBenchError):
    pass


class EvenWindow(ProsodyBenchError):
    pass


class TooShort(ProsodyBenchError):
    pass


# --- tokenizer ---

class TooFewSamples(ProsodyBenchError):
    pass


class DegenerateData(ProsodyBenchError):
    pass


# --- metrics ---

class EmptyReference(ProsodyBenchError):
    pass


class EmptySegment(ProsodyBenchError):
    pass


class FrameRateMismatch(ProsodyBenchError):
    pass


class TooFewSequences(ProsodyBenchError):
    pass


class EmptyAfterDedup(ProsodyBenchError):
    pass


class LengthMismatch(ProsodyBenchError):
    pass


class DegeneratePhoneSet(ProsodyBenchError):
    pass


class TokenOutOfRange(ProsodyBenchError):
    pass


class ZeroVariance(ProsodyBenchError):
    pass


# --- harness ---

class ConfigInvalid(ProsodyBenchError):
    pass


class ManifestBroken(ProsodyBenchError):
    pass


class SpecTooSmall(ProsodyBenchError):
    pass


class UtteranceSetMismatch(ProsodyBenchError):
    pass


class EmptyReportSet(ProsodyBenchError):
    pass
