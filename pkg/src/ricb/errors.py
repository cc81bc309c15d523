"""Exception hierarchy shared across the package.

Every failure mode that callers are expected to distinguish gets its own
class; generic misuse keeps plain ValueError/TypeError semantics by
subclassing them.
"""


class RicbError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedFormatError(RicbError, ValueError):
    """Image file is not PNG, JPEG, or BMP."""


class CorruptImageError(RicbError, ValueError):
    """Image file exists but cannot be decoded."""


class NonFiniteAngleError(RicbError, ValueError):
    """Angle input is NaN or infinite."""


class MissingGroundTruthError(RicbError, KeyError):
    """Oracle estimator asked about an id absent from the ground-truth table."""


class ConfigInvalidError(RicbError, ValueError):
    """Configuration violates a documented constraint."""


class EmptyDatasetError(RicbError, ValueError):
    """Dataset root yields no images."""


class UnreadableDirectoryError(RicbError, OSError):
    """Dataset root is missing or not a directory."""


class BadMagicError(RicbError, ValueError):
    """Bank file does not start with the RICB magic bytes."""


class VersionMismatchError(RicbError, ValueError):
    """Bank file version is not supported."""


class DimMismatchError(RicbError, ValueError):
    """Vector dimensions disagree (file payload, query, or record)."""


class ManifestDesyncError(RicbError, ValueError):
    """Bank vector file and sidecar manifest disagree on row count."""


class SampleTooLargeError(RicbError, ValueError):
    """Requested sample exceeds the population size."""


class ZeroVectorError(RicbError, ValueError):
    """Cosine distance on a vector with (near-)zero norm."""


class EmptyBankError(RicbError, ValueError):
    """Search over a bank with no candidate records."""


class PercentOutOfRangeError(RicbError, ValueError):
    """Rotation proportion outside [0, 100]."""


class BankLoadFailureError(RicbError, RuntimeError):
    """Service startup could not load the bank."""


class BindFailureError(RicbError, OSError):
    """Service could not bind its listen address."""
