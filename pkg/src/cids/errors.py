"""Exception types shared across the package."""


class CidsError(Exception):
    """Base class for all package errors."""


class WrongProposer(CidsError):
    """Block sealed by a node that is not the scheduled authority."""


class NoAuthorities(CidsError):
    """Authority list is empty."""


class EmptyPayload(CidsError):
    """Attempt to store a zero-length payload."""


class NotFound(CidsError):
    """Digest not present in the content store."""


class ShapeMismatch(CidsError):
    """Bloom filters with different (m, k) cannot be merged."""


class MalformedBytes(CidsError):
    """Byte sequence does not decode to a valid object."""


class DegenerateDataset(CidsError):
    """Training data does not contain both classes."""


class BadHyperparameter(CidsError):
    """Hyperparameter outside its valid range."""


class EmptyHoldout(CidsError):
    """Validation holdout is empty or single-class."""


class EmptyReference(CidsError):
    """Reference key lists for filter validation are empty."""


class EmptyHistory(CidsError):
    """Replay generator has no captured traffic to draw from."""


class ConfigInvalid(CidsError):
    """Scenario configuration violates an invariant."""
