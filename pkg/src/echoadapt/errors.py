"""Exception types shared across the package."""


class EchoAdaptError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(EchoAdaptError):
    """Input data violates a structural requirement (non-finite values,
    wrong dimensionality, negative magnitude, non-binary mask)."""


class SpectralInconsistencyError(EchoAdaptError):
    """A spectrum expected to invert to a real image carries excessive
    imaginary residue, which signals a symmetry-breaking upstream bug."""


class ShapeMismatchError(EchoAdaptError):
    """Two arrays that must share dimensions do not."""


class ParameterError(EchoAdaptError):
    """A scalar parameter is outside its legal range."""


class IngestionError(EchoAdaptError):
    """A file could not be read or has unusable content."""


class ConfigurationError(EchoAdaptError):
    """A run configuration is inconsistent or oversubscribed."""


class ManifestError(EchoAdaptError):
    """A pairing or manifest reference is invalid."""


class IntegrityError(EchoAdaptError):
    """A file referenced by a manifest is missing or fails hash verification."""


class PairingError(EchoAdaptError):
    """Prediction and ground-truth directories cannot be matched one-to-one."""
