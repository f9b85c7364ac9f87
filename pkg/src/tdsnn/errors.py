"""Exception taxonomy shared across the package."""


class TdsnnError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(TdsnnError):
    """Parameters violate an invariant (bad threshold, dt <= 0, ...)."""


class ModelStateError(TdsnnError):
    """A neuron state of the wrong variant was passed to a step function."""


class CalibrationError(TdsnnError):
    """Activation statistics are unusable (empty set, zero/negative scale)."""


class UnsupportedNetworkError(TdsnnError):
    """Network contains a layer the conversion pipeline cannot handle."""


class ShapeError(TdsnnError):
    """Tensor shapes do not compose."""


class BundleError(TdsnnError):
    """Base class for weight-bundle I/O failures."""


class BundleVersionError(BundleError):
    """Unrecognized format version in a bundle manifest."""


class BundleChecksumError(BundleError):
    """Blob CRC-32 does not match the manifest."""


class BundleLengthError(BundleError):
    """Blob byte length differs from what the manifest requires."""


class BundleLayerKindError(BundleError):
    """Manifest names a layer kind this implementation does not know."""


class SweepFailureError(TdsnnError):
    """No frequency in an energy sweep reached the target error."""
