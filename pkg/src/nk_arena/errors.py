"""Exception types shared across the package."""


class NkArenaError(Exception):
    """Base class for all package errors."""


class ParameterError(NkArenaError, ValueError):
    """A caller-supplied argument is outside the supported range."""


class CapabilityError(NkArenaError):
    """The request is valid but exceeds what this build supports (e.g. 2^N too large)."""


class InvariantError(NkArenaError):
    """An internal invariant that callers rely on was violated."""


class LandscapeFormatError(NkArenaError):
    """Base class for landscape file load failures."""


class MagicError(LandscapeFormatError):
    """File does not start with the landscape magic bytes."""


class VersionError(LandscapeFormatError):
    """File format version is not supported by this build."""


class TruncationError(LandscapeFormatError):
    """File ends before the declared payload is complete."""


class ChecksumError(LandscapeFormatError):
    """Payload bytes do not match the stored CRC32."""
