"""Exception hierarchy shared by all sounder modules.

Every error carries a short machine-readable ``category`` and the process
exit code the command line tool maps it to.  Library code raises these;
only the CLI turns them into exit codes.
"""


class SounderError(Exception):
    """Base class for all errors raised by this package."""

    category = "validation"
    exit_code = 3


class ConfigurationError(SounderError):
    """A parameter set violates one of its structural constraints."""


class ValidationError(SounderError):
    """A sounder/channel combination fails a deployment feasibility check."""


class SchedulingError(SounderError):
    """A trigger schedule cannot produce deterministic snapshots."""


class TruncatedStreamError(SounderError):
    """A sample stream ended before the receiver finished a snapshot."""


class DegenerateWaveformError(SounderError):
    """A sounding waveform cannot be inverted (near-zero occupied bin)."""


class CaptureFormatError(SounderError):
    """A capture file is malformed or has an unsupported version."""

    category = "format"
    exit_code = 5
