"""Exception hierarchy shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class AudioFormatError(ToolkitError):
    """Unsupported or corrupt audio file."""


class ManifestError(ToolkitError):
    """Malformed or inconsistent dataset manifest."""


class ProtocolError(ToolkitError):
    """Violation of the engine adapter wire protocol."""


class EngineError(ToolkitError):
    """External transcription engine could not be run."""
