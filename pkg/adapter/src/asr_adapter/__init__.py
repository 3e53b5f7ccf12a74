"""Reference engine adapter for the atc-forge transcription protocol."""

from .config import AdapterConfig
from .runner import transcribe_manifest

__version__ = "0.1.0"
