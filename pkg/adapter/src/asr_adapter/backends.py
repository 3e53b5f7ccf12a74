"""Transcription backends.

A backend is anything with ``transcribe(samples, sample_rate_hz) -> str``
for mono float samples in [-1, 1].  ``WhisperBackend`` wraps a Hugging
Face checkpoint with deterministic greedy decoding; ``NullBackend`` emits
empty transcripts and exists so the wire protocol can be exercised
end-to-end without model weights.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

from .config import AdapterConfig


class Transcriber(Protocol):
    def transcribe(self, samples: np.ndarray, sample_rate_hz: int) -> str: ...


class NullBackend:
    """Diagnostic backend: always returns an empty transcript."""

    def transcribe(self, samples, sample_rate_hz):
        return ""


class WhisperBackend:
    """Greedy-decoding wrapper around a Whisper-family checkpoint.

    Greedy decoding (no sampling, single beam) keeps reruns bit-identical
    for the same audio and checkpoint.
    """

    def __init__(self, config: AdapterConfig):
        from transformers import pipeline  # heavyweight: import on demand

        self._pipe = pipeline(
            "automatic-speech-recognition",
            model=config.model_id,
            device=config.device,
            batch_size=config.batch_size,
        )

    def transcribe(self, samples, sample_rate_hz):
        result = self._pipe(
            {"raw": np.asarray(samples, dtype=np.float32), "sampling_rate": sample_rate_hz},
            generate_kwargs={"do_sample": False, "num_beams": 1},
        )
        return result["text"].strip()


def make_backend(config: AdapterConfig) -> Transcriber:
    if config.model_id == "null":
        return NullBackend()
    return WhisperBackend(config)
