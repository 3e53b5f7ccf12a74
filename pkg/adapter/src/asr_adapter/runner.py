"""Wire-protocol loop: read a manifest, transcribe, emit JSON-lines.

Input manifest: JSON-lines with keys "id" and "audio" (absolute WAV path).
Output: one ``{"id": ..., "text": ...}`` object per utterance on stdout,
in manifest order.  Undecodable audio yields an empty transcript plus a
note on stderr; only a global failure exits nonzero.
"""

from __future__ import annotations

import json
import sys

import numpy as np
from scipy.io import wavfile

from .backends import Transcriber

_INT_SCALES = {np.dtype(np.int16): 32768.0, np.dtype(np.int32): 2147483648.0}


def load_audio(path) -> tuple[np.ndarray, int]:
    rate, data = wavfile.read(path)
    samples = np.asarray(data, dtype=np.float64)
    if samples.ndim > 1:
        samples = samples.mean(axis=1)
    scale = _INT_SCALES.get(data.dtype)
    if scale:
        samples /= scale
    elif data.dtype == np.uint8:
        samples = (samples - 128.0) / 128.0
    return samples, int(rate)


def transcribe_manifest(manifest_path, backend: Transcriber, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    with open(manifest_path, encoding="utf-8") as f:
        entries = [json.loads(line) for line in f if line.strip()]
    for entry in entries:
        uid = str(entry["id"])
        try:
            samples, rate = load_audio(entry["audio"])
            text = backend.transcribe(samples, rate)
        except Exception as exc:  # noqa: BLE001 - per-utterance fault barrier
            print(f"asr-adapter: {uid}: {exc}", file=err)
            text = ""
        out.write(json.dumps({"id": uid, "text": text}, ensure_ascii=False) + "\n")
        out.flush()
    return 0
