import json
import sys
from pathlib import Path

import numpy as np
import pytest

from atcforge.audio_core import AudioBuffer, save_wav

ENGINES = Path(__file__).parent / "engines"
RATE = 16000


def sine(freq_hz, dur_s=1.0, amp=0.5, rate=RATE):
    t = np.arange(int(rate * dur_s)) / rate
    return AudioBuffer(amp * np.sin(2 * np.pi * freq_hz * t), rate)


def white_noise(dur_s=1.0, amp=0.1, rate=RATE, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(int(rate * dur_s))
    return AudioBuffer(amp * x / np.max(np.abs(x)), rate)


def engine_cmd(name, *extra):
    return [sys.executable, str(ENGINES / f"{name}_engine.py"), *extra]


@pytest.fixture
def tmp_corpus(tmp_path):
    """Three short utterances with real WAV files and a manifest on disk."""
    wav_dir = tmp_path / "audio"
    wav_dir.mkdir()
    rows = [
        ("u1", "contact tower one one eight decimal seven"),
        ("u2", "runway two seven cleared for takeoff"),
        ("u3", "descend flight level one zero zero"),
    ]
    manifest_path = tmp_path / "corpus.jsonl"
    with open(manifest_path, "w", encoding="utf-8") as f:
        for i, (uid, text) in enumerate(rows):
            save_wav(sine(300 + 100 * i, dur_s=0.3), wav_dir / f"{uid}.wav")
            f.write(json.dumps({"id": uid, "audio": f"audio/{uid}.wav", "text": text}) + "\n")
    return manifest_path
