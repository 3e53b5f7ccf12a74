import io
import json
import wave

import numpy as np
import pytest

from asr_adapter.backends import NullBackend, make_backend
from asr_adapter.config import AdapterConfig
from asr_adapter.runner import load_audio, transcribe_manifest


class UpperCasePathBackend:
    """Fake recognizer: transcript derived from the file stem."""

    def transcribe(self, samples, sample_rate_hz):
        assert sample_rate_hz > 0
        assert samples.ndim == 1
        return f"decoded {len(samples)} samples"


def write_wav(path, n=1600, rate=16000):
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(rate)
        f.writeframes(np.zeros(n, dtype="<i2").tobytes())


def make_wire_manifest(tmp_path, ids):
    p = tmp_path / "wire.jsonl"
    with open(p, "w") as f:
        for uid in ids:
            wav = tmp_path / f"{uid}.wav"
            write_wav(wav)
            f.write(json.dumps({"id": uid, "audio": str(wav)}) + "\n")
    return p


def run(manifest, backend):
    out, err = io.StringIO(), io.StringIO()
    code = transcribe_manifest(manifest, backend, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


class TestProtocolShape:
    def test_one_line_per_utterance_in_order(self, tmp_path):
        manifest = make_wire_manifest(tmp_path, ["a", "b", "c"])
        code, out, _ = run(manifest, UpperCasePathBackend())
        assert code == 0
        lines = out.strip().split("\n")
        assert [json.loads(l)["id"] for l in lines] == ["a", "b", "c"]
        for line in lines:
            obj = json.loads(line)
            assert set(obj) == {"id", "text"}

    def test_empty_manifest(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        code, out, _ = run(p, NullBackend())
        assert code == 0
        assert out == ""

    def test_undecodable_audio_empty_text_and_note(self, tmp_path):
        bad = tmp_path / "bad.wav"
        bad.write_bytes(b"not a wav at all")
        p = tmp_path / "wire.jsonl"
        p.write_text(json.dumps({"id": "broken", "audio": str(bad)}) + "\n")
        code, out, err = run(p, UpperCasePathBackend())
        assert code == 0
        assert json.loads(out.strip()) == {"id": "broken", "text": ""}
        assert "broken" in err

    def test_silence_clip_yields_valid_jsonl(self, tmp_path):
        manifest = make_wire_manifest(tmp_path, ["silence"])
        code, out, _ = run(manifest, NullBackend())
        assert code == 0
        obj = json.loads(out.strip())
        assert obj["id"] == "silence"
        assert isinstance(obj["text"], str)


class TestAudioLoading:
    def test_int16_scaling_and_mono(self, tmp_path):
        p = tmp_path / "s.wav"
        with wave.open(str(p), "wb") as f:
            f.setnchannels(2)
            f.setsampwidth(2)
            f.setframerate(8000)
            f.writeframes(np.array([16384, -16384], dtype="<i2").tobytes())
        samples, rate = load_audio(p)
        assert rate == 8000
        assert samples == pytest.approx([0.0])


class TestConfig:
    def test_null_backend_selected(self):
        backend = make_backend(AdapterConfig(model_id="null"))
        assert isinstance(backend, NullBackend)

    def test_empty_model_rejected(self):
        with pytest.raises(ValueError):
            AdapterConfig(model_id="")

    def test_bad_batch_size(self):
        with pytest.raises(ValueError):
            AdapterConfig(batch_size=0)
