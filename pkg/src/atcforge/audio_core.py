"""Audio I/O, resampling and the STFT analysis/synthesis pair.

All audio in the toolkit flows through :class:`AudioBuffer`: mono float64
samples in [-1, 1] plus a sample rate.  WAV reading is done with a small
RIFF parser so that missing files, unsupported codecs and truncated
headers surface as distinct, path-bearing errors.
"""

from __future__ import annotations

import math
import struct
import wave
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import AudioFormatError

#: canonical pipeline rate; ingestion resamples to this unless told otherwise
DEFAULT_SAMPLE_RATE = 16000


@dataclass(frozen=True)
class AudioBuffer:
    """Mono sampled waveform. Samples are float64, nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer is mono: samples must be 1-D")
        if not np.all(np.isfinite(samples)):
            raise ValueError("AudioBuffer samples must be finite")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def rms(self) -> float:
        if len(self.samples) == 0:
            return 0.0
        return float(np.sqrt(np.mean(self.samples**2)))


@dataclass(frozen=True)
class StftParams:
    """Analysis parameters: Hann window, hop in {window/2, window/4} for COLA."""

    window_len: int = 2048
    hop_len: int = 512

    def __post_init__(self):
        if self.window_len <= 0 or (self.window_len & (self.window_len - 1)) != 0:
            raise ValueError("window_len must be a positive power of two")
        if not (0 < self.hop_len <= self.window_len):
            raise ValueError("hop_len must satisfy 0 < hop_len <= window_len")
        if self.hop_len not in (self.window_len // 2, self.window_len // 4):
            raise ValueError(
                "hop_len must be window_len/2 or window_len/4 (constant overlap-add)"
            )

    @property
    def num_bins(self) -> int:
        return self.window_len // 2 + 1

    def window(self) -> np.ndarray:
        # periodic Hann: COLA-exact at hops window/2 and window/4
        n = np.arange(self.window_len)
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / self.window_len))


@dataclass(frozen=True)
class Spectrogram:
    """Complex STFT frames, shape (num_frames, num_bins).

    ``num_samples`` records the analyzed signal length so synthesis can trim
    the zero-padded tail and noise estimation can skip padded frames.
    """

    frames: np.ndarray
    params: StftParams
    sample_rate_hz: int
    num_samples: int = field(default=0)

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.complex128)
        if frames.ndim != 2 or frames.shape[1] != self.params.num_bins:
            raise ValueError(
                f"frames must be (num_frames, {self.params.num_bins}), got {frames.shape}"
            )
        if not np.all(np.isfinite(frames)):
            raise ValueError("spectrogram coefficients must be finite")
        object.__setattr__(self, "frames", frames)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_bins(self) -> int:
        return self.frames.shape[1]

    def num_full_frames(self) -> int:
        """Frames whose window lies entirely inside the original signal."""
        w, h = self.params.window_len, self.params.hop_len
        if self.num_samples < w:
            return 0
        return min(self.num_frames, (self.num_samples - w) // h + 1)


# ---------------------------------------------------------------------------
# WAV I/O


def _read_chunks(data: bytes, path: Path):
    if len(data) < 12:
        raise AudioFormatError(f"{path}: truncated RIFF header")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file")
    chunks = {}
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4 : pos + 8])
        body = data[pos + 8 : pos + 8 + size]
        if cid in (b"fmt ", b"data") and len(body) < size:
            raise AudioFormatError(f"{path}: truncated '{cid.decode()}' chunk")
        chunks.setdefault(cid, body)
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    return chunks


def load_wav(path) -> AudioBuffer:
    """Read a PCM WAV file as a mono buffer scaled to [-1, 1].

    Supports 8/16/24-bit integer and 32-bit float PCM; multi-channel audio
    is averaged to mono.  Integer samples are scaled by the magnitude of the
    most negative code (e.g. int16 / 32768), so full-scale negative maps to
    -1.0 exactly.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such audio file: {path}")
    data = path.read_bytes()
    chunks = _read_chunks(data, path)
    if b"fmt " not in chunks:
        raise AudioFormatError(f"{path}: missing fmt chunk")
    if b"data" not in chunks:
        raise AudioFormatError(f"{path}: missing data chunk")
    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise AudioFormatError(f"{path}: truncated fmt chunk")
    (codec, channels, rate, _, _, bits) = struct.unpack("<HHIIHH", fmt[:16])
    if codec == 0xFFFE:  # WAVE_FORMAT_EXTENSIBLE: real codec in the subformat GUID
        if len(fmt) < 26:
            raise AudioFormatError(f"{path}: truncated extensible fmt chunk")
        (codec,) = struct.unpack("<H", fmt[24:26])
    if channels < 1 or rate <= 0:
        raise AudioFormatError(f"{path}: corrupt fmt chunk (channels={channels}, rate={rate})")

    raw = chunks[b"data"]
    if codec == 1 and bits == 16:
        x = np.frombuffer(raw[: len(raw) // 2 * 2], dtype="<i2").astype(np.float64) / 32768.0
    elif codec == 1 and bits == 8:
        x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif codec == 1 and bits == 24:
        b = np.frombuffer(raw[: len(raw) // 3 * 3], dtype=np.uint8).reshape(-1, 3)
        vals = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        vals = np.where(vals >= 1 << 23, vals - (1 << 24), vals)
        x = vals.astype(np.float64) / float(1 << 23)
    elif codec == 3 and bits == 32:
        x = np.frombuffer(raw[: len(raw) // 4 * 4], dtype="<f4").astype(np.float64)
    else:
        raise AudioFormatError(f"{path}: unsupported codec (format={codec}, bits={bits})")

    frames = len(x) // channels
    x = x[: frames * channels].reshape(-1, channels).mean(axis=1)
    if not np.all(np.isfinite(x)):
        raise AudioFormatError(f"{path}: non-finite sample values")
    return AudioBuffer(x, int(rate))


def save_wav(buffer: AudioBuffer, path) -> None:
    """Write a buffer as 16-bit PCM mono WAV, hard-clipping to [-1, 1]."""
    clipped = np.clip(buffer.samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(buffer.sample_rate_hz)
        f.writeframes(pcm.tobytes())


def resample(buffer: AudioBuffer, target_rate_hz: int) -> AudioBuffer:
    """Band-limited polyphase resampling; identity when rates already match."""
    if target_rate_hz <= 0:
        raise ValueError("target_rate_hz must be positive")
    if target_rate_hz == buffer.sample_rate_hz:
        return buffer
    ratio = Fraction(target_rate_hz, buffer.sample_rate_hz)
    out = resample_poly(buffer.samples, ratio.numerator, ratio.denominator)
    return AudioBuffer(out, target_rate_hz)


# ---------------------------------------------------------------------------
# STFT / iSTFT


def _frame_starts(num_samples: int, params: StftParams) -> np.ndarray:
    # frames start at multiples of hop_len; enough frames so every sample is
    # covered, i.e. the last frame reaches the end (zero-padded past it)
    w, h = params.window_len, params.hop_len
    if num_samples <= w:
        return np.array([0])
    num_frames = math.ceil((num_samples - w) / h) + 1
    return np.arange(num_frames) * h


def stft(buffer: AudioBuffer, params: StftParams) -> Spectrogram:
    """Hann-windowed hopped FFT; the tail frame is zero-padded."""
    x = buffer.samples
    if len(x) == 0:
        raise ValueError("cannot compute a spectrogram of an empty buffer")
    starts = _frame_starts(len(x), params)
    w = params.window_len
    padded = np.concatenate([x, np.zeros(starts[-1] + w - len(x))])
    frames = np.stack([padded[s : s + w] for s in starts])
    spec = np.fft.rfft(frames * params.window(), axis=1)
    return Spectrogram(spec, params, buffer.sample_rate_hz, num_samples=len(x))


def istft(spec: Spectrogram) -> AudioBuffer:
    """Overlap-add synthesis with squared-window normalization.

    Output is trimmed to ``spec.num_samples`` when set.  Reconstruction is
    exact (to float tolerance) on the interior; half-window edges are
    attenuated by the normalization floor.
    """
    params = spec.params
    w, h = params.window_len, params.hop_len
    win = params.window()
    frames = np.fft.irfft(spec.frames, n=w, axis=1)
    num_frames = frames.shape[0]
    total = (num_frames - 1) * h + w
    out = np.zeros(total)
    norm = np.zeros(total)
    for i in range(num_frames):
        out[i * h : i * h + w] += frames[i] * win
        norm[i * h : i * h + w] += win**2
    # divide by the overlapped window energy, floored at half the
    # full-overlap (COLA) value: reconstruction is exact wherever the
    # overlap is substantial (the whole interior past half a window), while
    # the outer edge fades out instead of being divided by a vanishing
    # partial sum, which would blow up frames modified after analysis
    out /= np.maximum(norm, 0.5 * norm.max())
    if spec.num_samples:
        out = out[: spec.num_samples]
    return AudioBuffer(out, spec.sample_rate_hz)
