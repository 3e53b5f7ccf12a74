"""Spectral-gating noise reduction.

The gate estimates per-frequency-band noise statistics (mean/std of dB
magnitude across frames), builds a frequency-varying threshold, floors
time-frequency cells below it, smooths the resulting mask and resynthesizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import convolve

from .audio_core import AudioBuffer, Spectrogram, StftParams, istft, stft

#: added inside the log so zero magnitude has a finite dB value
DB_EPS = 1e-10

#: tolerance on the dB comparison so constant-magnitude bins (std = 0)
#: deterministically pass their own threshold
DB_COMPARE_TOL = 1e-9


@dataclass(frozen=True)
class NoiseProfile:
    """Per-bin mean and standard deviation of dB magnitude."""

    mean_db: np.ndarray
    std_db: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean_db, dtype=np.float64)
        std = np.asarray(self.std_db, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean_db and std_db must be matching 1-D arrays")
        if np.any(std < 0):
            raise ValueError("std_db must be non-negative")
        object.__setattr__(self, "mean_db", mean)
        object.__setattr__(self, "std_db", std)

    @property
    def num_bins(self) -> int:
        return len(self.mean_db)


@dataclass(frozen=True)
class GateConfig:
    n_std: float = 1.5
    floor_gain: float = 0.02
    smooth_time: int = 2  # triangular kernel half-width, frames
    smooth_freq: int = 2  # triangular kernel half-width, bins
    stft: StftParams = field(default_factory=StftParams)

    def __post_init__(self):
        if not (0.0 <= self.floor_gain <= 1.0):
            raise ValueError("floor_gain must lie in [0, 1]")
        if self.n_std < 0:
            raise ValueError("n_std must be non-negative")
        if self.smooth_time < 0 or self.smooth_freq < 0:
            raise ValueError("smoothing half-widths must be non-negative")


def _magnitude_db(frames: np.ndarray) -> np.ndarray:
    return 20.0 * np.log10(np.abs(frames) + DB_EPS)


def estimate_noise_profile(spec: Spectrogram) -> NoiseProfile:
    """Stationary per-bin noise statistics over the spectrogram's frames.

    Zero-padded tail frames are excluded when the spectrogram knows its
    source length: their artificially low magnitudes would inflate the std
    and push thresholds above genuinely stationary content.
    """
    n_frames = spec.num_full_frames() or spec.num_frames
    if n_frames < 2:
        raise ValueError("noise estimation needs at least 2 frames")
    db = _magnitude_db(spec.frames[:n_frames])
    return NoiseProfile(mean_db=db.mean(axis=0), std_db=db.std(axis=0))


def _triangular_kernel(half_width: int) -> np.ndarray:
    # peak-normalized (center weight 1): smoothing widens kept regions and
    # feathers their borders without diluting narrow spectral peaks; the
    # result is clamped back to [floor_gain, 1]
    if half_width == 0:
        return np.ones(1)
    k = np.concatenate(
        [np.arange(1, half_width + 2), np.arange(half_width, 0, -1)]
    ).astype(np.float64)
    return k / k.max()


def compute_gate_mask(
    spec: Spectrogram, profile: NoiseProfile, cfg: GateConfig
) -> np.ndarray:
    """Attenuation mask in [floor_gain, 1], shape (num_frames, num_bins).

    A cell keeps gain 1 when its dB magnitude reaches the bin's threshold
    mean + n_std * std, else it is set to floor_gain; the binary-with-floor
    mask is then smoothed with a separable normalized triangular kernel.
    """
    if profile.num_bins != spec.num_bins:
        raise ValueError(
            f"profile has {profile.num_bins} bins, spectrogram has {spec.num_bins}"
        )
    db = _magnitude_db(spec.frames)
    threshold = profile.mean_db + cfg.n_std * profile.std_db
    mask = np.where(db >= threshold - DB_COMPARE_TOL, 1.0, cfg.floor_gain)
    if cfg.smooth_time > 0:
        kt = _triangular_kernel(cfg.smooth_time)
        mask = convolve(mask, kt[:, None], mode="nearest")
    if cfg.smooth_freq > 0:
        kf = _triangular_kernel(cfg.smooth_freq)
        mask = convolve(mask, kf[None, :], mode="nearest")
    return np.clip(mask, cfg.floor_gain, 1.0)


def spectral_gate(
    buffer: AudioBuffer,
    cfg: GateConfig | None = None,
    noise_clip: AudioBuffer | None = None,
) -> AudioBuffer:
    """Denoise a buffer by spectral gating.

    The noise profile is estimated from ``noise_clip`` when supplied,
    otherwise from the buffer itself (stationary self-estimate).  Output
    length equals input length.
    """
    cfg = cfg or GateConfig()
    if len(buffer) < cfg.stft.window_len:
        raise ValueError(
            f"buffer ({len(buffer)} samples) shorter than one window "
            f"({cfg.stft.window_len})"
        )
    if noise_clip is not None and len(noise_clip) < cfg.stft.window_len:
        raise ValueError("noise_clip shorter than one analysis window")
    spec = stft(buffer, cfg.stft)
    source = stft(noise_clip, cfg.stft) if noise_clip is not None else spec
    profile = estimate_noise_profile(source)
    mask = compute_gate_mask(spec, profile, cfg)
    gated = Spectrogram(
        spec.frames * mask, cfg.stft, spec.sample_rate_hz, num_samples=len(buffer)
    )
    return istft(gated)
