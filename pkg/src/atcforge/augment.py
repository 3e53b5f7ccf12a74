"""Training-time augmentations: radio-style filtering and tanh distortion.

Filters are cascaded RBJ-cookbook second-order sections (Q = 1/sqrt(2),
12 dB/octave per section); a band-pass is a high-pass into a low-pass.
The random chain derives one PRNG stream per (seed, utterance id) so an
augmented corpus is reproducible regardless of worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.signal import lfilter

from .audio_core import AudioBuffer
from .seeding import stream_for

FILTER_KINDS = ("high_pass", "low_pass", "band_pass")


@dataclass(frozen=True)
class FilterSpec:
    kind: str
    cutoff_low_hz: float | None = None  # high_pass and band_pass
    cutoff_high_hz: float | None = None  # low_pass and band_pass
    sections: int = 1

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.sections < 1:
            raise ValueError("sections must be >= 1")
        if self.kind in ("high_pass", "band_pass") and not self.cutoff_low_hz:
            raise ValueError(f"{self.kind} requires cutoff_low_hz")
        if self.kind in ("low_pass", "band_pass") and not self.cutoff_high_hz:
            raise ValueError(f"{self.kind} requires cutoff_high_hz")
        if (
            self.kind == "band_pass"
            and not self.cutoff_low_hz < self.cutoff_high_hz
        ):
            raise ValueError("band_pass requires cutoff_low_hz < cutoff_high_hz")


@dataclass(frozen=True)
class TanhSpec:
    pre_gain_db: float = 0.0
    preserve_rms: bool = True

    def __post_init__(self):
        if not math.isfinite(self.pre_gain_db):
            raise ValueError("pre_gain_db must be finite")
        if self.pre_gain_db < 0:
            raise ValueError("pre_gain_db must be >= 0")


@dataclass(frozen=True)
class ChainStep:
    """One chain entry: an augmentation template with sampling ranges.

    ``ranges`` maps parameter names (e.g. "cutoff_low_hz", "pre_gain_db")
    to [min, max] bounds sampled uniformly per utterance; ``options`` holds
    fixed non-sampled parameters (e.g. "sections", "preserve_rms").
    """

    kind: str  # high_pass | low_pass | band_pass | tanh
    p: float
    ranges: dict[str, tuple[float, float]] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FILTER_KINDS + ("tanh",):
            raise ValueError(f"unknown augmentation kind {self.kind!r}")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("apply probability must lie in [0, 1]")
        for name, (lo, hi) in self.ranges.items():
            if lo > hi:
                raise ValueError(f"range for {name!r} has min > max")


@dataclass(frozen=True)
class AugmentChain:
    steps: tuple[ChainStep, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))


def default_chain(seed: int = 0) -> AugmentChain:
    """Demo chain with plausible radio-channel ranges (toolkit defaults)."""
    return AugmentChain(
        steps=(
            ChainStep(
                "band_pass",
                p=0.5,
                ranges={
                    "cutoff_low_hz": (100.0, 500.0),
                    "cutoff_high_hz": (3000.0, 7000.0),
                },
            ),
            ChainStep("tanh", p=0.5, ranges={"pre_gain_db": (6.0, 24.0)}),
        ),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Filters


def _biquad(kind: str, cutoff_hz: float, rate_hz: int) -> tuple[np.ndarray, np.ndarray]:
    # RBJ cookbook section, Q = 1/sqrt(2) (Butterworth-style)
    w0 = 2.0 * math.pi * cutoff_hz / rate_hz
    alpha = math.sin(w0) / (2.0 * (1.0 / math.sqrt(2.0)))
    cw = math.cos(w0)
    if kind == "low_pass":
        b = np.array([(1 - cw) / 2, 1 - cw, (1 - cw) / 2])
    else:
        b = np.array([(1 + cw) / 2, -(1 + cw), (1 + cw) / 2])
    a = np.array([1 + alpha, -2 * cw, 1 - alpha])
    return b / a[0], a / a[0]


def _run_sections(x: np.ndarray, kind: str, cutoff: float, sections: int, rate: int):
    b, a = _biquad(kind, cutoff, rate)
    for _ in range(sections):
        x = lfilter(b, a, x)
    return x


def apply_filter(buffer: AudioBuffer, spec: FilterSpec) -> AudioBuffer:
    """Apply a high/low/band-pass filter; output length equals input length."""
    nyquist = buffer.sample_rate_hz / 2.0
    for cutoff in (spec.cutoff_low_hz, spec.cutoff_high_hz):
        if cutoff is not None and not (0.0 < cutoff < nyquist):
            raise ValueError(f"cutoff {cutoff} Hz outside (0, {nyquist}) Hz")
    x = buffer.samples
    if spec.kind in ("high_pass", "band_pass"):
        x = _run_sections(x, "high_pass", spec.cutoff_low_hz, spec.sections, buffer.sample_rate_hz)
    if spec.kind in ("low_pass", "band_pass"):
        x = _run_sections(x, "low_pass", spec.cutoff_high_hz, spec.sections, buffer.sample_rate_hz)
    return AudioBuffer(x, buffer.sample_rate_hz)


def tanh_distortion(buffer: AudioBuffer, spec: TanhSpec) -> AudioBuffer:
    """Odd-symmetric saturation y = tanh(g * x), g from pre_gain_db.

    With preserve_rms the output is rescaled to the input RMS, capped so no
    sample exceeds full scale.
    """
    gain = 10.0 ** (spec.pre_gain_db / 20.0)
    y = np.tanh(gain * buffer.samples)
    # float64 tanh saturates to exactly +/-1 for large arguments; keep the
    # open-interval contract by backing off one ulp
    limit = np.nextafter(1.0, 0.0)
    y = np.clip(y, -limit, limit)
    if spec.preserve_rms:
        rms_out = np.sqrt(np.mean(y**2)) if len(y) else 0.0
        if rms_out > 0.0:
            scale = buffer.rms() / rms_out
            peak = np.max(np.abs(y))
            if peak * scale > 1.0:
                scale = 1.0 / peak
            y = y * scale
    return AudioBuffer(y, buffer.sample_rate_hz)


# ---------------------------------------------------------------------------
# Random chain


def _materialize(step: ChainStep, drawn: dict[str, float]):
    if step.kind == "tanh":
        return TanhSpec(
            pre_gain_db=drawn.get("pre_gain_db", 0.0),
            preserve_rms=bool(step.options.get("preserve_rms", True)),
        )
    return FilterSpec(
        kind=step.kind,
        cutoff_low_hz=drawn.get("cutoff_low_hz"),
        cutoff_high_hz=drawn.get("cutoff_high_hz"),
        sections=int(step.options.get("sections", 1)),
    )


def apply_chain(
    buffer: AudioBuffer, chain: AugmentChain, utterance_id: str
) -> tuple[AudioBuffer, list[dict[str, Any]]]:
    """Run the chain on one utterance with its private random stream.

    Returns the augmented buffer and the record of steps that fired with
    the exact parameters drawn, for manifest provenance.
    """
    rng = stream_for(chain.seed, utterance_id)
    applied: list[dict[str, Any]] = []
    out = buffer
    for step in chain.steps:
        fired = rng.random() < step.p
        # draw parameters even when the step does not fire so the stream
        # position (and all later draws) is independent of the p values
        drawn = {
            name: float(rng.uniform(lo, hi))
            for name, (lo, hi) in sorted(step.ranges.items())
        }
        if not fired:
            continue
        spec = _materialize(step, drawn)
        if step.kind == "tanh":
            out = tanh_distortion(out, spec)
        else:
            out = apply_filter(out, spec)
        applied.append({"kind": step.kind, "params": drawn, **step.options})
    return out, applied
