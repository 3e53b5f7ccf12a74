import math

import numpy as np
import pytest

from atcforge.audio_core import AudioBuffer
from atcforge.augment import (
    AugmentChain,
    ChainStep,
    FilterSpec,
    TanhSpec,
    apply_chain,
    apply_filter,
    default_chain,
    tanh_distortion,
)

from conftest import RATE, sine


def steady_amplitude(buf, freq_hz):
    """Tone amplitude from the second half of the signal (transient skipped)."""
    x = buf.samples[len(buf.samples) // 2 :]
    spectrum = np.abs(np.fft.rfft(x * np.hanning(len(x))))
    k = round(freq_hz * len(x) / buf.sample_rate_hz)
    return spectrum[k - 2 : k + 3].max()


def butterworth_2nd_order_db(f, fc):
    return -10 * math.log10(1 + (f / fc) ** 4)


class TestApplyFilter:
    def test_low_pass_passband_flat(self):
        buf = sine(500)
        out = apply_filter(buf, FilterSpec("low_pass", cutoff_high_hz=2000))
        gain_db = 20 * np.log10(steady_amplitude(out, 500) / steady_amplitude(buf, 500))
        assert abs(gain_db) <= 1.0

    def test_low_pass_stopband_two_octaves(self):
        buf = sine(2000)
        out = apply_filter(buf, FilterSpec("low_pass", cutoff_high_hz=500))
        gain_db = 20 * np.log10(steady_amplitude(out, 2000) / steady_amplitude(buf, 2000))
        assert gain_db <= -20.0
        assert gain_db == pytest.approx(butterworth_2nd_order_db(2000, 500), abs=2.0)

    def test_high_pass_stopband_two_octaves(self):
        buf = sine(500)
        out = apply_filter(buf, FilterSpec("high_pass", cutoff_low_hz=2000))
        gain_db = 20 * np.log10(steady_amplitude(out, 500) / steady_amplitude(buf, 500))
        assert gain_db == pytest.approx(butterworth_2nd_order_db(2000, 500), abs=2.0)

    def test_band_pass_kills_dc(self):
        buf = AudioBuffer(np.full(RATE, 0.5), RATE)
        out = apply_filter(buf, FilterSpec("band_pass", cutoff_low_hz=300, cutoff_high_hz=3000))
        assert np.mean(np.abs(out.samples[RATE // 2 :])) < 1e-3

    def test_band_pass_midband_within_1db(self):
        buf = sine(1000)
        out = apply_filter(buf, FilterSpec("band_pass", cutoff_low_hz=300, cutoff_high_hz=3000))
        gain_db = 20 * np.log10(steady_amplitude(out, 1000) / steady_amplitude(buf, 1000))
        assert abs(gain_db) <= 1.0

    def test_sections_stack_rolloff(self):
        buf = sine(2000)
        one = apply_filter(buf, FilterSpec("low_pass", cutoff_high_hz=500, sections=1))
        two = apply_filter(buf, FilterSpec("low_pass", cutoff_high_hz=500, sections=2))
        g1 = 20 * np.log10(steady_amplitude(one, 2000) / steady_amplitude(buf, 2000))
        g2 = 20 * np.log10(steady_amplitude(two, 2000) / steady_amplitude(buf, 2000))
        assert g2 == pytest.approx(2 * g1, abs=2.0)

    def test_length_and_rate_preserved(self):
        buf = sine(700, dur_s=0.37)
        out = apply_filter(buf, FilterSpec("high_pass", cutoff_low_hz=300))
        assert len(out) == len(buf)
        assert out.sample_rate_hz == buf.sample_rate_hz

    def test_cutoff_at_nyquist_rejected(self):
        with pytest.raises(ValueError, match="cutoff"):
            apply_filter(sine(440), FilterSpec("low_pass", cutoff_high_hz=8000))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            FilterSpec("band_pass", cutoff_low_hz=3000, cutoff_high_hz=300)
        with pytest.raises(ValueError):
            FilterSpec("low_pass")  # missing cutoff
        with pytest.raises(ValueError):
            FilterSpec("resonant")


class TestTanhDistortion:
    def test_zero_in_zero_out(self):
        buf = AudioBuffer(np.zeros(1000), RATE)
        out = tanh_distortion(buf, TanhSpec(pre_gain_db=12.0))
        assert np.all(out.samples == 0.0)

    def test_scalar_value(self):
        buf = AudioBuffer(np.array([0.5]), RATE)
        out = tanh_distortion(buf, TanhSpec(pre_gain_db=0.0, preserve_rms=False))
        assert out.samples[0] == pytest.approx(0.46211715726, abs=1e-9)

    def test_bounded_without_rms(self):
        buf = sine(440, amp=0.9)
        out = tanh_distortion(buf, TanhSpec(pre_gain_db=30.0, preserve_rms=False))
        assert np.max(np.abs(out.samples)) < 1.0

    def test_rms_preserved_when_possible(self):
        buf = sine(440, amp=0.2)
        out = tanh_distortion(buf, TanhSpec(pre_gain_db=18.0, preserve_rms=True))
        assert np.max(np.abs(out.samples)) <= 1.0
        assert out.rms() == pytest.approx(buf.rms(), rel=0.02) or np.max(
            np.abs(out.samples)
        ) == pytest.approx(1.0, abs=1e-9)

    def test_odd_symmetric_monotone(self):
        x = np.linspace(-1, 1, 101)
        out = tanh_distortion(AudioBuffer(x, RATE), TanhSpec(12.0, preserve_rms=False))
        assert np.allclose(out.samples, -out.samples[::-1])
        assert np.all(np.diff(out.samples) > 0)

    def test_negative_gain_rejected(self):
        with pytest.raises(ValueError):
            TanhSpec(pre_gain_db=-3.0)


class TestApplyChain:
    def test_all_zero_probability_is_identity(self):
        buf = sine(440)
        chain = AugmentChain(
            steps=(
                ChainStep("low_pass", p=0.0, ranges={"cutoff_high_hz": (500, 2000)}),
                ChainStep("tanh", p=0.0, ranges={"pre_gain_db": (6, 24)}),
            ),
            seed=42,
        )
        out, applied = apply_chain(buf, chain, "utt-1")
        assert applied == []
        assert np.array_equal(out.samples, buf.samples)

    def test_deterministic_per_utterance(self):
        buf = sine(440)
        chain = default_chain(seed=7)
        out1, rec1 = apply_chain(buf, chain, "utt-9")
        out2, rec2 = apply_chain(buf, chain, "utt-9")
        assert np.array_equal(out1.samples, out2.samples)
        assert rec1 == rec2

    def test_different_utterances_differ(self):
        buf = sine(440)
        chain = AugmentChain(
            steps=(ChainStep("tanh", p=1.0, ranges={"pre_gain_db": (6.0, 24.0)}),),
            seed=7,
        )
        _, rec_a = apply_chain(buf, chain, "utt-a")
        _, rec_b = apply_chain(buf, chain, "utt-b")
        assert rec_a != rec_b

    def test_point_range_equals_direct_call(self):
        buf = sine(440)
        chain = AugmentChain(
            steps=(ChainStep("low_pass", p=1.0, ranges={"cutoff_high_hz": (1200.0, 1200.0)}),),
            seed=0,
        )
        out, applied = apply_chain(buf, chain, "x")
        direct = apply_filter(buf, FilterSpec("low_pass", cutoff_high_hz=1200.0))
        assert np.array_equal(out.samples, direct.samples)
        assert applied[0]["params"]["cutoff_high_hz"] == 1200.0

    def test_length_preserved(self):
        buf = sine(440, dur_s=0.31)
        out, _ = apply_chain(buf, default_chain(seed=1), "u")
        assert len(out) == len(buf)
        assert out.sample_rate_hz == buf.sample_rate_hz

    def test_invalid_range_rejected(self):
        with pytest.raises(ValueError):
            ChainStep("tanh", p=0.5, ranges={"pre_gain_db": (10.0, 5.0)})
        with pytest.raises(ValueError):
            ChainStep("tanh", p=1.5)
