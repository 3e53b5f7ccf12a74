"""Corpus preparation and WER benchmarking toolkit for accented ATC speech."""

from .audio_core import AudioBuffer, Spectrogram, StftParams, istft, load_wav, resample, save_wav, stft
from .augment import AugmentChain, ChainStep, FilterSpec, TanhSpec, apply_chain, apply_filter, tanh_distortion
from .bench import BenchReport, HypothesisSet, build_report, render_report, run_engine, score, select_best_checkpoint
from .dataset import Manifest, SplitConfig, Utterance, load_manifest, save_manifest, split
from .denoise import GateConfig, NoiseProfile, compute_gate_mask, estimate_noise_profile, spectral_gate
from .errors import AudioFormatError, EngineError, ManifestError, ProtocolError, ToolkitError
from .metrics import Alignment, NormConfig, WerCounts, align, combined_wer, normalize_text, utterance_wer

__version__ = "0.1.0"
