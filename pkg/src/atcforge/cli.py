"""Command-line entry point: dataset-creation pipeline and evaluation.

Subcommands: denoise, augment, split, transcribe, score, bench,
select-best.  Exit codes: 0 success, 1 usage error, 2 data/protocol error.
A JSON config file (``--config``) carries the gate, chain, split and
normalization settings; flags override it where noted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import audio_core, bench, denoise
from .augment import AugmentChain, ChainStep, apply_chain, default_chain
from .dataset import (
    Manifest,
    SplitConfig,
    load_manifest,
    resolve_audio_path,
    save_manifest,
    split,
    with_provenance,
)
from .denoise import GateConfig
from .errors import ToolkitError
from .metrics import NormConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


@dataclass(frozen=True)
class PipelineConfig:
    gate: GateConfig = field(default_factory=GateConfig)
    chain: AugmentChain = field(default_factory=default_chain)
    split: SplitConfig = field(default_factory=SplitConfig)
    norm: NormConfig = field(default_factory=NormConfig)
    workers: int = 0  # 0: use available parallelism


def _gate_from_dict(d: dict) -> GateConfig:
    stft_d = d.get("stft", {})
    params = audio_core.StftParams(
        window_len=stft_d.get("window_len", 2048),
        hop_len=stft_d.get("hop_len", 512),
    )
    return GateConfig(
        n_std=d.get("n_std", 1.5),
        floor_gain=d.get("floor_gain", 0.02),
        smooth_time=d.get("smooth_time", 2),
        smooth_freq=d.get("smooth_freq", 2),
        stft=params,
    )


def _gate_to_dict(g: GateConfig) -> dict:
    return {
        "n_std": g.n_std,
        "floor_gain": g.floor_gain,
        "smooth_time": g.smooth_time,
        "smooth_freq": g.smooth_freq,
        "stft": {"window_len": g.stft.window_len, "hop_len": g.stft.hop_len},
    }


def _chain_from_dict(d: dict) -> AugmentChain:
    steps = tuple(
        ChainStep(
            kind=s["kind"],
            p=s.get("p", 1.0),
            ranges={k: (v[0], v[1]) for k, v in s.get("ranges", {}).items()},
            options=s.get("options", {}),
        )
        for s in d.get("steps", [])
    )
    return AugmentChain(steps=steps, seed=d.get("seed", 0))


def load_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    with open(path, encoding="utf-8") as f:
        d = json.load(f)
    cfg = PipelineConfig()
    if "gate" in d:
        cfg = replace(cfg, gate=_gate_from_dict(d["gate"]))
    if "chain" in d:
        cfg = replace(cfg, chain=_chain_from_dict(d["chain"]))
    if "split" in d:
        s = d["split"]
        cfg = replace(
            cfg,
            split=SplitConfig(
                proportions=tuple(s.get("proportions", (0.70, 0.15, 0.15))),
                seed=s.get("seed", 0),
                group_key=s.get("group_key"),
            ),
        )
    if "norm" in d:
        n = d["norm"]
        cfg = replace(
            cfg,
            norm=NormConfig(
                lowercase=n.get("lowercase", True),
                strip_punctuation=n.get("strip_punctuation", True),
                collapse_whitespace=n.get("collapse_whitespace", True),
            ),
        )
    if "workers" in d:
        cfg = replace(cfg, workers=int(d["workers"]))
    return cfg


def _workers(cfg: PipelineConfig, flag: int | None) -> int:
    env = os.environ.get("ATC_FORGE_WORKERS")
    if flag:
        return flag
    if env:
        return max(1, int(env))
    if cfg.workers:
        return cfg.workers
    return os.cpu_count() or 1


class _Parser(argparse.ArgumentParser):
    # spec'd exit codes: usage errors exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _map_utterances(manifest, fn, workers: int):
    # keyed by position; worker count never changes results or order
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, manifest))
    return [fn(u) for u in manifest]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_denoise(args) -> int:
    cfg = load_config(args.config)
    manifest = load_manifest(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    noise_clip = None
    if args.noise_clip:
        noise_clip = audio_core.resample(
            audio_core.load_wav(args.noise_clip), args.sample_rate
        )

    def process(utt):
        buf = audio_core.load_wav(resolve_audio_path(args.manifest, utt))
        buf = audio_core.resample(buf, args.sample_rate)
        out = denoise.spectral_gate(buf, cfg.gate, noise_clip)
        out_path = out_dir / f"{utt.id}.wav"
        audio_core.save_wav(out, out_path)
        utt = replace(utt, audio_path=os.path.relpath(out_path, Path(args.out_manifest).parent))
        return with_provenance(utt, "denoise", _gate_to_dict(cfg.gate))

    processed = _map_utterances(manifest, process, _workers(cfg, args.workers))
    save_manifest(Manifest(tuple(processed), name=manifest.name), args.out_manifest)
    print(f"denoised {len(processed)} utterances -> {args.out_manifest}")
    return EXIT_OK


def _cmd_augment(args) -> int:
    cfg = load_config(args.config)
    chain = cfg.chain
    if args.seed is not None:
        chain = replace(chain, seed=args.seed)
    manifest = load_manifest(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def process(utt):
        buf = audio_core.load_wav(resolve_audio_path(args.manifest, utt))
        out, applied = apply_chain(buf, chain, utt.id)
        out_path = out_dir / f"{utt.id}.wav"
        audio_core.save_wav(out, out_path)
        utt = replace(utt, audio_path=os.path.relpath(out_path, Path(args.out_manifest).parent))
        return with_provenance(utt, "augment", {"seed": chain.seed, "applied": applied})

    processed = _map_utterances(manifest, process, _workers(cfg, args.workers))
    save_manifest(Manifest(tuple(processed), name=manifest.name), args.out_manifest)
    print(f"augmented {len(processed)} utterances -> {args.out_manifest}")
    return EXIT_OK


def _cmd_split(args) -> int:
    cfg = load_config(args.config)
    split_cfg = cfg.split
    if args.seed is not None:
        split_cfg = replace(split_cfg, seed=args.seed)
    if args.by_speaker:
        split_cfg = replace(split_cfg, group_key="speaker")
    manifest = load_manifest(args.manifest)
    train, val, test = split(manifest, split_cfg)
    prefix = args.out_prefix or str(Path(args.manifest).with_suffix(""))
    for part, tag in ((train, "train"), (val, "val"), (test, "test")):
        save_manifest(part, f"{prefix}.{tag}.jsonl")
    print(f"split {len(manifest)} -> train={len(train)} val={len(val)} test={len(test)}")
    return EXIT_OK


def _cmd_transcribe(args) -> int:
    manifest = load_manifest(args.manifest)
    hyps = bench.run_engine(
        manifest,
        args.engine,
        timeout_s=args.timeout,
        manifest_path=args.manifest,
        model_label=args.label,
    )
    bench.save_hypotheses(hyps, args.out)
    print(f"wrote {len(hyps.entries)} hypotheses -> {args.out}")
    return EXIT_OK


def _cmd_score(args) -> int:
    cfg = load_config(args.config)
    manifest = load_manifest(args.manifest)
    hyps = bench.load_hypotheses(args.hyp)
    result = bench.score(manifest, hyps, cfg.norm, workers=_workers(cfg, args.workers))
    if args.per_utterance:
        for s in result.per_utterance:
            wer = "undefined" if s.wer is None else f"{s.wer:.4f}"
            print(
                f"{s.id}\t{wer}\tS={s.counts.S} D={s.counts.D} "
                f"I={s.counts.I} N={s.counts.N}" + ("\t[missing]" if s.missing else "")
            )
    c = result.counts
    print(
        f"combined WER {result.combined:.4f} "
        f"(S={c.S} D={c.D} I={c.I} N={c.N}, coverage {result.coverage:.2%})"
    )
    return EXIT_OK


def _parse_kv(items, what):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ToolkitError(f"bad {what} {item!r}: expected NAME=VALUE")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    datasets = [
        (name, load_manifest(path))
        for name, path in _parse_kv(args.dataset, "--dataset").items()
    ]
    if not datasets:
        raise ToolkitError("bench needs at least one --dataset NAME=MANIFEST")
    groups = _parse_kv(args.group, "--group")
    workers = _workers(cfg, args.workers)

    models: list[tuple[str, str | None, dict[str, bench.HypothesisSet]]] = []
    for label, cmd in _parse_kv(args.engine, "--engine").items():
        per_ds = {
            name: bench.run_engine(
                manifest,
                cmd,
                timeout_s=args.timeout,
                manifest_path=dict(_parse_kv(args.dataset, "--dataset"))[name],
                model_label=label,
            )
            for name, manifest in datasets
        }
        models.append((label, groups.get(label), per_ds))
    hyp_models: dict[str, dict[str, bench.HypothesisSet]] = {}
    for key, path in _parse_kv(args.hyp, "--hyp").items():
        if ":" not in key:
            raise ToolkitError(f"bad --hyp key {key!r}: expected LABEL:DATASET=PATH")
        label, ds_name = key.split(":", 1)
        hyp_models.setdefault(label, {})[ds_name] = bench.load_hypotheses(path)
    for label, per_ds in hyp_models.items():
        missing = [name for name, _ in datasets if name not in per_ds]
        if missing:
            raise ToolkitError(f"model {label!r} has no hypotheses for {missing}")
        models.append((label, groups.get(label), per_ds))
    if not models:
        raise ToolkitError("bench needs at least one --engine or --hyp")

    report = bench.build_report(datasets, models, cfg.norm, workers=workers)
    text = bench.render_report(report, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_select_best(args) -> int:
    cfg = load_config(args.config)
    manifest = load_manifest(args.manifest)
    candidates = []
    for path in args.hyp:
        hyps = bench.load_hypotheses(path)
        candidates.append((hyps.model_label, hyps))
    label, wer, ranking = bench.select_best_checkpoint(candidates, manifest, cfg.norm)
    for lab, w in ranking:
        print(f"{lab}\t{w:.4f}")
    print(f"best: {label} ({wer:.4f})")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="atc-forge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="pipeline config file (JSON)")
        p.add_argument("--workers", type=int, help="worker count (or ATC_FORGE_WORKERS)")

    p = sub.add_parser("denoise", help="spectral-gate a manifest's audio")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--out-manifest", required=True)
    p.add_argument("--noise-clip", help="noise-only WAV for the profile")
    p.add_argument("--sample-rate", type=int, default=audio_core.DEFAULT_SAMPLE_RATE)
    p.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("augment", help="apply the augmentation chain")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--out-manifest", required=True)
    p.add_argument("--seed", type=int, help="override the chain seed")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("split", help="train/val/test split of a manifest")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-prefix")
    p.add_argument("--by-speaker", action="store_true")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("transcribe", help="run an external engine over a manifest")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--engine", required=True, help="engine command (adapter protocol)")
    p.add_argument("--out", required=True)
    p.add_argument("--label", help="model label for the hypothesis file")
    p.add_argument("--timeout", type=float, default=600.0)
    p.set_defaults(func=_cmd_transcribe)

    p = sub.add_parser("score", help="score a hypothesis file against a manifest")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--per-utterance", action="store_true")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("bench", help="model x dataset WER grid")
    common(p)
    p.add_argument("--dataset", action="append", metavar="NAME=MANIFEST")
    p.add_argument("--engine", action="append", metavar="LABEL=CMD")
    p.add_argument("--hyp", action="append", metavar="LABEL:DATASET=PATH")
    p.add_argument("--group", action="append", metavar="LABEL=FAMILY")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out")
    p.add_argument("--timeout", type=float, default=600.0)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("select-best", help="lowest validation WER among hypothesis files")
    common(p)
    p.add_argument("--manifest", required=True, help="validation manifest")
    p.add_argument("--hyp", nargs="+", required=True)
    p.set_defaults(func=_cmd_select_best)

    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (ToolkitError, FileNotFoundError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"atc-forge: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(dispatch())
