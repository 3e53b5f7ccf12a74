"""Benchmark harness: drive external ASR engines, score, select, report.

Engine adapter protocol: the harness runs ``<engine_cmd> --manifest <path>``
where ``<path>`` is JSON-lines with keys "id" and "audio" (absolute audio
path).  The engine writes one ``{"id": ..., "text": ...}`` JSON object per
line to stdout; anything else on stdout is a protocol violation.  Stderr is
passed through.  Exit code 0 is required for a clean run.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .dataset import Manifest
from .errors import EngineError, ProtocolError
from .metrics import Alignment, NormConfig, WerCounts, align, combined_wer, normalize_text, utterance_wer


@dataclass(frozen=True)
class HypothesisSet:
    model_label: str
    entries: dict[str, str]  # utterance id -> hypothesis text
    meta: dict[str, Any] = field(default_factory=dict)


def parse_engine_output(lines) -> dict[str, str]:
    """Validate protocol output lines and return id -> text.

    Raises ProtocolError on any stdout line that is not a JSON object with
    string "id" and "text" keys; blank lines are tolerated.
    """
    entries: dict[str, str] = {}
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError(f"engine emitted a non-JSON line: {line!r}")
        if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
            raise ProtocolError(f"engine line missing id/text keys: {line!r}")
        entries[str(obj["id"])] = str(obj["text"])
    return entries


def run_engine(
    manifest: Manifest,
    engine_cmd: str | list[str],
    timeout_s: float = 600.0,
    manifest_path: str | Path | None = None,
    model_label: str | None = None,
) -> HypothesisSet:
    """Invoke an external engine over a manifest.

    Utterances the engine produced no output for (including after a crash)
    are recorded as empty hypotheses with an error note in ``meta``.
    """
    cmd = shlex.split(engine_cmd) if isinstance(engine_cmd, str) else list(engine_cmd)
    root = Path(manifest_path).resolve().parent if manifest_path else Path.cwd()
    with tempfile.NamedTemporaryFile(
        "w", suffix=".jsonl", delete=False, encoding="utf-8"
    ) as f:
        for utt in manifest:
            p = Path(utt.audio_path)
            audio = p if p.is_absolute() else root / p
            f.write(json.dumps({"id": utt.id, "audio": str(audio.resolve())}) + "\n")
        wire_path = f.name
    try:
        proc = subprocess.run(
            cmd + ["--manifest", wire_path],
            stdout=subprocess.PIPE,
            stderr=sys.stderr if sys.stderr.isatty() else subprocess.PIPE,
            text=True,
            timeout=timeout_s,
        )
    except FileNotFoundError as exc:
        raise EngineError(f"engine binary not found: {cmd[0]!r}") from exc
    except subprocess.TimeoutExpired as exc:
        raise EngineError(f"engine timed out after {timeout_s}s: {cmd}") from exc
    finally:
        Path(wire_path).unlink(missing_ok=True)
    if proc.stderr:
        sys.stderr.write(proc.stderr)

    entries = parse_engine_output(proc.stdout.splitlines())
    errors: dict[str, str] = {}
    for utt in manifest:
        if utt.id not in entries:
            entries[utt.id] = ""
            errors[utt.id] = (
                f"no engine output (exit code {proc.returncode})"
                if proc.returncode != 0
                else "no engine output"
            )
    meta: dict[str, Any] = {"engine_cmd": cmd, "exit_code": proc.returncode}
    if errors:
        meta["errors"] = errors
    return HypothesisSet(model_label or cmd[0], entries, meta)


# ---------------------------------------------------------------------------
# Hypothesis file persistence: one-line header {"model": label}, then
# {"id", "text"} JSON-lines.


def save_hypotheses(hyps: HypothesisSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps({"model": hyps.model_label}) + "\n")
        for uid, text in hyps.entries.items():
            f.write(json.dumps({"id": uid, "text": text}, ensure_ascii=False) + "\n")


def load_hypotheses(path) -> HypothesisSet:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        lines = [ln for ln in (l.strip() for l in f) if ln]
    if not lines:
        raise ProtocolError(f"{path}: empty hypothesis file (missing header)")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError:
        raise ProtocolError(f"{path}: malformed header line")
    if not isinstance(header, dict) or "model" not in header:
        raise ProtocolError(f"{path}: header must be a JSON object with a 'model' key")
    return HypothesisSet(str(header["model"]), parse_engine_output(lines[1:]))


# ---------------------------------------------------------------------------
# Scoring


@dataclass(frozen=True)
class UtteranceScore:
    id: str
    wer: float | None  # None when undefined (empty reference with insertions)
    counts: WerCounts
    missing: bool


@dataclass(frozen=True)
class ScoreResult:
    per_utterance: tuple[UtteranceScore, ...]
    combined: float
    counts: WerCounts
    coverage: float  # fraction of manifest ids with a real hypothesis


def score(
    manifest: Manifest,
    hyps: HypothesisSet,
    norm: NormConfig | None = None,
    workers: int = 1,
) -> ScoreResult:
    """Normalize, align and micro-average over a manifest.

    Ids absent from the hypothesis set score as empty hypotheses (pure
    deletions) and lower the coverage statistic.
    """
    norm = norm or NormConfig()
    failed = hyps.meta.get("errors", {})

    def score_one(utt) -> tuple[UtteranceScore, Alignment]:
        missing = utt.id not in hyps.entries or utt.id in failed
        hyp_text = hyps.entries.get(utt.id, "")
        a = align(normalize_text(utt.transcript, norm), normalize_text(hyp_text, norm))
        return UtteranceScore(utt.id, utterance_wer(a), a.counts, missing), a

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(score_one, manifest))
    else:
        results = [score_one(u) for u in manifest]
    scores = tuple(r[0] for r in results)
    ratio, totals = combined_wer([r[1] for r in results])
    covered = sum(1 for s in scores if not s.missing)
    return ScoreResult(scores, ratio, totals, covered / len(manifest))


def select_best_checkpoint(
    candidates: list[tuple[str, HypothesisSet]],
    val_manifest: Manifest,
    norm: NormConfig | None = None,
) -> tuple[str, float, list[tuple[str, float]]]:
    """Pick the candidate with the lowest combined validation WER.

    Ties go to the earliest candidate in input order.  Returns the winning
    (label, wer) plus the full ranking.
    """
    if not candidates:
        raise ValueError("select_best_checkpoint needs at least one candidate")
    scored = [(label, score(val_manifest, hyps, norm).combined) for label, hyps in candidates]
    best = min(scored, key=lambda lw: lw[1])  # min() is stable: first minimum wins
    ranking = sorted(scored, key=lambda lw: lw[1])
    return best[0], best[1], ranking


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class BenchCell:
    wer: float
    counts: WerCounts
    coverage: float


@dataclass(frozen=True)
class BenchRow:
    model_label: str
    group: str | None
    cells: dict[str, BenchCell]  # dataset name -> cell


@dataclass(frozen=True)
class BenchReport:
    datasets: tuple[str, ...]  # column order
    rows: tuple[BenchRow, ...]


def build_report(
    datasets: list[tuple[str, Manifest]],
    models: list[tuple[str, str | None, dict[str, HypothesisSet]]],
    norm: NormConfig | None = None,
    workers: int = 1,
) -> BenchReport:
    """Score every (model, dataset) pair.

    ``models`` entries are (label, group, {dataset name -> HypothesisSet}).
    """
    rows = []
    for label, group, per_ds in models:
        cells = {}
        for ds_name, manifest in datasets:
            res = score(manifest, per_ds[ds_name], norm, workers=workers)
            cells[ds_name] = BenchCell(res.combined, res.counts, res.coverage)
        rows.append(BenchRow(label, group, cells))
    return BenchReport(tuple(name for name, _ in datasets), tuple(rows))


def _column_minima(report: BenchReport) -> dict[str, float]:
    return {
        ds: min(row.cells[ds].wer for row in report.rows) for ds in report.datasets
    }


def render_report(report: BenchReport, format: str = "markdown") -> str:
    """Render the model x dataset WER grid.

    Markdown: rows grouped by model-size family, WER to 4 decimal places,
    per-column minimum in bold.  CSV: long form, one (model, dataset) pair
    per line with counts and coverage, fixed column order.
    """
    if not report.rows:
        raise ValueError("cannot render an empty report")
    if format == "csv":
        lines = ["model,group,dataset,wer,S,D,I,N,coverage"]
        for row in report.rows:
            for ds in report.datasets:
                c = row.cells[ds]
                lines.append(
                    f"{row.model_label},{row.group or ''},{ds},{c.wer:.4f},"
                    f"{c.counts.S},{c.counts.D},{c.counts.I},{c.counts.N},{c.coverage:.4f}"
                )
        return "\n".join(lines) + "\n"
    if format != "markdown":
        raise ValueError(f"unknown report format {format!r}")

    minima = _column_minima(report)
    width = len(report.datasets) + 1
    lines = ["| Model | " + " | ".join(report.datasets) + " |"]
    lines.append("|" + " --- |" * width)
    current_group = None
    for row in report.rows:
        if row.group and row.group != current_group:
            current_group = row.group
            lines.append(f"| *{row.group}* |" + " |" * (width - 1))
        cells = []
        for ds in report.datasets:
            text = f"{row.cells[ds].wer:.4f}"
            if abs(row.cells[ds].wer - minima[ds]) < 1e-12:
                text = f"**{text}**"
            cells.append(text)
        lines.append(f"| {row.model_label} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
