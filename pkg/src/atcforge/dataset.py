"""Corpus manifests and the deterministic train/validation/test split.

A manifest is UTF-8 JSON-lines, one utterance per line, required keys
"id", "audio", "text"; optional "duration", "speaker", "provenance".
Audio paths are relative to the manifest's directory.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .errors import ManifestError
from .seeding import mix64


@dataclass(frozen=True)
class Utterance:
    id: str
    audio_path: str
    transcript: str
    duration_s: float | None = None
    speaker: str | None = None
    provenance: dict[str, Any] | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("utterance id must be non-empty")

    def to_json_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {"id": self.id, "audio": self.audio_path, "text": self.transcript}
        if self.duration_s is not None:
            obj["duration"] = self.duration_s
        if self.speaker is not None:
            obj["speaker"] = self.speaker
        if self.provenance is not None:
            obj["provenance"] = self.provenance
        return obj


@dataclass(frozen=True)
class Manifest:
    utterances: tuple[Utterance, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        seen = set()
        for utt in self.utterances:
            if utt.id in seen:
                raise ManifestError(f"duplicate utterance id {utt.id!r}")
            seen.add(utt.id)

    def __len__(self):
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances)

    def ids(self) -> list[str]:
        return [u.id for u in self.utterances]

    def by_id(self) -> dict[str, Utterance]:
        return {u.id: u for u in self.utterances}


@dataclass(frozen=True)
class SplitConfig:
    proportions: tuple[float, float, float] = (0.70, 0.15, 0.15)
    seed: int = 0
    group_key: str | None = None  # None or "speaker"

    def __post_init__(self):
        if len(self.proportions) != 3 or any(p < 0 for p in self.proportions):
            raise ValueError("proportions must be three non-negative fractions")
        if abs(sum(self.proportions) - 1.0) > 1e-9:
            raise ValueError("proportions must sum to 1")
        if self.group_key not in (None, "speaker"):
            raise ValueError("group_key must be None or 'speaker'")


def load_manifest(path, name: str | None = None) -> Manifest:
    path = Path(path)
    utterances = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            for key in ("id", "audio", "text"):
                if key not in obj:
                    raise ManifestError(f"{path}:{lineno}: missing required key {key!r}")
            utterances.append(
                Utterance(
                    id=str(obj["id"]),
                    audio_path=str(obj["audio"]),
                    transcript=str(obj["text"]),
                    duration_s=obj.get("duration"),
                    speaker=obj.get("speaker"),
                    provenance=obj.get("provenance"),
                )
            )
    return Manifest(tuple(utterances), name=name if name is not None else path.stem)


def save_manifest(manifest: Manifest, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for utt in manifest:
            f.write(json.dumps(utt.to_json_obj(), ensure_ascii=False) + "\n")


def resolve_audio_path(manifest_path, utterance: Utterance) -> Path:
    """Audio paths are relative to the manifest's directory."""
    p = Path(utterance.audio_path)
    return p if p.is_absolute() else Path(manifest_path).parent / p


def _split_sizes(n: int, proportions) -> tuple[int, int, int]:
    # round half up for train and val; test absorbs the remainder
    n_train = min(n, math.floor(n * proportions[0] + 0.5))
    n_val = min(n - n_train, math.floor(n * proportions[1] + 0.5))
    return n_train, n_val, n - n_train - n_val


def split(manifest: Manifest, cfg: SplitConfig) -> tuple[Manifest, Manifest, Manifest]:
    """Deterministic 3-way partition of a manifest.

    Utterances (or whole speaker groups in group mode) are ordered by a
    seed-keyed hash of their id, then cut into train/val/test.  The three
    outputs always partition the input exactly.
    """
    if len(manifest) == 0:
        raise ManifestError("cannot split an empty manifest")
    if cfg.group_key is None:
        order = sorted(manifest, key=lambda u: (mix64(cfg.seed, u.id), u.id))
        n_train, n_val, _ = _split_sizes(len(order), cfg.proportions)
        parts = (order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :])
    else:
        groups: dict[str, list[Utterance]] = {}
        for utt in manifest:
            groups.setdefault(utt.speaker or utt.id, []).append(utt)
        targets = list(_split_sizes(len(manifest), cfg.proportions))
        largest = max(targets)
        order = sorted(groups, key=lambda g: (mix64(cfg.seed, g), g))
        assigned: list[list[Utterance]] = [[], [], []]
        filled = [0, 0, 0]
        for key in order:
            members = groups[key]
            if len(members) > largest:
                raise ManifestError(
                    f"group {key!r} ({len(members)} utterances) exceeds the largest split"
                )
            # the split with the biggest remaining deficit; ties favor train
            k = max(range(3), key=lambda i: (targets[i] - filled[i], -i))
            assigned[k].extend(members)
            filled[k] += len(members)
        parts = tuple(assigned)

    def ordered(utts):
        keep = {u.id for u in utts}
        return tuple(u for u in manifest if u.id in keep)

    return (
        Manifest(ordered(parts[0]), name=f"{manifest.name}.train"),
        Manifest(ordered(parts[1]), name=f"{manifest.name}.val"),
        Manifest(ordered(parts[2]), name=f"{manifest.name}.test"),
    )


def with_provenance(utterance: Utterance, key: str, value: Any) -> Utterance:
    prov = dict(utterance.provenance or {})
    prov[key] = value
    return replace(utterance, provenance=prov)
