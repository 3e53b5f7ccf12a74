"""Text normalization, edit-distance alignment and word error rate.

Combined WER is the micro-average (S + D + I) / N with counts summed over
the whole corpus before dividing, not the mean of per-utterance rates.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class NormConfig:
    lowercase: bool = True
    strip_punctuation: bool = True  # removes Unicode punctuation categories
    collapse_whitespace: bool = True


def normalize_text(text: str, cfg: NormConfig | None = None) -> list[str]:
    """Normalize and tokenize: lowercase, strip punctuation, then split.

    Punctuation characters are removed (not replaced by spaces) before the
    whitespace split, so "118.7" becomes the single token "1187".
    """
    cfg = cfg or NormConfig()
    if cfg.lowercase:
        text = text.lower()
    if cfg.strip_punctuation:
        text = "".join(
            c for c in text if not unicodedata.category(c).startswith("P")
        )
    if cfg.collapse_whitespace:
        text = _WS.sub(" ", text).strip()
    return text.split()


class Op(Enum):
    MATCH = "match"
    SUBSTITUTE = "substitute"
    DELETE = "delete"
    INSERT = "insert"


@dataclass(frozen=True)
class WerCounts:
    S: int
    D: int
    I: int
    N: int

    def __post_init__(self):
        if min(self.S, self.D, self.I, self.N) < 0:
            raise ValueError("counts must be non-negative")
        if self.S + self.D > self.N:
            raise ValueError("S + D cannot exceed the reference length")

    def __add__(self, other: "WerCounts") -> "WerCounts":
        return WerCounts(self.S + other.S, self.D + other.D, self.I + other.I, self.N + other.N)

    @property
    def errors(self) -> int:
        return self.S + self.D + self.I


@dataclass(frozen=True)
class Alignment:
    """Minimum-cost edit alignment between a reference and a hypothesis.

    ``ops`` is an ordered list of (op, ref_index, hyp_index); the unused
    index of a delete/insert is None.
    """

    ops: tuple[tuple[Op, int | None, int | None], ...]
    counts: WerCounts


def align(ref: list[str], hyp: list[str]) -> Alignment:
    """Unit-cost minimum edit distance with a deterministic backtrace.

    Ties are broken with priority match > substitute > delete > insert.
    """
    n, m = len(ref), len(hyp)
    # dp[i][j]: min cost aligning ref[:i] to hyp[:j]
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = i
    for j in range(1, m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        row, prev = dp[i], dp[i - 1]
        ri = ref[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (ri != hyp[j - 1])
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)

    ops: list[tuple[Op, int | None, int | None]] = []
    i, j = n, m
    s = d = ins = 0
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dp[i][j] == dp[i - 1][j - 1]:
            ops.append((Op.MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + 1:
            ops.append((Op.SUBSTITUTE, i - 1, j - 1))
            s += 1
            i, j = i - 1, j - 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            ops.append((Op.DELETE, i - 1, None))
            d += 1
            i -= 1
        else:
            ops.append((Op.INSERT, None, j - 1))
            ins += 1
            j -= 1
    ops.reverse()
    return Alignment(tuple(ops), WerCounts(S=s, D=d, I=ins, N=n))


def utterance_wer(a: Alignment) -> float | None:
    """Per-utterance WER; None when undefined (empty reference, insertions)."""
    c = a.counts
    if c.N == 0:
        return 0.0 if c.I == 0 else None
    return c.errors / c.N


def combined_wer(alignments: list[Alignment]) -> tuple[float, WerCounts]:
    """Micro-averaged corpus WER: counts summed before dividing."""
    if not alignments:
        raise ValueError("combined_wer needs at least one alignment")
    total = WerCounts(0, 0, 0, 0)
    for a in alignments:
        total = total + a.counts
    if total.N == 0:
        raise ValueError("combined_wer undefined: no reference words in the corpus")
    return total.errors / total.N, total
