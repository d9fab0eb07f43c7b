"""Corpus-level BLEU-1..4 and ROUGE-L on the 0-100 scale.

BLEU follows the de facto standard corpus scorer: 13a tokenization,
clipped modified n-gram precisions pooled over the corpus, geometric mean
over orders 1..n, brevity penalty exp(1 - r/c) when the hypothesis side is
shorter, and exponential floor smoothing for zero-count orders (the m-th
zero-count order gets numerator 1/2^m). ROUGE-L is mean sentence-level F1
over token LCS.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

LOG_FLOOR = -9999999999

_ASCII_SPLIT = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_PERIOD_COMMA_AFTER = re.compile(r"([^0-9])([\.,])")
_PERIOD_COMMA_BEFORE = re.compile(r"([\.,])([^0-9])")
_DASH_AFTER_DIGIT = re.compile(r"([0-9])(-)")
_WHITESPACE = re.compile(r"\s+")


class EmptyCorpus(ValueError):
    pass


class LineCountMismatch(ValueError):
    pass


def tokenize(text: str, lowercase: bool = False) -> list[str]:
    """13a-style tokenization: unescape a few XML entities, detach
    punctuation from words, split on whitespace."""
    if lowercase:
        text = text.lower()
    norm = text.rstrip()
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")

    norm = f" {norm} "
    norm = _ASCII_SPLIT.sub(r" \1 ", norm)
    # Periods and commas stay attached inside numbers ("3.2", "24,111").
    norm = _PERIOD_COMMA_AFTER.sub(r"\1 \2 ", norm)
    norm = _PERIOD_COMMA_BEFORE.sub(r" \1 \2", norm)
    norm = _DASH_AFTER_DIGIT.sub(r"\1 \2 ", norm)
    return norm.split()


@dataclass(frozen=True)
class TokenizedPair:
    hypothesis: tuple[str, ...]
    reference: tuple[str, ...]


def pair(hypothesis: str, reference: str, lowercase: bool = False) -> TokenizedPair:
    return TokenizedPair(
        hypothesis=tuple(tokenize(hypothesis, lowercase)),
        reference=tuple(tokenize(reference, lowercase)),
    )


def _ngrams(tokens: Sequence[str], max_order: int) -> Counter:
    counts: Counter = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def _log_floor(value: float) -> float:
    if value == 0.0:
        return LOG_FLOOR
    return math.log(value)


@dataclass(frozen=True)
class BleuResult:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_length: int
    ref_length: int


def bleu(pairs: Sequence[TokenizedPair], max_order: int = 4) -> BleuResult:
    if not 1 <= max_order <= 4:
        raise ValueError(f"max_order {max_order} outside 1..4")
    if not pairs:
        raise EmptyCorpus("no pairs to score")

    correct = [0] * max_order
    total = [0] * max_order
    hyp_length = 0
    ref_length = 0
    for p in pairs:
        hyp_length += len(p.hypothesis)
        ref_length += len(p.reference)
        hyp_counts = _ngrams(p.hypothesis, max_order)
        ref_counts = _ngrams(p.reference, max_order)
        for ngram, count in hyp_counts.items():
            order = len(ngram)
            correct[order - 1] += min(count, ref_counts.get(ngram, 0))
            total[order - 1] += count

    precisions = [0.0] * max_order
    smooth = 1.0
    for n in range(1, max_order + 1):
        if total[n - 1] == 0:
            break
        if correct[n - 1] == 0:
            smooth *= 2.0
            precisions[n - 1] = 100.0 / (smooth * total[n - 1])
        else:
            precisions[n - 1] = 100.0 * correct[n - 1] / total[n - 1]

    if hyp_length >= ref_length:
        brevity_penalty = 1.0
    elif hyp_length > 0:
        brevity_penalty = math.exp(1 - ref_length / hyp_length)
    else:
        brevity_penalty = 0.0

    if brevity_penalty == 1.0 and all(p == 100.0 for p in precisions):
        # Geometric mean of all-100 precisions is 100; sidestep exp/log
        # round-trip noise so a perfect corpus scores 100.0 exactly.
        score = 100.0
    else:
        score = brevity_penalty * math.exp(
            sum(_log_floor(p) for p in precisions) / max_order
        )
    return BleuResult(
        score=score,
        precisions=tuple(precisions),
        brevity_penalty=brevity_penalty,
        hyp_length=hyp_length,
        ref_length=ref_length,
    )


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def rouge_l(pairs: Sequence[TokenizedPair]) -> float:
    if not pairs:
        raise EmptyCorpus("no pairs to score")
    total_f1 = 0.0
    for p in pairs:
        lcs = lcs_length(p.hypothesis, p.reference)
        precision = lcs / len(p.hypothesis) if p.hypothesis else 0.0
        recall = lcs / len(p.reference) if p.reference else 0.0
        if precision + recall == 0.0:
            continue
        total_f1 += 2 * precision * recall / (precision + recall)
    return 100.0 * total_f1 / len(pairs)


@dataclass(frozen=True)
class ScoreReport:
    bleu_1: float
    bleu_2: float
    bleu_3: float
    bleu_4: float
    rouge_l: float
    n_pairs: int
    brevity_penalty: float
    precisions: tuple[float, ...]

    _COLUMNS = ("BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "ROUGE-L", "BLEURT")

    def _cells(self) -> tuple[str, ...]:
        return (
            f"{self.bleu_1:.2f}",
            f"{self.bleu_2:.2f}",
            f"{self.bleu_3:.2f}",
            f"{self.bleu_4:.2f}",
            f"{self.rouge_l:.2f}",
            "n/a (out of scope)",
        )

    def render_table(self) -> str:
        cells = self._cells()
        widths = [max(len(h), len(c)) for h, c in zip(self._COLUMNS, cells)]
        head = "  ".join(h.ljust(w) for h, w in zip(self._COLUMNS, widths)).rstrip()
        body = "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        footer = (
            f"pairs = {self.n_pairs}, brevity penalty = {self.brevity_penalty:.4f}"
        )
        return f"{head}\n{body}\n{footer}\n"

    def render_csv(self) -> str:
        head = ",".join(self._COLUMNS)
        body = ",".join(
            [f"{v:.4f}" for v in (self.bleu_1, self.bleu_2, self.bleu_3, self.bleu_4,
                                  self.rouge_l)]
            + ["n/a (out of scope)"]
        )
        return f"{head}\n{body}\n"


def score_pairs(pairs: Sequence[TokenizedPair]) -> ScoreReport:
    if not pairs:
        raise EmptyCorpus("no pairs to score")
    by_order = [bleu(pairs, max_order=n) for n in (1, 2, 3, 4)]
    return ScoreReport(
        bleu_1=by_order[0].score,
        bleu_2=by_order[1].score,
        bleu_3=by_order[2].score,
        bleu_4=by_order[3].score,
        rouge_l=rouge_l(pairs),
        n_pairs=len(pairs),
        brevity_penalty=by_order[3].brevity_penalty,
        precisions=by_order[3].precisions,
    )


def _read_lines(source: IO[str] | str | Path) -> list[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as reader:
            return reader.read().splitlines()
    return source.read().splitlines()


def score_files(
    hyp_source: IO[str] | str | Path,
    ref_source: IO[str] | str | Path,
    lowercase: bool = False,
) -> ScoreReport:
    hyp_lines = _read_lines(hyp_source)
    ref_lines = _read_lines(ref_source)
    if len(hyp_lines) != len(ref_lines):
        raise LineCountMismatch(
            f"{len(hyp_lines)} hypothesis lines vs {len(ref_lines)} reference lines"
        )
    if not hyp_lines:
        raise EmptyCorpus("no pairs to score")
    pairs = [pair(h, r, lowercase) for h, r in zip(hyp_lines, ref_lines)]
    return score_pairs(pairs)
