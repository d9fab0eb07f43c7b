"""Synthetic keypoint-to-text tasks.

Each word in a task's vocabulary owns a fixed random motion prototype of
``frames_per_word`` 208-value frames; a sample's feature sequence is the
concatenation of its words' prototypes plus small noise, and its
transcript is the words themselves. Two tasks built over disjoint word
sets share the mechanism (segment-to-word alignment) but no surface
vocabulary, which is what the transfer check needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FEATURE_DIM

DEFAULT_FRAMES_PER_WORD = 5


@dataclass(frozen=True)
class SynthTask:
    """words maps each vocabulary word to its [frames_per_word, 208]
    prototype; samples are (features [T, 208] float32, transcript) pairs."""

    words: dict[str, np.ndarray]
    samples: list[tuple[np.ndarray, str]]

    @property
    def transcripts(self) -> list[str]:
        return [text for _, text in self.samples]


def word_bank(
    words: list[str],
    rng: np.random.Generator,
    frames_per_word: int = DEFAULT_FRAMES_PER_WORD,
) -> dict[str, np.ndarray]:
    return {
        word: rng.normal(0.0, 1.0, size=(frames_per_word, FEATURE_DIM)).astype(
            np.float32
        )
        for word in words
    }


def render_sentence(
    bank: dict[str, np.ndarray],
    sentence: list[str],
    rng: np.random.Generator,
    noise: float = 0.05,
) -> np.ndarray:
    segments = [bank[word] for word in sentence]
    features = np.concatenate(segments, axis=0)
    if noise:
        features = features + rng.normal(0.0, noise, size=features.shape)
    return features.astype(np.float32)


def make_task(
    words: list[str],
    n_samples: int,
    seed: int,
    min_words: int = 4,
    max_words: int = 8,
    frames_per_word: int = DEFAULT_FRAMES_PER_WORD,
    noise: float = 0.05,
) -> SynthTask:
    rng = np.random.default_rng(seed)
    bank = word_bank(words, rng, frames_per_word)
    samples = []
    for _ in range(n_samples):
        length = int(rng.integers(min_words, max_words + 1))
        sentence = [words[int(i)] for i in rng.integers(0, len(words), size=length)]
        samples.append((render_sentence(bank, sentence, rng, noise), " ".join(sentence)))
    return SynthTask(words=bank, samples=samples)


def make_overfit_task(
    n_samples: int = 32,
    seed: int = 42,
    n_words: int = 24,
    frames_per_word: int = DEFAULT_FRAMES_PER_WORD,
) -> SynthTask:
    """Fixed-shape memorization set: every transcript is exactly two
    words, all transcripts distinct, all feature sequences equal length.
    Identical lengths matter: with the projection disabled the encoder
    then sees identical inputs for every sample, so no side channel leaks
    the transcript."""
    words = [f"sign{i:02d}" for i in range(n_words)]
    rng = np.random.default_rng(seed)
    bank = word_bank(words, rng, frames_per_word)
    pairs: set[tuple[int, int]] = set()
    while len(pairs) < n_samples:
        a, b = (int(v) for v in rng.integers(0, n_words, size=2))
        pairs.add((a, b))
    ordered = sorted(pairs)
    samples = []
    for a, b in ordered:
        sentence = [words[a], words[b]]
        samples.append(
            (render_sentence(bank, sentence, rng, noise=0.02), " ".join(sentence))
        )
    return SynthTask(words=bank, samples=samples)
