"""Batching: feature files plus transcripts to padded, masked tensors.

Sequences longer than ``max_frame_length`` are truncated (the format
carries no guidance either way; truncation keeps every clip usable).
Shorter sequences are zero-padded and masked. Mask convention throughout:
True marks a real position, False a padded one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import torch

from .slf import read_clip

FEATURE_DIM = 208
PRETRAIN_MAX_FRAMES = 250
FINETUNE_MAX_FRAMES = 600

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_ID = 3
SPECIAL_TOKENS = ("<pad>", "<bos>", "<eos>", "<unk>")


class DimensionMismatch(ValueError):
    pass


class Vocab:
    """Word-level vocabulary with fixed special ids. Word order is sorted,
    so the mapping is a pure function of the word set."""

    def __init__(self, words: Iterable[str]):
        ordered = sorted(set(words) - set(SPECIAL_TOKENS))
        self._words = SPECIAL_TOKENS + tuple(ordered)
        self._ids = {word: i for i, word in enumerate(self._words)}

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "Vocab":
        return cls(word for text in texts for word in text.split())

    def __len__(self) -> int:
        return len(self._words)

    def encode(self, text: str) -> list[int]:
        return [self._ids.get(word, UNK_ID) for word in text.split()]

    def decode(self, ids: Iterable[int]) -> str:
        words = []
        for token_id in ids:
            if token_id == EOS_ID:
                break
            if token_id in (PAD_ID, BOS_ID, UNK_ID):
                continue
            words.append(self._words[token_id])
        return " ".join(words)


@dataclass(frozen=True)
class Batch:
    """features: [B, T, 208] float32 with T <= max_frame_length;
    feature_mask: [B, T] bool; token_ids: [B, L] int64 as
    <bos> w1 .. wn <eos> <pad>...; token_mask: [B, L] bool."""

    features: torch.Tensor
    feature_mask: torch.Tensor
    token_ids: torch.Tensor
    token_mask: torch.Tensor

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def decoder_input(self) -> torch.Tensor:
        return self.token_ids[:, :-1]

    @property
    def decoder_input_mask(self) -> torch.Tensor:
        return self.token_mask[:, :-1]

    @property
    def decoder_target(self) -> torch.Tensor:
        return self.token_ids[:, 1:]

    @property
    def decoder_target_mask(self) -> torch.Tensor:
        return self.token_mask[:, 1:]


def build_batch(
    feature_arrays: Sequence[np.ndarray],
    transcripts: Sequence[str],
    vocab: Vocab,
    max_frame_length: int,
) -> Batch:
    if len(feature_arrays) != len(transcripts):
        raise ValueError(
            f"{len(feature_arrays)} feature sequences vs {len(transcripts)} transcripts"
        )
    if not feature_arrays:
        raise ValueError("empty batch")
    if max_frame_length < 1:
        raise ValueError(f"max_frame_length {max_frame_length} < 1")

    clipped = []
    for i, array in enumerate(feature_arrays):
        if array.ndim != 2 or array.shape[1] != FEATURE_DIM:
            raise DimensionMismatch(
                f"sequence {i}: shape {array.shape}, expected [*, {FEATURE_DIM}]"
            )
        if array.shape[0] == 0:
            raise ValueError(f"sequence {i} has zero frames")
        clipped.append(array[:max_frame_length])

    time_dim = max(array.shape[0] for array in clipped)
    features = torch.zeros(len(clipped), time_dim, FEATURE_DIM, dtype=torch.float32)
    feature_mask = torch.zeros(len(clipped), time_dim, dtype=torch.bool)
    for i, array in enumerate(clipped):
        n = array.shape[0]
        features[i, :n] = torch.from_numpy(np.ascontiguousarray(array, dtype=np.float32))
        feature_mask[i, :n] = True

    encoded = [[BOS_ID, *vocab.encode(text), EOS_ID] for text in transcripts]
    token_dim = max(len(ids) for ids in encoded)
    token_ids = torch.full((len(encoded), token_dim), PAD_ID, dtype=torch.int64)
    token_mask = torch.zeros(len(encoded), token_dim, dtype=torch.bool)
    for i, ids in enumerate(encoded):
        token_ids[i, : len(ids)] = torch.tensor(ids, dtype=torch.int64)
        token_mask[i, : len(ids)] = True

    return Batch(
        features=features,
        feature_mask=feature_mask,
        token_ids=token_ids,
        token_mask=token_mask,
    )


def read_manifest_transcripts(path: str | Path) -> list[tuple[str, str]]:
    """(clip_id, transcript) rows from a tab-separated manifest with a
    header line naming at least those two columns."""
    with open(path, encoding="utf-8", newline="") as source:
        reader = csv.DictReader(source, delimiter="\t")
        if reader.fieldnames is None or not {
            "clip_id", "transcript"
        } <= set(reader.fieldnames):
            raise ValueError(
                f"{path}: manifest needs clip_id and transcript columns, "
                f"got {reader.fieldnames}"
            )
        return [(row["clip_id"], row["transcript"]) for row in reader]


def load_feature_batches(
    directory: str | Path,
    manifest: str | Path,
    batch_size: int,
    max_frame_length: int = PRETRAIN_MAX_FRAMES,
    vocab: Vocab | None = None,
) -> Iterator[Batch]:
    """Batches over a manifest in row order, reading ``<clip_id>.slf``
    from ``directory``. Codec errors (bad magic, unsupported version,
    truncation) propagate; a feature dim other than 208 raises
    DimensionMismatch."""
    if batch_size < 1:
        raise ValueError(f"batch_size {batch_size} < 1")
    directory = Path(directory)
    rows = read_manifest_transcripts(manifest)
    if vocab is None:
        vocab = Vocab.from_texts(text for _, text in rows)
    for start in range(0, len(rows), batch_size):
        chunk = rows[start : start + batch_size]
        arrays = []
        for clip_id, _ in chunk:
            clip = read_clip(directory / f"{clip_id}.slf")
            if clip.dim != FEATURE_DIM:
                raise DimensionMismatch(
                    f"{clip_id}: feature dim {clip.dim}, expected {FEATURE_DIM}"
                )
            arrays.append(clip.frames)
        yield build_batch(
            arrays, [text for _, text in chunk], vocab, max_frame_length
        )
