"""Trainability checks: memorization, ablation, and two-stage transfer.

The transfer check never scores text itself; decoded hypotheses and
references are written to files and scored by the external ``score``
command, which is the contract boundary for evaluation.
"""

from __future__ import annotations

import math
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from .data import Batch, Vocab, build_batch
from .model import ToyModelConfig, ToySignTranslator, sequence_loss
from .synthesis import SynthTask

SCORE_COMMAND = (sys.executable, "-m", "signpipe.cli", "score")


@dataclass(frozen=True)
class OverfitResult:
    final_loss: float
    min_loss: float
    steps: int
    exact_matches: int
    total: int
    diverged: bool
    losses: tuple[float, ...]


@dataclass(frozen=True)
class TransferScores:
    scratch: float
    pretrained: float
    zero_shot: float


def batch_from_samples(
    samples: Sequence[tuple[np.ndarray, str]],
    vocab: Vocab,
    max_frame_length: int,
) -> Batch:
    arrays = [features for features, _ in samples]
    texts = [text for _, text in samples]
    return build_batch(arrays, texts, vocab, max_frame_length)


def train(
    model: ToySignTranslator,
    batches: Sequence[Batch],
    steps: int,
    learning_rate: float,
) -> list[float]:
    """Steps through ``batches`` cyclically with Adam; returns the loss at
    every step. Stops early on a non-finite loss."""
    optimizer = torch.optim.Adam(model.parameters(), lr=learning_rate)
    model.train()
    losses = []
    for step in range(steps):
        batch = batches[step % len(batches)]
        logits = model(
            batch.features,
            batch.feature_mask,
            batch.decoder_input,
            batch.decoder_input_mask,
        )
        loss = sequence_loss(logits, batch.decoder_target, batch.decoder_target_mask)
        losses.append(loss.item())
        if not math.isfinite(losses[-1]):
            break
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
    return losses


def exact_match_count(
    model: ToySignTranslator, batch: Batch, vocab: Vocab, max_len: int
) -> int:
    decoded = model.greedy_decode(batch.features, batch.feature_mask, max_len=max_len)
    references = [
        vocab.decode(row[1:]) for row in batch.token_ids.tolist()
    ]
    return sum(
        vocab.decode(ids) == reference for ids, reference in zip(decoded, references)
    )


def overfit_check(
    samples: Sequence[tuple[np.ndarray, str]],
    config: ToyModelConfig,
    max_steps: int = 2000,
    target_loss: float = 0.1,
    freeze_projection: bool = False,
) -> OverfitResult:
    """Full-batch memorization of ``samples``. Training stops once the
    loss drops under ``target_loss`` or after ``max_steps``.

    With ``freeze_projection`` the input projection is zeroed and left
    untrained, severing the only path from features into the model; the
    rest keeps training, which is the ablation baseline."""
    vocab = Vocab.from_texts(text for _, text in samples)
    model = ToySignTranslator(
        ToyModelConfig(
            vocab_size=len(vocab),
            d_model=config.d_model,
            n_encoder_layers=config.n_encoder_layers,
            n_decoder_layers=config.n_decoder_layers,
            n_heads=config.n_heads,
            learning_rate=config.learning_rate,
            seed=config.seed,
        )
    )
    if freeze_projection:
        with torch.no_grad():
            model.projection.weight.zero_()
            model.projection.bias.zero_()
        model.projection.weight.requires_grad_(False)
        model.projection.bias.requires_grad_(False)

    max_frames = max(features.shape[0] for features, _ in samples)
    batch = batch_from_samples(samples, vocab, max_frame_length=max_frames)
    optimizer = torch.optim.Adam(
        [p for p in model.parameters() if p.requires_grad],
        lr=config.learning_rate,
    )
    model.train()
    losses: list[float] = []
    diverged = False
    for _ in range(max_steps):
        logits = model(
            batch.features,
            batch.feature_mask,
            batch.decoder_input,
            batch.decoder_input_mask,
        )
        loss = sequence_loss(logits, batch.decoder_target, batch.decoder_target_mask)
        losses.append(loss.item())
        if not math.isfinite(losses[-1]):
            diverged = True
            break
        if losses[-1] < target_loss:
            break
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()

    max_len = batch.token_ids.shape[1] + 2
    matches = exact_match_count(model, batch, vocab, max_len)
    return OverfitResult(
        final_loss=losses[-1],
        min_loss=min(losses),
        steps=len(losses),
        exact_matches=matches,
        total=len(samples),
        diverged=diverged,
        losses=tuple(losses),
    )


def bleu4_from_files(
    hypothesis: str | Path, reference: str | Path
) -> float:
    """BLEU-4 as reported by the external scoring command's CSV output."""
    result = subprocess.run(
        [*SCORE_COMMAND, str(hypothesis), str(reference), "--csv"],
        capture_output=True,
        text=True,
    )
    if result.returncode != 0:
        raise RuntimeError(f"score command failed: {result.stderr.strip()}")
    header, row = result.stdout.splitlines()[:2]
    columns = dict(zip(header.split(","), row.split(",")))
    return float(columns["BLEU-4"])


def score_decodes(
    model: ToySignTranslator,
    batch: Batch,
    vocab: Vocab,
    references: Sequence[str],
    max_len: int,
    workdir: str | Path | None = None,
) -> float:
    decoded = model.greedy_decode(batch.features, batch.feature_mask, max_len=max_len)
    hypotheses = [vocab.decode(ids) for ids in decoded]
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        hyp_path = Path(tmp) / "hyp.txt"
        ref_path = Path(tmp) / "ref.txt"
        hyp_path.write_text("".join(line + "\n" for line in hypotheses), "utf-8")
        ref_path.write_text("".join(line + "\n" for line in references), "utf-8")
        return bleu4_from_files(hyp_path, ref_path)


def _shuffled_batches(
    samples: Sequence[tuple[np.ndarray, str]],
    vocab: Vocab,
    batch_size: int,
    max_frame_length: int,
    seed: int,
) -> list[Batch]:
    order = list(range(len(samples)))
    rng = np.random.default_rng(seed)
    rng.shuffle(order)
    shuffled = [samples[i] for i in order]
    return [
        batch_from_samples(shuffled[i : i + batch_size], vocab, max_frame_length)
        for i in range(0, len(shuffled), batch_size)
    ]


def transfer_check(
    task_a: SynthTask,
    task_b_finetune: Sequence[tuple[np.ndarray, str]],
    task_b_eval: Sequence[tuple[np.ndarray, str]],
    config: ToyModelConfig,
    pretrain_steps: int = 400,
    finetune_steps: int = 120,
    batch_size: int = 32,
    max_frame_length: int = 64,
    max_decode_len: int = 12,
) -> TransferScores:
    """Scratch-vs-pretrained comparison on one seed.

    Both models share the config (and therefore initial parameters); the
    pretrained one first trains on task A, whose vocabulary is disjoint
    from B's. Scores are BLEU-4 on B's held-out samples via the external
    score command; zero_shot is the pretrained model evaluated on B
    before any finetuning."""
    vocab = Vocab.from_texts(
        [text for _, text in task_a.samples]
        + [text for _, text in task_b_finetune]
        + [text for _, text in task_b_eval]
    )
    full_config = ToyModelConfig(
        vocab_size=len(vocab),
        d_model=config.d_model,
        n_encoder_layers=config.n_encoder_layers,
        n_decoder_layers=config.n_decoder_layers,
        n_heads=config.n_heads,
        learning_rate=config.learning_rate,
        seed=config.seed,
    )
    eval_batch = batch_from_samples(task_b_eval, vocab, max_frame_length)
    eval_references = [text for _, text in task_b_eval]
    finetune_batches = _shuffled_batches(
        task_b_finetune, vocab, batch_size, max_frame_length, seed=config.seed
    )

    scratch = ToySignTranslator(full_config)
    train(scratch, finetune_batches, finetune_steps, full_config.learning_rate)
    scratch_score = score_decodes(
        scratch, eval_batch, vocab, eval_references, max_decode_len
    )

    pretrained = ToySignTranslator(full_config)
    pretrain_batches = _shuffled_batches(
        task_a.samples, vocab, batch_size, max_frame_length, seed=config.seed + 1
    )
    train(pretrained, pretrain_batches, pretrain_steps, full_config.learning_rate)
    zero_shot = score_decodes(
        pretrained, eval_batch, vocab, eval_references, max_decode_len
    )
    train(pretrained, finetune_batches, finetune_steps, full_config.learning_rate)
    pretrained_score = score_decodes(
        pretrained, eval_batch, vocab, eval_references, max_decode_len
    )

    return TransferScores(
        scratch=scratch_score, pretrained=pretrained_score, zero_shot=zero_shot
    )
