"""Toy encoder-decoder over landmark features.

One learnable linear layer projects each 208-value frame into the model
width; everything downstream is a small standard transformer. Padded
frames are zeroed before projection and excluded from attention on both
sides, so they contribute exactly zero gradient to the projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .data import BOS_ID, EOS_ID, FEATURE_DIM, PAD_ID

MAX_POSITIONS = 1024


@dataclass(frozen=True)
class ToyModelConfig:
    vocab_size: int
    d_model: int = 64
    n_encoder_layers: int = 2
    n_decoder_layers: int = 2
    n_heads: int = 4
    learning_rate: float = 3e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d_model < 8:
            raise ValueError(f"d_model {self.d_model} < 8")
        if self.d_model % self.n_heads:
            raise ValueError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}"
            )
        if min(self.n_encoder_layers, self.n_decoder_layers) < 1:
            raise ValueError("need at least one encoder and one decoder layer")
        if self.vocab_size <= 4:
            raise ValueError(f"vocab_size {self.vocab_size} leaves no real tokens")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate {self.learning_rate} not > 0")


def _sinusoid_table(d_model: int) -> torch.Tensor:
    position = torch.arange(MAX_POSITIONS, dtype=torch.float32).unsqueeze(1)
    step = torch.exp(
        torch.arange(0, d_model, 2, dtype=torch.float32)
        * (-math.log(10000.0) / d_model)
    )
    table = torch.zeros(MAX_POSITIONS, d_model)
    table[:, 0::2] = torch.sin(position * step)
    table[:, 1::2] = torch.cos(position * step[: d_model // 2])
    return table


class ToySignTranslator(nn.Module):
    """Construction is deterministic: the config seed fixes every initial
    parameter, so two models built from equal configs are identical."""

    def __init__(self, config: ToyModelConfig):
        super().__init__()
        torch.manual_seed(config.seed)
        self.config = config
        d = config.d_model
        self.projection = nn.Linear(FEATURE_DIM, d)
        self.embedding = nn.Embedding(config.vocab_size, d, padding_idx=PAD_ID)
        self.register_buffer("positions", _sinusoid_table(d), persistent=False)
        encoder_layer = nn.TransformerEncoderLayer(
            d, config.n_heads, dim_feedforward=4 * d, dropout=0.0, batch_first=True
        )
        self.encoder = nn.TransformerEncoder(
            encoder_layer, config.n_encoder_layers, enable_nested_tensor=False
        )
        decoder_layer = nn.TransformerDecoderLayer(
            d, config.n_heads, dim_feedforward=4 * d, dropout=0.0, batch_first=True
        )
        self.decoder = nn.TransformerDecoder(decoder_layer, config.n_decoder_layers)
        self.head = nn.Linear(d, config.vocab_size)

    def encode(self, features: torch.Tensor, feature_mask: torch.Tensor) -> torch.Tensor:
        masked = features * feature_mask.unsqueeze(-1).to(features.dtype)
        projected = self.projection(masked)
        projected = projected + self.positions[: projected.shape[1]].to(projected.dtype)
        return self.encoder(projected, src_key_padding_mask=~feature_mask)

    def forward(
        self,
        features: torch.Tensor,
        feature_mask: torch.Tensor,
        tokens_in: torch.Tensor,
        tokens_in_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        memory = self.encode(features, feature_mask)
        return self.decode_step(memory, feature_mask, tokens_in, tokens_in_mask)

    def decode_step(
        self,
        memory: torch.Tensor,
        feature_mask: torch.Tensor,
        tokens_in: torch.Tensor,
        tokens_in_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        embedded = self.embedding(tokens_in)
        embedded = embedded + self.positions[: embedded.shape[1]].to(embedded.dtype)
        length = tokens_in.shape[1]
        causal = torch.triu(
            torch.ones(length, length, dtype=torch.bool, device=tokens_in.device),
            diagonal=1,
        )
        decoded = self.decoder(
            embedded,
            memory,
            tgt_mask=causal,
            tgt_key_padding_mask=None
            if tokens_in_mask is None
            else ~tokens_in_mask,
            memory_key_padding_mask=~feature_mask,
        )
        return self.head(decoded)

    @torch.no_grad()
    def greedy_decode(
        self,
        features: torch.Tensor,
        feature_mask: torch.Tensor,
        max_len: int = 16,
    ) -> list[list[int]]:
        """Argmax decoding from <bos> until <eos> or max_len; returns token
        ids without the sentinels. Deterministic for fixed inputs."""
        was_training = self.training
        self.eval()
        batch = features.shape[0]
        memory = self.encode(features, feature_mask)
        tokens = torch.full((batch, 1), BOS_ID, dtype=torch.int64)
        finished = torch.zeros(batch, dtype=torch.bool)
        for _ in range(max_len):
            logits = self.decode_step(memory, feature_mask, tokens)
            step = logits[:, -1].argmax(dim=-1)
            step = torch.where(finished, torch.full_like(step, PAD_ID), step)
            tokens = torch.cat([tokens, step.unsqueeze(1)], dim=1)
            finished |= step == EOS_ID
            if bool(finished.all()):
                break
        out = []
        for row in tokens[:, 1:].tolist():
            ids = []
            for token_id in row:
                if token_id == EOS_ID:
                    break
                if token_id != PAD_ID:
                    ids.append(token_id)
            out.append(ids)
        self.train(was_training)
        return out


def sequence_loss(
    logits: torch.Tensor, targets: torch.Tensor, target_mask: torch.Tensor
) -> torch.Tensor:
    """Mean cross-entropy over real (unmasked) target positions."""
    flat = nn.functional.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), targets.reshape(-1), reduction="none"
    )
    mask = target_mask.reshape(-1).to(flat.dtype)
    return (flat * mask).sum() / mask.sum()
