"""End-to-end checks for the training bridge, one per stated criterion.

Each test prints a [PASS] line with its wall-clock time so the suite
doubles as a checklist. Budgets are ceilings for a laptop-class CPU."""

import time

import numpy as np
import torch

from signtrainer import (
    ToyModelConfig,
    ToySignTranslator,
    make_overfit_task,
    make_task,
    overfit_check,
    sequence_loss,
    transfer_check,
)
from signtrainer.data import BOS_ID, EOS_ID, FEATURE_DIM


def report(name: str, elapsed: float, budget: float) -> None:
    assert elapsed < budget, f"{name} took {elapsed:.1f}s (budget {budget:.0f}s)"
    print(f"[PASS] {name}: {elapsed:.2f}s (budget {budget:.0f}s)")


def projection_gradient_error() -> float:
    """Worst relative error between analytic and central-difference
    gradients of the input projection, on a 4-frame micro-batch."""
    config = ToyModelConfig(
        vocab_size=8, d_model=8, n_encoder_layers=1, n_decoder_layers=1,
        n_heads=2, seed=3,
    )
    model = ToySignTranslator(config).double()
    model.eval()
    g = torch.Generator().manual_seed(7)
    features = torch.randn(2, 4, FEATURE_DIM, generator=g).double()
    mask = torch.ones(2, 4, dtype=torch.bool)
    tokens_in = torch.tensor([[BOS_ID, 5, 6], [BOS_ID, 6, 7]])
    targets = torch.tensor([[5, 6, EOS_ID], [6, 7, EOS_ID]])
    target_mask = torch.ones(2, 3, dtype=torch.bool)

    def loss_value():
        return sequence_loss(model(features, mask, tokens_in), targets, target_mask)

    model.zero_grad()
    loss_value().backward()

    rng = np.random.default_rng(11)
    h = 1e-5
    worst = 0.0
    for param, n_samples in ((model.projection.weight, 8), (model.projection.bias, 4)):
        analytic = param.grad.view(-1)
        flat = param.data.view(-1)
        for idx in rng.choice(flat.numel(), size=n_samples, replace=False):
            original = flat[idx].item()
            with torch.no_grad():
                flat[idx] = original + h
                up = loss_value().item()
                flat[idx] = original - h
                down = loss_value().item()
                flat[idx] = original
            numeric = (up - down) / (2.0 * h)
            scale = max(abs(numeric), abs(analytic[idx].item()), 1e-8)
            worst = max(worst, abs(numeric - analytic[idx].item()) / scale)
    return worst


def test_overfit_criterion():
    start = time.perf_counter()
    samples = make_overfit_task().samples  # 32 pairs, task seed 42
    config = ToyModelConfig(vocab_size=5, seed=42)

    result = overfit_check(samples, config)
    assert not result.diverged
    assert result.steps <= 2000, result.steps
    assert result.final_loss < 0.1, result.final_loss
    assert result.total == 32
    assert result.exact_matches >= 30, result.exact_matches

    repeat = overfit_check(samples, config)
    assert repeat.losses == result.losses

    ablation = overfit_check(samples, config, freeze_projection=True)
    assert not ablation.diverged
    assert ablation.min_loss > 1.0, ablation.min_loss

    error = projection_gradient_error()
    assert error < 1e-3, error

    report(
        "overfit: memorization, repeatability, frozen-projection ablation,"
        " gradient oracle",
        time.perf_counter() - start,
        600.0,
    )


def test_transfer_direction_criterion():
    start = time.perf_counter()
    task_a = make_task(
        [f"alpha{i:02d}" for i in range(16)], n_samples=1000, seed=100
    )
    pool = make_task(
        [f"beta{i:02d}" for i in range(16)], n_samples=576, seed=200
    )
    finetune_pool, held_out = pool.samples[:512], pool.samples[512:]
    small_slice = finetune_pool[:64]

    small_gaps = {}
    for seed in (0, 1, 2):
        config = ToyModelConfig(vocab_size=5, seed=seed)
        scores = transfer_check(task_a, small_slice, held_out, config)
        assert scores.pretrained > scores.scratch, (seed, scores)
        assert scores.zero_shot < 5.0, (seed, scores)
        small_gaps[seed] = scores.pretrained - scores.scratch

    saturated = transfer_check(
        task_a,
        finetune_pool,
        held_out,
        ToyModelConfig(vocab_size=5, seed=0),
        finetune_steps=400,
    )
    assert abs(saturated.pretrained - saturated.scratch) < small_gaps[0], (
        saturated,
        small_gaps,
    )

    report(
        "transfer: pretrained beats scratch 3/3 seeds, zero-shot near zero,"
        " full-data gap shrinks",
        time.perf_counter() - start,
        1800.0,
    )
    print(
        "[NOTE] transfer magnitude: only the direction is asserted;"
        " full-scale gains are out of scope at toy size"
    )
