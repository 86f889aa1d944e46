"""Gradient-descent training on the mean squared prediction error.

Deterministic given the seed: batch shuffling is reseeded per epoch from
the master seed, Adam state updates are pure numpy, and a non-finite loss
aborts immediately with the offending epoch instead of propagating NaNs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import normalize_case, select_neighbors
from .metrics import derive_case_seed
from .model import ModelConfig, ParameterStore, forward_tensors


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, value: float):
        super().__init__(f"non-finite loss at epoch {epoch} (value {value!r})")
        self.epoch = epoch


@dataclass
class TrainConfig:
    # desk-scale defaults; full-scale values (epochs=600, batch_size=1500)
    # stay selectable through the CLI flags
    learning_rate: float = 1e-4
    epochs: int = 200
    batch_size: int = 64
    seed: int = 0
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.optimizer != "adam":
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


class AdamState:
    """First/second moment buffers plus the shared step counter."""

    def __init__(self):
        self.m: dict = {}
        self.v: dict = {}
        self.t = 0


def adam_step(params: ParameterStore, grads: dict, state: AdamState, config: TrainConfig):
    """One textbook Adam update with bias correction, in place."""
    state.t += 1
    b1, b2 = config.beta1, config.beta2
    correct1 = 1.0 - b1**state.t
    correct2 = 1.0 - b2**state.t
    for name, tensor in params.items():
        g = grads.get(name)
        if g is None:
            continue
        if g.shape != tensor.data.shape:
            raise ValueError(f"adam_step: gradient shape {g.shape} != parameter {name} {tensor.data.shape}")
        if name not in state.m:
            state.m[name] = np.zeros_like(tensor.data)
            state.v[name] = np.zeros_like(tensor.data)
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * (g * g)
        m_hat = state.m[name] / correct1
        v_hat = state.v[name] / correct2
        tensor.data -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)


def train(
    cases,
    model_config: ModelConfig,
    train_config: TrainConfig,
    params: ParameterStore | None = None,
    on_epoch=None,
):
    """Minimize mean squared error over shuffled mini-batches.

    Returns (params, loss_curve) where loss_curve holds the per-epoch mean
    loss.  ``on_epoch(epoch, mean_loss, params)`` runs after each epoch,
    e.g. for interval checkpointing.
    """
    cases = list(cases)
    if not cases:
        raise ValueError("train: empty dataset")
    for case in cases:
        if case.target_future is None:
            raise ValueError(f"case {case.case_id!r} has no ground-truth future")

    prepared = []
    for case in cases:
        capped = select_neighbors(case, cap=model_config.partition.neighbor_cap)
        normed, _ = normalize_case(capped)
        prepared.append(normed)

    if params is None:
        params = ParameterStore.initialize(model_config, seed=train_config.seed)
    state = AdamState()
    n = len(prepared)
    curve = []
    for epoch in range(train_config.epochs):
        rng = np.random.default_rng((train_config.seed, epoch))
        order = rng.permutation(n)
        epoch_sum = 0.0
        for start in range(0, n, train_config.batch_size):
            batch = order[start : start + train_config.batch_size]
            params.zero_grads()
            total = None
            for idx in batch:
                case = prepared[idx]
                noise = None
                if model_config.noise_dim > 0:
                    case_rng = np.random.default_rng(
                        (derive_case_seed(train_config.seed, case.case_id) % (2**32), epoch)
                    )
                    noise = case_rng.standard_normal(model_config.noise_dim)
                pred, _ = forward_tensors(case, params, model_config, noise=noise)
                loss = ad.mean_squared_error(pred, Tensor(case.target_future))
                total = loss if total is None else ad.add(total, loss)
            batch_loss = ad.multiply(total, 1.0 / len(batch))
            value = batch_loss.item()
            if not np.isfinite(value):
                raise TrainingDivergedError(epoch, value)
            epoch_sum += value * len(batch)
            batch_loss.backward()
            grads = {name: t.grad for name, t in params.items() if t.grad is not None}
            adam_step(params, grads, state, train_config)
        mean_loss = epoch_sum / n
        curve.append(mean_loss)
        if on_epoch is not None:
            on_epoch(epoch, mean_loss, params)
    return params, curve


def write_loss_curve(path, curve):
    """Two-column text file: epoch index and mean loss."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("# epoch mean_loss\n")
        for epoch, value in enumerate(curve):
            f.write(f"{epoch} {value!r}\n")


def read_loss_curve(path):
    curve = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            _, value = line.split()
            curve.append(float(value))
    return curve
