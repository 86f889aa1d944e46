"""Encoder-style trajectory forecaster with optional social-context fusion.

Pipeline: the observed track is linearly embedded and position-encoded;
sector features pass through a two-layer perceptron, are zero-padded to
the observation length, and fused with the trajectory embedding through an
affine layer + relu; a small multi-head self-attention encoder reads the
fused sequence; a dense head maps the flattened encoding (optionally
concatenated with a noise vector for multimodal sampling) to per-step
displacements from the last observed position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import PredictionCase
from .social import (
    AttentionProfile,
    ConfigError,
    MetaMatrix,
    PartitionConfig,
    attention_scores,
    compute_meta,
)


@dataclass
class ModelConfig:
    d: int = 64
    d_sc: int = 64
    n_layers: int = 2
    n_heads: int = 4
    d_ff: int = 256
    t_h: int = 8
    t_f: int = 12
    use_social: bool = True
    noise_dim: int = 0  # 0 = deterministic single-trajectory output
    partition: PartitionConfig = field(default_factory=PartitionConfig)

    def __post_init__(self):
        if self.d < 1 or self.d_sc < 1:
            raise ConfigError("d and d_sc must be >= 1")
        if self.d % self.n_heads != 0:
            raise ConfigError(f"d={self.d} must be divisible by n_heads={self.n_heads}")
        if self.n_layers < 1 or self.d_ff < 1:
            raise ConfigError("n_layers and d_ff must be >= 1")
        if self.t_h < 1 or self.t_f < 1:
            raise ConfigError("t_h and t_f must be >= 1")
        if self.noise_dim < 0:
            raise ConfigError("noise_dim must be >= 0")
        if self.partition.t_h != self.t_h:
            raise ConfigError(
                f"partition config t_h={self.partition.t_h} disagrees with model t_h={self.t_h}"
            )

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "d_sc": self.d_sc,
            "n_layers": self.n_layers,
            "n_heads": self.n_heads,
            "d_ff": self.d_ff,
            "t_h": self.t_h,
            "t_f": self.t_f,
            "use_social": self.use_social,
            "noise_dim": self.noise_dim,
            "partition": {
                "n_partitions": self.partition.n_partitions,
                "factors": list(self.partition.factors),
                "neighbor_cap": self.partition.neighbor_cap,
                "t_h": self.partition.t_h,
                "delta_t": self.partition.delta_t,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        p = d["partition"]
        partition = PartitionConfig(
            n_partitions=int(p["n_partitions"]),
            factors=tuple(p["factors"]),
            neighbor_cap=int(p["neighbor_cap"]),
            t_h=int(p["t_h"]),
            delta_t=float(p["delta_t"]),
        )
        return cls(
            d=int(d["d"]),
            d_sc=int(d["d_sc"]),
            n_layers=int(d["n_layers"]),
            n_heads=int(d["n_heads"]),
            d_ff=int(d["d_ff"]),
            t_h=int(d["t_h"]),
            t_f=int(d["t_f"]),
            use_social=bool(d["use_social"]),
            noise_dim=int(d["noise_dim"]),
            partition=partition,
        )

    def with_partition(self, **changes) -> "ModelConfig":
        return replace(self, partition=replace(self.partition, **changes))


@dataclass
class PredictionOutput:
    samples: np.ndarray  # (K, t_f, 2), normalized frame
    attention: AttentionProfile | None = None
    denormalized: np.ndarray | None = None  # (K, t_f, 2), scene frame


def parameter_spec(config: ModelConfig) -> list:
    """Ordered (name, shape, kind) triples; the order fixes the init RNG stream."""
    spec = [("embed.traj.w", (2, config.d), "weight")]
    if config.use_social:
        nf = config.partition.n_factors
        spec += [
            ("embed.social.w1", (nf, config.d_sc), "weight"),
            ("embed.social.b1", (config.d_sc,), "bias"),
            ("embed.social.w2", (config.d_sc, config.d_sc), "weight"),
            ("embed.social.b2", (config.d_sc,), "bias"),
            ("fuse.w", (config.d + config.d_sc, config.d), "weight"),
            ("fuse.b", (config.d,), "bias"),
        ]
    for i in range(config.n_layers):
        pre = f"enc.{i}"
        # no biases on the q/k/v projections: a key bias shifts every score
        # in a row equally, which softmax ignores, leaving a flat direction
        for proj in ("q", "k", "v", "o"):
            spec.append((f"{pre}.attn.w{proj}", (config.d, config.d), "weight"))
        spec.append((f"{pre}.attn.bo", (config.d,), "bias"))
        spec += [
            (f"{pre}.ln1.g", (config.d,), "gain"),
            (f"{pre}.ln1.b", (config.d,), "bias"),
            (f"{pre}.ffn.w1", (config.d, config.d_ff), "weight"),
            (f"{pre}.ffn.b1", (config.d_ff,), "bias"),
            (f"{pre}.ffn.w2", (config.d_ff, config.d), "weight"),
            (f"{pre}.ffn.b2", (config.d,), "bias"),
            (f"{pre}.ln2.g", (config.d,), "gain"),
            (f"{pre}.ln2.b", (config.d,), "bias"),
        ]
    head_in = config.t_h * config.d + config.noise_dim
    spec += [
        ("head.w", (head_in, config.t_f * 2), "weight"),
        ("head.b", (config.t_f * 2,), "bias"),
    ]
    return spec


class ParameterStore:
    """Named map of trainable tensors with shape metadata."""

    def __init__(self, params: dict):
        self._params = dict(params)

    @classmethod
    def initialize(cls, config: ModelConfig, seed: int = 0) -> "ParameterStore":
        """Xavier-uniform weights, zero biases, unit layer-norm gains."""
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape, kind in parameter_spec(config):
            if kind == "weight":
                data = ad.xavier_uniform(shape, rng)
            elif kind == "gain":
                data = np.ones(shape)
            else:
                data = np.zeros(shape)
            params[name] = Tensor(data, requires_grad=True)
        return cls(params)

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list:
        return list(self._params.keys())

    def items(self):
        return self._params.items()

    def zero_grads(self):
        for t in self._params.values():
            t.zero_grad()

    def arrays(self) -> dict:
        return {name: t.data.copy() for name, t in self._params.items()}

    @classmethod
    def from_arrays(cls, arrays: dict) -> "ParameterStore":
        return cls({name: Tensor(a, requires_grad=True) for name, a in arrays.items()})


_PE_CACHE: dict = {}


def position_encoding(length: int, width: int) -> np.ndarray:
    """Standard sinusoidal position encoding, cached per (length, width)."""
    key = (length, width)
    if key not in _PE_CACHE:
        pe = np.zeros((length, width))
        pos = np.arange(length)[:, None].astype(np.float64)
        div = np.exp(np.arange(0, width, 2).astype(np.float64) * (-math.log(10000.0) / width))
        pe[:, 0::2] = np.sin(pos * div)
        pe[:, 1::2] = np.cos(pos * div[: pe[:, 1::2].shape[1]])
        _PE_CACHE[key] = pe
    return _PE_CACHE[key]


def embed_trajectory(observed: np.ndarray, params: ParameterStore, config: ModelConfig) -> Tensor:
    """Linear 2 -> d embedding plus additive sinusoidal position encoding."""
    x = ad.matmul(Tensor(observed), params["embed.traj.w"])
    return ad.add(x, Tensor(position_encoding(config.t_h, config.d)))


def embed_social(meta: MetaMatrix, params: ParameterStore, config: ModelConfig):
    """Sector features through the two-layer perceptron, then row padding.

    Returns (rows, padded): the embedded (N, d_sc) sector rows, used for
    attention scores, and the same rows zero-padded to (t_h, d_sc).
    """
    h = ad.relu(ad.add(ad.matmul(Tensor(meta.values), params["embed.social.w1"]), params["embed.social.b1"]))
    rows = ad.add(ad.matmul(h, params["embed.social.w2"]), params["embed.social.b2"])
    return rows, ad.pad_rows(rows, config.t_h)


def fuse(traj_embed: Tensor, social_embed: Tensor, params: ParameterStore) -> Tensor:
    """Rowwise concat, affine down to width d, then relu."""
    joined = ad.concat([traj_embed, social_embed], axis=-1)
    return ad.relu(ad.add(ad.matmul(joined, params["fuse.w"]), params["fuse.b"]))


def _attention_block(x: Tensor, params: ParameterStore, prefix: str, config: ModelConfig) -> Tensor:
    q = ad.matmul(x, params[f"{prefix}.wq"])
    k = ad.matmul(x, params[f"{prefix}.wk"])
    v = ad.matmul(x, params[f"{prefix}.wv"])
    dh = config.d // config.n_heads
    heads = []
    for h in range(config.n_heads):
        cols = slice(h * dh, (h + 1) * dh)
        qh, kh, vh = q[:, cols], k[:, cols], v[:, cols]
        scores = ad.multiply(ad.matmul(qh, ad.transpose(kh)), 1.0 / math.sqrt(dh))
        heads.append(ad.matmul(ad.softmax(scores), vh))
    merged = ad.concat(heads, axis=-1)
    return ad.add(ad.matmul(merged, params[f"{prefix}.wo"]), params[f"{prefix}.bo"])


def _encoder_layer(x: Tensor, params: ParameterStore, i: int, config: ModelConfig) -> Tensor:
    pre = f"enc.{i}"
    attn = _attention_block(x, params, f"{pre}.attn", config)
    x = ad.layer_norm(ad.add(x, attn), params[f"{pre}.ln1.g"], params[f"{pre}.ln1.b"])
    hidden = ad.relu(ad.add(ad.matmul(x, params[f"{pre}.ffn.w1"]), params[f"{pre}.ffn.b1"]))
    ff = ad.add(ad.matmul(hidden, params[f"{pre}.ffn.w2"]), params[f"{pre}.ffn.b2"])
    return ad.layer_norm(ad.add(x, ff), params[f"{pre}.ln2.g"], params[f"{pre}.ln2.b"])


def forward_tensors(
    case: PredictionCase,
    params: ParameterStore,
    config: ModelConfig,
    noise: np.ndarray | None = None,
    meta: MetaMatrix | None = None,
):
    """Full differentiable forward pass on a normalized, capped case.

    Returns (prediction (t_f, 2), embedded social rows or None).  ``meta``
    may be precomputed (the probe path masks factors before embedding).
    """
    if case.t_h != config.t_h:
        raise ConfigError(f"case t_h={case.t_h} does not match model t_h={config.t_h}")
    traj = embed_trajectory(case.target_observed, params, config)
    rows = None
    if config.use_social:
        if meta is None:
            meta = compute_meta(case, config.partition)
        rows, padded = embed_social(meta, params, config)
        x = fuse(traj, padded, params)
    else:
        x = traj
    for i in range(config.n_layers):
        x = _encoder_layer(x, params, i, config)
    flat = ad.reshape(x, (1, config.t_h * config.d))
    if config.noise_dim > 0:
        z = np.zeros(config.noise_dim) if noise is None else np.asarray(noise, dtype=np.float64)
        if z.shape != (config.noise_dim,):
            raise ConfigError(f"noise must have shape ({config.noise_dim},), got {z.shape}")
        flat = ad.concat([flat, Tensor(z.reshape(1, -1))], axis=-1)
    out = ad.add(ad.matmul(flat, params["head.w"]), params["head.b"])
    displacements = ad.reshape(out, (config.t_f, 2))
    anchor = Tensor(case.target_observed[-1])
    return ad.add(displacements, anchor), rows


def forward(
    case: PredictionCase,
    params: ParameterStore,
    config: ModelConfig,
    noise: np.ndarray | None = None,
    meta: MetaMatrix | None = None,
) -> np.ndarray:
    """Inference-only forward pass; returns the (t_f, 2) prediction."""
    with ad.no_grad():
        pred, _ = forward_tensors(case, params, config, noise=noise, meta=meta)
    return pred.data.copy()


def sample_K(
    case: PredictionCase,
    params: ParameterStore,
    config: ModelConfig,
    K: int,
    seed: int = 0,
    meta: MetaMatrix | None = None,
) -> PredictionOutput:
    """Draw K forward passes with independent seeded noise.

    With noise_dim == 0 all samples coincide with the deterministic forward.
    The attached attention profile is computed from the embedded
    (pre-padding) sector rows and is independent of the noise draws.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    rng = np.random.default_rng(seed)
    samples = np.zeros((K, config.t_f, 2))
    attention = None
    with ad.no_grad():
        for k in range(K):
            noise = rng.standard_normal(config.noise_dim) if config.noise_dim > 0 else None
            pred, rows = forward_tensors(case, params, config, noise=noise, meta=meta)
            samples[k] = pred.data
            if k == 0 and rows is not None:
                attention = attention_scores(rows.data)
    return PredictionOutput(samples=samples, attention=attention)
