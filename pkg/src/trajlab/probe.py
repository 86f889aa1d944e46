"""What-if probing: manual neighbors, partition/factor overrides, attention.

This is the single pipeline behind both the ``probe`` CLI subcommand and
the HTTP ``/predict`` endpoint, so their outputs agree bitwise for the
same checkpoint and request.
"""

from __future__ import annotations

import numpy as np

from .data import PredictionCase, normalize_case, select_neighbors
from .metrics import derive_case_seed
from .model import ModelConfig, ParameterStore, sample_K
from .social import ConfigError, compute_meta, factors_from_codes, inject_manual_neighbor


def apply_overrides(config: ModelConfig, n_partitions=None, factor_codes=None):
    """Resolve request overrides against a checkpoint's model config.

    Returns (config, factor_mask).  Partition-count overrides change the
    binning only; factor overrides must pick a subset of the factors the
    checkpoint was trained with, and act as a column mask (disabled factors
    contribute zeros) because the embedding shapes are fixed by training.
    """
    if n_partitions is not None:
        config = config.with_partition(n_partitions=int(n_partitions))
    mask = None
    if factor_codes is not None:
        enabled = factors_from_codes(factor_codes) if isinstance(factor_codes, str) else tuple(factor_codes)
        trained = config.partition.factors
        unknown = [f for f in enabled if f not in trained]
        if unknown:
            raise ConfigError(
                f"factors {unknown} not available in this checkpoint (trained with {list(trained)})"
            )
        mask = np.array([1.0 if f in enabled else 0.0 for f in trained])
    return config, mask


def run_probe(
    case: PredictionCase,
    params: ParameterStore,
    config: ModelConfig,
    manual_neighbors=(),
    K: int = 1,
    seed: int = 0,
    n_partitions=None,
    factor_codes=None,
) -> dict:
    """Predict one case with optional manual neighbors and overrides.

    ``manual_neighbors`` is a sequence of (start, end) scene-frame pairs.
    Returns a plain dict (scene-frame coordinates throughout) ready for
    JSON serialization or text emission.
    """
    config, mask = apply_overrides(config, n_partitions=n_partitions, factor_codes=factor_codes)
    cap = config.partition.neighbor_cap
    probed = case
    for start, end in manual_neighbors:
        probed = inject_manual_neighbor(probed, start, end, cap=cap)
    probed = select_neighbors(probed, cap=cap)
    normed, transform = normalize_case(probed)

    meta = compute_meta(normed, config.partition) if config.use_social else None
    if meta is not None and mask is not None:
        meta.values = meta.values * mask[None, :]

    out = sample_K(normed, params, config, K=K, seed=derive_case_seed(seed, case.case_id), meta=meta)
    out.denormalized = out.samples + transform.offset

    result = {
        "case_id": case.case_id,
        "scene_id": case.scene_id,
        "unit": case.unit_tag,
        "k": K,
        "seed": seed,
        "n_partitions": config.partition.n_partitions,
        "factors": list(config.partition.factors),
        "observed": probed.target_observed.tolist(),
        "neighbors": [
            {"id": nid, "tag": tag, "points": pts.tolist()}
            for nid, tag, pts in zip(probed.neighbor_ids, probed.neighbor_tags, probed.neighbors)
        ],
        "predictions": out.denormalized.tolist(),
        "partition_boundaries": [[lo, hi] for lo, hi in config.partition.boundaries()],
        "attention": None,
        "meta": None,
    }
    if out.attention is not None:
        result["attention"] = {
            "raw": out.attention.raw.tolist(),
            "normalized": out.attention.normalized.tolist(),
        }
    if meta is not None:
        result["meta"] = {
            "values": meta.values.tolist(),
            "counts": meta.counts.tolist(),
            "factors": list(meta.factors),
        }
    return result


def predictor(params: ParameterStore, config: ModelConfig):
    """Wrap a checkpoint as ``predict_fn(case, K, seed)`` for evaluation.

    Handles neighbor capping, normalization, and mapping samples back to
    the scene frame.
    """

    def predict(case: PredictionCase, K: int, seed: int) -> np.ndarray:
        capped = select_neighbors(case, cap=config.partition.neighbor_cap)
        normed, transform = normalize_case(capped)
        out = sample_K(normed, params, config, K=K, seed=seed)
        return out.samples + transform.offset

    return predict


def probe_polylines(result: dict) -> list:
    """Flatten a probe result into labeled polylines for the plot-data file."""
    lines = [("observed", result["observed"])]
    for nb in result["neighbors"]:
        lines.append((f"neighbor_{nb['tag']}_{nb['id']}", nb["points"]))
    for k, pred in enumerate(result["predictions"]):
        lines.append((f"pred_{k}", pred))
    return lines


def write_plot_data(path, polylines):
    """One polyline per line: ``label: x0,y0 x1,y1 ...``."""
    with open(path, "w", encoding="utf-8") as f:
        for label, points in polylines:
            coords = " ".join(f"{x!r},{y!r}" for x, y in points)
            f.write(f"{label}: {coords}\n")


def read_plot_data(path) -> list:
    polylines = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            label, _, coords = line.partition(":")
            points = []
            for pair in coords.split():
                x, y = pair.split(",")
                points.append([float(x), float(y)])
            polylines.append((label.strip(), points))
    return polylines
