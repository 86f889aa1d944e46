"""Displacement-error metrics: ADE, FDE, and best-of-K evaluation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


@dataclass
class EvalReport:
    min_ade_k: float
    min_fde_k: float
    K: int
    n_cases: int
    unit_tag: str = "meters"
    per_case: list = field(default_factory=list)  # (case_id, min_ade, min_fde)

    def format_text(self) -> str:
        lines = [
            f"min_ade_k = {self.min_ade_k!r}",
            f"min_fde_k = {self.min_fde_k!r}",
            f"k = {self.K}",
            f"n_cases = {self.n_cases}",
            f"unit = {self.unit_tag}",
        ]
        return "\n".join(lines) + "\n"

    def format_per_case_table(self) -> str:
        lines = ["case_id\tmin_ade\tmin_fde"]
        for case_id, a, f in self.per_case:
            lines.append(f"{case_id}\t{a!r}\t{f!r}")
        return "\n".join(lines) + "\n"


def ade(pred: np.ndarray, gt: np.ndarray) -> float:
    """Average Euclidean displacement over the prediction steps."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2 or pred.shape[1] != 2:
        raise ValueError(f"ade: shapes {pred.shape} and {gt.shape} must match (t_f, 2)")
    return float(np.mean(np.linalg.norm(pred - gt, axis=1)))


def fde(pred: np.ndarray, gt: np.ndarray) -> float:
    """Euclidean displacement at the final prediction step."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.ndim != 2 or pred.shape[1] != 2:
        raise ValueError(f"fde: shapes {pred.shape} and {gt.shape} must match (t_f, 2)")
    return float(np.linalg.norm(pred[-1] - gt[-1]))


def min_over_k(samples: np.ndarray, gt: np.ndarray):
    """Best ADE and best FDE over K samples, minimized independently."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 3:
        raise ValueError(f"min_over_k expects (K, t_f, 2), got {samples.shape}")
    ades = [ade(samples[k], gt) for k in range(samples.shape[0])]
    fdes = [fde(samples[k], gt) for k in range(samples.shape[0])]
    return min(ades), min(fdes)


def derive_case_seed(master_seed: int, case_id: str) -> int:
    """Deterministic per-case seed from (master seed, case id)."""
    digest = hashlib.sha256(f"{master_seed}|{case_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def evaluate(predict_fn, cases, K: int, seed: int = 0) -> EvalReport:
    """Run best-of-K evaluation over cases with ground-truth futures.

    ``predict_fn(case, K, seed) -> (K, t_f, 2)`` must return predictions in
    the same coordinate frame as the given case.  Each case gets its own
    seed derived from (master seed, case_id), so the report is independent
    of evaluation order.
    """
    cases = list(cases)
    if not cases:
        raise ValueError("evaluate: empty test set")
    per_case = []
    for case in cases:
        if case.target_future is None:
            raise ValueError(f"case {case.case_id!r} has no ground-truth future")
        samples = predict_fn(case, K, derive_case_seed(seed, case.case_id))
        a, f = min_over_k(samples, case.target_future)
        per_case.append((case.case_id, a, f))
    return EvalReport(
        min_ade_k=float(np.mean([a for _, a, _ in per_case])),
        min_fde_k=float(np.mean([f for _, _, f in per_case])),
        K=K,
        n_cases=len(cases),
        unit_tag=cases[0].unit_tag,
        per_case=per_case,
    )
