"""Angle-partitioned social context features.

Neighbors are binned into N half-open angular sectors around the target
agent, by their bearing from the target at the last observed frame, and
each sector is summarized by the arithmetic mean of simple per-neighbor
factors:

* ``velocity``            speed over the observed window, displacement / elapsed time
* ``distance``            range from target to neighbor at the last observed frame
* ``direction``           bearing from target to neighbor, in [0, 2pi)
* ``movement_direction``  the neighbor's own heading over the window (off by default)

The target itself is inserted as a self-neighbor pinned to sector 1, so
that sector is never empty.  Empty sectors produce exactly-zero rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import PredictionCase, select_neighbors

TWO_PI = 2.0 * math.pi

FACTOR_VELOCITY = "velocity"
FACTOR_DISTANCE = "distance"
FACTOR_DIRECTION = "direction"
FACTOR_MOVEMENT_DIRECTION = "movement_direction"

# canonical column order; movement_direction is opt-in
ALL_FACTORS = (FACTOR_VELOCITY, FACTOR_DISTANCE, FACTOR_DIRECTION, FACTOR_MOVEMENT_DIRECTION)
DEFAULT_FACTORS = (FACTOR_VELOCITY, FACTOR_DISTANCE, FACTOR_DIRECTION)

FACTOR_CODES = {
    "v": FACTOR_VELOCITY,
    "d": FACTOR_DISTANCE,
    "r": FACTOR_DIRECTION,
    "m": FACTOR_MOVEMENT_DIRECTION,
}
_FACTOR_TO_CODE = {name: code for code, name in FACTOR_CODES.items()}


class ConfigError(ValueError):
    """Invalid partition/model configuration."""


class AngleDomainError(ValueError):
    """Angle outside [0, 2pi)."""


def factors_from_codes(codes: str) -> tuple:
    """Expand a compact factor string like ``"vdr"`` into factor names."""
    names = []
    for c in codes.strip().lower():
        if c not in FACTOR_CODES:
            raise ConfigError(f"unknown factor code {c!r} (expected a subset of 'vdrm')")
        name = FACTOR_CODES[c]
        if name not in names:
            names.append(name)
    if not names:
        raise ConfigError("factor set must not be empty")
    return tuple(names)


def factors_to_codes(factors) -> str:
    return "".join(_FACTOR_TO_CODE[f] for f in factors)


@dataclass(frozen=True)
class PartitionConfig:
    """Angular partitioning settings for the social context features."""

    n_partitions: int = 8
    factors: tuple = DEFAULT_FACTORS
    neighbor_cap: int = 50
    t_h: int = 8
    delta_t: float = 0.4

    def __post_init__(self):
        if self.t_h < 1:
            raise ConfigError("t_h must be >= 1")
        if not (1 <= self.n_partitions <= self.t_h):
            raise ConfigError(
                f"n_partitions must satisfy 1 <= n <= t_h={self.t_h}, got {self.n_partitions}"
            )
        if self.neighbor_cap < 0:
            raise ConfigError("neighbor_cap must be >= 0")
        if self.delta_t <= 0:
            raise ConfigError("delta_t must be > 0")
        factors = tuple(self.factors)
        for f in factors:
            if f not in ALL_FACTORS:
                raise ConfigError(f"unknown factor {f!r}")
        if not factors:
            raise ConfigError("factor set must not be empty")
        # canonicalize order, drop duplicates
        canonical = tuple(f for f in ALL_FACTORS if f in factors)
        object.__setattr__(self, "factors", canonical)

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    def boundaries(self) -> list:
        """The N half-open sector intervals [lower, upper) in radians."""
        width = TWO_PI / self.n_partitions
        return [(n * width, (n + 1) * width) for n in range(self.n_partitions)]


@dataclass
class MetaMatrix:
    """Per-sector mean factor values plus member counts (self-neighbor included)."""

    values: np.ndarray  # (n_partitions, n_factors)
    counts: np.ndarray  # (n_partitions,) int
    factors: tuple

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)

    @property
    def n_partitions(self) -> int:
        return int(self.values.shape[0])


@dataclass
class AttentionProfile:
    """Per-sector squared-sum scores, raw and normalized to sum to 1."""

    raw: np.ndarray
    normalized: np.ndarray


def relative_angle(target_pos, neighbor_pos) -> float:
    """Four-quadrant bearing of neighbor as seen from target, in [0, 2pi).

    The zero displacement maps to angle 0.
    """
    d = np.asarray(neighbor_pos, dtype=np.float64) - np.asarray(target_pos, dtype=np.float64)
    if not np.all(np.isfinite(d)):
        raise ValueError("non-finite position in relative_angle")
    if d[0] == 0.0 and d[1] == 0.0:
        return 0.0
    a = math.atan2(d[1], d[0])
    if a < 0.0:
        a += TWO_PI
    return a if a < TWO_PI else 0.0


def _heading(displacement) -> float:
    """Angle of a displacement vector in [0, 2pi); zero vector maps to 0."""
    d = np.asarray(displacement, dtype=np.float64)
    if d[0] == 0.0 and d[1] == 0.0:
        return 0.0
    a = math.atan2(d[1], d[0])
    if a < 0.0:
        a += TWO_PI
    return a if a < TWO_PI else 0.0


def assign_partition(angle: float, n_partitions: int) -> int:
    """Map an angle in [0, 2pi) to its 1-based sector index.

    Sector n covers [2(n-1)pi/N, 2npi/N), half-open on the upper edge.
    """
    if n_partitions < 1:
        raise ConfigError("n_partitions must be >= 1")
    if not (0.0 <= angle < TWO_PI) or not math.isfinite(angle):
        raise AngleDomainError(f"angle {angle!r} outside [0, 2pi)")
    width = TWO_PI / n_partitions
    idx = int(angle // width)
    if idx >= n_partitions:  # guard the float edge just below 2pi
        idx = n_partitions - 1
    return idx + 1


def assign_partitions(angles: np.ndarray, n_partitions: int) -> np.ndarray:
    """Vectorized ``assign_partition`` over an array of angles."""
    if n_partitions < 1:
        raise ConfigError("n_partitions must be >= 1")
    angles = np.asarray(angles, dtype=np.float64)
    if not np.all(np.isfinite(angles)) or np.any(angles < 0.0) or np.any(angles >= TWO_PI):
        raise AngleDomainError("angle outside [0, 2pi)")
    width = TWO_PI / n_partitions
    idx = np.floor_divide(angles, width).astype(np.int64)
    np.minimum(idx, n_partitions - 1, out=idx)
    return idx + 1


def _factor_vector(speed: float, dist: float, direction: float, mdir: float, factors) -> list:
    full = {
        FACTOR_VELOCITY: speed,
        FACTOR_DISTANCE: dist,
        FACTOR_DIRECTION: direction,
        FACTOR_MOVEMENT_DIRECTION: mdir,
    }
    return [full[f] for f in factors]


def compute_meta(case: PredictionCase, config: PartitionConfig, include_self: bool = True) -> MetaMatrix:
    """Bin neighbors into sectors and average the enabled factors per sector.

    The target's own window joins as a self-neighbor pinned to sector 1
    (speed = own speed, distance = 0, direction = 0, movement_direction =
    own heading) unless ``include_self`` is False.
    """
    t_h = case.t_h
    if t_h != config.t_h:
        raise ConfigError(f"case has t_h={t_h} but config expects t_h={config.t_h}")
    n_part = config.n_partitions
    elapsed = (t_h - 1) * config.delta_t
    target_last = case.target_observed[-1]

    members = [[] for _ in range(n_part)]
    if include_self:
        own_disp = case.target_observed[-1] - case.target_observed[0]
        own_speed = float(np.linalg.norm(own_disp)) / elapsed if elapsed > 0 else 0.0
        members[0].append(
            _factor_vector(own_speed, 0.0, 0.0, _heading(own_disp), config.factors)
        )
    for nb in case.neighbors:
        angle = relative_angle(target_last, nb[-1])
        part = assign_partition(angle, n_part)
        disp = nb[-1] - nb[0]
        speed = float(np.linalg.norm(disp)) / elapsed if elapsed > 0 else 0.0
        dist = float(np.linalg.norm(nb[-1] - target_last))
        members[part - 1].append(
            _factor_vector(speed, dist, angle, _heading(disp), config.factors)
        )

    values = np.zeros((n_part, config.n_factors), dtype=np.float64)
    counts = np.zeros(n_part, dtype=np.int64)
    for i, rows in enumerate(members):
        counts[i] = len(rows)
        if rows:
            values[i] = np.mean(np.asarray(rows, dtype=np.float64), axis=0)
    return MetaMatrix(values=values, counts=counts, factors=config.factors)


def zero_pad(matrix: np.ndarray, t_h: int) -> np.ndarray:
    """Extend an (N, w) matrix to (t_h, w) with exactly-zero trailing rows."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    if n > t_h:
        raise ConfigError(f"cannot pad {n} rows into {t_h}")
    out = np.zeros((t_h, matrix.shape[1]), dtype=np.float64)
    out[:n] = matrix
    return out


def attention_scores(embedded_rows: np.ndarray) -> AttentionProfile:
    """Squared sum of each embedded sector row, plus the per-scene normalization.

    When every raw score is zero the normalized profile is all zeros rather
    than NaN.
    """
    f = np.asarray(embedded_rows, dtype=np.float64)
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite entry in embedded rows")
    raw = np.sum(f * f, axis=-1)
    total = float(raw.sum())
    normalized = raw / total if total > 0.0 else np.zeros_like(raw)
    return AttentionProfile(raw=raw, normalized=normalized)


def inject_manual_neighbor(case: PredictionCase, start, end, cap: int = 50) -> PredictionCase:
    """Append a synthetic neighbor interpolated linearly from start to end.

    The neighbor gets t_h evenly spaced positions (identical points when
    start == end, a standing neighbor) and the case is re-capped through
    ``select_neighbors``.
    """
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    if start.shape != (2,) or end.shape != (2,):
        raise ValueError("start and end must be 2-vectors")
    if not (np.all(np.isfinite(start)) and np.all(np.isfinite(end))):
        raise ValueError("start and end must be finite")
    t_h = case.t_h
    if t_h == 1:
        points = start[None, :].copy()
    else:
        steps = np.arange(t_h, dtype=np.float64)[:, None] / (t_h - 1)
        points = start[None, :] + steps * (end - start)[None, :]
    n_manual = sum(1 for t in case.neighbor_tags if t == "manual")
    grown = PredictionCase(
        target_observed=case.target_observed.copy(),
        target_future=None if case.target_future is None else case.target_future.copy(),
        neighbors=[n.copy() for n in case.neighbors] + [points],
        neighbor_ids=list(case.neighbor_ids) + [f"manual-{n_manual}"],
        neighbor_tags=list(case.neighbor_tags) + ["manual"],
        scene_id=case.scene_id,
        case_id=case.case_id,
        unit_tag=case.unit_tag,
    )
    return select_neighbors(grown, cap=cap)
