"""Trajectory file parsing and observation/prediction window assembly.

Input files are plain text with one sample per line: ``frame agent_id x y``
(extra columns ignored), fields separated by runs of spaces or tabs, and
``#`` starting a comment line.  Frames within a track must be strictly
increasing; runs of frames advancing by the dataset's base step form the
segments over which prediction windows slide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TrajectoryParseError(ValueError):
    """Malformed trajectory text; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass
class AgentTrack:
    """One agent's time-stamped 2D positions within a scene."""

    agent_id: str
    frames: np.ndarray  # (n,) int64, strictly increasing
    points: np.ndarray  # (n, 2) float64
    unit_tag: str = "meters"

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.int64)
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.frames.ndim != 1 or self.frames.size == 0:
            raise ValueError("track needs at least one sample")
        if self.points.shape != (self.frames.size, 2):
            raise ValueError(f"points shape {self.points.shape} does not match {self.frames.size} frames")
        if self.frames.size > 1 and not np.all(np.diff(self.frames) > 0):
            raise ValueError(f"agent {self.agent_id}: frame indices must be strictly increasing")
        if not np.all(np.isfinite(self.points)):
            raise ValueError(f"agent {self.agent_id}: non-finite position")
        if self.unit_tag not in ("meters", "pixels"):
            raise ValueError(f"unknown unit_tag {self.unit_tag!r}")

    def __len__(self) -> int:
        return int(self.frames.size)


@dataclass
class PredictionCase:
    """A target agent's observed window, optional future, and neighbor windows.

    All neighbor windows are co-temporal with the target's observed window
    (same rows correspond to the same frames).
    """

    target_observed: np.ndarray  # (t_h, 2)
    target_future: np.ndarray | None  # (t_f, 2) or None
    neighbors: list = field(default_factory=list)  # list of (t_h, 2) arrays
    neighbor_ids: list = field(default_factory=list)
    neighbor_tags: list = field(default_factory=list)  # "real" or "manual"
    scene_id: str = ""
    case_id: str = ""
    unit_tag: str = "meters"

    def __post_init__(self):
        self.target_observed = np.asarray(self.target_observed, dtype=np.float64)
        if self.target_observed.ndim != 2 or self.target_observed.shape[1] != 2:
            raise ValueError(f"target_observed must be (t_h, 2), got {self.target_observed.shape}")
        if self.target_future is not None:
            self.target_future = np.asarray(self.target_future, dtype=np.float64)
            if self.target_future.ndim != 2 or self.target_future.shape[1] != 2:
                raise ValueError(f"target_future must be (t_f, 2), got {self.target_future.shape}")
        self.neighbors = [np.asarray(n, dtype=np.float64) for n in self.neighbors]
        t_h = self.t_h
        for i, n in enumerate(self.neighbors):
            if n.shape != (t_h, 2):
                raise ValueError(f"neighbor {i} has shape {n.shape}, expected ({t_h}, 2)")
        if not self.neighbor_ids:
            self.neighbor_ids = [f"n{i}" for i in range(len(self.neighbors))]
        if not self.neighbor_tags:
            self.neighbor_tags = ["real"] * len(self.neighbors)
        if len(self.neighbor_ids) != len(self.neighbors) or len(self.neighbor_tags) != len(self.neighbors):
            raise ValueError("neighbor_ids/neighbor_tags must parallel neighbors")

    @property
    def t_h(self) -> int:
        return int(self.target_observed.shape[0])

    @property
    def t_f(self) -> int:
        return 0 if self.target_future is None else int(self.target_future.shape[0])


@dataclass(frozen=True)
class NormalizationTransform:
    """Records the translation that moved the target's last observed position to (0, 0)."""

    offset: np.ndarray  # (2,)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) - self.offset

    def invert(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) + self.offset


def parse_trajectory_file(text, unit_tag: str = "meters") -> list[AgentTrack]:
    """Parse trajectory text into one AgentTrack per distinct agent id.

    ``text`` may be a string or an iterable of lines.  Samples are sorted by
    frame per agent; tracks come back in order of first appearance.
    """
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = list(text)

    by_agent: dict[str, list] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 4:
            raise TrajectoryParseError(lineno, f"expected at least 4 fields, got {len(parts)}")
        frame_str, agent_id, x_str, y_str = parts[0], parts[1], parts[2], parts[3]
        try:
            frame_f = float(frame_str)
            x = float(x_str)
            y = float(y_str)
        except ValueError as exc:
            raise TrajectoryParseError(lineno, f"unparseable number: {exc}") from None
        if not float(frame_f).is_integer():
            raise TrajectoryParseError(lineno, f"frame index {frame_str!r} is not an integer")
        if not (np.isfinite(x) and np.isfinite(y)):
            raise TrajectoryParseError(lineno, "non-finite coordinate")
        by_agent.setdefault(agent_id, []).append((int(frame_f), x, y, lineno))

    tracks = []
    for agent_id, rows in by_agent.items():
        rows.sort(key=lambda r: r[0])
        for prev, cur in zip(rows, rows[1:]):
            if cur[0] == prev[0]:
                raise TrajectoryParseError(cur[3], f"duplicate frame {cur[0]} for agent {agent_id}")
        frames = np.array([r[0] for r in rows], dtype=np.int64)
        points = np.array([[r[1], r[2]] for r in rows], dtype=np.float64)
        tracks.append(AgentTrack(agent_id=agent_id, frames=frames, points=points, unit_tag=unit_tag))
    return tracks


def load_trajectory_file(path, unit_tag: str = "meters") -> list[AgentTrack]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_trajectory_file(f.read(), unit_tag=unit_tag)


def _presence_runs(frames: np.ndarray, step: int) -> list:
    """Split a strictly increasing frame array into maximal uniform-step runs."""
    if frames.size == 0:
        return []
    breaks = np.nonzero(np.diff(frames) != step)[0]
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks + 1, [frames.size]))
    return [(int(s), int(e)) for s, e in zip(starts, ends)]


def infer_frame_step(tracks) -> int:
    """Smallest positive frame delta across all tracks; 1 when nothing to infer."""
    best = None
    for track in tracks:
        if len(track) > 1:
            d = int(np.diff(track.frames).min())
            best = d if best is None else min(best, d)
    return best if best is not None and best > 0 else 1


def build_windows(
    tracks,
    t_h: int,
    t_f: int,
    stride: int = 1,
    scene_id: str = "scene",
    frame_step: int | None = None,
) -> list[PredictionCase]:
    """Slide observation/prediction windows over each track's presence runs.

    One case per (agent, window start) where the agent is present for
    t_h + t_f consecutive frames (at the dataset's base frame step).
    Neighbors are all other agents present at every one of the t_h observed
    frames of that window.  Window starts advance by ``stride`` within each
    presence run.
    """
    if t_h < 1 or t_f < 1 or stride < 1:
        raise ValueError("t_h, t_f and stride must all be >= 1")
    tracks = list(tracks)
    step = infer_frame_step(tracks) if frame_step is None else int(frame_step)

    # frame -> row lookup per agent, for neighbor co-presence checks
    row_at = [{int(f): i for i, f in enumerate(tr.frames)} for tr in tracks]

    total = t_h + t_f
    cases = []
    for ti, track in enumerate(tracks):
        for run_start, run_end in _presence_runs(track.frames, step):
            last_start = run_end - total
            for s in range(run_start, last_start + 1, stride):
                obs_frames = [int(f) for f in track.frames[s : s + t_h]]
                neighbors, neighbor_ids = [], []
                for tj, other in enumerate(tracks):
                    if tj == ti:
                        continue
                    lookup = row_at[tj]
                    if all(f in lookup for f in obs_frames):
                        rows = [lookup[f] for f in obs_frames]
                        neighbors.append(other.points[rows].copy())
                        neighbor_ids.append(other.agent_id)
                cases.append(
                    PredictionCase(
                        target_observed=track.points[s : s + t_h].copy(),
                        target_future=track.points[s + t_h : s + total].copy(),
                        neighbors=neighbors,
                        neighbor_ids=neighbor_ids,
                        scene_id=scene_id,
                        case_id=f"{scene_id}:{track.agent_id}@{int(track.frames[s])}",
                        unit_tag=track.unit_tag,
                    )
                )
    return cases


def normalize_case(case: PredictionCase):
    """Translate a case so the target's last observed position is (0, 0).

    Returns the shifted case plus the transform whose ``invert`` maps
    predictions back to the original frame.
    """
    offset = case.target_observed[-1].copy()
    transform = NormalizationTransform(offset=offset)
    shifted = PredictionCase(
        target_observed=case.target_observed - offset,
        target_future=None if case.target_future is None else case.target_future - offset,
        neighbors=[n - offset for n in case.neighbors],
        neighbor_ids=list(case.neighbor_ids),
        neighbor_tags=list(case.neighbor_tags),
        scene_id=case.scene_id,
        case_id=case.case_id,
        unit_tag=case.unit_tag,
    )
    return shifted, transform


def _agent_ordinal(agent_id: str):
    # numeric ids sort numerically, everything else lexically after them
    return (0, int(agent_id), "") if agent_id.isdigit() else (1, 0, agent_id)


def select_neighbors(case: PredictionCase, cap: int = 50) -> PredictionCase:
    """Keep the ``cap`` nearest neighbors by last-observed-frame distance.

    Ties break on the smaller agent ordinal, so the result is deterministic
    and insensitive to the input neighbor order.  Output neighbors come back
    nearest-first.
    """
    if cap < 0:
        raise ValueError("cap must be >= 0")
    n = len(case.neighbors)
    target_last = case.target_observed[-1]
    dist = [float(np.linalg.norm(case.neighbors[j][-1] - target_last)) for j in range(n)]
    order = sorted(range(n), key=lambda j: (dist[j], _agent_ordinal(case.neighbor_ids[j])))
    keep = order[:cap]
    return PredictionCase(
        target_observed=case.target_observed.copy(),
        target_future=None if case.target_future is None else case.target_future.copy(),
        neighbors=[case.neighbors[j].copy() for j in keep],
        neighbor_ids=[case.neighbor_ids[j] for j in keep],
        neighbor_tags=[case.neighbor_tags[j] for j in keep],
        scene_id=case.scene_id,
        case_id=case.case_id,
        unit_tag=case.unit_tag,
    )
