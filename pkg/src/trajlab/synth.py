"""Synthetic dataset generators for smoke tests and demos.

``linear_cases`` produces noise-free constant-velocity walks, so a
constant-velocity extrapolator predicts them exactly.  ``avoidance_cases``
produces targets that swerve away from a converging side neighbor; the
observed target track alone carries no information about the turn
direction, only the neighbor geometry does.
"""

from __future__ import annotations

import math

import numpy as np

from .data import AgentTrack, PredictionCase


def _rotate(points: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return points @ rot.T


def linear_cases(n: int, t_h: int = 8, t_f: int = 12, delta_t: float = 0.4, seed: int = 0) -> list:
    """Constant-velocity targets with one slower co-walking neighbor."""
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(n):
        heading = rng.uniform(0.0, 2.0 * math.pi)
        speed = rng.uniform(0.5, 1.2)
        origin = rng.uniform(-8.0, 8.0, size=2)
        direction = np.array([math.cos(heading), math.sin(heading)])
        steps = np.arange(t_h + t_f, dtype=np.float64)[:, None]
        track = origin + steps * (speed * delta_t) * direction
        side = rng.uniform(0.8, 1.5) * np.array([-direction[1], direction[0]])
        nb_track = track[:t_h] + side
        cases.append(
            PredictionCase(
                target_observed=track[:t_h],
                target_future=track[t_h:],
                neighbors=[nb_track],
                neighbor_ids=["n0"],
                scene_id="linear",
                case_id=f"linear:{i}",
            )
        )
    return cases


def avoidance_cases(
    n: int,
    t_h: int = 8,
    t_f: int = 12,
    delta_t: float = 0.4,
    seed: int = 0,
    turn_deg: float = 40.0,
) -> list:
    """Targets that veer away from a neighbor converging from one side.

    In the target's own frame the observed window is identical whichever
    side the neighbor comes from; the future turns by ``turn_deg`` away
    from it.  A model that ignores neighbors cannot do better than the
    average of the two mirrored futures.
    """
    rng = np.random.default_rng(seed)
    turn = math.radians(turn_deg)
    cases = []
    for i in range(n):
        heading = rng.uniform(0.0, 2.0 * math.pi)
        speed = rng.uniform(0.8, 1.2)
        origin = rng.uniform(-10.0, 10.0, size=2)
        side = 1.0 if rng.random() < 0.5 else -1.0

        # canonical frame: walk along +x, end the observation at (0, 0)
        obs_steps = np.arange(t_h, dtype=np.float64) - (t_h - 1)
        observed = np.stack([obs_steps * speed * delta_t, np.zeros(t_h)], axis=1)

        turned = np.array([math.cos(-side * turn), math.sin(-side * turn)])
        fut_steps = np.arange(1, t_f + 1, dtype=np.float64)[:, None]
        future = fut_steps * (speed * delta_t) * turned[None, :]

        nb_last = np.array([rng.uniform(0.5, 1.5), side * rng.uniform(0.8, 1.6)])
        nb_speed = rng.uniform(0.8, 1.4)
        to_target = -nb_last / np.linalg.norm(nb_last)
        nb_steps = (np.arange(t_h, dtype=np.float64) - (t_h - 1))[:, None]
        neighbor = nb_last[None, :] + nb_steps * (nb_speed * delta_t) * to_target[None, :]

        observed = _rotate(observed, heading) + origin
        future = _rotate(future, heading) + origin
        neighbor = _rotate(neighbor, heading) + origin
        cases.append(
            PredictionCase(
                target_observed=observed,
                target_future=future,
                neighbors=[neighbor],
                neighbor_ids=["n0"],
                scene_id="avoidance",
                case_id=f"avoidance:{i}",
            )
        )
    return cases


def cases_to_tracks(cases, frame_step: int = 1) -> list:
    """Lay cases end to end on a shared frame axis as agent tracks.

    Each case occupies a disjoint frame range, so window assembly
    reconstructs exactly one case per target agent (neighbor tracks are
    observation-length only and never become targets themselves).
    """
    tracks = []
    base = 0
    for i, case in enumerate(cases):
        t_h, t_f = case.t_h, case.t_f
        total = t_h + t_f
        frames = base + frame_step * np.arange(total, dtype=np.int64)
        target = np.concatenate([case.target_observed, case.target_future], axis=0)
        tracks.append(
            AgentTrack(agent_id=f"a{i}", frames=frames, points=target, unit_tag=case.unit_tag)
        )
        for j, nb in enumerate(case.neighbors):
            tracks.append(
                AgentTrack(
                    agent_id=f"a{i}x{j}",
                    frames=frames[:t_h],
                    points=nb,
                    unit_tag=case.unit_tag,
                )
            )
        base += frame_step * (total + 1)
    return tracks


def write_trajectory_text(tracks) -> str:
    """Serialize tracks to the frame/id/x/y text format, full float precision."""
    lines = ["# frame agent_id x y"]
    for track in tracks:
        for frame, (x, y) in zip(track.frames, track.points):
            lines.append(f"{int(frame)} {track.agent_id} {float(x)!r} {float(y)!r}")
    return "\n".join(lines) + "\n"
