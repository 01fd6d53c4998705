"""Rule-based labelling of finished track trajectories as swipe, click or zoom."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import BoundingBox


class GestureKind(str, enum.Enum):
    SWIPE = "swipe"
    CLICK = "click"
    ZOOM = "zoom"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Trajectory:
    """Boxes of one track keyed by frame; frames strictly increasing, at least two."""

    frames: tuple[int, ...]
    boxes: tuple[BoundingBox, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(int(f) for f in self.frames))
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if len(self.frames) != len(self.boxes):
            raise ValueError("frames and boxes differ in length")
        if len(self.frames) < 2:
            raise ValueError("a trajectory needs at least two points")
        if any(b <= a for a, b in zip(self.frames, self.frames[1:])):
            raise ValueError("trajectory frames must be strictly increasing")

    @classmethod
    def from_points(cls, points: Iterable[tuple[int, BoundingBox]]) -> "Trajectory":
        points = list(points)
        return cls(tuple(p[0] for p in points), tuple(p[1] for p in points))

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class GestureFeatures:
    net_displacement: float
    path_length: float
    straightness: float
    scale_ratio: float
    duration: int
    mean_diagonal: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GestureLabel:
    label: GestureKind
    features: GestureFeatures


@dataclass(frozen=True)
class GestureThresholds:
    """Rule constants; spatial ones are multiples of the mean box diagonal."""

    scale_change: float = 0.5
    zoom_max_shift: float = 0.5
    click_max_duration: int = 20
    click_max_path: float = 2.0
    click_hold_frames: int = 10
    stationary_fraction: float = 0.025  # 2 px at an 80 px diagonal
    swipe_min_shift: float = 2.0
    swipe_min_straightness: float = 0.8


def _centers(t: Trajectory) -> np.ndarray:
    return np.array([[b.x, b.y] for b in t.boxes])


def extract_features(t: Trajectory) -> GestureFeatures:
    c = _centers(t)
    steps = np.hypot(*np.diff(c, axis=0).T)
    path = float(steps.sum())
    net = float(math.hypot(*(c[-1] - c[0])))
    # rounding can put net a hair above path for collinear motion
    net = min(net, path)
    straightness = net / path if path > 0 else 1.0
    first, last = t.boxes[0], t.boxes[-1]
    return GestureFeatures(
        net_displacement=net,
        path_length=path,
        straightness=straightness,
        scale_ratio=(last.w * last.h) / (first.w * first.h),
        duration=t.frames[-1] - t.frames[0],
        mean_diagonal=float(np.mean([b.diagonal for b in t.boxes])),
    )


def _tail_is_stationary(t: Trajectory, th: GestureThresholds, diag: float) -> bool:
    n = len(t)
    k = max(min(th.click_hold_frames, n // 2), 2)
    c = _centers(t)[-k:]
    gaps = np.diff(np.array(t.frames[-k:], dtype=float))
    per_frame = np.hypot(*np.diff(c, axis=0).T) / gaps
    return bool(np.all(per_frame < th.stationary_fraction * diag))


def classify(t: Trajectory, th: GestureThresholds = GestureThresholds()) -> GestureLabel:
    """First matching rule wins: zoom, then click, then swipe; else unknown."""
    f = extract_features(t)
    diag = f.mean_diagonal
    scale_change = abs(f.scale_ratio - 1.0)
    if scale_change > th.scale_change and f.net_displacement < th.zoom_max_shift * diag:
        label = GestureKind.ZOOM
    elif (
        f.duration <= th.click_max_duration
        and f.path_length <= th.click_max_path * diag
        and _tail_is_stationary(t, th, diag)
    ):
        label = GestureKind.CLICK
    elif (
        f.net_displacement > th.swipe_min_shift * diag
        and f.straightness > th.swipe_min_straightness
        and scale_change <= th.scale_change
    ):
        label = GestureKind.SWIPE
    else:
        label = GestureKind.UNKNOWN
    return GestureLabel(label, f)


def trajectories_from_results(results: Sequence) -> dict[int, list[tuple[int, BoundingBox]]]:
    """Group tracker frame reports into per-id point lists, in frame order."""
    points: dict[int, list[tuple[int, BoundingBox]]] = {}
    for res in results:
        for tr in res.tracks:
            points.setdefault(tr.id, []).append((res.frame, tr.box))
    return points
