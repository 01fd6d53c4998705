"""Center-format bounding boxes and overlap geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True, slots=True)
class BoundingBox:
    """Axis-aligned box in center format, pixels.

    ``x``/``y`` locate the center; ``w``/``h`` must be strictly positive.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        x, y, w, h = self.x, self.y, self.w, self.h
        if type(x) is not float or type(y) is not float or type(w) is not float or type(h) is not float:
            x, y, w, h = float(x), float(y), float(w), float(h)
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "y", y)
            object.__setattr__(self, "w", w)
            object.__setattr__(self, "h", h)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(w) and math.isfinite(h)):
            raise ValueError(f"box fields must be finite, got {(x, y, w, h)!r}")
        if w <= 0 or h <= 0:
            raise ValueError(f"box size must be positive, got w={w}, h={h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def diagonal(self) -> float:
        return math.hypot(self.w, self.h)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x, self.y)

    def corners(self) -> tuple[float, float, float, float]:
        """Return (x1, y1, x2, y2)."""
        hw, hh = self.w / 2.0, self.h / 2.0
        return (self.x - hw, self.y - hh, self.x + hw, self.y + hh)

    def translated(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "BoundingBox":
        x, y, w, h = (float(v) for v in values)
        return cls(x, y, w, h)


def to_measurement(box: BoundingBox) -> np.ndarray:
    """The box as a read-only Kalman observation vector ``(x, y, w, h)``."""
    z = box.as_array()
    z.flags.writeable = False
    return z


def from_measurement(z: Sequence[float]) -> BoundingBox:
    return BoundingBox.from_array(z)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    # areas from the same corner extents, so iou(a, a) is exactly 1
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return min(1.0, inter / union)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two stacks of center-format boxes.

    Args:
        a: ``(N, 4)`` array of ``(x, y, w, h)`` rows.
        b: ``(M, 4)`` array of ``(x, y, w, h)`` rows.

    Returns:
        ``(N, M)`` array with entries in ``[0, 1]``.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    a1 = a[:, :2] - a[:, 2:] / 2.0
    a2 = a[:, :2] + a[:, 2:] / 2.0
    b1 = b[:, :2] - b[:, 2:] / 2.0
    b2 = b[:, :2] + b[:, 2:] / 2.0
    lo = np.maximum(a1[:, None, :], b1[None, :, :])
    hi = np.minimum(a2[:, None, :], b2[None, :, :])
    wh = np.clip(hi - lo, 0.0, None)
    inter = wh[..., 0] * wh[..., 1]
    area_a = np.prod(a2 - a1, axis=1)
    area_b = np.prod(b2 - b1, axis=1)
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(union > 0, inter / union, 0.0)
    return np.clip(out, 0.0, 1.0)


def clamp_to_frame(box: BoundingBox, width: float, height: float) -> BoundingBox:
    """Shift (and if needed shrink) a box so it lies inside the frame."""
    w = min(box.w, float(width))
    h = min(box.h, float(height))
    x = min(max(box.x, w / 2.0), width - w / 2.0)
    y = min(max(box.y, h / 2.0), height - h / 2.0)
    return BoundingBox(x, y, w, h)
