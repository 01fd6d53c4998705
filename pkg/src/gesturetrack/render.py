"""Static SVG trajectory plots: one polyline per identity, dots for dwell."""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .geometry import BoundingBox

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
STATIONARY_PX = 1.0   # whole track within this radius -> a single marker
DWELL_STEP_PX = 2.0   # per-frame motion below this counts as dwelling
DWELL_MIN_FRAMES = 3


def _fmt(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def dwell_segments(centers: np.ndarray, step_px: float = DWELL_STEP_PX,
                   min_frames: int = DWELL_MIN_FRAMES) -> list[tuple[int, int]]:
    """Half-open index ranges where consecutive centers move less than ``step_px``."""
    if len(centers) < 2:
        return []
    slow = np.hypot(*np.diff(centers, axis=0).T) < step_px
    segs, start = [], None
    for i, s in enumerate(slow):
        if s and start is None:
            start = i
        elif not s and start is not None:
            if i + 1 - start >= min_frames:
                segs.append((start, i + 1))
            start = None
    if start is not None and len(centers) - start >= min_frames:
        segs.append((start, len(centers)))
    return segs


def render_svg(paths: Mapping[int, Sequence[tuple[int, BoundingBox]]],
               frame_size: tuple[int, int] = (1920, 1080)) -> str:
    width, height = frame_size
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
    ]
    for k, ident in enumerate(sorted(paths)):
        color = PALETTE[k % len(PALETTE)]
        pts = sorted(paths[ident], key=lambda p: p[0])
        centers = np.array([b.center for _, b in pts], dtype=float)
        out.append(f'<g id="id-{ident}" stroke="{color}" fill="{color}">')
        spread = np.hypot(*(centers - centers.mean(axis=0)).T).max()
        if spread <= STATIONARY_PX:
            cx, cy = centers.mean(axis=0)
            out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="4"/>')
        else:
            coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in centers)
            out.append(f'<polyline fill="none" stroke-width="2" points="{coords}"/>')
            for a, b in dwell_segments(centers):
                cx, cy = centers[a:b].mean(axis=0)
                r = min(3.0 + 0.5 * (b - a), 15.0)
                out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill-opacity="0.4"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
