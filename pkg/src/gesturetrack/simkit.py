"""Seeded synthetic tracking scenarios: gestures, fixations and crossings.

Each scenario yields ground-truth boxes per target per frame plus a degraded
detection stream (Gaussian box noise, random misses, Poisson clutter, and
targets hidden behind larger overlapping targets). All randomness comes from
one Philox generator seeded by ``ScenarioSpec.seed``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .appearance import EMBEDDING_DIM, synth_embedding
from .geometry import BoundingBox, iou_matrix
from .tracker import Detection

V_MAX = 40.0
OCCLUSION_IOU = 0.3
BLUR_SPEED = 20.0
BLUR_FACTOR = 2.0
CLUTTER_ID_BASE = 1_000_000
SWIPE_RAMP = 2
CLICK_DASH = 5
CLICK_HOLD = 10
CLICK_LEAD = 3  # frames at rest before the dash, enough to confirm a track
FIXATION_RADIUS = 15.0
CROSSING_NOISE_STD = 2.0


class ScenarioKind(str, enum.Enum):
    SWIPE = "swipe"
    CLICK = "click"
    ZOOM = "zoom"
    FIXATION = "fixation"
    CROSSING = "crossing"
    OCCLUSION = "occlusion"
    MIXED = "mixed"


DEFAULT_DURATION = {
    ScenarioKind.SWIPE: 30,
    ScenarioKind.CLICK: 20,
    ScenarioKind.ZOOM: 30,
    ScenarioKind.FIXATION: 120,
    ScenarioKind.CROSSING: 60,
    ScenarioKind.OCCLUSION: 60,
    ScenarioKind.MIXED: 20,
}

MIXED_CYCLE = (ScenarioKind.SWIPE, ScenarioKind.CLICK, ScenarioKind.ZOOM)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: ScenarioKind = ScenarioKind.SWIPE
    n_targets: int = 1
    duration: Optional[int] = None
    frame_size: tuple[int, int] = (1920, 1080)
    noise_std: float = 1.0
    p_miss: float = 0.0
    clutter_rate: float = 0.0
    embedding_noise_std: float = 0.05
    seed: int = 0
    speed: Optional[float] = None
    embedding_dim: int = EMBEDDING_DIM

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        if self.duration is None:
            object.__setattr__(self, "duration", DEFAULT_DURATION[self.kind])
        if self.kind is ScenarioKind.CROSSING:
            object.__setattr__(self, "n_targets", 2)
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.duration, int) or self.duration < 1:
            raise ValueError(f"duration must be an integer >= 1, got {self.duration!r}")
        if self.n_targets < 1:
            raise ValueError("n_targets must be >= 1")
        if self.kind is ScenarioKind.OCCLUSION and self.n_targets < 2:
            raise ValueError("occlusion scenarios need at least 2 targets")
        w, h = self.frame_size
        if w <= 0 or h <= 0:
            raise ValueError("frame_size must be positive")
        for name in ("noise_std", "clutter_rate", "embedding_noise_std"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not 0.0 <= self.p_miss <= 1.0:
            raise ValueError(f"p_miss must be in [0, 1], got {self.p_miss}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.speed is not None and not 0 < self.speed <= V_MAX:
            raise ValueError(f"speed must be in (0, {V_MAX}], got {self.speed}")
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be >= 1")


@dataclass(frozen=True)
class TargetState:
    gid: int
    box: BoundingBox
    visible: bool = True


@dataclass
class ScenarioOutput:
    spec: ScenarioSpec
    ground_truth: list[list[TargetState]]
    detections: list[list[Detection]]
    sources: list[list[int]] = field(default_factory=list)  # gid, or clutter identity >= CLUTTER_ID_BASE
    kinds: dict[int, ScenarioKind] = field(default_factory=dict)

    @property
    def duration(self) -> int:
        return len(self.ground_truth)


@dataclass(frozen=True)
class _Cell:
    x0: float
    y0: float
    w: float
    h: float

    @property
    def center(self) -> np.ndarray:
        return np.array([self.x0 + self.w / 2, self.y0 + self.h / 2])


def _grid(n: int, width: float, height: float) -> list[_Cell]:
    best = None
    for cols in range(1, n + 1):
        rows = math.ceil(n / cols)
        side = min(width / cols, height / rows)
        if best is None or side > best[0]:
            best = (side, cols, rows)
    _, cols, rows = best
    cw, ch = width / cols, height / rows
    return [_Cell((k % cols) * cw, (k // cols) * ch, cw, ch) for k in range(n)]


def _base_size(cell: _Cell) -> float:
    return float(np.clip(min(cell.w, cell.h) / 10.0, 16.0, 96.0))


def _hand_size(rng: np.random.Generator, base: float) -> tuple[float, float]:
    return base * rng.uniform(0.8, 1.2), base * rng.uniform(0.9, 1.3)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _jittered_center(rng: np.random.Generator, cell: _Cell, frac: float = 0.05) -> np.ndarray:
    return cell.center + rng.uniform(-frac, frac, 2) * np.array([cell.w, cell.h])


def _long_axis_direction(rng: np.random.Generator, cell: _Cell, spread_deg: float = 25.0) -> np.ndarray:
    axis = 0.0 if cell.w >= cell.h else math.pi / 2
    theta = axis + math.radians(rng.uniform(-spread_deg, spread_deg))
    if rng.random() < 0.5:
        theta += math.pi
    return np.array([math.cos(theta), math.sin(theta)])


def _const_boxes(centers: np.ndarray, w: float, h: float) -> np.ndarray:
    out = np.empty((len(centers), 4))
    out[:, :2] = centers
    out[:, 2] = w
    out[:, 3] = h
    return out


def _swipe(rng, cell: _Cell, T: int, speed: Optional[float]) -> np.ndarray:
    w, h = _hand_size(rng, _base_size(cell))
    v = speed if speed is not None else rng.uniform(14.0, 20.0)
    direction = _long_axis_direction(rng, cell)
    mid = _jittered_center(rng, cell)
    i = np.arange(1, T)
    steps = v * _smoothstep(np.minimum(i, T - i) / (SWIPE_RAMP + 1.0))
    dist = np.concatenate([[0.0], np.cumsum(steps)])
    # keep the whole path inside the cell
    margin = np.array([w, h]) / 2
    room = (np.array([cell.w, cell.h]) - 2 * margin) / np.maximum(np.abs(direction), 1e-9)
    limit = max(float(room.min()), 1.0)
    if dist[-1] > limit:
        dist *= limit / dist[-1]
    centers = mid + np.outer(dist - dist[-1] / 2, direction)
    return _const_boxes(centers, w, h)


def _click(rng, cell: _Cell, T: int) -> np.ndarray:
    w, h = _hand_size(rng, _base_size(cell))
    diag = math.hypot(w, h)
    reach = min(rng.uniform(0.4, 0.8) * diag, 130.0)
    angle = rng.uniform(0, 2 * math.pi)
    start = _jittered_center(rng, cell) - 0.5 * reach * np.array([math.cos(angle), math.sin(angle)])
    end = start + reach * np.array([math.cos(angle), math.sin(angle)])
    dash = min(CLICK_DASH, max(T - 1, 0))
    lead = min(CLICK_LEAD, max(T - dash - CLICK_HOLD, 0))
    frac = np.zeros(T)
    if dash:
        frac[lead + 1: lead + dash + 1] = _smoothstep(np.arange(1, dash + 1) / dash)
        frac[lead + dash + 1:] = 1.0
    centers = start + np.outer(frac, end - start)
    return _const_boxes(centers, w, h)


def _zoom(rng, cell: _Cell, T: int) -> np.ndarray:
    base = _base_size(cell)
    w, h = _hand_size(rng, base * 0.7)
    center = _jittered_center(rng, cell)
    scale = 1.0 + np.arange(T) / max(T - 1, 1)
    out = np.empty((T, 4))
    out[:, :2] = center
    out[:, 2] = w * scale
    out[:, 3] = h * scale
    return out


def _fixation(rng, cell: _Cell, T: int) -> np.ndarray:
    base = _base_size(cell)
    # saccades scale with the box, so a jump keeps iou >= 0.48 with the last position
    w, h = base, base
    fix = _jittered_center(rng, cell, 0.1)
    lo = np.array([cell.x0, cell.y0]) + 0.2 * np.array([cell.w, cell.h])
    hi = np.array([cell.x0, cell.y0]) + 0.8 * np.array([cell.w, cell.h])
    offset = np.zeros(2)
    centers = np.empty((T, 2))
    for t in range(T):
        step = rng.normal(0.0, 1.5, 2)
        saccade = rng.random() < 0.04
        jump_len = rng.uniform(0.2, 0.35) * base  # 19-34 px at the 96 px base size
        jump_dir = rng.uniform(0, 2 * math.pi)
        if t > 0 and saccade:
            fix = np.clip(fix + jump_len * np.array([math.cos(jump_dir), math.sin(jump_dir)]), lo, hi)
        offset = offset + step
        r = np.linalg.norm(offset)
        if r > FIXATION_RADIUS:
            offset *= FIXATION_RADIUS / r
        centers[t] = fix + offset
    return _const_boxes(centers, w, h)


def _occluded_run(a: np.ndarray, b: np.ndarray) -> int:
    overlap = np.array([iou_matrix(a[t], b[t])[0, 0] for t in range(len(a))]) > OCCLUSION_IOU
    return int(overlap.sum())


def _crossing_pair(rng, cell: _Cell, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Two near-head-on straight paths through a common point.

    Sizes differ by 5-15 % so the smaller box is the one hidden; the speed
    scale is adjusted until the hidden run lasts 5-10 frames.
    """
    base = _base_size(cell)
    wa, ha = base * rng.uniform(1.0, 1.2), base * rng.uniform(1.1, 1.3)
    shrink = rng.uniform(0.85, 0.95)
    wb, hb = wa * shrink, ha * shrink
    c = _jittered_center(rng, cell, 0.03)
    theta_a = rng.uniform(0, 2 * math.pi)
    theta_b = theta_a + math.radians(rng.uniform(140.0, 175.0)) * (1 if rng.random() < 0.5 else -1)
    va = rng.uniform(4.0, 9.0) * np.array([math.cos(theta_a), math.sin(theta_a)])
    vb = rng.uniform(4.0, 9.0) * np.array([math.cos(theta_b), math.sin(theta_b)])
    tc = (T - 1) / 2 + rng.uniform(-3.0, 3.0)
    want = int(rng.integers(6, 10))
    t = np.arange(T) - tc
    k = 1.0
    for _ in range(40):
        a = _const_boxes(c + np.outer(t, k * va), wa, ha)
        b = _const_boxes(c + np.outer(t, k * vb), wb, hb)
        gap = _occluded_run(a, b)
        if 5 <= gap <= 10:
            break
        k *= 0.5 if gap == 0 else gap / want
        k = min(k, V_MAX / max(np.linalg.norm(va), np.linalg.norm(vb)))
    return a, b


def _limit_speed(boxes: np.ndarray) -> np.ndarray:
    out = boxes.copy()
    for t in range(1, len(out)):
        d = out[t, :2] - out[t - 1, :2]
        n = float(np.hypot(d[0], d[1]))
        if n > V_MAX:
            out[t, :2] = out[t - 1, :2] + d * (V_MAX / n)
    return out


def _clamp(boxes: np.ndarray, width: float, height: float) -> np.ndarray:
    out = boxes.copy()
    out[:, 2] = np.minimum(out[:, 2], width)
    out[:, 3] = np.minimum(out[:, 3], height)
    out[:, 0] = np.clip(out[:, 0], out[:, 2] / 2, width - out[:, 2] / 2)
    out[:, 1] = np.clip(out[:, 1], out[:, 3] / 2, height - out[:, 3] / 2)
    return out


def _paths(spec: ScenarioSpec, rng: np.random.Generator) -> tuple[list[np.ndarray], list[ScenarioKind]]:
    T = spec.duration
    width, height = spec.frame_size
    kind = spec.kind
    if kind is ScenarioKind.CROSSING:
        a, b = _crossing_pair(rng, _Cell(0, 0, width, height), T)
        return [a, b], [kind, kind]
    if kind is ScenarioKind.OCCLUSION:
        n_pairs, lone = divmod(spec.n_targets, 2)
        cells = _grid(n_pairs + lone, width, height)
        paths, kinds = [], []
        for k in range(n_pairs):
            paths.extend(_crossing_pair(rng, cells[k], T))
            kinds.extend([kind, kind])
        if lone:
            paths.append(_swipe(rng, cells[-1], T, spec.speed))
            kinds.append(ScenarioKind.SWIPE)
        return paths, kinds
    cells = _grid(spec.n_targets, width, height)
    paths, kinds = [], []
    for k, cell in enumerate(cells):
        sub = MIXED_CYCLE[k % len(MIXED_CYCLE)] if kind is ScenarioKind.MIXED else kind
        if sub is ScenarioKind.SWIPE:
            paths.append(_swipe(rng, cell, T, spec.speed))
        elif sub is ScenarioKind.CLICK:
            paths.append(_click(rng, cell, T))
        elif sub is ScenarioKind.ZOOM:
            paths.append(_zoom(rng, cell, T))
        else:
            paths.append(_fixation(rng, cell, T))
        kinds.append(sub)
    return paths, kinds


def visibility(boxes: np.ndarray) -> np.ndarray:
    """Occlusion rule on a ``(T, n, 4)`` stack of ground-truth boxes.

    A target is hidden in any frame where it overlaps a larger-area target
    with IoU above ``OCCLUSION_IOU``. Equal areas hide the higher index.
    """
    T, n, _ = boxes.shape
    visible = np.ones((T, n), dtype=bool)
    if n < 2:
        return visible
    areas = boxes[:, :, 2] * boxes[:, :, 3]
    for t in range(T):
        ov = iou_matrix(boxes[t], boxes[t])
        for i in range(n):
            for j in range(i + 1, n):
                if ov[i, j] > OCCLUSION_IOU:
                    hidden = j if areas[t, i] >= areas[t, j] else i
                    visible[t, hidden] = False
    return visible


def generate(spec: ScenarioSpec) -> ScenarioOutput:
    """Build ground truth and detections for ``spec``; a pure function of it."""
    spec.validate()
    rng = np.random.Generator(np.random.Philox(spec.seed))
    width, height = spec.frame_size
    raw, kinds = _paths(spec, rng)
    paths = [_limit_speed(_clamp(p, width, height)) for p in raw]
    stack = np.stack(paths, axis=1)  # (T, n, 4)
    visible = visibility(stack)
    T, n, _ = stack.shape
    gids = list(range(1, n + 1))
    mean_size = float(np.mean(stack[0, :, 2:]))

    ground_truth: list[list[TargetState]] = []
    detections: list[list[Detection]] = []
    sources: list[list[int]] = []
    next_clutter = CLUTTER_ID_BASE
    for t in range(T):
        frame_gt = []
        frame_dets: list[Detection] = []
        frame_src: list[int] = []
        for k in range(n):
            box = stack[t, k]
            frame_gt.append(TargetState(gids[k], BoundingBox.from_array(box), bool(visible[t, k])))
            miss_draw = rng.random()
            noise = rng.standard_normal(4)
            conf = rng.uniform(0.6, 1.0)
            if not visible[t, k] or miss_draw < spec.p_miss:
                continue
            std = spec.noise_std
            if t > 0 and float(np.hypot(*(box[:2] - stack[t - 1, k, :2]))) > BLUR_SPEED:
                std *= BLUR_FACTOR
            noisy = box + std * noise
            noisy[2:] = np.maximum(noisy[2:], 1.0)
            emb = synth_embedding(gids[k], spec.embedding_noise_std, rng, spec.embedding_dim)
            frame_dets.append(Detection(BoundingBox.from_array(noisy), float(conf), emb))
            frame_src.append(gids[k])
        for _ in range(int(rng.poisson(spec.clutter_rate))):
            cw = mean_size * rng.uniform(0.5, 1.5)
            ch = mean_size * rng.uniform(0.5, 1.5)
            cx = rng.uniform(cw / 2, max(width - cw / 2, cw / 2))
            cy = rng.uniform(ch / 2, max(height - ch / 2, ch / 2))
            conf = rng.uniform(0.1, 0.8)
            emb = synth_embedding(next_clutter, spec.embedding_noise_std, rng, spec.embedding_dim)
            frame_dets.append(Detection(BoundingBox(cx, cy, cw, ch), float(conf), emb))
            frame_src.append(next_clutter)
            next_clutter += 1
        order = rng.permutation(len(frame_dets))
        detections.append([frame_dets[i] for i in order])
        sources.append([frame_src[i] for i in order])
        ground_truth.append(frame_gt)
    return ScenarioOutput(spec, ground_truth, detections, sources, dict(zip(gids, kinds)))


def crossing_scenario(seed: int, **overrides) -> ScenarioOutput:
    """Two targets crossing mid-frame; the smaller one is hidden for 5-10 frames."""
    spec = ScenarioSpec(kind=ScenarioKind.CROSSING, seed=seed, noise_std=CROSSING_NOISE_STD)
    return generate(replace(spec, **overrides) if overrides else spec)


def occlusion_gap(out: ScenarioOutput, gid: int) -> int:
    """Longest run of consecutive frames in which ``gid`` is hidden."""
    best = run = 0
    for frame in out.ground_truth:
        hidden = any(ts.gid == gid and not ts.visible for ts in frame)
        run = run + 1 if hidden else 0
        best = max(best, run)
    return best
