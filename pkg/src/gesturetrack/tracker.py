"""Per-frame tracking loop: predict, associate, update, manage track lifecycles."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional

import numpy as np

from . import kalman
from .appearance import GALLERY_SIZE, Gallery, normalize
from .assoc import (
    STAGE2_MIN_IOU,
    CostMatrix,
    CostWeights,
    iou_costs,
    motion_appearance_costs,
    solve_assignment,
)
from .geometry import BoundingBox

logger = logging.getLogger(__name__)


class TrackStatus(enum.Enum):
    TENTATIVE = "tentative"
    CONFIRMED = "confirmed"
    DELETED = "deleted"


@dataclass(frozen=True, eq=False)
class Detection:
    box: BoundingBox
    confidence: float = 1.0
    embedding: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.embedding is not None:
            object.__setattr__(self, "embedding", normalize(self.embedding))


@dataclass(eq=False)
class Track:
    id: int
    state: kalman.KalmanTrackState
    gallery: Gallery
    status: TrackStatus = TrackStatus.TENTATIVE
    hits: int = 1
    misses: int = 0
    age: int = 0

    @property
    def box(self) -> np.ndarray:
        return self.state.mean[:4]


class TrackReport(NamedTuple):
    id: int
    box: BoundingBox
    status: TrackStatus


@dataclass(frozen=True)
class FrameResult:
    frame: int
    tracks: tuple[TrackReport, ...] = ()


@dataclass(frozen=True)
class TrackerConfig:
    n_init: int = 3
    max_age: int = 30
    min_confidence: float = 0.1
    stage2_min_iou: float = STAGE2_MIN_IOU
    gallery_size: int = GALLERY_SIZE
    emit_tentative: bool = False
    emit_coasting: bool = False
    weights: CostWeights = field(default_factory=CostWeights)

    def __post_init__(self) -> None:
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.max_age < 0:
            raise ValueError("max_age must be >= 0")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must be in [0, 1]")
        if not 0.0 < self.stage2_min_iou <= 1.0:
            raise ValueError("stage2_min_iou must be in (0, 1]")
        if self.gallery_size < 1:
            raise ValueError("gallery_size must be >= 1")


class Tracker:
    """Sequential multi-object tracker. One instance handles one stream.

    Stage 1 matches confirmed tracks with the gated motion/appearance cost;
    stage 2 matches whatever is left (tentative tracks and stage-1 leftovers)
    on box overlap.
    """

    def __init__(self, config: TrackerConfig = TrackerConfig(), model: kalman.MotionModel = kalman.MotionModel()):
        self.config = config
        self.model = model
        self.tracks: list[Track] = []
        self.frame = -1
        self._next_id = 1
        # filter state of self.tracks, row k belongs to self.tracks[k]
        self._means = np.zeros((0, kalman.STATE_DIM))
        self._covs = np.zeros((0, kalman.STATE_DIM, kalman.STATE_DIM))

    def _sync_arrays(self) -> None:
        # tracks may have been edited from outside; trust their states
        if len(self._means) != len(self.tracks) or any(
            t.state.mean.base is not self._means for t in self.tracks
        ):
            if self.tracks:
                self._means = np.stack([t.state.mean for t in self.tracks])
                self._covs = np.stack([t.state.covariance for t in self.tracks])
            else:
                self._means = np.zeros((0, kalman.STATE_DIM))
                self._covs = np.zeros((0, kalman.STATE_DIM, kalman.STATE_DIM))

    def _predict_all(self) -> None:
        if not self.tracks:
            return
        means, covs = kalman.predict_arrays(self._means, self._covs, self.model)
        finite = np.all(np.isfinite(means), axis=1) & np.all(np.isfinite(covs), axis=(1, 2))
        if not finite.all():
            for k in np.flatnonzero(~finite):
                logger.warning("track %d diverged and was dropped", self.tracks[k].id)
                self.tracks[k].status = TrackStatus.DELETED
            self.tracks = [t for t, ok in zip(self.tracks, finite) if ok]
            means, covs = means[finite], covs[finite]
        for t in self.tracks:
            t.age += 1
        self._means, self._covs = means, covs

    def _match(self, det_boxes: np.ndarray, dets: list[Detection]) -> tuple[list[tuple[int, int]], list[int], list[int]]:
        """Two-stage association; returns indices into ``self.tracks`` / ``dets``."""
        cfg = self.config
        tracks = self.tracks
        confirmed = [k for k, t in enumerate(tracks) if t.status is TrackStatus.CONFIRMED]
        pairs: list[tuple[int, int]] = []
        free_dets = list(range(len(dets)))
        leftover = [k for k, t in enumerate(tracks) if t.status is not TrackStatus.CONFIRMED]
        if confirmed and free_dets:
            costs = motion_appearance_costs(
                self._means[confirmed], self._covs[confirmed], [tracks[k].gallery for k in confirmed],
                det_boxes, [d.embedding for d in dets], cfg.weights, self.model,
            )
            result = solve_assignment(CostMatrix(costs, unmatched_cost=cfg.weights.gate + 1.0))
            pairs.extend((confirmed[i], j) for i, j in result.pairs)
            free_dets = result.unmatched_detections
            leftover = sorted(leftover + [confirmed[i] for i in result.unmatched_tracks])
        else:
            leftover = sorted(leftover + confirmed)
        if leftover and free_dets:
            costs = iou_costs(self._means[leftover, :4], det_boxes[free_dets], cfg.stage2_min_iou)
            result = solve_assignment(CostMatrix(costs, unmatched_cost=(1.0 - cfg.stage2_min_iou) + 1.0))
            pairs.extend((leftover[i], free_dets[j]) for i, j in result.pairs)
            matched_left = {i for i, _ in result.pairs}
            leftover = [leftover[i] for i in range(len(leftover)) if i not in matched_left]
            free_dets = [free_dets[j] for j in result.unmatched_detections]
        return pairs, leftover, free_dets

    def _miss(self, t: Track) -> None:
        t.hits = 0
        t.misses += 1
        if t.status is TrackStatus.TENTATIVE or t.misses > self.config.max_age:
            t.status = TrackStatus.DELETED

    def step(self, detections: Iterable[Detection]) -> FrameResult:
        """Consume one frame of detections and report the live tracks."""
        cfg = self.config
        self.frame += 1
        dets = [d for d in detections if d.confidence >= cfg.min_confidence]
        det_boxes = np.array([(d.box.x, d.box.y, d.box.w, d.box.h) for d in dets], dtype=float).reshape(-1, 4)
        self._sync_arrays()
        self._predict_all()
        tracks = self.tracks
        pairs, unmatched_tracks, unmatched_dets = self._match(det_boxes, dets)

        if pairs:
            idx = [k for k, _ in pairs]
            means, covs, ok = kalman.update_arrays(
                self._means[idx], self._covs[idx], det_boxes[[j for _, j in pairs]], self.model
            )
            self._means[idx] = means
            self._covs[idx] = covs
            for n, (k, j) in enumerate(pairs):
                t = tracks[k]
                if not ok[n]:
                    logger.debug("track %d: singular innovation, counted as a miss", t.id)
                    self._miss(t)
                    continue
                emb = dets[j].embedding
                if emb is not None and len(emb) == t.gallery.dim:
                    t.gallery.append(emb)
                t.hits += 1
                t.misses = 0
                if t.status is TrackStatus.TENTATIVE and t.hits >= cfg.n_init:
                    t.status = TrackStatus.CONFIRMED
        for k in unmatched_tracks:
            self._miss(tracks[k])

        keep = [k for k, t in enumerate(tracks) if t.status is not TrackStatus.DELETED]
        means, covs = self._means[keep], self._covs[keep]
        kept = [tracks[k] for k in keep]
        if unmatched_dets:
            new_means, new_covs = kalman.initiate_arrays(det_boxes[unmatched_dets], self.model)
            means = np.concatenate([means, new_means])
            covs = np.concatenate([covs, new_covs])
            for j in unmatched_dets:
                kept.append(self._spawn(dets[j]))
        means.flags.writeable = False
        covs.flags.writeable = False
        for k, t in enumerate(kept):
            t.state = kalman.KalmanTrackState.trusted(means[k], covs[k])
        self.tracks, self._means, self._covs = kept, means, covs
        return self._report()

    def _spawn(self, det: Detection) -> Track:
        """New tentative track; its state is filled in by :meth:`step`."""
        dim = len(det.embedding) if det.embedding is not None else 128
        gallery = Gallery(self.config.gallery_size, dim)
        if det.embedding is not None:
            gallery.append(det.embedding)
        track = Track(self._next_id, None, gallery)
        if self.config.n_init <= 1:
            track.status = TrackStatus.CONFIRMED
        self._next_id += 1
        return track

    def _report(self) -> FrameResult:
        cfg = self.config
        shown = [
            k for k, t in enumerate(self.tracks)
            if (t.status is TrackStatus.CONFIRMED or cfg.emit_tentative) and (cfg.emit_coasting or not t.misses)
        ]
        if not shown:
            return FrameResult(self.frame, ())
        shown.sort(key=lambda k: self.tracks[k].id)
        boxes = self._means[shown, :4]
        valid = np.all(np.isfinite(boxes), axis=1) & (boxes[:, 2] > 0) & (boxes[:, 3] > 0)
        out = tuple(
            TrackReport(self.tracks[k].id, BoundingBox(*b), self.tracks[k].status)
            for k, b, ok in zip(shown, boxes.tolist(), valid.tolist())
            if ok
        )
        return FrameResult(self.frame, out)


def run(detection_stream: Iterable[Iterable[Detection]], config: TrackerConfig = TrackerConfig(),
        model: kalman.MotionModel = kalman.MotionModel()) -> Iterator[FrameResult]:
    """Run a fresh tracker over a stream of per-frame detection lists."""
    tracker = Tracker(config, model)
    for dets in detection_stream:
        yield tracker.step(dets)
