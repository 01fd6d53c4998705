"""Tracking accuracy against ground truth: precision/recall/F1, MOTA, ID switches."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .assoc import CostMatrix, iou_costs, solve_assignment


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    mota: float
    id_switches: int
    fp: int
    fn: int
    tp: int
    gt_count: int

    def to_dict(self) -> dict:
        return asdict(self)


# metrics where a larger value is better; counts are the opposite
HIGHER_IS_BETTER = {"precision": True, "recall": True, "f1": True, "mota": True,
                    "id_switches": False, "fp": False, "fn": False}


def _f1(precision: float, recall: float) -> float:
    denom = precision + recall
    return 2.0 * precision * recall / denom if denom > 0 else 0.0


def evaluate(results: Sequence, ground_truth: Sequence[Sequence], iou_thresh: float = 0.5) -> EvalReport:
    """Score a stream of tracker frames against ground-truth frames.

    ``results`` items need ``.tracks`` with ``.id`` and ``.box``; ground-truth
    frames are sequences of items with ``.gid``, ``.box`` and ``.visible``.
    Frames are aligned by position. Only visible targets count.
    """
    if not 0.0 < iou_thresh < 1.0:
        raise ValueError(f"iou_thresh must be in (0, 1), got {iou_thresh}")
    if len(results) != len(ground_truth):
        raise ValueError(f"frame count mismatch: {len(results)} result frames vs {len(ground_truth)} ground-truth frames")
    tp = fp = fn = switches = gt_count = 0
    last_match: dict[int, int] = {}
    for res, gt in zip(results, ground_truth):
        targets = [g for g in gt if g.visible]
        tracks = list(res.tracks)
        gt_count += len(targets)
        if not targets or not tracks:
            fp += len(tracks)
            fn += len(targets)
            continue
        gb = np.array([g.box.as_array() for g in targets])
        tb = np.array([t.box.as_array() for t in tracks])
        costs = iou_costs(gb, tb, iou_thresh)
        assignment = solve_assignment(CostMatrix(costs))
        tp += len(assignment.pairs)
        fn += len(assignment.unmatched_tracks)
        fp += len(assignment.unmatched_detections)
        for gi, ti in assignment.pairs:
            gid, tid = targets[gi].gid, tracks[ti].id
            if gid in last_match and last_match[gid] != tid:
                switches += 1
            last_match[gid] = tid
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if gt_count:
        # integer numerator keeps hand-countable cases exact (2/3, not 1 - 1/3)
        mota = (gt_count - fn - fp - switches) / gt_count
    else:
        mota = 1.0 if fp == 0 else 0.0
    return EvalReport(precision, recall, _f1(precision, recall), mota, switches, fp, fn, tp, gt_count)


@dataclass(frozen=True)
class Comparison:
    """Per-metric ``a - b`` deltas and which side each metric favours."""

    deltas: dict
    favours: dict

    def summary(self) -> str:
        lines = []
        for name, delta in self.deltas.items():
            lines.append(f"{name:12s} {delta:+.4f}  ({self.favours[name]})")
        return "\n".join(lines)


def _favour(name: str, delta: float) -> str:
    if delta == 0:
        return "tie"
    better_a = delta > 0 if HIGHER_IS_BETTER[name] else delta < 0
    return "a" if better_a else "b"


def compare(a: EvalReport, b: EvalReport) -> Comparison:
    deltas = {name: float(getattr(a, name) - getattr(b, name)) for name in HIGHER_IS_BETTER}
    return Comparison(deltas, {k: _favour(k, v) for k, v in deltas.items()})


def compare_suite(pairs: Sequence[tuple[EvalReport, EvalReport]]) -> Comparison:
    """Average the per-scenario deltas of ``(a, b)`` report pairs."""
    if not pairs:
        raise ValueError("no report pairs to compare")
    per = [compare(a, b).deltas for a, b in pairs]
    deltas = {k: float(np.mean([d[k] for d in per])) for k in HIGHER_IS_BETTER}
    return Comparison(deltas, {k: _favour(k, v) for k, v in deltas.items()})
