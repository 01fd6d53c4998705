"""Cost matrices, gating and optimal track/detection assignment."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kalman
from .geometry import iou_matrix

INFEASIBLE = np.inf
CHI2_95_4DOF = 9.4877
STAGE2_MIN_IOU = 0.3


@dataclass(frozen=True)
class CostWeights:
    """Mixing weight and gates for the stage-1 combined cost.

    ``lam`` weights the motion term; ``lam=1`` is a motion-only tracker.
    """

    lam: float = 0.5
    gate: float = CHI2_95_4DOF
    appearance_gate: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must be in [0, 1], got {self.lam}")
        if not self.gate > 0:
            raise ValueError(f"gate must be positive, got {self.gate}")
        if self.appearance_gate is not None and not 0.0 <= self.appearance_gate <= 2.0:
            raise ValueError(f"appearance_gate must be in [0, 2], got {self.appearance_gate}")


@dataclass(eq=False)
class CostMatrix:
    """Track-by-detection costs; ``INFEASIBLE`` (``inf``) marks gated pairs.

    ``unmatched_cost`` is the price of leaving one track or one detection
    unassigned. ``None`` asks for a maximum-cardinality matching instead.
    """

    costs: np.ndarray
    unmatched_cost: Optional[float] = None

    def __post_init__(self) -> None:
        costs = np.array(self.costs, dtype=float, copy=True)
        if costs.ndim != 2:
            if costs.size == 0:
                costs = costs.reshape(0, 0)
            else:
                raise ValueError(f"cost matrix must be 2-D, got shape {costs.shape}")
        finite = costs[np.isfinite(costs)]
        if np.any(np.isnan(costs)) or np.any(costs == -np.inf):
            raise ValueError("cost matrix contains NaN or -inf")
        if finite.size and finite.min() < 0:
            raise ValueError("costs must be nonnegative")
        if self.unmatched_cost is not None and not (np.isfinite(self.unmatched_cost) and self.unmatched_cost > 0):
            raise ValueError(f"unmatched_cost must be positive and finite, got {self.unmatched_cost}")
        self.costs = costs

    @property
    def shape(self) -> tuple[int, int]:
        return self.costs.shape


@dataclass
class Assignment:
    pairs: list[tuple[int, int]] = field(default_factory=list)
    unmatched_tracks: list[int] = field(default_factory=list)
    unmatched_detections: list[int] = field(default_factory=list)
    cost: float = 0.0


def _lap_rect(a: np.ndarray) -> np.ndarray:
    """Shortest-augmenting-path assignment for an ``n x m`` matrix, ``n <= m``.

    Every row is assigned; returns the column index of each row. Potentials
    keep reduced costs nonnegative so each augmentation is a Dijkstra search
    over columns, O(n^2 m) overall.
    """
    n, m = a.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    owner = np.zeros(m + 1, dtype=np.int64)  # 1-based row assigned to column j, 0 if free
    way = np.zeros(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            cur = a[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            used_cols = np.flatnonzero(used)
            u[owner[used_cols]] += delta
            v[used_cols] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.int64)
    for j in range(1, m + 1):
        if owner[j]:
            col_of_row[owner[j] - 1] = j - 1
    return col_of_row


def _components(rows: np.ndarray, cols: np.ndarray, n: int) -> dict[int, tuple[list[int], list[int]]]:
    """Connected components of the bipartite graph given by edge lists.

    Node ``i < n`` is row ``i``; node ``n + j`` is column ``j``. Returns
    ``root -> (rows, cols)`` for every component with at least one edge.
    """
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != root:
            parent[x], x = root, parent[x]
        return root

    for i, j in zip(rows.tolist(), cols.tolist()):
        a, b = find(i), find(n + j)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for node in sorted(set(rows.tolist()) | {n + j for j in cols.tolist()}):
        r_list, c_list = groups.setdefault(find(node), ([], []))
        if node < n:
            r_list.append(node)
        else:
            c_list.append(node - n)
    return groups


def _solve_block(block: np.ndarray, pair_bonus: float) -> list[tuple[int, int]]:
    """Optimal partial matching on one connected block.

    Minimises ``sum(c_ij - pair_bonus)`` over matched pairs; each row may
    instead take a zero-cost dummy column.
    """
    nr, nc = block.shape
    if nr == 1 and nc == 1:
        return [(0, 0)] if block[0, 0] - pair_bonus <= 0 else []
    reduced = block - pair_bonus
    finite = np.isfinite(reduced)
    span = float(np.abs(reduced[finite]).max()) if finite.any() else 1.0
    big = (nr + 1) * (span + 1.0)
    reduced = np.where(finite, reduced, big)
    aug = np.hstack([reduced, np.zeros((nr, nr))])
    cols = _lap_rect(aug)
    return [(r, int(c)) for r, c in enumerate(cols) if c < nc and finite[r, c]]


def solve_assignment(c: CostMatrix) -> Assignment:
    """Minimum-cost assignment between tracks (rows) and detections (columns).

    With ``c.unmatched_cost = d`` the objective is the sum of matched costs
    plus ``d`` per unmatched row and per unmatched column. With ``None`` the
    matching has maximum cardinality over feasible pairs and minimum cost
    among those; for a finite square matrix that is a perfect matching.
    Rows are inserted in index order and columns scanned in index order, so
    equal-cost optima always resolve the same way for the same input.
    """
    costs = c.costs
    n, m = costs.shape
    if n == 0 or m == 0:
        return Assignment([], list(range(n)), list(range(m)), 0.0)
    feasible = np.isfinite(costs)
    pairs: list[tuple[int, int]] = []
    if c.unmatched_cost is None and feasible.all():
        if n <= m:
            cols = _lap_rect(costs)
            pairs = [(i, int(j)) for i, j in enumerate(cols)]
        else:
            rows = _lap_rect(costs.T)
            pairs = sorted((int(i), j) for j, i in enumerate(rows))
    else:
        if c.unmatched_cost is None:
            d = float(np.abs(costs[feasible]).sum()) + 1.0 if feasible.any() else 1.0
        else:
            d = float(c.unmatched_cost)
        rr, cc = np.nonzero(feasible)
        if np.bincount(rr, minlength=n).max(initial=0) <= 1 and np.bincount(cc, minlength=m).max(initial=0) <= 1:
            # every component is a single pair
            keep = costs[rr, cc] <= 2.0 * d
            pairs = list(zip(rr[keep].tolist(), cc[keep].tolist()))
            components = {}
        else:
            components = _components(rr, cc, n)
        for rows, cols in components.values():
            if len(rows) == 1 and len(cols) == 1:
                if costs[rows[0], cols[0]] <= 2.0 * d:
                    pairs.append((rows[0], cols[0]))
                continue
            block = costs[np.ix_(rows, cols)]
            for r, k in _solve_block(block, 2.0 * d):
                pairs.append((rows[r], cols[k]))
        pairs.sort()
    matched_rows = {i for i, _ in pairs}
    matched_cols = {j for _, j in pairs}
    total = 0.0
    for i, j in pairs:
        total += costs[i, j]
    return Assignment(
        pairs,
        [i for i in range(n) if i not in matched_rows],
        [j for j in range(m) if j not in matched_cols],
        float(total),
    )


def motion_appearance_costs(
    means: np.ndarray,
    covs: np.ndarray,
    galleries: Sequence,
    det_boxes: np.ndarray,
    det_embeddings: Sequence[Optional[np.ndarray]],
    weights: CostWeights,
    model: kalman.MotionModel,
) -> np.ndarray:
    """Array kernel behind :func:`build_cost_matrix`."""
    n, m = len(means), len(det_boxes)
    if n == 0 or m == 0:
        return np.zeros((n, m))
    motion = kalman.gating_distances(means, covs, det_boxes, model)
    costs = np.where(motion <= weights.gate, motion, INFEASIBLE)
    lam = weights.lam
    if lam >= 1.0:
        return costs
    has_emb = np.array([e is not None for e in det_embeddings], dtype=bool)
    if not has_emb.any():
        return costs
    dim = len(next(e for e in det_embeddings if e is not None))
    E = np.zeros((m, dim))
    for j in np.flatnonzero(has_emb):
        E[j] = det_embeddings[j]
    rows, cols = np.nonzero(np.isfinite(costs) & has_emb[None, :])
    if rows.size == 0:
        return costs
    app = np.full(rows.size, np.nan)
    row_list = rows.tolist()
    # pairs come grouped by row; one gallery product per track
    starts = [0] + (np.flatnonzero(np.diff(rows)) + 1).tolist()
    stops = starts[1:] + [rows.size]
    for start, stop in zip(starts, stops):
        gallery = galleries[row_list[start]]
        if gallery is not None and len(gallery) and gallery.dim == dim:
            app[start:stop] = 1.0 - (gallery.matrix() @ E[cols[start:stop]].T).max(axis=0)
    ok = ~np.isnan(app)
    rows, cols, app = rows[ok], cols[ok], np.clip(app[ok], 0.0, 2.0)
    combined = lam * costs[rows, cols] + (1.0 - lam) * app
    if weights.appearance_gate is not None:
        combined = np.where(app > weights.appearance_gate, INFEASIBLE, combined)
    costs[rows, cols] = combined
    return costs


def build_cost_matrix(tracks: Sequence, detections: Sequence, weights: CostWeights = CostWeights(),
                      model: kalman.MotionModel = kalman.MotionModel()) -> CostMatrix:
    """Gated combined motion/appearance costs for predicted tracks.

    ``tracks`` need ``.state`` (a predicted :class:`~kalman.KalmanTrackState`)
    and ``.gallery``; ``detections`` need ``.box`` and ``.embedding``. Pairs
    without embeddings on either side fall back to the motion cost alone.
    """
    if tracks:
        means = np.stack([t.state.mean for t in tracks])
        covs = np.stack([t.state.covariance for t in tracks])
    else:
        means, covs = np.zeros((0, 8)), np.zeros((0, 8, 8))
    det_boxes = np.array([d.box.as_array() for d in detections]).reshape(-1, 4)
    costs = motion_appearance_costs(
        means, covs, [t.gallery for t in tracks], det_boxes, [d.embedding for d in detections], weights, model
    )
    return CostMatrix(costs, unmatched_cost=weights.gate + 1.0)


def iou_costs(track_boxes: np.ndarray, det_boxes: np.ndarray, min_iou: float = STAGE2_MIN_IOU) -> np.ndarray:
    track_boxes = np.asarray(track_boxes, dtype=float).reshape(-1, 4).copy()
    track_boxes[:, 2:] = np.maximum(track_boxes[:, 2:], 1e-6)
    overlap = iou_matrix(track_boxes, det_boxes)
    return np.where(overlap < min_iou, INFEASIBLE, 1.0 - overlap)


def stage2_iou_cost(tracks: Sequence, detections: Sequence, min_iou: float = STAGE2_MIN_IOU) -> CostMatrix:
    """``1 - IoU`` between predicted track boxes and detections; low overlap is gated."""
    track_boxes = np.array([t.state.mean[:4] for t in tracks]).reshape(-1, 4)
    det_boxes = np.array([d.box.as_array() for d in detections]).reshape(-1, 4)
    return CostMatrix(iou_costs(track_boxes, det_boxes, min_iou), unmatched_cost=(1.0 - min_iou) + 1.0)
