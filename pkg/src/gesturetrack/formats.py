"""JSONL readers/writers for detections, ground truth, tracks and gesture reports.

One JSON object per line. Readers raise :class:`InputError` carrying the
1-based line number of the first malformed record.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Sequence

from .geometry import BoundingBox
from .simkit import ScenarioOutput, TargetState
from .tracker import Detection, FrameResult, TrackReport, TrackStatus


class InputError(ValueError):
    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(", ", ": "), allow_nan=False)


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(path: str | os.PathLike, records: Iterable[dict]) -> None:
    write_atomic(path, "".join(dumps(r) + "\n" for r in records))


def _box_fields(box: BoundingBox) -> dict:
    return {"x": box.x, "y": box.y, "w": box.w, "h": box.h}


def detection_records(frames: Sequence[Sequence[Detection]]) -> Iterator[dict]:
    for t, dets in enumerate(frames):
        yield {
            "frame": t,
            "detections": [
                {**_box_fields(d.box), "conf": d.confidence,
                 "emb": None if d.embedding is None else [float(v) for v in d.embedding]}
                for d in dets
            ],
        }


def ground_truth_records(out: ScenarioOutput) -> Iterator[dict]:
    for t, frame in enumerate(out.ground_truth):
        yield {
            "frame": t,
            "targets": [
                {"gid": ts.gid, **_box_fields(ts.box), "visible": ts.visible, "kind": out.kinds[ts.gid].value}
                for ts in frame
            ],
        }


def track_records(results: Iterable[FrameResult]) -> Iterator[dict]:
    for res in results:
        yield {
            "frame": res.frame,
            "tracks": [{"id": tr.id, **_box_fields(tr.box), "status": tr.status.value} for tr in res.tracks],
        }


def _iter_json(path: str | os.PathLike) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(str(path), n, f"invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise InputError(str(path), n, "record is not a JSON object")
            yield n, obj


def _num(rec: dict, key: str, path: str, line: int) -> float:
    value = rec.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(path, line, f"field {key!r} must be a number")
    return float(value)


def _int(rec: dict, key: str, path: str, line: int) -> int:
    value = rec.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(path, line, f"field {key!r} must be an integer")
    return value


def _list(rec: dict, key: str, path: str, line: int) -> list:
    value = rec.get(key)
    if not isinstance(value, list):
        raise InputError(path, line, f"field {key!r} must be a list")
    return value


def _box(rec: dict, path: str, line: int) -> BoundingBox:
    if not isinstance(rec, dict):
        raise InputError(path, line, "box entry is not an object")
    try:
        return BoundingBox(*(_num(rec, k, path, line) for k in ("x", "y", "w", "h")))
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(path, line, str(exc)) from None


def _check_frame(rec: dict, expected: int, path: str, line: int) -> int:
    frame = _int(rec, "frame", path, line)
    if frame != expected:
        raise InputError(path, line, f"expected frame {expected}, got {frame}")
    return frame


def read_detections(path: str | os.PathLike) -> list[list[Detection]]:
    path = str(path)
    frames: list[list[Detection]] = []
    for line, rec in _iter_json(path):
        _check_frame(rec, len(frames), path, line)
        dets = []
        for d in _list(rec, "detections", path, line):
            box = _box(d, path, line)
            conf = _num(d, "conf", path, line) if "conf" in d else 1.0
            emb = d.get("emb")
            if emb is not None:
                if not isinstance(emb, list) or not emb or any(
                    isinstance(v, bool) or not isinstance(v, (int, float)) for v in emb
                ):
                    raise InputError(path, line, "field 'emb' must be a non-empty list of numbers or null")
            try:
                dets.append(Detection(box, conf, emb))
            except ValueError as exc:
                raise InputError(path, line, str(exc)) from None
        frames.append(dets)
    return frames


def read_ground_truth(path: str | os.PathLike) -> tuple[list[list[TargetState]], dict[int, str]]:
    """Ground-truth frames plus the optional per-target ``kind`` metadata."""
    path = str(path)
    frames: list[list[TargetState]] = []
    kinds: dict[int, str] = {}
    for line, rec in _iter_json(path):
        _check_frame(rec, len(frames), path, line)
        targets = []
        for g in _list(rec, "targets", path, line):
            box = _box(g, path, line)
            gid = _int(g, "gid", path, line)
            visible = g.get("visible", True)
            if not isinstance(visible, bool):
                raise InputError(path, line, "field 'visible' must be a boolean")
            if isinstance(g.get("kind"), str):
                kinds[gid] = g["kind"]
            targets.append(TargetState(gid, box, visible))
        frames.append(targets)
    return frames, kinds


def read_tracks(path: str | os.PathLike) -> list[FrameResult]:
    path = str(path)
    results: list[FrameResult] = []
    for line, rec in _iter_json(path):
        frame = _check_frame(rec, len(results), path, line)
        reports = []
        seen: set[int] = set()
        for tr in _list(rec, "tracks", path, line):
            box = _box(tr, path, line)
            tid = _int(tr, "id", path, line)
            if tid in seen:
                raise InputError(path, line, f"duplicate track id {tid}")
            seen.add(tid)
            try:
                status = TrackStatus(tr.get("status", "confirmed"))
            except ValueError:
                raise InputError(path, line, f"unknown status {tr.get('status')!r}") from None
            if status is TrackStatus.DELETED:
                raise InputError(path, line, "deleted tracks are never reported")
            reports.append(TrackReport(tid, box, status))
        results.append(FrameResult(frame, tuple(reports)))
    return results


def gesture_record(track_id: int, label: str, features: dict) -> dict:
    return {"id": track_id, "label": label, "features": features}


def read_gestures(path: str | os.PathLike) -> list[dict]:
    return [rec for _, rec in _iter_json(path)]


def identity_paths(path: str | os.PathLike) -> tuple[str, dict[int, list[tuple[int, BoundingBox]]]]:
    """Per-identity box sequences from a tracks or ground-truth file.

    Returns ``("tracks" | "ground_truth" | "empty", paths)``. Hidden
    ground-truth boxes are kept: the figure shows the true path.
    """
    path = str(path)
    kind: Optional[str] = None
    paths: dict[int, list[tuple[int, BoundingBox]]] = {}
    for line, rec in _iter_json(path):
        if kind is None:
            if "tracks" in rec:
                kind = "tracks"
            elif "targets" in rec:
                kind = "ground_truth"
            else:
                raise InputError(path, line, "record has neither 'tracks' nor 'targets'")
        key, id_key = ("tracks", "id") if kind == "tracks" else ("targets", "gid")
        frame = _int(rec, "frame", path, line)
        for item in _list(rec, key, path, line):
            paths.setdefault(_int(item, id_key, path, line), []).append((frame, _box(item, path, line)))
    return kind or "empty", paths
