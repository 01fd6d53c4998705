import json

import numpy as np
import pytest

from gesturetrack import formats
from gesturetrack.simkit import ScenarioSpec, generate
from gesturetrack.tracker import run


def test_detection_and_ground_truth_roundtrip(tmp_path):
    out = generate(ScenarioSpec(kind="mixed", n_targets=3, clutter_rate=1.0, p_miss=0.2, seed=8))
    det, gt = tmp_path / "d.jsonl", tmp_path / "g.jsonl"
    formats.write_jsonl(det, formats.detection_records(out.detections))
    formats.write_jsonl(gt, formats.ground_truth_records(out))
    back = formats.read_detections(det)
    assert [[d.box for d in f] for f in back] == [[d.box for d in f] for f in out.detections]
    # Detection re-normalizes on read, which may move the last bit
    assert all(np.allclose(a.embedding, b.embedding, rtol=0, atol=1e-15)
               for fa, fb in zip(back, out.detections) for a, b in zip(fa, fb))
    frames, kinds = formats.read_ground_truth(gt)
    assert frames == out.ground_truth
    assert kinds == {g: k.value for g, k in out.kinds.items()}


def test_tracks_roundtrip(tmp_path):
    out = generate(ScenarioSpec(kind="swipe", n_targets=2, seed=1))
    results = list(run(out.detections))
    path = tmp_path / "t.jsonl"
    formats.write_jsonl(path, formats.track_records(results))
    assert formats.read_tracks(path) == results


def test_blank_lines_skipped_and_duplicates_rejected(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text('\n{"frame": 0, "tracks": []}\n\n')
    assert len(formats.read_tracks(p)) == 1
    rec = {"id": 1, "x": 1, "y": 1, "w": 1, "h": 1, "status": "confirmed"}
    p.write_text(json.dumps({"frame": 0, "tracks": [rec, rec]}) + "\n")
    with pytest.raises(formats.InputError, match=":1: duplicate"):
        formats.read_tracks(p)
    p.write_text(json.dumps({"frame": 0, "tracks": [dict(rec, status="deleted")]}) + "\n")
    with pytest.raises(formats.InputError):
        formats.read_tracks(p)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "out.txt"
    formats.write_atomic(target, "a\n")
    formats.write_atomic(target, "b\n")
    assert target.read_text() == "b\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]


def test_non_finite_values_refused():
    with pytest.raises(ValueError):
        formats.dumps({"x": float("nan")})
