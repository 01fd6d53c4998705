import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gesturetrack.appearance import synth_embedding
from gesturetrack.assoc import CostWeights
from gesturetrack.geometry import BoundingBox, iou
from gesturetrack.metrics import evaluate
from gesturetrack.simkit import ScenarioSpec, crossing_scenario, generate
from gesturetrack.tracker import Detection, FrameResult, Tracker, TrackerConfig, TrackStatus, run

BOX = BoundingBox(200, 200, 40, 80)


def test_birth_and_confirmation():
    tr = Tracker(TrackerConfig(emit_tentative=True))
    res = tr.step([Detection(BOX)])
    assert [(t.id, t.status) for t in res.tracks] == [(1, TrackStatus.TENTATIVE)]
    tr.step([Detection(BOX)])
    assert tr.tracks[0].status is TrackStatus.TENTATIVE
    res = tr.step([Detection(BOX)])
    assert res.frame == 2
    assert [(t.id, t.status) for t in res.tracks] == [(1, TrackStatus.CONFIRMED)]


def test_confirmed_track_deleted_after_max_age_plus_one_misses():
    tr = Tracker()
    for _ in range(3):
        tr.step([Detection(BOX)])
    track = tr.tracks[0]
    for k in range(30):
        tr.step([])
        assert track.status is TrackStatus.CONFIRMED, k
    tr.step([])
    assert track.status is TrackStatus.DELETED and not tr.tracks


def test_tentative_track_dies_on_first_miss():
    tr = Tracker()
    tr.step([Detection(BOX)])
    tr.step([])
    assert not tr.tracks


def test_low_confidence_detections_ignored():
    tr = Tracker()
    tr.step([Detection(BOX, confidence=0.05)])
    assert not tr.tracks


def test_empty_and_single_frame_streams():
    assert list(run([])) == []
    dets = [Detection(BOX)]
    assert list(run([dets], TrackerConfig(emit_tentative=True))) == [Tracker(TrackerConfig(emit_tentative=True)).step(dets)]


def test_coasting_tracks_hidden_by_default():
    cfg = TrackerConfig()
    tr = Tracker(cfg)
    for _ in range(3):
        tr.step([Detection(BOX)])
    assert tr.step([]).tracks == ()
    tr2 = Tracker(TrackerConfig(emit_coasting=True))
    for _ in range(3):
        tr2.step([Detection(BOX)])
    assert len(tr2.step([]).tracks) == 1


def test_noise_free_crossing_keeps_identities():
    out = crossing_scenario(3, noise_std=0.0, embedding_noise_std=0.0)
    results = list(run(out.detections))
    owners: dict[int, set] = {}
    for res, gt in zip(results, out.ground_truth):
        for g in gt:
            for t in res.tracks:
                if g.visible and iou(t.box, g.box) > 0.5:
                    owners.setdefault(g.gid, set()).add(t.id)
    assert set(owners) == {1, 2}
    assert all(len(ids) == 1 for ids in owners.values())
    assert owners[1] != owners[2]
    assert evaluate(results, out.ground_truth).id_switches == 0


def test_deterministic():
    out = generate(ScenarioSpec(kind="mixed", n_targets=4, clutter_rate=2, p_miss=0.1, seed=5))
    assert list(run(out.detections)) == list(run(out.detections))


def test_config_validation():
    for bad in (dict(n_init=0), dict(max_age=-1), dict(min_confidence=2.0), dict(gallery_size=0)):
        with pytest.raises(ValueError):
            TrackerConfig(**bad)


def test_mismatched_embedding_dims_fall_back():
    tr = Tracker(TrackerConfig(n_init=1))
    tr.step([Detection(BOX, embedding=np.ones(8))])
    res = tr.step([Detection(BOX.translated(1, 0), embedding=np.ones(4))])
    assert [t.id for t in res.tracks] == [1]


frames = st.lists(
    st.lists(st.tuples(st.floats(0, 400), st.floats(0, 400), st.floats(5, 80), st.floats(5, 80),
                       st.floats(0, 1), st.integers(0, 5)), max_size=6),
    max_size=25,
)


@settings(max_examples=60, deadline=None)
@given(frames, st.sampled_from([0.5, 1.0]))
def test_stream_invariants(raw, lam):
    stream = [[Detection(BoundingBox(x, y, w, h), c, synth_embedding(i, 0.0, dim=16)) for x, y, w, h, c, i in f]
              for f in raw]
    tr = Tracker(TrackerConfig(emit_tentative=True, weights=CostWeights(lam=lam)))
    deleted: set[int] = set()
    history: dict[int, list[TrackStatus]] = {}
    for dets in stream:
        before = {t.id: t for t in tr.tracks}
        res = tr.step(dets)
        alive = {t.id for t in tr.tracks}
        deleted |= set(before) - alive
        ids = [t.id for t in res.tracks]
        assert ids == sorted(ids) and len(set(ids)) == len(ids)
        assert not set(ids) & deleted
        for t in res.tracks:
            assert all(np.isfinite([t.box.x, t.box.y, t.box.w, t.box.h]))
            history.setdefault(t.id, []).append(t.status)
    for seq in history.values():
        # tentative never follows confirmed
        if TrackStatus.CONFIRMED in seq:
            assert TrackStatus.TENTATIVE not in seq[seq.index(TrackStatus.CONFIRMED):]
