import pytest
from hypothesis import given, settings, strategies as st

from gesturetrack.geometry import BoundingBox
from gesturetrack.metrics import EvalReport, compare, compare_suite, evaluate
from gesturetrack.simkit import ScenarioSpec, TargetState, generate
from gesturetrack.tracker import FrameResult, TrackReport, TrackStatus, run

C = TrackStatus.CONFIRMED


def _perfect(gt_frames):
    return [FrameResult(t, tuple(TrackReport(g.gid, g.box, C) for g in f if g.visible))
            for t, f in enumerate(gt_frames)]


def test_perfect_tracking():
    out = generate(ScenarioSpec(kind="occlusion", n_targets=3, seed=1))
    ev = evaluate(_perfect(out.ground_truth), out.ground_truth)
    assert (ev.precision, ev.recall, ev.f1, ev.mota, ev.id_switches) == (1.0, 1.0, 1.0, 1.0, 0)


def test_no_output():
    out = generate(ScenarioSpec(kind="swipe", n_targets=2, seed=1))
    ev = evaluate([FrameResult(t) for t in range(out.duration)], out.ground_truth)
    assert ev.recall == 0 and ev.fn == ev.gt_count and ev.mota == 0


def test_hand_id_switch_case():
    box = BoundingBox(10, 10, 4, 4)
    gt = [[TargetState(1, box)]] * 3
    res = [FrameResult(0, (TrackReport(1, box, C),)), FrameResult(1, (TrackReport(1, box, C),)),
           FrameResult(2, (TrackReport(2, box, C),))]
    ev = evaluate(res, gt)
    assert ev.id_switches == 1 and ev.mota == 2 / 3 and ev.tp == 3


def test_switch_counted_across_gap():
    box = BoundingBox(10, 10, 4, 4)
    gt = [[TargetState(1, box)]] * 3
    res = [FrameResult(0, (TrackReport(1, box, C),)), FrameResult(1), FrameResult(2, (TrackReport(2, box, C),))]
    assert evaluate(res, gt).id_switches == 1


def test_frame_count_mismatch():
    with pytest.raises(ValueError):
        evaluate([FrameResult(0)], [[], []])


def test_empty_ground_truth():
    assert evaluate([FrameResult(0)], [[]]).mota == 1.0
    box = BoundingBox(1, 1, 1, 1)
    assert evaluate([FrameResult(0, (TrackReport(1, box, C),))], [[]]).mota == 0.0


def test_compare():
    a = EvalReport(1, 1, 1, 1.0, 0, 0, 0, 10, 10)
    b = EvalReport(1, 1, 1, 0.9, 1, 0, 0, 10, 10)
    assert all(v == 0 for v in compare(a, a).deltas.values())
    c = compare(a, b)
    assert c.deltas["mota"] == pytest.approx(0.1) and c.favours["mota"] == "a"
    assert c.favours["id_switches"] == "a"
    s = compare_suite([(a, b), (a, a)])
    assert s.deltas["mota"] == pytest.approx(0.05)
    assert "mota" in c.summary()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.randoms(use_true_random=False), st.floats(0, 3), st.floats(0, 2))
def test_metric_invariants(seed, rnd, noise, clutter):
    out = generate(ScenarioSpec(kind="mixed", n_targets=3, duration=20, seed=seed, noise_std=noise,
                                clutter_rate=clutter, p_miss=0.1))
    results = list(run(out.detections))
    ev = evaluate(results, out.ground_truth)
    for v in (ev.precision, ev.recall, ev.f1):
        assert 0 <= v <= 1
    assert ev.mota <= 1
    assert ev.tp + ev.fn == sum(g.visible for f in out.ground_truth for g in f)
    shuffled = [FrameResult(r.frame, tuple(rnd.sample(r.tracks, len(r.tracks)))) for r in results]
    assert evaluate(shuffled, out.ground_truth) == ev
    ids = sorted({t.id for r in results for t in r.tracks})
    relabel = dict(zip(ids, rnd.sample(range(1000, 1000 + len(ids)), len(ids))))
    renamed = [FrameResult(r.frame, tuple(t._replace(id=relabel[t.id]) for t in r.tracks)) for r in results]
    assert evaluate(renamed, out.ground_truth) == ev
