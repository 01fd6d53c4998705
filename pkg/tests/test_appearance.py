import numpy as np
import pytest
from hypothesis import given, strategies as st

from gesturetrack.appearance import (Gallery, cosine_distance, gallery_distance, gallery_distances,
                                     histogram_embedding, normalize, synth_embedding)

e1, e2 = normalize(np.array([1.0, 0, 0])), normalize(np.array([0, 1.0, 0]))


def test_cosine_distance_examples():
    assert cosine_distance(e1, e1) == 0.0
    assert cosine_distance(e1, e2) == 1.0
    assert cosine_distance(e1, -e1) == 2.0


def test_gallery_distance_examples():
    g = Gallery(5, 3)
    g.append(e1)
    assert gallery_distance(g, e1) == 0.0
    g2 = Gallery(5, 3)
    g2.append(e2)
    assert gallery_distance(g2, e1) == cosine_distance(e2, e1)
    g2.append(e1)
    assert gallery_distance(g2, e1) == 0.0


def test_empty_gallery_and_bad_dims():
    g = Gallery(3, 3)
    with pytest.raises(ValueError):
        gallery_distances(g, e1)
    with pytest.raises(ValueError):
        g.append(np.ones(4))
    with pytest.raises(ValueError):
        Gallery(0, 3)
    with pytest.raises(ValueError):
        normalize(np.zeros(3))


def test_gallery_ring_buffer_keeps_most_recent():
    g = Gallery(3, 2)
    vecs = [normalize(np.array([np.cos(t), np.sin(t)])) for t in np.linspace(0, 1, 5)]
    for v in vecs:
        g.append(v)
    assert len(g) == 3
    assert np.allclose(np.stack(list(g)), np.stack(vecs[2:]))


unit = st.integers(0, 2**32 - 1).map(lambda s: normalize(np.random.default_rng(s).standard_normal(16)))


@given(unit, unit)
def test_cosine_properties(a, b):
    d = cosine_distance(a, b)
    assert d == cosine_distance(b, a)
    assert 0.0 <= d <= 2.0
    assert cosine_distance(a, a) == pytest.approx(0.0, abs=1e-12)


@given(st.lists(unit, min_size=1, max_size=12), unit)
def test_gallery_distance_never_increases(members, probe):
    g = Gallery(100, 16)
    previous = None
    for m in members:
        g.append(m)
        d = gallery_distance(g, probe)
        if previous is not None:
            assert d <= previous
        previous = d


def test_synth_deterministic_and_unit():
    assert np.array_equal(synth_embedding(7, 0.0), synth_embedding(7, 0.0))
    rng = np.random.default_rng(0)
    for ident in range(50):
        assert np.linalg.norm(synth_embedding(ident, 0.3, rng)) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        synth_embedding(1, 0.1)


def test_distinct_ids_are_far_apart():
    # oracle: fraction of random unit-vector pairs in 128-d with cosine distance > 0.5
    rng = np.random.default_rng(12345)
    a = rng.standard_normal((100_000, 128))
    b = rng.standard_normal((100_000, 128))
    cos = np.sum(a * b, axis=1) / np.linalg.norm(a, axis=1) / np.linalg.norm(b, axis=1)
    assert np.mean(1 - cos > 0.5) >= 0.999
    # generator: base vectors of distinct identities behave like random directions
    base = np.stack([synth_embedding(i, 0.0) for i in range(1, 401)])
    d = 1 - base @ base.T
    far = d[np.triu_indices(len(base), 1)] > 0.5
    assert far.mean() >= 0.999


def test_same_identity_closer_than_cross_identity():
    rng = np.random.default_rng(2024)
    wins = 0
    for t in range(10_000):
        i, j = 2 * t + 1, 2 * t + 2
        ref = synth_embedding(i, 0.05, rng)
        wins += cosine_distance(ref, synth_embedding(i, 0.05, rng)) < cosine_distance(ref, synth_embedding(j, 0.05, rng))
    assert wins >= 9_900


def test_histogram_embedding():
    patch = np.full((8, 8), 200, dtype=np.uint8)
    h = histogram_embedding(patch)
    assert h.shape == (16,) and h[200 // 16] == 1.0
