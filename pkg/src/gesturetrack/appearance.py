"""Appearance embeddings, per-track galleries and a synthetic embedding source."""
from __future__ import annotations

from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

EMBEDDING_DIM = 128
GALLERY_SIZE = 100
_BASE_SALT = 0x5EED_CAFE


def normalize(v: np.ndarray) -> np.ndarray:
    """Return ``v`` scaled to unit L2 norm as a read-only float array."""
    v = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise ValueError("embedding has non-finite entries")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize a zero embedding")
    out = v / norm
    out.flags.writeable = False
    return out


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``1 - a.b`` for unit vectors, clipped to ``[0, 2]``."""
    return float(np.clip(1.0 - np.dot(a, b), 0.0, 2.0))


class Gallery:
    """Ring buffer of the most recent embeddings of one track."""

    def __init__(self, capacity: int = GALLERY_SIZE, dim: int = EMBEDDING_DIM):
        if capacity < 1:
            raise ValueError("gallery capacity must be positive")
        self.capacity = capacity
        self.dim = dim
        self._buf = np.zeros((min(capacity, 4), dim))  # grows by doubling up to capacity
        self._count = 0
        self._head = 0  # next slot to write once full

    def __len__(self) -> int:
        return self._count

    def append(self, e: np.ndarray) -> None:
        e = np.asarray(e, dtype=float).ravel()
        if e.shape[0] != self.dim:
            raise ValueError(f"embedding dim {e.shape[0]} != gallery dim {self.dim}")
        if self._count < self.capacity:
            if self._count == len(self._buf):
                grown = np.zeros((min(2 * len(self._buf), self.capacity), self.dim))
                grown[: self._count] = self._buf
                self._buf = grown
            self._buf[self._count] = e
            self._count += 1
            self._head = self._count % self.capacity
        else:
            self._buf[self._head] = e
            self._head = (self._head + 1) % self.capacity

    def matrix(self) -> np.ndarray:
        """Stored embeddings as rows, unordered."""
        return self._buf[: self._count]

    def __iter__(self) -> Iterator[np.ndarray]:
        """Oldest first."""
        start = self._head if self._count == self.capacity else 0
        for k in range(self._count):
            yield self._buf[(start + k) % self.capacity].copy()


def gallery_distances(g: Gallery, embeddings: np.ndarray) -> np.ndarray:
    """Minimum cosine distance from the gallery to each row of ``embeddings``."""
    if len(g) == 0:
        raise ValueError("gallery is empty")
    E = np.atleast_2d(embeddings)
    # row-wise reduction, so a row's similarity does not depend on the gallery
    # size (a BLAS product can differ by an ulp) and the minimum is monotone
    sims = np.sum(g.matrix()[:, None, :] * E[None, :, :], axis=-1)
    return np.clip(1.0 - sims.max(axis=0), 0.0, 2.0)


def gallery_distance(g: Gallery, e: np.ndarray) -> float:
    return float(gallery_distances(g, e)[0])


@lru_cache(maxsize=4096)
def _base_vector(identity: int, dim: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([_BASE_SALT, identity & 0xFFFFFFFFFFFFFFFF, dim])))
    return normalize(rng.standard_normal(dim))


def synth_embedding(identity: int, noise_std: float, rng: Optional[np.random.Generator] = None,
                    dim: int = EMBEDDING_DIM) -> np.ndarray:
    """Unit embedding for ``identity``: a hashed base direction plus isotropic noise.

    The base vector depends only on ``identity`` and ``dim``; noise is drawn
    from ``rng`` (required when ``noise_std > 0``).
    """
    if noise_std < 0:
        raise ValueError("noise_std must be nonnegative")
    base = _base_vector(int(identity), dim)
    if noise_std == 0:
        return base
    if rng is None:
        raise ValueError("rng is required when noise_std > 0")
    return normalize(base + noise_std * rng.standard_normal(dim))


def histogram_embedding(patch: np.ndarray, bins: int = 16) -> np.ndarray:
    """16-bin intensity histogram of a grayscale 8-bit crop, unit-normalized."""
    patch = np.asarray(patch)
    if patch.size == 0:
        raise ValueError("empty patch")
    hist, _ = np.histogram(patch.ravel(), bins=bins, range=(0, 256))
    return normalize(hist.astype(float))
