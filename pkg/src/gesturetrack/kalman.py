"""Constant-velocity Kalman filter over center-format box state.

State layout is ``(x, y, w, h, vx, vy, vw, vh)``; the observation is the box
``(x, y, w, h)``. Noise standard deviations scale with the box height unless a
:class:`MotionModel` carries fixed ``Q``/``R`` matrices.

The single-state functions (:func:`initiate`, :func:`predict`, :func:`update`,
:func:`gating_distance`) are thin wrappers over batched kernels operating on
stacked ``(N, 8)`` means and ``(N, 8, 8)`` covariances.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

STATE_DIM = 8
MEAS_DIM = 4
MAX_CONDITION = 1e12


class FilterError(ArithmeticError):
    """Base class for numerical failures of the filter."""


class DivergenceError(FilterError):
    """A predicted mean or covariance is no longer finite."""


class SingularInnovationError(FilterError):
    """The innovation covariance is too ill-conditioned to invert."""


@dataclass(frozen=True, eq=False)
class KalmanTrackState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float).reshape(STATE_DIM)
        cov = np.array(self.covariance, dtype=float).reshape(STATE_DIM, STATE_DIM)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @classmethod
    def trusted(cls, mean: np.ndarray, covariance: np.ndarray) -> "KalmanTrackState":
        """Wrap arrays already known to have the right shape and dtype, without copying."""
        state = object.__new__(cls)
        object.__setattr__(state, "mean", mean)
        object.__setattr__(state, "covariance", covariance)
        return state

    @property
    def box(self) -> np.ndarray:
        return self.mean[:MEAS_DIM].copy()

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.mean)) and np.all(np.isfinite(self.covariance)))


@dataclass(frozen=True, eq=False)
class MotionModel:
    """Transition/observation matrices and noise model.

    ``process_noise`` and ``measurement_noise`` override the height-scaled
    defaults with fixed matrices when given.
    """

    dt: float = 1.0
    std_position: float = 0.05
    std_velocity: float = 0.00625
    init_std_position: float = 0.1
    init_std_velocity: float = 0.0125
    process_noise: Optional[np.ndarray] = None
    measurement_noise: Optional[np.ndarray] = None

    @property
    def F(self) -> np.ndarray:
        f = np.eye(STATE_DIM)
        f[:MEAS_DIM, MEAS_DIM:] = self.dt * np.eye(MEAS_DIM)
        return f

    @property
    def H(self) -> np.ndarray:
        return np.eye(MEAS_DIM, STATE_DIM)

    def Q(self, means: np.ndarray) -> np.ndarray:
        """Process noise for each row of ``means``; shape ``(N, 8, 8)``."""
        means = np.atleast_2d(means)
        if self.process_noise is not None:
            return np.broadcast_to(np.asarray(self.process_noise, float), (len(means), STATE_DIM, STATE_DIM))
        h = means[:, 3]
        std = np.concatenate(
            [np.outer(h, np.full(4, self.std_position)), np.outer(h, np.full(4, self.std_velocity))],
            axis=1,
        )
        return _diag_stack(std**2)

    def R(self, means: np.ndarray) -> np.ndarray:
        """Measurement noise for each row of ``means``; shape ``(N, 4, 4)``."""
        means = np.atleast_2d(means)
        if self.measurement_noise is not None:
            return np.broadcast_to(np.asarray(self.measurement_noise, float), (len(means), MEAS_DIM, MEAS_DIM))
        h = means[:, 3]
        return _diag_stack((np.outer(h, np.full(4, self.std_position))) ** 2)


def _diag_stack(diags: np.ndarray) -> np.ndarray:
    n, d = diags.shape
    out = np.zeros((n, d, d))
    idx = np.arange(d)
    out[:, idx, idx] = diags
    return out


def _symmetrize(covs: np.ndarray) -> np.ndarray:
    return 0.5 * (covs + np.swapaxes(covs, -1, -2))


def initiate_arrays(Z: np.ndarray, model: MotionModel = MotionModel()) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`initiate`: ``(N, 4)`` measurements to ``(N, 8)`` means and ``(N, 8, 8)`` covariances."""
    Z = np.asarray(Z, dtype=float).reshape(-1, MEAS_DIM)
    means = np.concatenate([Z, np.zeros_like(Z)], axis=1)
    h = Z[:, 3:4]
    std = np.concatenate([model.init_std_position * h, model.init_std_velocity * h], axis=1)
    std = np.repeat(std, MEAS_DIM, axis=1)
    return means, _diag_stack(std**2)


def initiate(z: np.ndarray, model: MotionModel = MotionModel()) -> KalmanTrackState:
    """Start a track at measurement ``z`` with zero velocity."""
    means, covs = initiate_arrays(np.asarray(z, dtype=float).reshape(MEAS_DIM), model)
    return KalmanTrackState(means[0], covs[0])


def predict_arrays(means: np.ndarray, covs: np.ndarray, model: MotionModel) -> tuple[np.ndarray, np.ndarray]:
    F = model.F
    with np.errstate(over="ignore", invalid="ignore"):  # callers check finiteness
        new_means = means @ F.T
        new_covs = _symmetrize(F @ covs @ F.T + model.Q(means))
    return new_means, new_covs


def project_arrays(means: np.ndarray, covs: np.ndarray, model: MotionModel) -> tuple[np.ndarray, np.ndarray]:
    """Map states to measurement space: returns ``(H x, H P H^T + R)``."""
    H = model.H
    return means @ H.T, _symmetrize(H @ covs @ H.T + model.R(means))


def innovation_ok(S: np.ndarray) -> np.ndarray:
    """Boolean mask of innovation covariances that are safe to factor."""
    S = np.asarray(S).reshape(-1, MEAS_DIM, MEAS_DIM)
    ok = np.all(np.isfinite(S), axis=(1, 2))
    out = np.zeros(len(S), dtype=bool)
    if ok.any():
        eig = np.linalg.eigvalsh(S[ok])
        lo, hi = eig[:, 0], eig[:, -1]
        out[ok] = (lo > 0) & (hi <= MAX_CONDITION * lo)
    return out


def mahalanobis_sq(residuals: np.ndarray, S: np.ndarray) -> np.ndarray:
    """``r^T S^{-1} r`` for each row of ``residuals`` via a Cholesky solve.

    ``residuals`` is ``(..., M, d)``, ``S`` is ``(..., d, d)``.
    """
    L = np.linalg.cholesky(S)
    sol = np.linalg.solve(L, np.swapaxes(residuals, -1, -2))
    return np.sum(sol**2, axis=-2)


def gating_distances(means: np.ndarray, covs: np.ndarray, Z: np.ndarray, model: MotionModel) -> np.ndarray:
    """Squared Mahalanobis distance between every state and every measurement.

    Rows whose innovation covariance is ill-conditioned come back as ``inf``.
    """
    Z = np.asarray(Z, dtype=float).reshape(-1, MEAS_DIM)
    n = len(means)
    out = np.full((n, len(Z)), np.inf)
    if n == 0 or len(Z) == 0:
        return out
    hx, S = project_arrays(means, covs, model)
    ok = innovation_ok(S)
    if ok.any():
        resid = Z[None, :, :] - hx[ok][:, None, :]
        out[ok] = mahalanobis_sq(resid, S[ok])
    return out


def update_arrays(
    means: np.ndarray, covs: np.ndarray, Z: np.ndarray, model: MotionModel
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched measurement update.

    Returns ``(means, covs, ok)``; rows with ``ok == False`` had a singular
    innovation covariance and are returned unchanged.
    """
    H = model.H
    hx, S = project_arrays(means, covs, model)
    ok = innovation_ok(S)
    new_means = np.array(means, dtype=float, copy=True)
    new_covs = np.array(covs, dtype=float, copy=True)
    if not ok.any():
        return new_means, new_covs, ok
    P = covs[ok]
    L = np.linalg.cholesky(S[ok])
    HP = H @ P
    # K^T = S^{-1} H P, solved through the Cholesky factor
    Kt = np.linalg.solve(np.swapaxes(L, -1, -2), np.linalg.solve(L, HP))
    K = np.swapaxes(Kt, -1, -2)
    y = np.asarray(Z, dtype=float)[ok] - hx[ok]
    new_means[ok] = means[ok] + np.einsum("nij,nj->ni", K, y)
    new_covs[ok] = _symmetrize((np.eye(STATE_DIM) - K @ H) @ P)
    return new_means, new_covs, ok


def predict(state: KalmanTrackState, model: MotionModel = MotionModel()) -> KalmanTrackState:
    """Advance one frame; the control term is identically zero."""
    means, covs = predict_arrays(state.mean[None], state.covariance[None], model)
    if not (np.all(np.isfinite(means)) and np.all(np.isfinite(covs))):
        raise DivergenceError("predicted state is not finite")
    return KalmanTrackState(means[0], covs[0])


def update(state: KalmanTrackState, z: np.ndarray, model: MotionModel = MotionModel()) -> KalmanTrackState:
    means, covs, ok = update_arrays(
        state.mean[None], state.covariance[None], np.asarray(z, float).reshape(1, MEAS_DIM), model
    )
    if not ok[0]:
        raise SingularInnovationError("innovation covariance is singular")
    return KalmanTrackState(means[0], covs[0])


def gating_distance(state: KalmanTrackState, z: np.ndarray, model: MotionModel = MotionModel()) -> float:
    d = gating_distances(state.mean[None], state.covariance[None], np.asarray(z, float), model)[0, 0]
    if not np.isfinite(d):
        raise SingularInnovationError("innovation covariance is singular")
    return float(d)
