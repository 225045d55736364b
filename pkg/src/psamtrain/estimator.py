"""Error variance of the pilot-based MMSE channel estimate.

The receiver estimates ``R_j`` from the pilots of the current frame
(causal) or of the current and next frame (non-causal).  Because fading
and noise are jointly Gaussian, the MMSE estimate is linear and its error
variance depends only on the fading autocorrelation, the pilot powers
and the noise level, so it can be tabulated offline.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .fading import FadingModel, GaussMarkov, autocorrelation, autocovariance_matrix

__all__ = [
    "CAUSAL",
    "NONCAUSAL",
    "PilotPattern",
    "ErrorProfile",
    "pilot_index_set",
    "error_variance_at",
    "error_variance_profile",
    "causal_error_variance_gm",
]

CAUSAL = "causal"
NONCAUSAL = "noncausal"

_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class PilotPattern:
    """Frame geometry: ``cluster_k`` pilots at the start of each ``spacing_T`` frame."""

    spacing_T: int
    cluster_k: int
    mode: str = CAUSAL
    pilot_powers: tuple = field(default=None)

    def __post_init__(self):
        if not 1 <= self.cluster_k < self.spacing_T:
            raise ValueError(
                f"need 1 <= k < T, got k={self.cluster_k}, T={self.spacing_T}")
        if self.mode not in (CAUSAL, NONCAUSAL):
            raise ValueError(f"mode must be 'causal' or 'noncausal', got {self.mode!r}")
        powers = self.pilot_powers
        if powers is None:
            powers = (1.0,) * self.cluster_k
        powers = tuple(float(p) for p in np.ravel(powers))
        if len(powers) != self.cluster_k:
            raise ValueError(
                f"expected {self.cluster_k} pilot powers, got {len(powers)}")
        if any(p < 0 for p in powers):
            raise ValueError("pilot powers must be non-negative")
        object.__setattr__(self, "pilot_powers", powers)

    @property
    def data_indices(self) -> np.ndarray:
        return np.arange(self.cluster_k, self.spacing_T)


@dataclass(frozen=True)
class ErrorProfile:
    """Estimation error variances ``v_j`` for the data slots ``j = k..T-1``."""

    variances: np.ndarray
    first_index: int

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.first_index, self.first_index + len(self.variances))

    def __len__(self):
        return len(self.variances)


def pilot_index_set(pattern: PilotPattern) -> list[int]:
    """Indices of the pilots the receiver uses.

    The non-causal set appends the next frame's cluster, which repeats the
    same pilot powers.
    """
    k, T = pattern.cluster_k, pattern.spacing_T
    idx = list(range(k))
    if pattern.mode == NONCAUSAL:
        idx += list(range(T, T + k))
    return idx


def _pilot_powers_for_set(pattern: PilotPattern) -> np.ndarray:
    powers = np.asarray(pattern.pilot_powers, dtype=float)
    if pattern.mode == NONCAUSAL:
        powers = np.concatenate([powers, powers])
    return powers


def _clamp(v: np.ndarray) -> np.ndarray:
    if np.any(v < -_CLAMP_TOL) or np.any(v > 1 + _CLAMP_TOL):
        raise FloatingPointError(f"error variance outside [0, 1]: {v}")
    return np.clip(v, 0.0, 1.0)


def error_variance_at(model: FadingModel, pattern: PilotPattern, noise_var: float,
                      indices: Sequence[int]) -> np.ndarray:
    """LLSE error variance of ``R_j`` for arbitrary time indices ``j``.

    ``v_j = 1 - c^T (D A D + s I)^{-1} c`` with ``c_s = sqrt(P_s) rho(j - s)``.
    Zero-power pilots are removed before solving.
    """
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")
    j = np.asarray(indices, dtype=int)
    s_idx = np.asarray(pilot_index_set(pattern), dtype=int)
    powers = _pilot_powers_for_set(pattern)
    keep = powers > 0
    if not keep.any():
        return np.ones(j.shape)
    s_idx, powers = s_idx[keep], powers[keep]
    amp = np.sqrt(powers)
    A = autocovariance_matrix(model, s_idx)
    M = amp[:, None] * A * amp[None, :] + noise_var * np.eye(len(s_idx))
    # columns: one cross-covariance vector per requested index
    C = amp[:, None] * np.asarray(autocorrelation(model, s_idx[:, None] - j[None, :]),
                                  dtype=float).reshape(len(s_idx), len(j))
    X = cho_solve(cho_factor(M, lower=True), C)
    return _clamp(1.0 - np.einsum("ij,ij->j", C, X))


def error_variance_profile(model: FadingModel, pattern: PilotPattern,
                           noise_var: float) -> ErrorProfile:
    """Error variances for every data slot of the frame."""
    v = error_variance_at(model, pattern, noise_var, pattern.data_indices)
    return ErrorProfile(v, pattern.cluster_k)


def causal_error_variance_gm(alpha: float, pattern: PilotPattern,
                             noise_var: float) -> ErrorProfile:
    """Closed form for causal estimation under Gauss-Markov fading.

    ``v_j = 1 - alpha**(2(j-k+1)) * V^T D (D A D + s I)^{-1} D V`` with
    ``V = (alpha**(k-1), ..., alpha, 1)``; the quadratic form is shared by
    every data slot.
    """
    if pattern.mode != CAUSAL:
        raise ValueError("closed form applies to causal estimation only")
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")
    GaussMarkov(alpha)  # validates the range
    k = pattern.cluster_k
    powers = np.asarray(pattern.pilot_powers, dtype=float)
    n = np.arange(k)
    V = alpha ** (k - 1 - n).astype(float)
    A = alpha ** np.abs(n[:, None] - n[None, :]).astype(float)
    amp = np.sqrt(powers)
    DV = amp * V
    M = amp[:, None] * A * amp[None, :] + noise_var * np.eye(k)
    phi = float(DV @ cho_solve(cho_factor(M, lower=True), DV))
    j = pattern.data_indices
    v = 1.0 - alpha ** (2.0 * (j - k + 1)) * phi
    return ErrorProfile(_clamp(v), k)
