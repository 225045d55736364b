"""Autocorrelation models for a unit-variance Rayleigh fading process.

Two laws are supported: the first-order Gauss-Markov process, whose
autocorrelation is ``alpha**|l|``, and Jakes' model, whose sampled
autocorrelation is ``J0(2*pi*f_d*T_s*|l|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "GaussMarkov",
    "Jakes",
    "FadingModel",
    "bessel_j0",
    "autocorrelation",
    "autocovariance_matrix",
]


@dataclass(frozen=True)
class GaussMarkov:
    """First-order Gauss-Markov fading, ``R_i = alpha R_{i-1} + Z_i``."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha}")


@dataclass(frozen=True)
class Jakes:
    """Jakes' model sampled at the symbol period."""

    doppler_hz: float
    symbol_period_s: float

    def __post_init__(self):
        if not self.doppler_hz > 0:
            raise ValueError(f"doppler_hz must be positive, got {self.doppler_hz}")
        if not self.symbol_period_s > 0:
            raise ValueError(
                f"symbol_period_s must be positive, got {self.symbol_period_s}")

    @classmethod
    def from_sampling_rate(cls, doppler_hz: float, sampling_hz: float) -> "Jakes":
        return cls(doppler_hz, 1.0 / sampling_hz)

    @property
    def normalized_doppler(self) -> float:
        return self.doppler_hz * self.symbol_period_s


FadingModel = Union[GaussMarkov, Jakes]

# Below this the power series loses at most ~4e-13 to cancellation; above it
# the smallest asymptotic term is below 1e-11.
_SERIES_LIMIT = 12.0


def _j0_series(x: np.ndarray) -> np.ndarray:
    q = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 80):
        term = term * q / (k * k)
        total = total + term
        if np.all(np.abs(term) < 1e-18):
            break
    return total


def _j0_asymptotic(x: np.ndarray) -> np.ndarray:
    # Hankel expansion, each series truncated at its smallest term
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    mu = 0.0  # 4 nu^2 for nu = 0
    a = np.ones_like(x)  # running a_n / x^n
    done = np.zeros(x.shape, dtype=bool)
    prev = np.full(x.shape, np.inf)
    for n in range(0, 60):
        if n > 0:
            a = a * (mu - (2 * n - 1) ** 2) / (n * 8.0 * x)
        mag = np.abs(a)
        done |= mag > prev
        live = ~done
        if not live.any():
            break
        sign = -1.0 if (n // 2) % 2 else 1.0
        if n % 2 == 0:
            p = np.where(live, p + sign * a, p)
        else:
            q = np.where(live, q + sign * a, q)
        prev = np.where(live, mag, prev)
    chi = x - 0.25 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j0(x):
    """Zeroth-order Bessel function of the first kind.

    Accurate to about 1e-11 absolute for moderate arguments.  Accepts
    scalars or arrays and returns the same kind.
    """
    arr = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    small = arr <= _SERIES_LIMIT
    if small.any():
        out[small] = _j0_series(arr[small])
    if (~small).any():
        out[~small] = _j0_asymptotic(arr[~small])
    if np.ndim(x) == 0:
        return float(out)
    return out


def autocorrelation(model: FadingModel, lag):
    """Normalized autocorrelation of the fading process at integer ``lag``.

    Works elementwise on integer arrays.
    """
    lag = np.abs(np.asarray(lag))
    if isinstance(model, GaussMarkov):
        out = np.power(float(model.alpha), lag.astype(float))
    elif isinstance(model, Jakes):
        out = bessel_j0(2.0 * math.pi * model.normalized_doppler * lag.astype(float))
    else:
        raise TypeError(f"unknown fading model {model!r}")
    if np.ndim(out) == 0:
        return float(out)
    return np.asarray(out)


def autocovariance_matrix(model: FadingModel, indices: Sequence[int]) -> np.ndarray:
    """Autocovariance of ``R`` sampled at ``indices``.

    Entry ``(m, n)`` is ``autocorrelation(model, indices[m] - indices[n])``.
    """
    idx = np.asarray(indices, dtype=int)
    if idx.ndim != 1:
        raise ValueError("indices must be one-dimensional")
    if len(np.unique(idx)) != len(idx):
        raise ValueError("indices must be distinct")
    lags = idx[:, None] - idx[None, :]
    return np.asarray(autocorrelation(model, lags), dtype=float).reshape(lags.shape)
