"""Binary-input mutual information through an imperfectly estimated channel.

Given the estimate ``r`` and the error variance ``v``, the output is
``Y | X=x ~ CN(r x, v x^2 + s)``.  For real mass points ``m1 < 0 < m2``
the output law is a two-component circular Gaussian mixture whose means
lie on the line through ``r``, so only ``|r|`` matters.

Quadrature
----------
The mixture term ``E[log(p_i + p_j f_j/f_i)]`` is integrated for both
components in the coordinates of the *narrower* component, using the
change of measure ``E_w[g] = E_n[(f_w/f_n) g]`` for the wider one.  The
integrand then varies on the scale of the tensor Gauss-Hermite grid.  The
expectation over ``|r|^2 ~ (1-v) Exp(1)`` uses Gauss-Legendre nodes on
``log |r|^2`` so that sharp transitions at small ``|r|`` are resolved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize

__all__ = [
    "BinaryInput",
    "Quadrature",
    "DEFAULT_QUADRATURE",
    "binary_entropy",
    "conditional_mi",
    "expected_mi",
    "optimize_isub",
    "to_unit",
]

LN2 = math.log(2.0)


def to_unit(nats, unit: str):
    if unit == "nats":
        return nats
    if unit == "bits":
        return nats / LN2
    raise ValueError(f"rate unit must be 'bits' or 'nats', got {unit!r}")


@dataclass(frozen=True)
class BinaryInput:
    """Two real mass points: ``m1`` with probability ``p1``, ``m2`` otherwise."""

    m1: float
    m2: float
    p1: float

    def __post_init__(self):
        if not 0.0 <= self.p1 <= 1.0:
            raise ValueError(f"p1 must be a probability, got {self.p1}")

    @property
    def p2(self) -> float:
        return 1.0 - self.p1

    @property
    def power(self) -> float:
        return self.p1 * self.m1 ** 2 + self.p2 * self.m2 ** 2

    @property
    def degenerate(self) -> bool:
        return self.m1 == self.m2 or self.p1 in (0.0, 1.0)

    @classmethod
    def from_params(cls, P: float, p1: float, t: float) -> "BinaryInput":
        """Input meeting ``E|X|^2 = P`` with ``m1 = -t sqrt(P)``, ``0 < t <= 1``."""
        m1 = -t * math.sqrt(P)
        m2 = math.sqrt(P * max(1.0 - p1 * t * t, 0.0) / (1.0 - p1))
        return cls(m1, m2, p1)


@dataclass(frozen=True)
class Quadrature:
    """Node counts: real and imaginary output axes, estimate magnitude."""

    n_re: int = 32
    n_im: int = 20
    n_mag: int = 40
    log_mag_lo: float = -18.0
    log_mag_hi: float = 3.9

    def refined(self, factor: int = 2) -> "Quadrature":
        return Quadrature(self.n_re * factor, self.n_im * factor, self.n_mag * factor,
                          self.log_mag_lo, self.log_mag_hi)

    @cached_property
    def output_nodes(self):
        """Real-axis nodes, squared imaginary-axis nodes and tensor weights.

        The integrand is even in the imaginary coordinate, so mirrored
        Gauss-Hermite nodes are folded together.
        """
        tu, wu = hermgauss(self.n_re)
        tw, ww = hermgauss(self.n_im)
        keep = tw >= 0
        ww = np.where(tw > 0, 2.0 * ww, ww)[keep]
        weights = np.outer(wu, ww) / math.pi
        return tu[:, None], (tw[keep] ** 2)[None, :], weights

    @cached_property
    def magnitude_nodes(self):
        """Nodes ``e`` and weights for ``E[g(e)]``, ``e ~ Exp(1)``."""
        x, w = leggauss(self.n_mag)
        half = 0.5 * (self.log_mag_hi - self.log_mag_lo)
        x = self.log_mag_lo + (x + 1.0) * half
        e = np.exp(x)
        return e, w * half * e * np.exp(-e)


DEFAULT_QUADRATURE = Quadrature()


def binary_entropy(p, unit: str = "bits"):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log(p), 0.0)
              + np.where(p < 1, (1 - p) * np.log1p(-p), 0.0))
    return to_unit(h if h.ndim else float(h), unit)


def _check_channel(v: float, noise_var: float):
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"error variance must lie in [0, 1], got {v}")
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")


def _cond_mi_nats(m1, m2, p1, rho, v, noise_var, quad: Quadrature):
    """Vectorized core: ``m1, m2, p1`` of shape ``(B,)``, ``rho`` of shape
    ``(B, L)`` or ``(L,)``; returns ``(B, L)`` in nats."""
    m1, m2, p1 = (np.asarray(a, dtype=float)[:, None] for a in (m1, m2, p1))
    rho = np.broadcast_to(np.asarray(rho, dtype=float), np.broadcast_shapes(
        m1.shape, np.shape(rho)))
    p2 = 1.0 - p1
    s1 = v * m1 ** 2 + noise_var
    s2 = v * m2 ** 2 + noise_var
    first_narrow = s1 <= s2
    mn = np.where(first_narrow, m1, m2)
    mw = np.where(first_narrow, m2, m1)
    pn = np.where(first_narrow, p1, p2)
    pw = np.where(first_narrow, p2, p1)
    sn = np.minimum(s1, s2)
    sw = np.maximum(s1, s2)

    ta, tb2, W = quad.output_nodes
    e4 = (..., None, None)
    d = (rho * (mn - mw))[e4]
    sn4, sw4 = sn[e4], sw[e4]
    # log(f_w / f_n) at y = mu_n + sqrt(sn) z
    log_l = (np.log(sn4 / sw4) + ta ** 2 - (d + np.sqrt(sn4) * ta) ** 2 / sw4
             + tb2 * (1.0 - sn4 / sw4))
    with np.errstate(divide="ignore"):
        log_ratio = np.log(pw) - np.log(pn)
    x = log_ratio[e4] + log_l
    # softplus(x) and softplus(-x) share log1p(exp(-|x|))
    tail = np.log1p(np.exp(-np.abs(x)))
    narrow_term = np.maximum(x, 0.0) + tail
    wide_term = np.exp(log_l) * (np.maximum(-x, 0.0) + tail)
    mix = (pn[e4] * narrow_term + pw[e4] * wide_term) * W
    h_x = np.asarray(binary_entropy(p1, unit="nats"))
    return h_x - mix.sum(axis=(-2, -1))


def conditional_mi(inp: BinaryInput, est_magnitude: float, v: float, noise_var: float,
                   quad: Quadrature = DEFAULT_QUADRATURE, unit: str = "bits") -> float:
    """``I(X; Y | R_hat = r)`` for ``|r| = est_magnitude``."""
    _check_channel(v, noise_var)
    if est_magnitude < 0:
        raise ValueError("est_magnitude is a magnitude and must be >= 0")
    if inp.degenerate:
        return 0.0
    val = _cond_mi_nats([inp.m1], [inp.m2], [inp.p1], [est_magnitude], v, noise_var,
                        quad)[0, 0]
    return float(to_unit(max(val, 0.0), unit))


def _expected_mi_nats(m1, m2, p1, v, noise_var, quad: Quadrature, chunk: int = 16):
    m1, m2, p1 = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (m1, m2, p1))
    out = np.empty(len(m1))
    if v >= 1.0:
        rho, w = np.zeros(1), np.ones(1)
    else:
        e, w = quad.magnitude_nodes
        rho = np.sqrt((1.0 - v) * e)
    for start in range(0, len(m1), chunk):
        sl = slice(start, start + chunk)
        out[sl] = _cond_mi_nats(m1[sl], m2[sl], p1[sl], rho, v, noise_var, quad) @ w
    return np.maximum(out, 0.0)


def expected_mi(inp: BinaryInput, v: float, noise_var: float,
                quad: Quadrature = DEFAULT_QUADRATURE, unit: str = "bits") -> float:
    """``E_r[I(X; Y | R_hat = r)]`` with ``R_hat ~ CN(0, 1 - v)``."""
    _check_channel(v, noise_var)
    if inp.degenerate:
        return 0.0
    val = _expected_mi_nats([inp.m1], [inp.m2], [inp.p1], v, noise_var, quad)[0]
    return float(to_unit(val, unit))


# Coarse multi-start lattice over (logit p1, t) with m1 = -t sqrt(P).
_COARSE_LOGIT = np.linspace(-1.0, 7.0, 9)
_COARSE_T = np.linspace(0.1, 1.0, 10)
_BOUNDS = [(-6.0, 14.0), (1e-6, 1.0)]
_RESTARTS = 3


def _sigmoid(a):
    return 1.0 / (1.0 + np.exp(-a))


def _params_to_masses(P, a, t):
    p1 = _sigmoid(a)
    m1 = -t * np.sqrt(P)
    m2 = np.sqrt(P * np.maximum(1.0 - p1 * t * t, 0.0) / (1.0 - p1))
    return m1, m2, p1


def optimize_isub(P: float, v: float, noise_var: float,
                  quad: Quadrature = DEFAULT_QUADRATURE,
                  unit: str = "bits") -> tuple[BinaryInput, float]:
    """Maximize expected MI over binary inputs with ``E|X|^2 = P``.

    Coarse lattice search over ``(p1, m1)``, then bounded Nelder-Mead from
    the three best lattice points.  Returns the maximizing input and the
    rate ``I_sub(P, v)``.
    """
    if P < 0:
        raise ValueError(f"power must be non-negative, got {P}")
    _check_channel(v, noise_var)
    if P == 0:
        return BinaryInput(0.0, 0.0, 0.5), 0.0

    A, Tt = np.meshgrid(_COARSE_LOGIT, _COARSE_T, indexing="ij")
    A, Tt = A.ravel(), Tt.ravel()
    coarse = _expected_mi_nats(*_params_to_masses(P, A, Tt), v, noise_var,
                               _coarse_rule(quad))
    order = np.lexsort((np.arange(len(coarse)), -coarse))

    def objective(x):
        m1, m2, p1 = _params_to_masses(P, x[0], x[1])
        return -_expected_mi_nats([m1], [m2], [p1], v, noise_var, quad)[0]

    best_x = np.array([A[order[0]], Tt[order[0]]])
    best_f = -coarse[order[0]]
    for idx in order[:_RESTARTS]:
        res = minimize(objective, [A[idx], Tt[idx]], method="Nelder-Mead",
                       bounds=_BOUNDS,
                       options={"xatol": 1e-4, "fatol": 1e-10, "maxiter": 400,
                                "initial_simplex": _simplex(A[idx], Tt[idx])})
        if res.fun < best_f:
            best_f, best_x = float(res.fun), res.x
    m1, m2, p1 = _params_to_masses(P, best_x[0], best_x[1])
    return BinaryInput(float(m1), float(m2), float(p1)), float(to_unit(-best_f, unit))


def _coarse_rule(quad: Quadrature) -> Quadrature:
    # only ranks lattice points; the refinement uses the full rule
    return Quadrature(max(quad.n_re // 2, 8), max(quad.n_im // 2, 6),
                      max(quad.n_mag // 2, 12), quad.log_mag_lo, quad.log_mag_hi)


def _simplex(a, t):
    dt = -0.05 if t > 0.5 else 0.05
    return np.array([[a, t], [a + 0.4, t], [a, t + dt]])
