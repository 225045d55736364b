"""Brute-force checks of the pilot power-allocation results for causal
estimation under Gauss-Markov fading.

The quantity of interest is

    phi = V^T D (D A D + s I)^{-1} D V,   V = (alpha^(k-1), ..., alpha, 1),

which equals one minus the error variance at the last pilot.  Every data
slot's error variance is ``1 - alpha^(2(j-k+1)) phi``, so maximizing
``phi`` over pilot allocations minimizes all of them at once.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "AllocationReport",
    "TransferReport",
    "LemmaReport",
    "phi",
    "phi_batch",
    "verify_theorem1",
    "check_pairwise_transfers",
    "lemma_objective",
    "verify_lemma1",
    "xi_closed_form",
    "xi_direct",
    "xi_derivative_numerators",
    "phi_from_base",
]

MAX_ENUMERATION = 10 ** 7
MAX_LEMMA_K = 8
_CORNER_TOL = 1e-10


def _gm_structures(alpha: float, k: int):
    n = np.arange(k)
    V = alpha ** (k - 1 - n).astype(float)
    A = alpha ** np.abs(n[:, None] - n[None, :]).astype(float)
    return V, A


def phi_batch(alpha: float, powers: np.ndarray, noise_var: float) -> np.ndarray:
    """``phi`` for each row of ``powers`` (shape ``(N, k)``)."""
    powers = np.atleast_2d(np.asarray(powers, dtype=float))
    if np.any(powers < 0):
        raise ValueError("pilot powers must be non-negative")
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    k = powers.shape[1]
    V, A = _gm_structures(alpha, k)
    amp = np.sqrt(powers)
    M = amp[:, :, None] * A[None] * amp[:, None, :] + noise_var * np.eye(k)
    b = amp * V
    x = np.linalg.solve(M, b[..., None])[..., 0]
    return np.einsum("ij,ij->i", b, x)


def phi(alpha: float, powers, noise_var: float) -> float:
    return float(phi_batch(alpha, np.asarray(powers, dtype=float)[None, :], noise_var)[0])


@dataclass
class AllocationReport:
    k: int
    budget: float
    grid_step: float
    best_allocation: np.ndarray
    best_phi: float
    corner_phi: float
    is_corner_optimal: bool
    n_points: int


def _compositions(n: int, k: int) -> np.ndarray:
    """All non-negative integer k-vectors summing to n (stars and bars)."""
    if k == 1:
        return np.array([[n]])
    bars = np.array(list(itertools.combinations(range(n + k - 1), k - 1)))
    edges = np.concatenate([np.full((len(bars), 1), -1), bars,
                            np.full((len(bars), 1), n + k - 1)], axis=1)
    return np.diff(edges, axis=1) - 1


def verify_theorem1(alpha: float, k: int, budget: float, noise_var: float,
                    grid_step: float, chunk: int = 200_000) -> AllocationReport:
    """Enumerate the allocation simplex at resolution ``grid_step`` and
    compare the best ``phi`` with the all-on-last-pilot corner."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = int(round(budget / grid_step))
    if n < 1 or abs(n * grid_step - budget) > 1e-9 * max(budget, 1.0):
        raise ValueError(f"grid_step {grid_step} does not divide budget {budget}")
    count = math.comb(n + k - 1, k - 1)
    if count > MAX_ENUMERATION:
        raise ValueError(f"enumeration of {count} allocations exceeds {MAX_ENUMERATION}")
    allocs = _compositions(n, k) * (budget / n)
    values = np.concatenate([phi_batch(alpha, allocs[i:i + chunk], noise_var)
                             for i in range(0, len(allocs), chunk)])
    best = int(np.argmax(values))
    corner = np.zeros(k)
    corner[-1] = budget
    corner_phi = phi(alpha, corner, noise_var)
    return AllocationReport(
        k=k, budget=budget, grid_step=grid_step,
        best_allocation=allocs[best], best_phi=float(values[best]),
        corner_phi=corner_phi,
        is_corner_optimal=bool(corner_phi >= values[best] - _CORNER_TOL),
        n_points=len(allocs),
    )


@dataclass
class TransferReport:
    n_trials: int
    n_violations: int
    worst_change: float


def check_pairwise_transfers(alpha: float, k: int, budget: float, noise_var: float,
                             n_trials: int = 500, rng=None, tol: float = 1e-12
                             ) -> TransferReport:
    """Move a random share of a random earlier pilot's power onto the last
    pilot and record whether ``phi`` ever drops."""
    if k < 2:
        return TransferReport(0, 0, 0.0)
    rng = np.random.default_rng(rng)
    alloc = rng.dirichlet(np.ones(k), size=n_trials) * budget
    src = rng.integers(0, k - 1, size=n_trials)
    rows = np.arange(n_trials)
    delta = rng.uniform(0.0, 1.0, size=n_trials) * alloc[rows, src]
    moved = alloc.copy()
    moved[rows, src] -= delta
    moved[:, -1] += delta
    change = phi_batch(alpha, moved, noise_var) - phi_batch(alpha, alloc, noise_var)
    return TransferReport(n_trials, int(np.sum(change < -tol)), float(change.min()))


def lemma_objective(alpha: float, diag_entries) -> np.ndarray:
    """``V^T (A + U)^{-1} V`` for each row of diagonal entries."""
    x = np.atleast_2d(np.asarray(diag_entries, dtype=float))
    V, A = _gm_structures(alpha, x.shape[1])
    M = A[None] + x[:, :, None] * np.eye(x.shape[1])[None]
    sol = np.linalg.solve(M, np.broadcast_to(V, x.shape)[..., None])[..., 0]
    return sol @ V


@dataclass
class LemmaReport:
    x_values: np.ndarray
    max_value: float
    nonincreasing_value: float
    holds: bool
    ties_only_equal: bool
    n_permutations: int


def _lemma_objective_exact(alpha: float, x) -> Fraction:
    """``V^T (A + U)^{-1} V`` in exact rational arithmetic (floats are exact
    rationals), by Gaussian elimination."""
    k = len(x)
    a = Fraction(float(alpha))
    pw = [a ** n for n in range(k)]
    M = [[pw[abs(i - j)] + (Fraction(float(x[i])) if i == j else 0) for j in range(k)]
         + [pw[k - 1 - i]] for i in range(k)]
    for c in range(k):
        piv = next(r for r in range(c, k) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        for r in range(c + 1, k):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [u - f * w for u, w in zip(M[r], M[c])]
    sol = [Fraction(0)] * k
    for r in range(k - 1, -1, -1):
        sol[r] = (M[r][k] - sum(M[r][j] * sol[j] for j in range(r + 1, k))) / M[r][r]
    return sum(pw[k - 1 - i] * sol[i] for i in range(k))


def verify_lemma1(alpha: float, x_values, rel_tol: float = 1e-9) -> LemmaReport:
    """Check that arranging ``x_values`` in non-increasing order on the
    diagonal maximizes the quadratic form over all permutations.

    Floating point screens the permutations; every arrangement within
    ``rel_tol`` of the best is then compared exactly, so near-ties at small
    ``alpha`` (differences of order ``alpha**(2k)``) are resolved.
    """
    x = np.asarray(x_values, dtype=float)
    k = len(x)
    if k > MAX_LEMMA_K:
        raise ValueError(f"k={k} exceeds the permutation limit {MAX_LEMMA_K}")
    if np.any(x < 0):
        raise ValueError("diagonal entries must be non-negative")
    perms = np.array(list(itertools.permutations(range(k))))
    arrangements = x[perms]
    q = lemma_objective(alpha, arrangements)
    desc = np.sort(x)[::-1]
    q_desc = float(lemma_objective(alpha, desc[None, :])[0])
    q_max = float(q.max())
    close = np.unique(arrangements[q >= q_max - rel_tol * max(abs(q_max), 1.0)], axis=0)
    exact = [_lemma_objective_exact(alpha, row) for row in close]
    best = max(exact)
    exact_desc = _lemma_objective_exact(alpha, desc)
    winners = close[[e == best for e in exact]]
    return LemmaReport(
        x_values=x, max_value=q_max, nonincreasing_value=q_desc,
        holds=bool(exact_desc == best),
        ties_only_equal=bool(np.all(winners == desc)),
        n_permutations=len(perms),
    )


def xi_closed_form(x_a: float, x_b: float, alpha: float, phi_km2: float) -> float:
    """Rational form of the last-two-pilot term, ``x_a`` on slot ``k-2`` and
    ``x_b`` on slot ``k-1``."""
    a2 = 1.0 - alpha ** 2 * phi_km2
    a4 = 1.0 - alpha ** 4 * phi_km2
    c = alpha - alpha ** 3 * phi_km2
    num = c * c * x_b + a4 * a4 * x_a + a2 * a4 * (1.0 - alpha ** 2)
    den = x_a * x_b + a4 * x_a + a2 * x_b + a2 * (1.0 - alpha ** 2)
    return num / den


def phi_from_base(alpha: float, base_matrix) -> float:
    """``V^T E^{-1} V`` for a leading block ``E = A + U`` (0 when empty)."""
    E = np.atleast_2d(np.asarray(base_matrix, dtype=float))
    m = E.shape[0] if E.size else 0
    if m == 0:
        return 0.0
    V, _ = _gm_structures(alpha, m)
    return float(V @ np.linalg.inv(E) @ V)


def xi_direct(x_a: float, x_b: float, alpha: float, base_matrix) -> float:
    """Same quantity from the full ``k x k`` matrix and an explicit inverse:
    ``V_k^T (A_k + U_k)^{-1} V_k - alpha^4 V^T E^{-1} V``."""
    E = np.asarray(base_matrix, dtype=float)
    m = E.shape[0] if E.size else 0
    k = m + 2
    V_k, A_k = _gm_structures(alpha, k)
    full = A_k.copy()
    if m:
        full[:m, :m] = E
    full[m, m] += x_a
    full[m + 1, m + 1] += x_b
    phi_k = float(V_k @ np.linalg.inv(full) @ V_k)
    return phi_k - alpha ** 4 * phi_from_base(alpha, E if m else np.zeros((0, 0)))


def xi_derivative_numerators(x_a: float, x_b: float, alpha: float,
                             phi_km2: float) -> tuple[float, float]:
    """Numerators of the partial derivatives of ``xi`` in ``x_a`` and ``x_b``
    (the common denominator is the squared denominator of ``xi``)."""
    a2 = 1.0 - alpha ** 2 * phi_km2
    a4 = 1.0 - alpha ** 4 * phi_km2
    d_a = -alpha ** 2 * a2 ** 2 * x_b ** 2
    d_b = -(a2 * (1.0 - alpha ** 2) + a4 * x_a) ** 2
    return d_a, d_b
