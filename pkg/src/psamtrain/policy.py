"""Training design under the four transmission policies.

Policy I sends every symbol at the average power.  Policy II allows one
flat level for the pilots and another for the data.  Policy III keeps the
pilots flat but lets each data symbol have its own power.  Policy IV lets
every symbol, pilot or data, have its own power.  In all cases the frame
average must not exceed ``p_avg``, and the achievable rate per symbol is

    (1/T) * sum_{j=k}^{T-1} I_sub(P_j, v_j)

read off an :class:`~psamtrain.grid.IsubGrid`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .estimator import CAUSAL, PilotPattern, error_variance_at, error_variance_profile
from .fading import FadingModel, GaussMarkov
from .grid import IsubGrid, interpolate
from .mi import BinaryInput, DEFAULT_QUADRATURE, optimize_isub

__all__ = [
    "FramePlan",
    "PolicyResult",
    "frame_rate",
    "optimize_policy_I",
    "optimize_policy_II",
    "optimize_policy_III",
    "optimize_policy_IV",
    "optimize_all",
    "no_training_baseline",
    "attach_inputs",
    "percent_improvements",
]

# search defaults
K_MAX = 6
T_MAX = 120
PATIENCE = 15
COARSE_SCAN = 32
GOLDEN_TOL = 1e-7
TRANSFER_TOL = 1e-8
SEARCH_TRANSFER_TOL = 1e-6
_IMPROVE = 1e-13


@dataclass
class FramePlan:
    pattern: PilotPattern
    data_powers: np.ndarray

    def __post_init__(self):
        self.data_powers = np.asarray(self.data_powers, dtype=float)
        n_data = self.pattern.spacing_T - self.pattern.cluster_k
        if self.data_powers.shape != (n_data,):
            raise ValueError(f"expected {n_data} data powers, got {self.data_powers.shape}")
        if np.any(self.data_powers < 0):
            raise ValueError("data powers must be non-negative")

    @property
    def pilot_powers(self) -> np.ndarray:
        return np.asarray(self.pattern.pilot_powers)

    @property
    def frame_powers(self) -> np.ndarray:
        return np.concatenate([self.pilot_powers, self.data_powers])

    @property
    def average_power(self) -> float:
        return float(self.frame_powers.sum() / self.pattern.spacing_T)


@dataclass
class PolicyResult:
    policy_id: str
    plan: FramePlan
    rate: float
    baseline_rate: float
    variances: np.ndarray
    rate_unit: str
    per_slot_inputs: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    @property
    def n_pilots(self) -> int:
        return self.plan.pattern.cluster_k

    @property
    def spacing(self) -> int:
        return self.plan.pattern.spacing_T

    @property
    def training_beneficial(self) -> bool:
        return self.rate > self.baseline_rate

    def best_rate_for_k(self, k: int) -> float:
        rates = [r for kk, _, r in self.trace if kk == k]
        return max(rates) if rates else float("nan")


def _check_grid(grid: IsubGrid, noise_var: float):
    if not math.isclose(grid.noise_var, noise_var, rel_tol=1e-9):
        raise ValueError(
            f"grid was built for noise_var={grid.noise_var}, not {noise_var}")


def frame_rate(plan: FramePlan, model: FadingModel, noise_var: float,
               grid: IsubGrid) -> float:
    """Achievable rate per symbol of one frame, pilots included in the 1/T."""
    _check_grid(grid, noise_var)
    v = error_variance_profile(model, plan.pattern, noise_var).variances
    if np.any(plan.data_powers > grid.p_max * (1 + 1e-12)):
        raise ValueError(f"data power above grid range {grid.p_max}")
    return float(np.sum(interpolate(grid, plan.data_powers, v)) / plan.pattern.spacing_T)


def no_training_baseline(p_avg: float, noise_var: float, grid: IsubGrid) -> float:
    """Rate with no pilots at all: every symbol carries data without CSI."""
    _check_grid(grid, noise_var)
    return float(interpolate(grid, p_avg, 1.0))


class _SlotCurves:
    """``P -> I_sub(P, v_i)`` for a fixed set of error variances.

    Interpolating along ``v`` first leaves one piecewise-linear curve in
    ``P`` per slot, which equals the bilinear interpolant.
    """

    def __init__(self, grid: IsubGrid, v: np.ndarray):
        v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
        va = grid.v_axis
        j = np.clip(np.searchsorted(va, v, side="right") - 1, 0, len(va) - 2)
        fv = (v - va[j]) / (va[j + 1] - va[j])
        z = grid.values
        c = (1 - fv)[:, None] * z[:, j].T + fv[:, None] * z[:, j + 1].T
        self.p_axis = grid.p_axis
        self.top = len(self.p_axis) - 2
        self.nodes = c[:, :-1]
        self.slopes = np.diff(c, axis=1) / np.diff(self.p_axis)
        self.rows = np.arange(len(v))

    def __call__(self, P, rows=None):
        # P >= 0; beyond p_max the last segment is extended (callers mask it)
        rows = self.rows if rows is None else rows
        i = np.minimum(np.searchsorted(self.p_axis, P, side="right") - 1, self.top)
        return self.nodes[rows, i] + self.slopes[rows, i] * (P - self.p_axis[i])


def _allocate_data(curves: _SlotCurves, budget: float, p_cap: float,
                   start: Optional[np.ndarray] = None,
                   tol: float = TRANSFER_TOL,
                   first_step: Optional[float] = None) -> tuple[np.ndarray, float]:
    """Maximize ``sum_i curves_i(P_i)`` with ``sum P_i = budget``.

    Pairwise transfers of ``delta`` from the slot that loses least to the
    slot that gains most, halving ``delta`` whenever no transfer helps.
    The budget is preserved exactly by every move.
    """
    n = len(curves.rows)
    if start is None:
        P = np.full(n, budget / n)
    else:
        P = np.asarray(start, dtype=float).copy()
    val = curves(P)
    delta = 0.25 * budget / n if first_step is None else first_step
    pair = np.empty(2, dtype=int)
    while delta > tol:
        while True:
            up = np.where(P + delta <= p_cap, curves(P + delta) - val, -np.inf)
            down = np.where(P >= delta, val - curves(np.maximum(P - delta, 0.0)), np.inf)
            i = int(np.argmax(up))
            down_i = down[i]
            down[i] = np.inf
            j = int(np.argmin(down))
            down[i] = down_i
            if not up[i] - down[j] > _IMPROVE:
                break
            P[i] += delta
            P[j] -= delta
            pair[0], pair[1] = i, j
            val[pair] = curves(P[pair], pair)
        delta *= 0.5
    return P, float(val.sum())


def _golden_max(f: Callable[[float], float], lo: float, hi: float,
                tol: float) -> tuple[float, float]:
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _scan_then_golden(f: Callable[[float], float], upper: float, lower: float = 0.0,
                      extra: Iterable[float] = (), n_scan: int = COARSE_SCAN,
                      rel_tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Maximize ``f`` on ``(lower, upper]``: uniform scan plus extra points,
    then golden section in the bracket around the best scanned point."""
    xs = lower + (upper - lower) * np.arange(1, n_scan + 1) / n_scan
    xs = np.unique(np.concatenate([xs, [x for x in extra if lower < x <= upper]]))
    fs = np.array([f(float(x)) for x in xs])
    b = int(np.argmax(fs))
    best_x, best_f = float(xs[b]), float(fs[b])
    left = float(xs[b - 1]) if b > 0 else lower
    right = float(xs[b + 1]) if b + 1 < len(xs) else float(xs[b])
    if right > left:
        x, fx = _golden_max(f, left, right, rel_tol * max(upper, 1e-12))
        if fx > best_f + _IMPROVE:
            best_x, best_f = x, fx
    return best_x, best_f


class _Frame:
    """Evaluation context for one ``(k, T)`` pair."""

    def __init__(self, model, mode, k, T, noise_var, grid, p_avg):
        self.model, self.mode, self.k, self.T = model, mode, k, T
        self.noise_var, self.grid, self.p_avg = noise_var, grid, p_avg
        self.budget = T * p_avg
        self.n_data = T - k
        self._cache = {}

    def pattern(self, pilots) -> PilotPattern:
        return PilotPattern(self.T, self.k, self.mode, tuple(float(p) for p in pilots))

    def variances(self, pilots) -> np.ndarray:
        key = tuple(float(p) for p in pilots)
        if key not in self._cache:
            pat = self.pattern(key)
            self._cache[key] = error_variance_at(self.model, pat, self.noise_var,
                                                 pat.data_indices)
        return self._cache[key]

    def data_budget(self, pilot_total: float) -> float:
        """What the data symbols get; -1 when the pilots overspend."""
        left = self.budget - float(pilot_total)
        if left < -1e-12 * self.budget:
            return -1.0
        return max(left, 0.0)

    def flat_rate(self, pilots) -> float:
        data = self.data_budget(np.sum(pilots)) / self.n_data
        if data < 0:
            return -np.inf
        v = self.variances(pilots)
        return float(np.sum(interpolate(self.grid, np.full(self.n_data, data), v)) / self.T)

    def data_cap_floor(self) -> float:
        """Smallest total pilot power keeping flat data within the grid."""
        return max(0.0, self.budget - self.n_data * self.grid.p_max)


def _search(make_candidate: Callable[[int, int], Optional[tuple]],
            k_values: Sequence[int], t_max: int, patience: Optional[int]):
    """Sweep ``(k, T)`` with per-``k`` early stopping; deterministic ties
    (first strictly better wins, so smaller k then smaller T)."""
    best = None
    trace = []
    for k in k_values:
        best_k = -np.inf
        stale = 0
        for T in range(k + 1, t_max + 1):
            cand = make_candidate(k, T)
            if cand is None:
                continue
            rate = cand[0]
            trace.append((k, T, rate))
            if best is None or rate > best[0] + _IMPROVE:
                best = cand
            if rate > best_k + _IMPROVE:
                best_k, stale = rate, 0
            else:
                stale += 1
                if patience is not None and stale >= patience:
                    break
    return best, trace


def _result(policy_id, model, mode, noise_var, grid, p_avg, pilots, data, rate, trace):
    pattern = PilotPattern(len(pilots) + len(data), len(pilots), mode, tuple(pilots))
    plan = FramePlan(pattern, np.asarray(data, dtype=float))
    v = error_variance_profile(model, pattern, noise_var).variances
    return PolicyResult(policy_id, plan, float(rate),
                        no_training_baseline(p_avg, noise_var, grid), v,
                        grid.rate_unit, trace=trace)


def _k_values(k_max, k_values):
    if k_values is not None:
        return sorted(int(k) for k in k_values)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    return list(range(1, k_max + 1))


def _check_common(p_avg, noise_var, grid, k_vals, t_max, papr_cap=None):
    _check_grid(grid, noise_var)
    if not p_avg > 0:
        raise ValueError("p_avg must be positive")
    if t_max <= max(k_vals):
        raise ValueError("t_max must exceed k_max")
    if papr_cap is not None and not papr_cap > 0:
        raise ValueError("papr_cap must be positive")


def _incumbent_candidate(frame: _Frame, incumbent: Optional[PolicyResult]):
    """Rate of a previous policy's optimum re-evaluated for this (k, T)."""
    if incumbent is None or (incumbent.n_pilots, incumbent.spacing) != (frame.k, frame.T):
        return None
    return (incumbent.rate, frame.k, frame.T, incumbent.plan.pilot_powers,
            incumbent.plan.data_powers)


def optimize_policy_I(model: FadingModel, p_avg: float, noise_var: float,
                      k_max: int = K_MAX, t_max: int = T_MAX, grid: IsubGrid = None,
                      mode: str = CAUSAL, k_values=None,
                      patience: Optional[int] = PATIENCE) -> PolicyResult:
    """Exhaustive ``(k, T)`` search with every symbol at ``p_avg``."""
    k_vals = _k_values(k_max, k_values)
    _check_common(p_avg, noise_var, grid, k_vals, t_max)

    def candidate(k, T):
        frame = _Frame(model, mode, k, T, noise_var, grid, p_avg)
        pilots = np.full(k, p_avg)
        return (frame.flat_rate(pilots), k, T, pilots, np.full(T - k, p_avg))

    best, trace = _search(candidate, k_vals, t_max, patience)
    rate, k, T, pilots, data = best
    return _result("I", model, mode, noise_var, grid, p_avg, pilots, data, rate, trace)


def _best_flat_training(frame: _Frame, cap: Optional[float]) -> tuple[float, float]:
    upper = frame.budget / frame.k
    if cap is not None:
        upper = min(upper, cap)
    lower = frame.data_cap_floor() / frame.k
    extra = [frame.p_avg] + ([cap] if cap is not None else [])
    return _scan_then_golden(lambda p: frame.flat_rate(np.full(frame.k, p)),
                             upper, lower, extra=extra)


def optimize_policy_II(model: FadingModel, p_avg: float, noise_var: float,
                       k_max: int = K_MAX, t_max: int = T_MAX, grid: IsubGrid = None,
                       papr_cap: Optional[float] = None, mode: str = CAUSAL,
                       k_values=None, patience: Optional[int] = PATIENCE,
                       incumbent: Optional[PolicyResult] = None) -> PolicyResult:
    """Flat pilot level ``P_tr`` and flat data level, budget met with equality.

    ``papr_cap`` bounds ``P_tr`` by ``papr_cap * p_avg``.
    """
    k_vals = _k_values(k_max, k_values)
    _check_common(p_avg, noise_var, grid, k_vals, t_max, papr_cap)
    cap = None if papr_cap is None else papr_cap * p_avg

    def candidate(k, T):
        frame = _Frame(model, mode, k, T, noise_var, grid, p_avg)
        p_tr, rate = _best_flat_training(frame, cap)
        data = frame.data_budget(k * p_tr) / (T - k)
        return (rate, k, T, np.full(k, p_tr), np.full(T - k, data))

    best, trace = _search(candidate, k_vals, t_max, patience)
    best = _prefer_incumbent(best, incumbent, cap, policy="II")
    rate, k, T, pilots, data = best
    return _result("II", model, mode, noise_var, grid, p_avg, pilots, data, rate, trace)


def _prefer_incumbent(best, incumbent: Optional[PolicyResult], cap, policy):
    """A lower policy's optimum is feasible here; keep it if it is better."""
    if incumbent is None or incumbent.rate <= best[0] + _IMPROVE:
        return best
    pilots = incumbent.plan.pilot_powers
    if cap is not None and np.any(pilots > cap * (1 + 1e-12)):
        return best
    if policy in ("II", "III") and np.ptp(pilots) > 0:
        return best
    if policy == "II" and np.ptp(incumbent.plan.data_powers) > 0:
        return best
    return (incumbent.rate, incumbent.n_pilots, incumbent.spacing, pilots,
            incumbent.plan.data_powers)


def _policy_iii_frame(frame: _Frame, cap: Optional[float], tol: float):
    """Best flat pilot level with data powers individually optimized."""
    p_cap = frame.grid.p_max
    solved = {}

    def g(p_tr):
        pilots = np.full(frame.k, p_tr)
        budget = frame.data_budget(frame.k * p_tr)
        curves = _SlotCurves(frame.grid, frame.variances(pilots))
        start, first = None, None
        if solved:
            # warm start from the nearest level already solved
            near = min(solved, key=lambda q: (abs(q - p_tr), q))
            prev = solved[near]
            if prev.sum() > 0:
                start = prev * (budget / prev.sum())
                first = 0.02 * budget / frame.n_data
                if start.max() > p_cap:
                    start, first = None, None
        data, total = _allocate_data(curves, budget, p_cap, start=start, tol=tol,
                                     first_step=first)
        solved[p_tr] = data
        return total / frame.T

    upper = frame.budget / frame.k
    if cap is not None:
        upper = min(upper, cap)
    lower = frame.data_cap_floor() / frame.k
    p_ii, _ = _best_flat_training(frame, cap)
    extra = [frame.p_avg, p_ii] + ([cap] if cap is not None else [])
    p_tr, _ = _scan_then_golden(g, upper, lower, extra=extra, n_scan=12,
                                rel_tol=1e-4)
    pilots = np.full(frame.k, p_tr)
    curves = _SlotCurves(frame.grid, frame.variances(pilots))
    data, total = _allocate_data(curves, frame.data_budget(frame.k * p_tr), p_cap,
                                 start=solved[p_tr], first_step=4 * tol)
    return total / frame.T, pilots, data


def optimize_policy_III(model: FadingModel, p_avg: float, noise_var: float,
                        k_max: int = K_MAX, t_max: int = T_MAX, grid: IsubGrid = None,
                        papr_cap: Optional[float] = None, mode: str = CAUSAL,
                        k_values=None, patience: Optional[int] = PATIENCE,
                        incumbent: Optional[PolicyResult] = None) -> PolicyResult:
    """Flat pilots, per-symbol data powers found by pairwise transfers."""
    k_vals = _k_values(k_max, k_values)
    _check_common(p_avg, noise_var, grid, k_vals, t_max, papr_cap)
    cap = None if papr_cap is None else papr_cap * p_avg

    def candidate(k, T):
        frame = _Frame(model, mode, k, T, noise_var, grid, p_avg)
        rate, pilots, data = _policy_iii_frame(frame, cap, SEARCH_TRANSFER_TOL)
        return (rate, k, T, pilots, data)

    best, trace = _search(candidate, k_vals, t_max, patience)
    best = _prefer_incumbent(best, incumbent, cap, policy="III")
    rate, k, T, pilots, data = best
    return _result("III", model, mode, noise_var, grid, p_avg, pilots, data, rate, trace)


def _pilot_ascent(frame: _Frame, pilots: np.ndarray, data_shape: np.ndarray,
                  cap: Optional[float], tol: float = SEARCH_TRANSFER_TOL):
    """Coordinate ascent over pilot powers with the data powers scaled to
    absorb the rest of the budget.

    Moves are transfers between two pilots or between a pilot and the data
    pool; the frame budget is preserved by construction.
    """
    k = frame.k
    shape = np.asarray(data_shape, dtype=float)
    shape = shape / shape.sum() if shape.sum() > 0 else np.full(frame.n_data, 1.0 / frame.n_data)
    p_cap = frame.grid.p_max
    upper = np.inf if cap is None else cap

    def objective(p):
        data = (frame.budget - p.sum()) * shape
        if data.min() < 0 or data.max() > p_cap * (1 + 1e-12) or p.max() > upper * (1 + 1e-12):
            return -np.inf
        v = frame.variances(p)
        return float(np.sum(interpolate(frame.grid, data, v)))

    p = np.asarray(pilots, dtype=float).copy()
    cur = objective(p)
    delta = max(p.max(), frame.p_avg) * 0.5
    # move (src, dst); index k stands for the data pool
    moves = [(i, j) for i in range(k + 1) for j in range(k + 1) if i != j]
    while delta > tol:
        while True:
            best_gain, best_p = _IMPROVE, None
            for src, dst in moves:
                # clamped so a pilot can land exactly on zero or on the cap
                step = delta
                if src < k:
                    step = min(step, p[src])
                if dst < k:
                    step = min(step, upper - p[dst])
                if step <= 0:
                    continue
                q = p.copy()
                if src < k:
                    q[src] -= step
                if dst < k:
                    q[dst] += step
                gain = objective(q) - cur
                if gain > best_gain:
                    best_gain, best_p = gain, q
            if best_p is None:
                break
            p, cur = best_p, cur + best_gain
        delta *= 0.5
    return p


def _policy_iv_frame(frame: _Frame, cap: Optional[float], tol: float, rounds: int = 2):
    """Alternate pilot ascent and data reallocation."""
    p_cap = frame.grid.p_max
    p_tr, _ = _best_flat_training(frame, cap)
    pilots = np.full(frame.k, p_tr)
    data = np.full(frame.n_data, frame.data_budget(pilots.sum()) / frame.n_data)
    for _ in range(rounds):
        pilots = _pilot_ascent(frame, pilots, data, cap, tol)
        curves = _SlotCurves(frame.grid, frame.variances(pilots))
        data, _ = _allocate_data(curves, frame.data_budget(pilots.sum()), p_cap, tol=tol)
    curves = _SlotCurves(frame.grid, frame.variances(pilots))
    data, total = _allocate_data(curves, frame.data_budget(pilots.sum()), p_cap, start=data)
    return total / frame.T, pilots, data


def optimize_policy_IV(model: FadingModel, p_avg: float, noise_var: float,
                       k_max: int = K_MAX, t_max: int = T_MAX, grid: IsubGrid = None,
                       papr_cap: Optional[float] = None, mode: str = CAUSAL,
                       k_values=None, patience: Optional[int] = PATIENCE,
                       incumbent: Optional[PolicyResult] = None,
                       use_theorem: bool = True) -> PolicyResult:
    """Every symbol with its own power.

    Causal Gauss-Markov estimation without a peak cap puts all training
    power on one pilot, so only ``k = 1`` is searched (flat pilots then
    coincide with free pilots).  Otherwise pilot and data powers are
    optimized jointly for every ``(k, T)``.
    """
    k_vals = _k_values(k_max, k_values)
    _check_common(p_avg, noise_var, grid, k_vals, t_max, papr_cap)
    cap = None if papr_cap is None else papr_cap * p_avg
    theorem = (use_theorem and mode == CAUSAL and papr_cap is None
               and isinstance(model, GaussMarkov) and 1 in k_vals)

    if theorem:
        k_vals = [1]

        def candidate(k, T):
            frame = _Frame(model, mode, k, T, noise_var, grid, p_avg)
            rate, pilots, data = _policy_iii_frame(frame, None, SEARCH_TRANSFER_TOL)
            return (rate, k, T, pilots, data)
    else:
        def candidate(k, T):
            frame = _Frame(model, mode, k, T, noise_var, grid, p_avg)
            rate, pilots, data = _policy_iv_frame(frame, cap, SEARCH_TRANSFER_TOL)
            return (rate, k, T, pilots, data)

    best, trace = _search(candidate, k_vals, t_max, patience)
    best = _prefer_incumbent(best, incumbent, cap, policy="IV")
    rate, k, T, pilots, data = best
    return _result("IV", model, mode, noise_var, grid, p_avg, pilots, data, rate, trace)


def optimize_all(model: FadingModel, p_avg: float, noise_var: float, grid: IsubGrid,
                 k_max: int = K_MAX, t_max: int = T_MAX,
                 papr_cap: Optional[float] = None, mode: str = CAUSAL,
                 policies: Sequence[str] = ("I", "II", "III", "IV"),
                 patience: Optional[int] = PATIENCE,
                 k_values=None) -> dict[str, PolicyResult]:
    """Run the requested policies in order, each seeded with the previous
    optimum (which is feasible for every later policy)."""
    out = {}
    prev = None
    common = dict(k_max=k_max, t_max=t_max, grid=grid, mode=mode, patience=patience,
                  k_values=k_values)
    for pid in ("I", "II", "III", "IV"):
        needed = any(p in policies for p in ("I", "II", "III", "IV")[
            ("I", "II", "III", "IV").index(pid):])
        if not needed:
            break
        if pid == "I":
            res = optimize_policy_I(model, p_avg, noise_var, **common)
        elif pid == "II":
            res = optimize_policy_II(model, p_avg, noise_var, papr_cap=papr_cap,
                                     incumbent=prev, **common)
        elif pid == "III":
            res = optimize_policy_III(model, p_avg, noise_var, papr_cap=papr_cap,
                                      incumbent=prev, **common)
        else:
            res = optimize_policy_IV(model, p_avg, noise_var, papr_cap=papr_cap,
                                     incumbent=prev, **common)
        prev = res
        if pid in policies:
            out[pid] = res
    return out


def attach_inputs(result: PolicyResult, noise_var: float,
                  quad=DEFAULT_QUADRATURE) -> PolicyResult:
    """Fill ``per_slot_inputs`` with the optimal binary input of each data slot."""
    result.per_slot_inputs = [
        optimize_isub(float(P), float(v), noise_var, quad, unit=result.rate_unit)[0]
        for P, v in zip(result.plan.data_powers, result.variances)
    ]
    return result


def percent_improvements(results: dict[str, PolicyResult]) -> dict[str, Optional[float]]:
    """Percent gains as in the published table: Policy I against its best
    one-pilot frame, the other policies against Policy I."""
    out = {}
    ref = results.get("I")
    for pid, res in results.items():
        if pid == "I":
            one = res.best_rate_for_k(1)
            out[pid] = 100.0 * (res.rate / one - 1.0) if one and one > 0 else None
        elif ref is not None and ref.rate > 0:
            out[pid] = 100.0 * (res.rate / ref.rate - 1.0)
        else:
            out[pid] = None
    return out
