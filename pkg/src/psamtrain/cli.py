"""Command-line front end.

Subcommands: ``grid``, ``optimize``, ``verify``, ``profile``, ``baseline``.
Settings come from an optional ``key = value`` file (``--config``) and are
overridden by flags.  Exit status is 0 on success, 2 when a verification
check fails and 1 on usage or I/O errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from typing import Callable, Optional

import numpy as np

from . import theory
from .estimator import CAUSAL, NONCAUSAL, error_variance_at
from .fading import GaussMarkov, Jakes
from .grid import build_grid, grid_config_hash, interpolate, load_grid, save_grid
from .mi import DEFAULT_QUADRATURE
from .policy import (PolicyResult, attach_inputs, no_training_baseline, optimize_all,
                     percent_improvements)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 2

POLICY_IDS = ("I", "II", "III", "IV")
OPTIMIZE_COLUMNS = [
    "case", "policy", "n_pilots", "spacing", "rate", "rate_unit", "baseline_rate",
    "training_beneficial", "pct_improvement", "pct_reference", "average_power",
    "pilot_powers", "data_powers",
]
PROFILE_COLUMNS = ["slot", "kind", "power", "error_variance", "isub", "m1", "m2", "p1"]
BASELINE_COLUMNS = ["case", "p_avg", "noise_var", "rate", "rate_unit"]


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str = ""
    model: str = "gauss-markov"
    alpha: float = 0.99
    fd: float = 100.0
    fs: float = 10_000.0
    snr_db: float = 0.0
    mode: str = CAUSAL
    policy: str = "all"
    kmax: int = 6
    tmax: int = 120
    k: Optional[int] = None
    papr_cap: Optional[float] = None
    p_max: float = 10.0
    p_points: int = 60
    v_points: int = 60
    rate_unit: str = "bits"
    grid_file: Optional[str] = None
    out: Optional[str] = None
    seed: int = 0
    jobs: int = 1
    timestamp: bool = False

    @property
    def noise_var(self) -> float:
        # P_avg is normalized to 1
        return 10.0 ** (-self.snr_db / 10.0)

    def fading_model(self):
        if self.model in ("gauss-markov", "gauss_markov", "gm"):
            return GaussMarkov(self.alpha)
        if self.model == "jakes":
            return Jakes.from_sampling_rate(self.fd, self.fs)
        raise UsageError(f"unknown model {self.model!r}")

    def case_label(self) -> str:
        if self.model == "jakes":
            m = f"jakes(fd={self.fd:g},fs={self.fs:g})"
        else:
            m = f"gm(alpha={self.alpha:g})"
        cap = "" if self.papr_cap is None else f",papr={self.papr_cap:g}"
        return f"{m},snr={self.snr_db:g}dB,{self.mode}{cap}"

    def policies(self) -> list[str]:
        spec = str(self.policy).strip().lower()
        if spec in ("", "none"):
            return []
        if spec == "all":
            return list(POLICY_IDS)
        names = {"1": "I", "2": "II", "3": "III", "4": "IV",
                 "i": "I", "ii": "II", "iii": "III", "iv": "IV"}
        out = []
        for tok in spec.split(","):
            tok = tok.strip()
            if tok not in names:
                raise UsageError(f"unknown policy {tok!r}")
            out.append(names[tok])
        return [p for p in POLICY_IDS if p in out]

    def validate(self):
        if not math.isfinite(self.snr_db):
            raise UsageError("snr_db must be finite")
        if self.mode not in (CAUSAL, NONCAUSAL):
            raise UsageError(f"mode must be causal or noncausal, got {self.mode!r}")
        if self.rate_unit not in ("bits", "nats"):
            raise UsageError(f"rate_unit must be bits or nats, got {self.rate_unit!r}")
        if self.papr_cap is not None and not self.papr_cap > 0:
            raise UsageError("papr_cap must be positive")
        if self.kmax < 1 or self.tmax <= self.kmax:
            raise UsageError("need kmax >= 1 and tmax > kmax")
        if self.k is not None and not 1 <= self.k < self.tmax:
            raise UsageError("forced k must satisfy 1 <= k < tmax")
        try:
            self.fading_model()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, raw):
    kind = str(_FIELD_TYPES[key])
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("none", "")
                       and "Optional" in kind):
        return None
    try:
        if "bool" in kind:
            if isinstance(raw, bool):
                return raw
            return str(raw).strip().lower() in ("1", "true", "yes", "on")
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            return float(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc
    return str(raw).strip()


def read_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        key = key.strip().replace("-", "_")
        if key not in _FIELD_TYPES or key == "command":
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = _coerce(key, val.strip())
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # every default is None so config-file values survive unless overridden
    a = common.add_argument
    a("--config", help="key = value file; flags override it")
    a("--model", choices=["gauss-markov", "gauss_markov", "gm", "jakes"])
    a("--alpha", type=float, help="Gauss-Markov correlation coefficient")
    a("--fd", type=float, help="Jakes maximum Doppler frequency in Hz")
    a("--fs", type=float, help="Jakes symbol (sampling) rate in Hz")
    a("--snr-db", type=float, dest="snr_db")
    a("--mode", choices=[CAUSAL, NONCAUSAL])
    a("--policy", help="1, 2, 3, 4, all, none, or a comma list")
    a("--kmax", type=int)
    a("--tmax", type=int)
    a("--k", type=int, help="force the number of pilots per frame")
    a("--papr-cap", type=float, dest="papr_cap")
    a("--p-max", type=float, dest="p_max")
    a("--p-points", type=int, dest="p_points")
    a("--v-points", type=int, dest="v_points")
    a("--grid-file", dest="grid_file")
    a("--out")
    a("--seed", type=int)
    a("--rate-unit", choices=["bits", "nats"], dest="rate_unit")
    a("--jobs", type=int)
    a("--timestamp", action="store_const", const=True,
      help="prepend a generation-time comment to outputs")

    parser = _Parser(prog="psamtrain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("grid", parents=[common], help="build and save an I_sub grid")
    sub.add_parser("optimize", parents=[common], help="optimize training per policy")
    sub.add_parser("verify", parents=[common], help="brute-force allocation checks")
    sub.add_parser("profile", parents=[common], help="per-slot dump of one optimum")
    sub.add_parser("baseline", parents=[common], help="rate without training")
    return parser


def resolve_config(argv=None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    values = read_config_file(args.config) if args.config else {}
    for key in _FIELD_TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _coerce(key, flag)
    values["command"] = args.command
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def _fmt(x: float) -> str:
    return repr(float(x))


def _vec(xs) -> str:
    return " ".join(_fmt(x) for x in xs)


def _header(cfg: ExperimentConfig) -> str:
    if not cfg.timestamp:
        return ""
    return f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n"


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([row[c] for c in columns])
    return buf.getvalue()


def _emit(cfg: ExperimentConfig, text: str, out=None, suffix: str = ""):
    text = _header(cfg) + text
    path = cfg.out
    if path is None:
        (out or sys.stdout).write(text)
        return
    path = path + suffix if suffix else path
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _load_grid(cfg: ExperimentConfig):
    if not cfg.grid_file:
        raise UsageError("--grid-file is required (build one with 'psamtrain grid')")
    try:
        grid = load_grid(cfg.grid_file)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load grid {cfg.grid_file}: {exc}") from exc
    if not math.isclose(grid.noise_var, cfg.noise_var, rel_tol=1e-9):
        raise UsageError(
            f"grid noise_var {grid.noise_var} does not match snr_db {cfg.snr_db:g} "
            f"(noise_var {cfg.noise_var})")
    return grid.in_unit(cfg.rate_unit)


def cmd_grid(cfg: ExperimentConfig, out=None) -> int:
    path = cfg.grid_file or cfg.out
    if not path:
        raise UsageError("grid needs --grid-file (or --out) for the output path")
    digest = grid_config_hash(cfg.p_max, cfg.p_points, cfg.v_points, cfg.noise_var,
                              cfg.rate_unit, DEFAULT_QUADRATURE)
    if os.path.exists(path):
        try:
            if load_grid(path).config_hash == digest:
                (out or sys.stdout).write(f"{path}: up to date ({digest})\n")
                return EXIT_OK
        except (OSError, ValueError, KeyError):
            pass
    grid = build_grid(cfg.p_max, cfg.p_points, cfg.v_points, cfg.noise_var,
                      rate_unit=cfg.rate_unit, jobs=cfg.jobs)
    grid.meta["snr_db"] = repr(float(cfg.snr_db))
    try:
        save_grid(grid, path)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc
    (out or sys.stdout).write(f"{path}: wrote {grid.values.shape} grid ({digest})\n")
    return EXIT_OK


def run_policies(cfg: ExperimentConfig, grid, policies) -> dict[str, PolicyResult]:
    """Optimize the requested policies; lower ones are always solved too
    because they seed the higher ones and anchor the percent columns."""
    if not policies:
        return {}
    return optimize_all(cfg.fading_model(), 1.0, cfg.noise_var, grid, k_max=cfg.kmax,
                        t_max=cfg.tmax, papr_cap=cfg.papr_cap, mode=cfg.mode,
                        policies=POLICY_IDS[:POLICY_IDS.index(policies[-1]) + 1],
                        k_values=None if cfg.k is None else [cfg.k])


def cmd_optimize(cfg: ExperimentConfig, out=None) -> int:
    policies = cfg.policies()
    grid = _load_grid(cfg) if policies else None
    results = run_policies(cfg, grid, policies)
    pct = percent_improvements(results)
    rows = []
    for pid in policies:
        r = results[pid]
        rows.append({
            "case": cfg.case_label(),
            "policy": pid,
            "n_pilots": r.n_pilots,
            "spacing": r.spacing,
            "rate": _fmt(r.rate),
            "rate_unit": r.rate_unit,
            "baseline_rate": _fmt(r.baseline_rate),
            "training_beneficial": str(r.training_beneficial).lower(),
            "pct_improvement": "" if pct.get(pid) is None else f"{pct[pid]:.4f}",
            "pct_reference": "I(k=1)" if pid == "I" else "I",
            "average_power": _fmt(r.plan.average_power),
            "pilot_powers": _vec(r.plan.pilot_powers),
            "data_powers": _vec(r.plan.data_powers),
        })
    _emit(cfg, _csv_text(OPTIMIZE_COLUMNS, rows), out)
    if cfg.out is not None:
        doc = {"config": _config_dict(cfg), "columns": OPTIMIZE_COLUMNS, "rows": rows}
        _emit(cfg, json.dumps(doc, indent=2) + "\n", suffix=".json")
    return EXIT_OK


def _config_dict(cfg: ExperimentConfig) -> dict:
    d = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    d.pop("timestamp")
    return d


def verification_suite(seed: int = 0, xi_fn: Callable = theory.xi_closed_form) -> dict:
    """Theorem, lemma and xi checks; every entry has a boolean ``pass``."""
    rng = np.random.default_rng(seed)
    checks = []
    for k in (1, 2, 3, 4):
        for alpha in (0.9, 0.99):
            for s2 in (0.5, 1.0, 2.0):
                budget = float(k)
                rep = theory.verify_theorem1(alpha, k, budget, s2, budget / 20)
                tr = theory.check_pairwise_transfers(alpha, k, budget, s2, 500, rng)
                checks.append({
                    "suite": "theorem", "k": k, "alpha": alpha, "noise_var": s2,
                    "n_points": rep.n_points, "corner_phi": rep.corner_phi,
                    "best_phi": rep.best_phi, "transfer_violations": tr.n_violations,
                    "pass": bool(rep.is_corner_optimal and tr.n_violations == 0),
                })
    lemma_ok, lemma_worst = 0, 0.0
    for _ in range(100):
        k = int(rng.integers(2, 7))
        alpha = float(rng.uniform(0.01, 0.99))
        x = rng.uniform(0.0, 10.0, size=k)
        rep = theory.verify_lemma1(alpha, x)
        lemma_ok += bool(rep.holds and rep.ties_only_equal)
        lemma_worst = max(lemma_worst, rep.max_value - rep.nonincreasing_value)
    worked = theory.verify_lemma1(0.5, [1.0, 2.0])
    checks.append({"suite": "lemma", "instances": 100, "held": lemma_ok,
                   "worst_gap": float(lemma_worst), "worked_case_max": worked.max_value,
                   "pass": bool(lemma_ok == 100 and abs(worked.max_value - 3 / 5.75) < 1e-12)})
    xi_err, swap_ok, deriv_ok = 0.0, 0, 0
    for _ in range(100):
        k = int(rng.integers(2, 7))
        alpha = float(rng.uniform(0.05, 0.99))
        base = _random_base(alpha, k - 2, rng)
        phi_km2 = theory.phi_from_base(alpha, base) if k > 2 else 0.0
        x_a, x_b = np.sort(rng.uniform(0.0, 10.0, size=2))
        xi_err = max(xi_err, abs(xi_fn(x_a, x_b, alpha, phi_km2)
                                 - theory.xi_direct(x_a, x_b, alpha, base)))
        swap_ok += bool(xi_fn(x_a, x_b, alpha, phi_km2) <= xi_fn(x_b, x_a, alpha, phi_km2))
        h = 1e-6
        da = (xi_fn(x_a + h, x_b, alpha, phi_km2) - xi_fn(x_a - h, x_b, alpha, phi_km2)) / (2 * h)
        db = (xi_fn(x_a, x_b + h, alpha, phi_km2) - xi_fn(x_a, x_b - h, alpha, phi_km2)) / (2 * h)
        deriv_ok += bool(da <= 1e-9 and db <= 1e-9)
    checks.append({"suite": "xi", "instances": 100, "max_abs_error": float(xi_err),
                   "swap_held": swap_ok, "derivatives_nonpositive": deriv_ok,
                   "pass": bool(xi_err <= 1e-10 and swap_ok == 100 and deriv_ok == 100)})
    return {"seed": seed, "checks": checks, "pass": bool(all(c["pass"] for c in checks))}


def _random_base(alpha: float, m: int, rng) -> np.ndarray:
    if m == 0:
        return np.zeros((0, 0))
    n = np.arange(m)
    A = alpha ** np.abs(n[:, None] - n[None, :]).astype(float)
    return A + np.diag(rng.uniform(0.0, 10.0, size=m))


def cmd_verify(cfg: ExperimentConfig, out=None,
               xi_fn: Callable = theory.xi_closed_form) -> int:
    try:
        report = verification_suite(cfg.seed, xi_fn=xi_fn)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(cfg, json.dumps(report, indent=2) + "\n", out)
    return EXIT_OK if report["pass"] else EXIT_VERIFY_FAILED


def profile_rows(cfg: ExperimentConfig, result: PolicyResult, grid) -> list[dict]:
    model = cfg.fading_model()
    pattern = result.plan.pattern
    attach_inputs(result, cfg.noise_var)
    pilot_v = error_variance_at(model, pattern, cfg.noise_var, np.arange(pattern.cluster_k))
    rows = []
    for j, (P, v) in enumerate(zip(result.plan.pilot_powers, pilot_v)):
        rows.append({"slot": j, "kind": "pilot", "power": _fmt(P), "error_variance": _fmt(v),
                     "isub": "", "m1": "", "m2": "", "p1": ""})
    isub = np.atleast_1d(interpolate(grid, result.plan.data_powers, result.variances))
    for n, (P, v, inp) in enumerate(zip(result.plan.data_powers, result.variances,
                                        result.per_slot_inputs)):
        rows.append({"slot": pattern.cluster_k + n, "kind": "data", "power": _fmt(P),
                     "error_variance": _fmt(v), "isub": _fmt(isub[n]),
                     "m1": _fmt(inp.m1), "m2": _fmt(inp.m2), "p1": _fmt(inp.p1)})
    return rows


def cmd_profile(cfg: ExperimentConfig, out=None) -> int:
    policies = cfg.policies()
    if len(policies) != 1:
        raise UsageError("profile needs exactly one policy (--policy 1..4)")
    grid = _load_grid(cfg)
    result = run_policies(cfg, grid, policies)[policies[0]]
    _emit(cfg, _csv_text(PROFILE_COLUMNS, profile_rows(cfg, result, grid)), out)
    return EXIT_OK


def cmd_baseline(cfg: ExperimentConfig, out=None) -> int:
    grid = _load_grid(cfg)
    row = {"case": cfg.case_label(), "p_avg": _fmt(1.0), "noise_var": _fmt(cfg.noise_var),
           "rate": _fmt(no_training_baseline(1.0, cfg.noise_var, grid)),
           "rate_unit": grid.rate_unit}
    _emit(cfg, _csv_text(BASELINE_COLUMNS, [row]), out)
    return EXIT_OK


COMMANDS = {"grid": cmd_grid, "optimize": cmd_optimize, "verify": cmd_verify,
            "profile": cmd_profile, "baseline": cmd_baseline}


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"psamtrain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
