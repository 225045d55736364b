"""Optimize all four training policies for the five benchmark cases and
print the optimal (number of pilots, spacing, rate) per policy.

Uses the grids in ``data/grids`` (built with ``psamtrain grid`` if absent).
Takes 10 to 15 minutes on one core.

    python3 demos/reproduce_table.py [--tmax 60]
"""
import argparse
import time
from pathlib import Path

from psamtrain import GaussMarkov, Jakes, build_grid, load_grid, optimize_all, save_grid
from psamtrain.policy import percent_improvements

GRIDS = Path(__file__).resolve().parents[1] / "data" / "grids"

CASES = [
    ("GM a=0.99, 0 dB, causal", GaussMarkov(0.99), 0.0, "causal"),
    ("GM a=0.97, 6 dB, causal", GaussMarkov(0.97), 6.0, "causal"),
    ("GM a=0.97, -3 dB, noncausal", GaussMarkov(0.97), -3.0, "noncausal"),
    ("Jakes fd*Ts=0.01, 3 dB, causal", Jakes.from_sampling_rate(100, 10_000), 3.0, "causal"),
    ("Jakes fd*Ts=0.01, 0 dB, noncausal", Jakes.from_sampling_rate(100, 10_000), 0.0,
     "noncausal"),
]


def grid_for(snr_db):
    path = GRIDS / f"isub_snr{snr_db:+g}dB.grid"
    if not path.exists():
        print(f"building {path.name} (several minutes)")
        grid = build_grid(10.0, 60, 60, 10 ** (-snr_db / 10), rate_unit="nats")
        save_grid(grid, path)
    return load_grid(path)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tmax", type=int, default=60)
    args = ap.parse_args()
    print(f"{'case':36s} {'policy':6s} {'nP':>3s} {'T':>4s} {'rate':>8s} {'gain %':>7s}")
    for label, model, snr, mode in CASES:
        t0 = time.time()
        res = optimize_all(model, 1.0, 10 ** (-snr / 10), grid_for(snr), k_max=6,
                           t_max=args.tmax, mode=mode)
        pct = percent_improvements(res)
        for pid, r in res.items():
            print(f"{label:36s} {pid:6s} {r.n_pilots:3d} {r.spacing:4d} "
                  f"{r.rate:8.4f} {pct[pid]:7.2f}")
        print(f"{'':36s} no training: {res['I'].baseline_rate:.4f} nats/symbol, "
              f"{time.time() - t0:.0f} s")


if __name__ == "__main__":
    main()
