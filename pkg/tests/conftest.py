import os
from pathlib import Path

import pytest

from psamtrain.grid import build_grid, load_grid, save_grid

ROOT = Path(__file__).resolve().parents[1]
GRID_DIR = ROOT / "data" / "grids"


def grid_path(snr_db: float) -> Path:
    return GRID_DIR / f"isub_snr{snr_db:+g}dB.grid"


def shipped_grid(snr_db: float):
    """The 60x60 nats grid for ``snr_db`` (built and cached if absent)."""
    path = grid_path(snr_db)
    if not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        grid = build_grid(10.0, 60, 60, 10 ** (-snr_db / 10), rate_unit="nats",
                          jobs=os.cpu_count() or 1)
        save_grid(grid, path)
    return load_grid(path)


@pytest.fixture(scope="session")
def grid_0db():
    return shipped_grid(0.0)
