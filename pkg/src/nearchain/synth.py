"""Seeded synthetic event generator: Gaussian space-time blobs + background.

Produces raw planar CSVs (x, y, timestamp, category) shaped like the inputs
the ingest stage expects, for calibration, benchmarks, and tests.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

TIME_FORMAT = "%Y-%m-%d %H:%M:%S"
BASE_TIMESTAMP = datetime(2019, 1, 1, 0, 0, 0)


@dataclass(frozen=True)
class SynthConfig:
    """Shape of one synthetic dataset."""

    background: int = 1000  # uniform events over the full extent
    clusters: int = 5  # planted Gaussian space-time blobs
    cluster_size: int = 20  # events per blob
    extent_x: float = 10_000.0  # meters
    extent_y: float = 10_000.0  # meters
    days: float = 365.0  # time extent
    sigma_xy: float = 30.0  # blob spatial spread, meters
    sigma_t: float = 2.0  # blob time spread, days
    category: str = "synthetic"
    seed: int = 0

    def validate(self) -> None:
        if self.background < 0 or self.clusters < 0 or self.cluster_size < 0:
            raise ValueError("counts must be non-negative")
        if min(self.extent_x, self.extent_y, self.days) <= 0:
            raise ValueError("extents must be positive")
        if self.sigma_xy < 0 or self.sigma_t < 0:
            raise ValueError("spreads must be non-negative")


def generate(config: SynthConfig) -> np.ndarray:
    """Draw the dataset as an (n, 3) array of (x, y, t_days), time-sorted."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    parts = []
    if config.background:
        bx = rng.uniform(0.0, config.extent_x, config.background)
        by = rng.uniform(0.0, config.extent_y, config.background)
        bt = rng.uniform(0.0, config.days, config.background)
        parts.append(np.column_stack([bx, by, bt]))
    for _ in range(config.clusters):
        cx = rng.uniform(0.0, config.extent_x)
        cy = rng.uniform(0.0, config.extent_y)
        ct = rng.uniform(0.0, config.days)
        px = cx + rng.normal(0.0, config.sigma_xy, config.cluster_size)
        py = cy + rng.normal(0.0, config.sigma_xy, config.cluster_size)
        pt = ct + rng.normal(0.0, config.sigma_t, config.cluster_size)
        parts.append(np.column_stack([px, py, pt]))
    if not parts:
        return np.zeros((0, 3))
    xyt = np.concatenate(parts)
    # clip into the stated extent so every row survives a matching window
    np.clip(xyt[:, 0], 0.0, config.extent_x, out=xyt[:, 0])
    np.clip(xyt[:, 1], 0.0, config.extent_y, out=xyt[:, 1])
    np.clip(xyt[:, 2], 0.0, config.days, out=xyt[:, 2])
    order = np.lexsort((xyt[:, 1], xyt[:, 0], xyt[:, 2]))
    return xyt[order]


def timestamp_for(t_days: float) -> str:
    """Render a day offset as a calendar timestamp (second resolution)."""
    stamp = BASE_TIMESTAMP + timedelta(seconds=round(t_days * 86400.0))
    return stamp.strftime(TIME_FORMAT)


def write_raw_csv(path, xyt: np.ndarray, category: str) -> int:
    """Write rows as a raw ingestable CSV; returns the row count."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "time", "category"])
        for x, y, t in xyt:
            w.writerow([f"{x:.3f}", f"{y:.3f}", timestamp_for(float(t)), category])
    return len(xyt)
