#!/usr/bin/env python3
"""Regenerates the bundled CSV fixtures (deterministic)."""

import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "fixtures")


def write_wind_series():
    rng = np.random.default_rng(20240601)
    t = np.arange(240)
    w = 40.0 + 30.0 * np.sin(2.0 * np.pi * t / 24.0) + rng.normal(0.0, 2.0, t.size)
    w = np.clip(w, 0.0, 80.0)
    path = os.path.join(FIXTURES, "wind_series.csv")
    with open(path, "w") as f:
        f.write("hour,wind_mw\n")
        for i, v in enumerate(w):
            f.write(f"{i},{v:.6f}\n")
    print(path)


def write_impute_fixture():
    rng = np.random.default_rng(20240602)
    rows, feats = 1000, 7
    x = rng.uniform(0.0, 10.0, size=(rows, feats))
    wind = 3.0 * x[:, 0] + 2.0 * x[:, 1] + 0.5 * x[:, 2] + rng.normal(0.0, 0.2, rows)
    cols = [f"feature_{i + 1}" for i in range(feats)] + ["wind_mw"]
    table = np.column_stack([x, wind])

    truth = os.path.join(FIXTURES, "impute_truth.csv")
    with open(truth, "w") as f:
        f.write(",".join(cols) + "\n")
        for r in range(rows):
            f.write(",".join(f"{v:.6f}" for v in table[r]) + "\n")
    print(truth)

    # Exactly 400 masked cells (5% of 8000), no row loses every feature.
    total = rows * len(cols)
    masked = set()
    while len(masked) < 400:
        cell = int(rng.integers(0, total))
        r, c = divmod(cell, len(cols))
        row_masked = sum(1 for (rr, cc) in masked if rr == r)
        if row_masked >= len(cols) - 2:
            continue
        masked.add((r, c))
    masked_path = os.path.join(FIXTURES, "impute_linear.csv")
    with open(masked_path, "w") as f:
        f.write(",".join(cols) + "\n")
        for r in range(rows):
            cells = [
                "" if (r, c) in masked else f"{table[r, c]:.6f}"
                for c in range(len(cols))
            ]
            f.write(",".join(cells) + "\n")
    print(masked_path, f"({len(masked)} masked cells)")


if __name__ == "__main__":
    os.makedirs(FIXTURES, exist_ok=True)
    write_wind_series()
    write_impute_fixture()
