"""KL-Gap trend panels and anchor/synthetic distribution figures.

Inputs are the aggregate-sweep CSV (`variable,value,mean_gap,std_gap,
n_rounds`), dataset CSVs (`x0..x{d-1},component,provenance`), and the
JSON mixture model files.  Displayed numbers come straight from the
files; the only computation here is density evaluation on the contour
grid.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

AGGREGATE_COLUMNS = ("variable", "value", "mean_gap", "std_gap", "n_rounds")


@dataclass(frozen=True)
class FigureSpec:
    """Inputs and layout of one figure: one panel per swept variable."""

    input_paths: tuple[str, ...]
    output_path: str
    dpi: int = 120
    band_std: float = 1.0
    panel_size: tuple[float, float] = field(default=(3.6, 3.0))


def read_aggregate_csv(path: str) -> dict:
    """Parse one aggregate sweep CSV; raises listing any missing columns."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in AGGREGATE_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    variables = {r["variable"] for r in rows}
    if len(variables) != 1:
        raise ValueError(f"{path}: expected one swept variable, found {sorted(variables)}")
    return {
        "variable": rows[0]["variable"],
        "values": np.array([float(r["value"]) for r in rows]),
        "mean_gap": np.array([float(r["mean_gap"]) for r in rows]),
        "std_gap": np.array([float(r["std_gap"]) for r in rows]),
        "n_rounds": int(rows[0]["n_rounds"]),
    }


def plot_kl_gap(spec: FigureSpec) -> str:
    """Render one panel per aggregate CSV: mean line with +-1 std shading."""
    panels = [read_aggregate_csv(p) for p in spec.input_paths]
    w, h = spec.panel_size
    fig, axes = plt.subplots(1, len(panels),
                             figsize=(w * len(panels), h), squeeze=False)
    for ax, panel in zip(axes[0], panels):
        lo = panel["mean_gap"] - spec.band_std * panel["std_gap"]
        hi = panel["mean_gap"] + spec.band_std * panel["std_gap"]
        ax.fill_between(panel["values"], lo, hi, alpha=0.25, linewidth=0)
        ax.plot(panel["values"], panel["mean_gap"], marker="o", markersize=3.5)
        ax.axhline(0.0, color="0.6", linewidth=0.8, linestyle=":")
        ax.set_xlabel(panel["variable"])
        ax.set_ylabel("KL Gap")
        ax.set_title(f"{panel['variable']} sweep ({panel['n_rounds']} rounds)")
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi)
    plt.close(fig)
    return spec.output_path


# ---------------------------------------------------------------------------
# distribution view
# ---------------------------------------------------------------------------

def read_dataset_csv(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-2:] != ["component", "provenance"]:
            raise ValueError(f"{path}: not a dataset CSV")
        d = len(header) - 2
        rows = [[float(v) for v in row[:d]] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows)


def read_model_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    weights = np.array([c["weight"] for c in doc["components"]])
    means = np.array([c["mean"] for c in doc["components"]])
    covs = np.array([c["covariance"] for c in doc["components"]])
    return {"dim": int(doc["dim"]), "weights": weights, "means": means,
            "covariances": covs}


def mixture_log_density(model: dict, points: np.ndarray) -> np.ndarray:
    """Plain log-sum-exp mixture density used only for contour rendering."""
    k = model["weights"].shape[0]
    d = model["dim"]
    lp = np.empty((points.shape[0], k))
    for j in range(k):
        cov = model["covariances"][j]
        diff = points - model["means"][j]
        solve = np.linalg.solve(cov, diff.T).T
        mahal = (diff * solve).sum(axis=1)
        _, log_det = np.linalg.slogdet(cov)
        lp[:, j] = (np.log(model["weights"][j])
                    - 0.5 * (d * np.log(2 * np.pi) + log_det + mahal))
    shift = lp.max(axis=1, keepdims=True)
    return shift[:, 0] + np.log(np.exp(lp - shift).sum(axis=1))


def plot_distributions(anchor_csv: str, synthetic_csv: str,
                       model_paths: tuple[str, ...], output_path: str,
                       dpi: int = 120, grid_cells: int = 160) -> str:
    """Scatter anchor vs synthetic rows with log-density contours of the
    given models (two-dimensional data only)."""
    anchor = read_dataset_csv(anchor_csv)
    synthetic = read_dataset_csv(synthetic_csv)
    if anchor.shape[1] != 2 or synthetic.shape[1] != 2:
        raise ValueError("distribution plots need two-dimensional data")
    models = [read_model_file(p) for p in model_paths]
    for m in models:
        if m["dim"] != 2:
            raise ValueError("distribution plots need two-dimensional models")

    both = np.vstack([anchor, synthetic])
    lo = both.min(axis=0) - 1.5
    hi = both.max(axis=0) + 1.5
    xs = np.linspace(lo[0], hi[0], grid_cells)
    ys = np.linspace(lo[1], hi[1], grid_cells)
    gx, gy = np.meshgrid(xs, ys)
    grid = np.column_stack([gx.ravel(), gy.ravel()])

    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    cmaps = ("Blues", "Oranges", "Greens")
    for i, model in enumerate(models):
        dens = mixture_log_density(model, grid).reshape(grid_cells, grid_cells)
        levels = np.quantile(dens, [0.80, 0.90, 0.96, 0.99])
        ax.contour(gx, gy, dens, levels=np.unique(levels),
                   cmap=cmaps[i % len(cmaps)], linewidths=1.0)
    ax.scatter(synthetic[:, 0], synthetic[:, 1], s=6, color="tab:orange",
               alpha=0.45, label="synthetic", linewidths=0)
    ax.scatter(anchor[:, 0], anchor[:, 1], s=10, color="tab:blue",
               alpha=0.85, label="anchor", linewidths=0)
    ax.legend(loc="upper right")
    ax.set_xlabel("x0")
    ax.set_ylabel("x1")
    fig.tight_layout()
    fig.savefig(output_path, dpi=dpi)
    plt.close(fig)
    return output_path
