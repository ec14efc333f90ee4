"""Figure kinds over the campaign CSV schemas.

Every kind reads one CSV (a report table or a headerless factor matrix),
draws one figure, and writes one image file.  Rendering is read-only over
its inputs and deterministic for identical inputs.
"""

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

# report-table kinds -> required columns of their input CSV
TABLE_COLUMNS = {
    "trace": ("run_id", "algorithm", "iter", "objective", "response"),
    "sir_box": ("run_id", "algorithm", "factor", "component", "sir_db"),
    "sparsity_box": ("run_id", "algorithm", "factor", "sparsity_pct"),
    "lambda_scatter": ("run_id", "row_index", "lambda_init", "lambda_final"),
    "lambda_density": ("run_id", "row_index", "lambda_init", "lambda_final"),
    "grid_compare": ("run_id", "algorithm", "iter", "objective", "response"),
}
# headerless factor-matrix kinds
MATRIX_KINDS = ("abundance_grid", "spectra_lines")

FIGURE_KINDS = tuple(TABLE_COLUMNS) + MATRIX_KINDS

_SAVE_KW = dict(dpi=120, metadata={"Software": "nmfplots"})


@dataclass
class FigureSpec:
    kind: str
    csv: str
    out: str
    title: str = ""
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(
                f"unknown figure kind {self.kind!r}; "
                f"expected one of {sorted(FIGURE_KINDS)}"
            )


def load_table(path, kind):
    """Read a report CSV and validate it against the kind's schema."""
    required = TABLE_COLUMNS[kind]
    try:
        df = pd.read_csv(path)
    except FileNotFoundError:
        raise ValueError(f"input CSV not found: {path}")
    except pd.errors.EmptyDataError:
        raise ValueError(f"input CSV {path} is empty")
    for col in required:
        if col not in df.columns:
            raise ValueError(f"input CSV {path} is missing column '{col}'")
    if len(df) == 0:
        raise ValueError(f"input CSV {path} has a header but no data rows")
    return df


def load_matrix(path):
    """Read a headerless factor matrix CSV."""
    try:
        A = np.loadtxt(path, delimiter=",", ndmin=2)
    except FileNotFoundError:
        raise ValueError(f"input CSV not found: {path}")
    except ValueError as exc:
        raise ValueError(f"input CSV {path} is not a numeric matrix: {exc}")
    if A.size == 0:
        raise ValueError(f"input CSV {path} is empty")
    return A


def _series_groups(df):
    """Stable (algorithm, run_id) iteration order."""
    for algo in sorted(df["algorithm"].unique()):
        sub = df[df["algorithm"] == algo]
        for run in sorted(sub["run_id"].unique()):
            yield algo, run, sub[sub["run_id"] == run].sort_values("iter")


def plot_trace(df, axes):
    """Per-run response and penalized-objective traces, one series per
    (algorithm, run)."""
    ax_resp, ax_obj = axes
    for algo, run, g in _series_groups(df):
        label = algo if run == sorted(df["run_id"].unique())[0] else None
        ax_resp.plot(g["iter"], g["response"], alpha=0.6, label=label)
        ax_obj.plot(g["iter"], g["objective"], alpha=0.6, label=label)
    ax_resp.set_xlabel("iteration")
    ax_resp.set_ylabel("response (KL error)")
    ax_obj.set_xlabel("iteration")
    ax_obj.set_ylabel("penalized objective")
    ax_resp.set_yscale("log")
    ax_obj.set_yscale("log")
    ax_resp.legend(fontsize="small")


def _grouped_box(df, ax, value_col, ylabel):
    """One box per (algorithm, factor); returns {label: drawn median}."""
    groups = []
    labels = []
    for algo in sorted(df["algorithm"].unique()):
        for factor in sorted(df[df["algorithm"] == algo]["factor"].unique()):
            sel = df[(df["algorithm"] == algo) & (df["factor"] == factor)]
            groups.append(sel[value_col].to_numpy(dtype=float))
            labels.append(f"{algo}:{factor}")
    bxp = ax.boxplot(groups, tick_labels=labels)
    ax.set_ylabel(ylabel)
    ax.tick_params(axis="x", rotation=45)
    return {
        label: float(line.get_ydata()[0])
        for label, line in zip(labels, bxp["medians"])
    }


def plot_sir_box(df, ax):
    return _grouped_box(df, ax, "sir_db", "SIR (dB)")


def plot_sparsity_box(df, ax):
    return _grouped_box(df, ax, "sparsity_pct", "sparsity (%)")


def plot_lambda_scatter(df, ax):
    """Final vs initial per-row penalty, with the identity and the
    tenth-of-start reference lines."""
    init = df["lambda_init"].to_numpy(dtype=float)
    final = df["lambda_final"].to_numpy(dtype=float)
    ax.scatter(init, final, s=12, alpha=0.7)
    lo, hi = 0.0, max(init.max(), final.max()) * 1.05 + 1e-12
    ax.plot([lo, hi], [lo, hi], "k--", linewidth=0.8, label="unchanged")
    ax.plot([lo, hi], [lo / 10, hi / 10], "r:", linewidth=0.8,
            label="tenth of start")
    ax.set_xlabel("initial penalty weight")
    ax.set_ylabel("final penalty weight")
    ax.legend(fontsize="small")


def plot_lambda_density(df, ax, column="lambda_final", points=256):
    """Density of the penalty weights; a degenerate (all-equal)
    distribution is drawn as a single spike."""
    vals = df[column].to_numpy(dtype=float)
    spread = vals.max() - vals.min()
    if spread <= 1e-15 * max(abs(vals.max()), 1.0):
        ax.axvline(vals[0], color="C0", label=f"{column} (all equal)")
    else:
        from scipy.stats import gaussian_kde

        grid = np.linspace(
            vals.min() - 0.1 * spread, vals.max() + 0.1 * spread, points)
        ax.plot(grid, gaussian_kde(vals)(grid), label=column)
        ax.hist(vals, bins=30, density=True, alpha=0.3)
    ax.set_xlabel("penalty weight")
    ax.set_ylabel("density")
    ax.legend(fontsize="small")


def plot_grid_compare(df, ax):
    """Mean response trace per algorithm label, for comparing fixed
    penalty levels against the adaptive solver."""
    for algo in sorted(df["algorithm"].unique()):
        sub = df[df["algorithm"] == algo]
        mean = sub.groupby("iter")["response"].mean()
        ax.plot(mean.index, mean.to_numpy(), label=algo)
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean response (KL error)")
    ax.set_yscale("log")
    ax.legend(fontsize="small")


def plot_abundance_grid(H, fig):
    """One heatmap per row of H on a sqrt(m) x sqrt(m) grid; warns and
    falls back to a 1 x m strip when m is not a perfect square."""
    r, m = H.shape
    g = math.isqrt(m)
    if g * g == m:
        shape = (g, g)
    else:
        warnings.warn(
            f"m = {m} is not a perfect square; rendering 1 x {m} strips",
            stacklevel=2,
        )
        shape = (1, m)
    ncols = min(r, 4)
    nrows = math.ceil(r / ncols)
    axes = fig.subplots(nrows, ncols, squeeze=False)
    for k in range(r):
        ax = axes[k // ncols][k % ncols]
        im = ax.imshow(H[k].reshape(shape), aspect="auto", cmap="viridis")
        ax.set_title(f"component {k}", fontsize="small")
        ax.set_xticks([])
        ax.set_yticks([])
        fig.colorbar(im, ax=ax, shrink=0.8)
    for k in range(r, nrows * ncols):
        axes[k // ncols][k % ncols].axis("off")


def plot_spectra_lines(W, ax):
    """Columns of W as spectral signatures over the row index."""
    n, r = W.shape
    idx = np.arange(n)
    for k in range(r):
        ax.plot(idx, W[:, k], label=f"component {k}")
    ax.set_xlabel("band / sample index")
    ax.set_ylabel("signature value")
    ax.legend(fontsize="small")


def render(spec: FigureSpec):
    """Draw the figure described by spec and write it to spec.out.

    Returns (output path, info) where info holds kind-specific values
    (for box kinds, the drawn medians keyed by 'algorithm:factor').
    """
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    info = {}
    if spec.kind in TABLE_COLUMNS:
        df = load_table(spec.csv, spec.kind)
        if spec.kind == "trace":
            fig, axes = plt.subplots(1, 2, figsize=(10, 4))
            plot_trace(df, axes)
        elif spec.kind == "sir_box":
            fig, ax = plt.subplots(figsize=(7, 4))
            info["medians"] = plot_sir_box(df, ax)
        elif spec.kind == "sparsity_box":
            fig, ax = plt.subplots(figsize=(7, 4))
            info["medians"] = plot_sparsity_box(df, ax)
        elif spec.kind == "lambda_scatter":
            fig, ax = plt.subplots(figsize=(5, 4))
            plot_lambda_scatter(df, ax)
        elif spec.kind == "lambda_density":
            fig, ax = plt.subplots(figsize=(5, 4))
            plot_lambda_density(df, ax, **spec.options)
        else:  # grid_compare
            fig, ax = plt.subplots(figsize=(6, 4))
            plot_grid_compare(df, ax)
    else:
        A = load_matrix(spec.csv)
        if spec.kind == "abundance_grid":
            fig = plt.figure(figsize=(8, 5))
            plot_abundance_grid(A, fig)
        else:  # spectra_lines
            fig, ax = plt.subplots(figsize=(6, 4))
            plot_spectra_lines(A, ax)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)
    return out, info
