"""Round-trip acceptance: every figure kind renders from the CSVs of a
real 10-run campaign produced by the solver package's CLI (its external
interface), and box medians equal independently recomputed CSV medians.
"""

import json
import subprocess
import sys

import pandas as pd
import pytest

from nmfplots.cli import cli_main
from nmfplots.figures import FigureSpec, render


def _verdict(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def campaign_csvs(tmp_path_factory):
    """Run a 10-run desk-scale campaign through the solver CLI."""
    root = tmp_path_factory.mktemp("campaign")
    out = root / "results"
    config = {
        "benchmark": {"kind": "A", "n": 30, "m": 16, "r": 2, "seed": 1},
        "algorithms": ["mu", "pmu", "altbi", "grid"],
        "grid": [0.2, 0.5],
        "mc_runs": 10,
        "solver": {"max_iter": 60},
        "altbi": {"max_iter": 60},
        "output_dir": str(out),
        "base_seed": 50,
    }
    cfg_path = root / "config.json"
    cfg_path.write_text(json.dumps(config))
    subprocess.run(
        [sys.executable, "-m", "nmfbilevel.cli",
         "run", "--config", str(cfg_path), "--quiet"],
        check=True,
    )
    subprocess.run(
        [sys.executable, "-m", "nmfbilevel.cli",
         "gen", "--kind", "A", "--n", "30", "--m", "16", "--r", "2",
         "--seed", "1", "--out", str(out), "--quiet"],
        check=True,
    )
    return out


def test_every_figure_kind_renders(campaign_csvs, tmp_path):
    out = campaign_csvs
    specs = [
        {"kind": "trace", "csv": str(out / "traces.csv"), "out": "trace.png"},
        {"kind": "sir_box", "csv": str(out / "sir.csv"), "out": "sir.png"},
        {"kind": "sparsity_box", "csv": str(out / "sparsity.csv"),
         "out": "sparsity.png"},
        {"kind": "lambda_scatter", "csv": str(out / "lambda.csv"),
         "out": "lscatter.png"},
        {"kind": "lambda_density", "csv": str(out / "lambda.csv"),
         "out": "ldensity.png"},
        {"kind": "grid_compare", "csv": str(out / "traces.csv"),
         "out": "grid.png"},
        {"kind": "abundance_grid", "csv": str(out / "H_true.csv"),
         "out": "abundance.png"},
        {"kind": "spectra_lines", "csv": str(out / "W_true.csv"),
         "out": "spectra.png"},
    ]
    spec_path = tmp_path / "figs.json"
    spec_path.write_text(json.dumps(specs))
    fig_dir = tmp_path / "figs"
    code = cli_main(["--spec", str(spec_path), "--out", str(fig_dir), "--quiet"])
    rendered = [s["out"] for s in specs if (fig_dir / s["out"]).stat().st_size > 0]
    _verdict(
        "all eight figure kinds render from campaign CSVs",
        code == 0 and len(rendered) == len(specs),
        f"{len(rendered)} of {len(specs)} rendered",
    )


def test_box_medians_match_csv_recomputation(campaign_csvs, tmp_path):
    out = campaign_csvs
    worst = 0.0
    for kind, name, col in (
        ("sir_box", "sir.csv", "sir_db"),
        ("sparsity_box", "sparsity.csv", "sparsity_pct"),
    ):
        _, info = render(FigureSpec(
            kind=kind, csv=str(out / name),
            out=str(tmp_path / f"{kind}.png")))
        df = pd.read_csv(out / name)
        for label, med in info["medians"].items():
            algo, factor = label.rsplit(":", 1)
            expected = df[
                (df["algorithm"] == algo) & (df["factor"] == factor)
            ][col].median()
            worst = max(worst, abs(med - expected))
    _verdict(
        "box medians equal recomputed CSV medians to 1e-9",
        worst <= 1e-9,
        f"worst deviation {worst:.2e}",
    )
