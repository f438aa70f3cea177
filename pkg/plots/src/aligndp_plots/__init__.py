"""Render the four experiment figures from the harness's CSV files.

This package is a pure consumer of the documented CSV schemas: every value
plotted is read from a file, nothing is recomputed. Missing inputs skip
their figure with a warning; a malformed header is an error that names the
file and the expected columns.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotJob", "CsvSchemaError", "render_all", "main"]

EXPECTED_HEADERS = {
    "freq.csv": ("category_index", "true_freq", "estimated_freq", "is_rare", "suppressed"),
    "mse_summary.csv": ("n", "mean_mse", "std_mse"),
    "attack.csv": ("queries", "rare_mae", "nonrare_spearman"),
    "pac.csv": ("n", "empirical_delta", "hoeffding_gap", "hoeffding_alpha", "empirical_fit"),
}

FIGURE_STEMS = {
    "freq.csv": "aligndp_freq",
    "mse_summary.csv": "aligndp_var",
    "attack.csv": "aligndp_attack",
    "pac.csv": "aligndp_pac_comparison",
}


class CsvSchemaError(Exception):
    def __init__(self, path: Path, expected: tuple[str, ...], found):
        self.path = path
        self.expected = expected
        super().__init__(
            f"{path}: malformed header {found!r}, expected columns {','.join(expected)}"
        )


@dataclass(frozen=True)
class PlotJob:
    input_dir: Path
    output_dir: Path
    format: str = "pdf"

    def __post_init__(self):
        if self.format not in ("pdf", "png"):
            raise ValueError(f"format must be 'pdf' or 'png', got {self.format!r}")


def _read_rows(path: Path) -> list[dict[str, str]]:
    expected = EXPECTED_HEADERS[path.name]
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvSchemaError(path, expected, None)
        if tuple(header) != expected:
            raise CsvSchemaError(path, expected, header)
        return [dict(zip(expected, row)) for row in reader]


def _column(rows, name) -> np.ndarray:
    return np.array([float(row[name]) for row in rows])


def _plot_freq(rows, ax):
    categories = _column(rows, "category_index")
    truth = _column(rows, "true_freq")
    estimate = _column(rows, "estimated_freq")
    rare = np.array([row["is_rare"] == "true" for row in rows])
    ax.bar(categories, truth, width=0.8, color="#c6d8ef", label="true frequency")
    ax.plot(categories[~rare], estimate[~rare], "o", color="#1f5fa8", label="estimate")
    if rare.any():
        ax.plot(categories[rare], estimate[rare], "x", color="#c23b22", label="rare (suppressed)")
    ax.set_xlabel("category")
    ax.set_ylabel("frequency")
    ax.set_title("Frequency recovery")
    ax.legend()


def _plot_var(rows, ax):
    n = _column(rows, "n")
    mean = _column(rows, "mean_mse")
    std = _column(rows, "std_mse")
    ax.errorbar(n, mean, yerr=std, fmt="o-", color="#1f5fa8", capsize=3, label="mean MSE")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("MSE (non-rare)")
    ax.set_title("Error decay")
    ax.legend()


def _plot_attack(rows, ax):
    queries = _column(rows, "queries")
    rare_mae = _column(rows, "rare_mae")
    rho = _column(rows, "nonrare_spearman")
    ax.plot(queries, rare_mae, "s-", color="#c23b22", label="rare MAE")
    ax.set_xlabel("query budget")
    ax.set_ylabel("rare MAE", color="#c23b22")
    ax.set_title("Extraction resistance")
    twin = ax.twinx()
    twin.plot(queries, rho, "o-", color="#1f5fa8", label="non-rare Spearman")
    twin.set_ylabel("non-rare Spearman", color="#1f5fa8")
    twin.set_ylim(-1.05, 1.05)


def _plot_pac(rows, ax):
    n = _column(rows, "n")
    observed = _column(rows, "empirical_delta")
    observed = np.where(observed > 0, observed, np.nan)  # log axis drops zeros
    ax.plot(n, observed, "ko", label="observed")
    for column, label in (
        ("hoeffding_gap", "gap bound"),
        ("hoeffding_alpha", "threshold bound"),
        ("empirical_fit", "exponential fit"),
    ):
        ax.plot(n, _column(rows, column), "--", label=label)
    ax.set_yscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("indistinguishability failure probability")
    ax.set_title("Shielding validation")
    ax.legend()


_RENDERERS = {
    "freq.csv": _plot_freq,
    "mse_summary.csv": _plot_var,
    "attack.csv": _plot_attack,
    "pac.csv": _plot_pac,
}


def render_all(job: PlotJob) -> list[Path]:
    """Render every figure whose CSV is present; return the written paths."""
    input_dir = Path(job.input_dir)
    if not input_dir.is_dir():
        raise FileNotFoundError(f"input directory {input_dir} does not exist")
    output_dir = Path(job.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    written = []
    for csv_name, stem in FIGURE_STEMS.items():
        source = input_dir / csv_name
        if not source.exists():
            warnings.warn(f"{source} is missing, skipping {stem}", stacklevel=2)
            continue
        rows = _read_rows(source)
        fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
        _RENDERERS[csv_name](rows, ax)
        target = output_dir / f"{stem}.{job.format}"
        fig.savefig(target)
        plt.close(fig)
        written.append(target)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aligndp-plots",
        description="Render experiment figures from the harness's CSV outputs.",
    )
    parser.add_argument("--in", dest="input_dir", required=True, metavar="DIR")
    parser.add_argument("--out", dest="output_dir", required=True, metavar="DIR")
    parser.add_argument("--format", choices=("pdf", "png"), default="pdf")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    job = PlotJob(Path(args.input_dir), Path(args.output_dir), args.format)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            written = render_all(job)
        for warning in caught:
            print(f"warning: {warning.message}", file=sys.stderr)
    except (CsvSchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
