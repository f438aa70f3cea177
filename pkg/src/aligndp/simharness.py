"""Deterministic simulation harness.

Generates synthetic categorical data, runs the frequency-recovery, error-
decay, extraction-resistance, shielding-validation, and utility experiments,
and renders each as CSV rows. Every random draw comes from a generator
keyed by (master seed, experiment stream id, counters), so experiments can
be run in any order, or in parallel per run, without changing any output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accountant import BASIC, PrivacyLedger, ReleaseBundle, aggregate
from .config import SimConfig
from .mechanism import (
    SHIELDED,
    CategoricalDistribution,
    PrivatizedReport,
    RapporParams,
    RarityPartition,
    classify_rarity,
    derive_params,
    pac_bounds,
    privatize_many,
)
from .metrics import kl_divergence, mae, spearman_rho, top_k_accuracy

__all__ = [
    "SCHEMA_COLUMNS",
    "CSV_FILENAMES",
    "ExperimentResult",
    "stream_rng",
    "make_distribution",
    "sample_records",
    "run_frequency_recovery",
    "run_mse_decay",
    "run_extraction",
    "run_pac_validation",
    "run_utility",
    "run_all",
    "render_csv",
    "write_csv",
]

SCHEMA_COLUMNS = {
    "freq": ("category_index", "true_freq", "estimated_freq", "is_rare", "suppressed"),
    "mse": ("n", "run_index", "mse"),
    "mse_summary": ("n", "mean_mse", "std_mse"),
    "attack": ("queries", "rare_mae", "nonrare_spearman"),
    "pac": ("n", "empirical_delta", "hoeffding_gap", "hoeffding_alpha", "empirical_fit"),
    "utility": ("n", "kl", "top5_acc", "spearman"),
}

CSV_FILENAMES = {schema: f"{schema}.csv" for schema in SCHEMA_COLUMNS}

_STREAM_IDS = {"freq": 0, "mse": 1, "attack": 2, "pac": 3, "utility": 4}


@dataclass(frozen=True)
class ExperimentResult:
    """Rows of one experiment, bound to a named CSV schema."""

    schema_id: str
    rows: tuple[tuple, ...]

    def __post_init__(self):
        if self.schema_id not in SCHEMA_COLUMNS:
            raise ValueError(f"unknown schema_id {self.schema_id!r}")
        width = len(SCHEMA_COLUMNS[self.schema_id])
        for row in self.rows:
            if len(row) != width:
                raise ValueError(
                    f"row {row!r} does not match schema {self.schema_id!r} (width {width})"
                )

    @property
    def columns(self) -> tuple[str, ...]:
        return SCHEMA_COLUMNS[self.schema_id]


def stream_rng(seed: int, experiment: str, *counters: int) -> np.random.Generator:
    """Generator for one (experiment, counters...) cell, split from the master seed."""
    key = (_STREAM_IDS[experiment], *counters)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def make_distribution(cfg: SimConfig) -> tuple[CategoricalDistribution, RarityPartition]:
    """Build the synthetic ground truth and its rarity partition.

    The first rare_count categories carry rare_mass each; the remaining
    mass is spread over the non-rare categories proportionally to
    rank^(-zipf_exponent) of their within-set rank (1-based). A flat
    exponent of 0 gives a uniform non-rare block.
    """
    nonrare_count = cfg.k - cfg.rare_count
    remaining = 1.0 - cfg.rare_count * cfg.rare_mass
    ranks = np.arange(1, nonrare_count + 1, dtype=float)
    weights = ranks ** (-cfg.zipf_exponent)
    masses = np.empty(cfg.k, dtype=float)
    masses[: cfg.rare_count] = cfg.rare_mass
    masses[cfg.rare_count :] = remaining * weights / weights.sum()
    dist = CategoricalDistribution(masses)
    return dist, classify_rarity(dist, cfg.alpha)


def sample_records(
    dist: CategoricalDistribution, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw n i.i.d. category indices from dist."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n!r}")
    return rng.choice(dist.k, size=n, p=dist.masses)


def _privatize_reports(
    records: np.ndarray,
    partition: RarityPartition,
    params: RapporParams,
    rng: np.random.Generator,
) -> list[PrivatizedReport]:
    values = privatize_many(records, partition, params, rng)
    shielded = PrivatizedReport.shielded_rare()
    return [
        shielded if v == SHIELDED else PrivatizedReport.reported(v) for v in values.tolist()
    ]


def _ample_ledger() -> PrivacyLedger:
    # Per-experiment releases are not the budget under study; see budget-demo.
    return PrivacyLedger(budget=math.inf, mode=BASIC)


def _release(
    cfg: SimConfig,
    records: np.ndarray,
    partition: RarityPartition,
    params: RapporParams,
    rng: np.random.Generator,
) -> ReleaseBundle:
    reports = _privatize_reports(records, partition, params, rng)
    max_rare_mass = cfg.rare_mass if cfg.rare_count > 0 else None
    bundle = aggregate(reports, partition, params, _ample_ledger(), max_rare_mass=max_rare_mass)
    assert isinstance(bundle, ReleaseBundle)  # infinite budget never refuses
    return bundle


def _nonrare_vector(bundle: ReleaseBundle, partition: RarityPartition) -> np.ndarray:
    return np.array([bundle.nonrare_estimates[j] for j in partition.nonrare])


def run_frequency_recovery(cfg: SimConfig) -> ExperimentResult:
    """One release at n_default; one row per category.

    Rare categories are emitted with estimated_freq fixed at 0 and
    suppressed=true; they never receive a per-category estimate.
    """
    dist, partition = make_distribution(cfg)
    params = derive_params(cfg.p, cfg.k)
    records = sample_records(dist, cfg.n_default, stream_rng(cfg.seed, "freq", 0))
    bundle = _release(cfg, records, partition, params, stream_rng(cfg.seed, "freq", 1))
    rare = set(partition.rare)
    rows = []
    for j in range(cfg.k):
        is_rare = j in rare
        estimate = 0.0 if is_rare else bundle.nonrare_estimates[j]
        rows.append((j, float(dist.masses[j]), float(estimate), is_rare, is_rare))
    return ExperimentResult("freq", tuple(rows))


def run_mse_decay(cfg: SimConfig) -> tuple[ExperimentResult, ExperimentResult]:
    """Error decay over the sample-size grid.

    For each n in n_grid, cfg.runs independent releases; per run the MSE is
    taken over non-rare categories between the debiased estimate and the
    truth. Returns the per-run rows and the (n, mean, std) summary rows.
    """
    dist, partition = make_distribution(cfg)
    params = derive_params(cfg.p, cfg.k)
    truth = dist.masses[list(partition.nonrare)]
    rows = []
    summary_rows = []
    for gi, n in enumerate(cfg.n_grid):
        errors = []
        for run in range(cfg.runs):
            records = sample_records(dist, n, stream_rng(cfg.seed, "mse", gi, run, 0))
            bundle = _release(cfg, records, partition, params, stream_rng(cfg.seed, "mse", gi, run, 1))
            estimate = _nonrare_vector(bundle, partition)
            mse = float(np.mean((estimate - truth) ** 2))
            errors.append(mse)
            rows.append((n, run, mse))
        summary_rows.append((n, float(np.mean(errors)), float(np.std(errors, ddof=1))))
    return ExperimentResult("mse", tuple(rows)), ExperimentResult("mse_summary", tuple(summary_rows))


def run_extraction(cfg: SimConfig) -> ExperimentResult:
    """Adversary view under repeated querying of one fixed record set.

    Each query re-randomizes the same records and the adversary averages
    the debiased non-rare estimates across its Q releases. Rare categories
    are never released, so the adversary's best generic rare estimate is
    the uniform split of the leftover mass (1 - sum of non-rare estimates)
    over the rare categories; rare_mae scores that guess against the truth.
    """
    dist, partition = make_distribution(cfg)
    params = derive_params(cfg.p, cfg.k)
    records = sample_records(dist, cfg.n_default, stream_rng(cfg.seed, "attack", 0))
    truth_nonrare = dist.masses[list(partition.nonrare)]
    truth_rare = dist.masses[list(partition.rare)]
    rows = []
    for qi, queries in enumerate(cfg.query_budgets):
        estimates = np.zeros(len(partition.nonrare))
        for release_index in range(queries):
            rng = stream_rng(cfg.seed, "attack", 1, qi, release_index)
            bundle = _release(cfg, records, partition, params, rng)
            estimates += _nonrare_vector(bundle, partition)
        estimates /= queries
        if partition.rare:
            rare_guess = (1.0 - float(estimates.sum())) / len(partition.rare)
            rare_mae = mae(truth_rare, np.full(len(partition.rare), rare_guess))
        else:
            rare_mae = 0.0
        rho = spearman_rho(truth_nonrare, estimates)
        rows.append((queries, rare_mae, rho))
    return ExperimentResult("attack", tuple(rows))


def run_pac_validation(cfg: SimConfig) -> ExperimentResult:
    """Empirical shielding failure rate against the three analytic bounds.

    For each n, over pac_runs repetitions, delta_hat(n) is the fraction of
    repetitions where the designated rare category (the lowest rare index)
    looks non-rare in the raw sample, i.e. its pre-privatization empirical
    frequency reaches alpha. The per-repetition count is drawn from the
    category's exact Binomial(n, mu) marginal.
    """
    dist, partition = make_distribution(cfg)
    if not partition.rare:
        raise ValueError("shielding validation needs at least one rare category")
    mu = float(dist.masses[partition.rare[0]])
    rows = []
    for gi, n in enumerate(cfg.n_grid):
        counts = np.array(
            [stream_rng(cfg.seed, "pac", gi, rep).binomial(n, mu) for rep in range(cfg.pac_runs)]
        )
        empirical_delta = float(np.mean(counts / n >= cfg.alpha))
        bounds = pac_bounds(n, cfg.alpha, mu)
        rows.append(
            (n, empirical_delta, bounds.hoeffding_gap, bounds.hoeffding_alpha, bounds.empirical_fit)
        )
    return ExperimentResult("pac", tuple(rows))


def run_utility(cfg: SimConfig) -> ExperimentResult:
    """Distribution-level utility of one release at utility_n samples.

    All metrics are computed over non-rare categories only: KL of truth
    against the clamped-renormalized estimate, top-5 overlap, and Spearman
    rank correlation.
    """
    dist, partition = make_distribution(cfg)
    params = derive_params(cfg.p, cfg.k)
    records = sample_records(dist, cfg.utility_n, stream_rng(cfg.seed, "utility", 0))
    bundle = _release(cfg, records, partition, params, stream_rng(cfg.seed, "utility", 1))
    truth = dist.masses[list(partition.nonrare)]
    estimate = _nonrare_vector(bundle, partition)
    kl = kl_divergence(truth, estimate)
    top5 = top_k_accuracy(truth, estimate, k_top=min(5, truth.size))
    rho = spearman_rho(truth, estimate)
    return ExperimentResult("utility", ((cfg.utility_n, kl, top5, rho),))


def run_all(cfg: SimConfig) -> dict[str, ExperimentResult]:
    """Every experiment, keyed by schema id (mse contributes two results)."""
    mse, mse_summary = run_mse_decay(cfg)
    return {
        "freq": run_frequency_recovery(cfg),
        "mse": mse,
        "mse_summary": mse_summary,
        "attack": run_extraction(cfg),
        "pac": run_pac_validation(cfg),
        "utility": run_utility(cfg),
    }


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    raise TypeError(f"unsupported CSV cell type {type(value)!r}")


def render_csv(result: ExperimentResult) -> str:
    """Comma-separated text: header row, '.' decimals, LF line endings."""
    lines = [",".join(result.columns)]
    for row in result.rows:
        lines.append(",".join(_format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(result: ExperimentResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(render_csv(result))
