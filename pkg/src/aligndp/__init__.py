"""Two-tier local privacy for categorical data.

Rare categories are shielded outright (their reports are indistinguishable
by construction), non-rare categories go through k-ary randomized response
with exact debiasing, and a budget ledger gates every aggregate release.
A seeded simulation harness reproduces the recovery, error-decay,
extraction-resistance, shielding-validation, and utility experiments as
CSV files.
"""

from .accountant import (
    ADVANCED,
    BASIC,
    ChargeResult,
    PrivacyLedger,
    ReleaseBundle,
    aggregate,
    compose_advanced,
    compose_basic,
)
from .config import DEFAULT_SEED, ConfigError, SimConfig, dump_config_text, parse_config_text
from .mechanism import (
    SHIELDED,
    CategoricalDistribution,
    PacBounds,
    PrivatizedReport,
    RapporParams,
    RarityPartition,
    ReportKind,
    classify_rarity,
    debias,
    derive_params,
    estimator_variance_bound,
    pac_bounds,
    privatize,
    privatize_many,
    randomization_matrix,
)
from .metrics import kl_divergence, mae, spearman_rho, top_k_accuracy
from .simharness import (
    CSV_FILENAMES,
    SCHEMA_COLUMNS,
    ExperimentResult,
    make_distribution,
    render_csv,
    run_all,
    run_extraction,
    run_frequency_recovery,
    run_mse_decay,
    run_pac_validation,
    run_utility,
    sample_records,
    stream_rng,
    write_csv,
)

__version__ = "0.1.0"
