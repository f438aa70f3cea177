#!/usr/bin/env python3
"""Run the five experiments on a reduced configuration and summarize them.

Writes the same CSV files the CLI produces into ./demo_results/ and prints
one digest per experiment. Use the `aligndp` CLI for full-size runs.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from aligndp import CSV_FILENAMES, SimConfig, run_all, write_csv

cfg = replace(
    SimConfig(),
    n_grid=(200, 400, 800, 1600),
    runs=10,
    pac_runs=400,
    query_budgets=(1, 10, 50),
)

out_dir = Path("demo_results")
out_dir.mkdir(exist_ok=True)
results = run_all(cfg)
for schema, result in results.items():
    write_csv(result, out_dir / CSV_FILENAMES[schema])
print(f"wrote {len(results)} CSV files to {out_dir}/")

freq = results["freq"]
worst = max(abs(t - e) for _, t, e, is_rare, _ in freq.rows if not is_rare)
suppressed = sum(1 for row in freq.rows if row[3])
print(f"\nfrequency recovery: {suppressed} rare categories suppressed, "
      f"worst non-rare error {worst:.4f}")

summary = results["mse_summary"].rows
slope = np.polyfit(
    np.log([r[0] for r in summary]), np.log([r[1] for r in summary]), 1
)[0]
print(f"error decay: mean MSE {summary[0][1]:.2e} at n={summary[0][0]} down to "
      f"{summary[-1][1]:.2e} at n={summary[-1][0]} (log-log slope {slope:.2f})")

print("extraction resistance:")
for queries, rare_mae, rho in results["attack"].rows:
    print(f"  Q={queries:<3} rare MAE {rare_mae:.4f}  non-rare Spearman {rho:.3f}")

print("shielding validation (empirical vs gap bound):")
for n, delta_hat, gap, _, _ in results["pac"].rows:
    print(f"  n={n:<5} observed {delta_hat:.4f}  bound {gap:.4f}")

((n, kl, top5, rho),) = results["utility"].rows
print(f"utility at n={n}: KL {kl:.4f}, top-5 accuracy {top5:.2f}, Spearman {rho:.3f}")
