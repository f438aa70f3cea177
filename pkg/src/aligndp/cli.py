"""Command-line entry point.

Subcommands map one-to-one onto the harness experiments plus a budget demo;
run-all executes everything. Configuration is resolved as built-in defaults,
then the ALIGNDP_SEED environment variable (seed only), then the --config
file, then command-line flags, and the fully resolved config is printed as
key=value lines before anything runs. Output files are written atomically
into --out and never overwritten without --force.

Exit codes: 0 success, 1 invalid config value or refused overwrite,
2 usage errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from .accountant import PrivacyLedger
from .config import (
    FIELD_NAMES,
    ConfigError,
    SimConfig,
    _parse_value,
    dump_config_text,
    parse_config_text,
)
from .mechanism import derive_params
from .simharness import (
    CSV_FILENAMES,
    run_all,
    run_extraction,
    run_frequency_recovery,
    run_mse_decay,
    run_pac_validation,
    run_utility,
    render_csv,
)

_EXPERIMENT_SCHEMAS = {
    "freq": ("freq",),
    "mse": ("mse", "mse_summary"),
    "attack": ("attack",),
    "pac": ("pac",),
    "utility": ("utility",),
    "run-all": ("freq", "mse", "mse_summary", "attack", "pac", "utility"),
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value config file")
    common.add_argument("--out", metavar="DIR", default="results", help="output directory")
    common.add_argument("--force", action="store_true", help="overwrite existing output files")
    for field in FIELD_NAMES:
        flag = "--" + field.replace("_", "-")
        common.add_argument(flag, dest=field, metavar="V", default=None, help=f"override {field}")

    parser = argparse.ArgumentParser(
        prog="aligndp",
        description="Two-tier privatization experiments: rarity shielding plus randomized response.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("freq", "mse", "attack", "pac", "utility", "run-all"):
        sub.add_parser(name, parents=[common], help=f"run the {name} experiment(s)")

    demo = sub.add_parser("budget-demo", parents=[common], help="charge a ledger until refusal")
    demo.add_argument("--budget", type=float, default=5.0, help="hard budget in nats")
    demo.add_argument("--mode", choices=("basic", "advanced"), default="basic")
    demo.add_argument(
        "--eps-per-query",
        default="auto",
        help="per-query charge in nats, or 'auto' for log((1-p)/p) at the resolved p",
    )
    demo.add_argument("--delta-target", type=float, default=1e-5)
    demo.add_argument("--max-queries", type=int, default=1000)
    return parser


def _resolve_config(args: argparse.Namespace) -> SimConfig:
    cfg = SimConfig()
    env_seed = os.environ.get("ALIGNDP_SEED")
    if env_seed is not None:
        try:
            cfg = replace(cfg, seed=int(env_seed))
        except ValueError as exc:
            raise ConfigError(f"seed has malformed value {env_seed!r} (from ALIGNDP_SEED)") from exc
    if args.config:
        cfg = parse_config_text(Path(args.config).read_text(encoding="utf-8"), base=cfg)
    overrides = {}
    for field in FIELD_NAMES:
        raw = getattr(args, field, None)
        if raw is not None:
            overrides[field] = _parse_value(field, raw)
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="")
    os.replace(tmp, path)


def _prepare_out_dir(args: argparse.Namespace, filenames: list[str]) -> list[Path] | None:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    targets = [out_dir / name for name in filenames]
    if not args.force:
        existing = [str(t) for t in targets if t.exists()]
        if existing:
            print(
                "error: refusing to overwrite existing files (use --force): "
                + ", ".join(existing),
                file=sys.stderr,
            )
            return None
    return targets


def _run_experiments(subcommand: str, cfg: SimConfig) -> dict[str, str]:
    if subcommand == "run-all":
        results = run_all(cfg)
    elif subcommand == "freq":
        results = {"freq": run_frequency_recovery(cfg)}
    elif subcommand == "mse":
        mse, mse_summary = run_mse_decay(cfg)
        results = {"mse": mse, "mse_summary": mse_summary}
    elif subcommand == "attack":
        results = {"attack": run_extraction(cfg)}
    elif subcommand == "pac":
        results = {"pac": run_pac_validation(cfg)}
    else:
        results = {"utility": run_utility(cfg)}
    return {schema: render_csv(result) for schema, result in results.items()}


def _budget_demo(args: argparse.Namespace, cfg: SimConfig) -> int:
    if args.eps_per_query == "auto":
        eps = derive_params(cfg.p, cfg.k).eps_nominal
    else:
        try:
            eps = float(args.eps_per_query)
        except ValueError:
            print(f"error: eps_per_query has malformed value {args.eps_per_query!r}", file=sys.stderr)
            return 1
    if eps <= 0 or math.isinf(eps):
        print(f"error: eps_per_query must be positive and finite, got {eps!r}", file=sys.stderr)
        return 1
    targets = _prepare_out_dir(args, ["ledger.txt"])
    if targets is None:
        return 1

    ledger = PrivacyLedger(budget=args.budget, mode=args.mode, delta_target=args.delta_target)
    print(f"eps_per_query={eps!r}")
    for query in range(1, args.max_queries + 1):
        outcome = ledger.charge(eps)
        if outcome.accepted:
            print(f"query {query}: accepted spent={outcome.spent!r} budget={ledger.budget!r}")
        else:
            print(f"query {query}: refused ({outcome.reason})")
            break
    else:
        print(f"stopped after {args.max_queries} accepted queries (max-queries cap)")
    _atomic_write(targets[0], ledger.to_text())
    print(f"wrote {targets[0]}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = _resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(dump_config_text(cfg), end="")

    if args.subcommand == "budget-demo":
        return _budget_demo(args, cfg)

    schemas = _EXPERIMENT_SCHEMAS[args.subcommand]
    targets = _prepare_out_dir(args, [CSV_FILENAMES[s] for s in schemas])
    if targets is None:
        return 1
    rendered = _run_experiments(args.subcommand, cfg)
    for schema, target in zip(schemas, targets):
        _atomic_write(target, rendered[schema])
        print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
