"""Empirical norm-equivalence ratios over seeded random instances.

Reports ||i(a)||_p / ||a||_exp, ||k||_log / ||k||_q and the dual-norm probe
ratio against ||psi||_log, grouped by dimension and exponent.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path
import sys
import warnings

import polars as pl

REPO_ROOT = Path(__file__).resolve().parents[1]
SRC = REPO_ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from qig.config import load_profile, resolve_options  # noqa: E402
from qig.errors import QigWarning  # noqa: E402
from qig.kosaki import exp_embedding_ratio, log_embedding_ratio  # noqa: E402
from qig.orlicz import dual_norm_probe  # noqa: E402
from qig.testing.sampling import (  # noqa: E402
    instance_rng,
    random_algebra,
    random_functional,
    random_hermitian,
    random_state,
)


def _parse_list(text: str, cast):
    return [cast(part) for part in text.split(",") if part.strip()]


def collect_ratios(dims: list[int], samples: int, seed: int, exponents: list[float], options) -> pl.DataFrame:
    rows = []
    for dim in dims:
        for sample in range(samples):
            rng = instance_rng(seed, dim, sample)
            algebra = random_algebra(rng, dim)
            rho = random_state(rng, algebra)
            a = random_hermitian(rng, algebra)
            psi = random_functional(rng, algebra, scale=0.5)
            for p in exponents:
                rows.append(
                    {"ratio": "exp_vs_lp", "dim": dim, "exponent": p,
                     "value": exp_embedding_ratio(rho, a, p, options)}
                )
                rows.append(
                    {"ratio": "log_vs_lq", "dim": dim, "exponent": p,
                     "value": log_embedding_ratio(rho, psi, p, options)}
                )
            rows.append(
                {"ratio": "dual_vs_log", "dim": dim, "exponent": None,
                 "value": dual_norm_probe(rho, psi, options).ratio}
            )
    return pl.DataFrame(rows, schema={"ratio": pl.Utf8, "dim": pl.Int64, "exponent": pl.Float64, "value": pl.Float64})


def summarize(frame: pl.DataFrame) -> pl.DataFrame:
    return (
        frame.group_by(["ratio", "dim", "exponent"], maintain_order=True)
        .agg(
            pl.len().alias("samples"),
            pl.col("value").min().alias("min"),
            pl.col("value").mean().alias("mean"),
            pl.col("value").max().alias("max"),
        )
        .sort(["ratio", "dim", "exponent"], nulls_last=True)
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Sweep empirical Orlicz/Kosaki norm ratios.")
    parser.add_argument("--dims", default="2,3", help="Comma-separated dimensions.")
    parser.add_argument("--samples", type=int, default=20, help="Instances per dimension.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--exponents", default="1.5,2,4", help="Comma-separated p (and q) values.")
    parser.add_argument("--config", default="qig.yaml", help="Profiles YAML file.")
    parser.add_argument("--profile", default=None)
    parser.add_argument(
        "--out",
        type=Path,
        default=Path("reports/norm_ratios.json"),
        help="Where to write the summary JSON.",
    )
    args = parser.parse_args(argv)

    options = resolve_options(load_profile(args.config, args.profile))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", QigWarning)
        frame = collect_ratios(
            _parse_list(args.dims, int), args.samples, args.seed, _parse_list(args.exponents, float), options
        )
    summary = summarize(frame)
    print(summary)  # noqa: T201

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(summary.to_dicts(), indent=2) + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
