#!/usr/bin/env python3
"""
Experiment Config Generator Tool

Writes the default size/power simulation grid: skewed and symmetric NNTS
models for M = 2..5 drawn with a fixed seed, two M = 1 models, and the
k-sine alternatives, all tested at sample sizes 20..1000.
"""

import argparse
import sys
from pathlib import Path

import yaml

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.distributions import KSineModel, VonMisesBase, random_nnts_model, random_symmetric_model
from core.persistence import model_to_document
from core.rng import RngStream

SAMPLE_SIZES = [20, 50, 100, 200, 500, 1000]
ALPHAS = [0.10, 0.05, 0.01]
KSINE_CASES = [(2, 0.2), (2, 0.4), (2, 0.6), (3, 0.2), (3, 0.6)]


def build_config(seed: int, n_datasets: int, k_replicates: int) -> dict:
    """
    Build the default experiment document.

    Args:
        seed: Seed for the random generator models and the experiment itself
        n_datasets: Datasets per cell
        k_replicates: Bootstrap replicates for the bootstrap tests

    Returns:
        Experiment config as a plain dictionary
    """
    root = RngStream(seed)
    generators = []

    for index in range(2):
        model = random_nnts_model(1, root.spawn(100 + index).generator())
        generators.append({"id": f"nnts_m1_{index + 1}", "model": model_to_document(model), "test_m": 2})

    for m in range(2, 6):
        skewed = random_nnts_model(m, root.spawn(m).generator())
        symmetric = random_symmetric_model(m, root.spawn(10 + m).generator())
        generators.append({"id": f"nnts_m{m}_skewed", "model": model_to_document(skewed)})
        generators.append({"id": f"nnts_m{m}_symmetric", "model": model_to_document(symmetric)})

    for k_star, lam in KSINE_CASES:
        model = KSineModel(mu=0.0, lam=lam, k_star=k_star, base=VonMisesBase(kappa=1.0))
        generators.append({
            "id": f"ksine_k{k_star}_l{lam:g}",
            "model": model_to_document(model),
            "test_m": max(2, k_star),
        })

    return {
        "master_seed": seed,
        "n_datasets": n_datasets,
        "sample_sizes": SAMPLE_SIZES,
        "alphas": ALPHAS,
        "generators": generators,
        "tests": [
            {"kind": "lr_asymptotic"},
            {"kind": "lr_bootstrap", "k": k_replicates},
            {"kind": "b2_bootstrap", "k": k_replicates},
        ],
    }


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(
        description="Generate the default NNTS symmetry simulation config",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Write the default grid
  python generate_experiment_config.py --out configs/default_grid.yaml

  # Smaller grid for a quick run
  python generate_experiment_config.py --out quick.yaml --datasets 20 --k 99
        """
    )

    parser.add_argument("--out", required=True, help="Output YAML file")
    parser.add_argument("--seed", type=int, default=20240101, help="Master seed")
    parser.add_argument("--datasets", type=int, default=100, help="Datasets per cell")
    parser.add_argument("--k", type=int, default=199, help="Bootstrap replicates")

    args = parser.parse_args()
    if args.k < 99:
        parser.error("--k must be at least 99")

    config = build_config(args.seed, args.datasets, args.k)
    Path(args.out).write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
    print(f"✓ Wrote {len(config['generators'])} generators to {args.out}")


if __name__ == "__main__":
    main()
