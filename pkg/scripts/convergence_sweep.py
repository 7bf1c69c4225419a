#!/usr/bin/env python3
"""Seed sweep of the one-target scenario; prints a convergence summary table.

Usage: python scripts/convergence_sweep.py [n_seeds] [--jobs N]
"""

import argparse
import concurrent.futures
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np  # noqa: E402

from conescan.config import default_scenario  # noqa: E402
from conescan.mission import run_scenario  # noqa: E402


def one_seed(seed: int):
    report = run_scenario(default_scenario(1, seed=seed))
    done = [t for t in report.targets if t.status == "done"]
    if done:
        best = min(done, key=lambda t: t.localization_error)
        return seed, best.localization_error, best.eigenvalues[0], report.duration_s
    return seed, None, None, report.duration_s


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("n_seeds", nargs="?", type=int, default=20)
    parser.add_argument("--jobs", type=int, default=None)
    args = parser.parse_args()

    with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
        results = sorted(pool.map(one_seed, range(args.n_seeds)))

    print("seed  error_m  lambda_max  sim_s")
    errors = []
    for seed, err, lam, dur in results:
        if err is None:
            print(f"{seed:<6d}--       --          {dur:.0f}")
        else:
            errors.append(err)
            print(f"{seed:<6d}{err:.3f}    {lam:.3f}       {dur:.0f}")
    if errors:
        print(f"\nconverged {len(errors)}/{len(results)}, "
              f"median error {np.median(errors):.3f} m, "
              f"worst {max(errors):.3f} m")


if __name__ == "__main__":
    main()
