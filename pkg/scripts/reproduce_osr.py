"""Grid-search context weights on a validation set, then run the OSR experiment.

    python scripts/reproduce_osr.py --output-dir results/osr

Writes gridsearch_weights.json, osr_reports.json and per-recognizer metrics
and confusion tables, and prints the accuracies plus the confusable-pair and
Throw statistics.
"""

import argparse
import json
import time
from pathlib import Path

import numpy as np

from motion_concepts.config import load_config
from motion_concepts.harness import (format_summary, grid_search_weights, osr_experiment, save_osr_reports,
                                     write_report)
from motion_concepts.synthetic import CATALOG, generate_dataset

PAIRS = (("Wash Hands", "Wash Plates"), ("Wave", "Wash Window"))


def run(validation_seed, test_seed, n_per_class, repetitions, config=None, out_dir=None):
    cfg = load_config(config)
    params, gen = cfg.omcl, cfg.generator_config
    t0 = time.perf_counter()
    validation = generate_dataset(gen, n_per_class=n_per_class, seed=validation_seed)
    grid = grid_search_weights(validation, CATALOG, cfg.experiment.weight_grid, repeats=repetitions,
                               seed=validation_seed, params=params)
    k_lambda, k_rho = grid.selected
    test = generate_dataset(gen, n_per_class=n_per_class, seed=test_seed)
    reports = osr_experiment(test, CATALOG, cfg.experiment.recognizers, repetitions=repetitions, seed=test_seed,
                             params=params, weights=(k_rho, k_lambda))
    seconds = time.perf_counter() - t0
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "gridsearch_weights.json", "w") as fh:
            json.dump(grid.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        save_osr_reports(reports, out / "osr_reports.json")
        for rep in reports.values():
            write_report(rep, out)
    return grid, reports, seconds


def describe(grid, reports, seconds) -> str:
    lines = [f"selected k_lambda0={grid.selected[0]:g} k_rho0={grid.selected[1]:g} "
             f"(validation accuracy {100 * max(grid.mean_scores):.1f} %)", format_summary(reports)]
    for r in ("omcl", "omcl-n"):
        if r in reports:
            rep = reports[r]
            pairs = "  ".join(f"{'/'.join(p)} {100 * rep.block_accuracy(p):5.1f} %" for p in PAIRS)
            pc = rep.per_class_accuracy()
            lines.append(f"{r:8s} pairs: {pairs}  Throw {100 * pc['Throw']:.1f} % "
                         f"(median {100 * np.median(list(pc.values())):.1f} %)")
    lines.append(f"{seconds:.0f} s")
    return "\n".join(lines)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--validation-seed", type=int, default=100)
    ap.add_argument("--test-seed", type=int, default=0)
    ap.add_argument("--n-per-class", type=int, default=6)
    ap.add_argument("--repetitions", type=int, default=10)
    ap.add_argument("--config")
    ap.add_argument("--output-dir", default="results/osr")
    args = ap.parse_args()
    result = run(args.validation_seed, args.test_seed, args.n_per_class, args.repetitions, args.config,
                 args.output_dir)
    print(describe(*result))
    print(f"reports written to {args.output_dir}")


if __name__ == "__main__":
    main()
