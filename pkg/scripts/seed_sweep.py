"""Repeat the validation/test OSR protocol over several seed pairs.

    python scripts/seed_sweep.py --pairs 100:0 101:1 102:2

Prints one block per pair; useful to see how much the acceptance numbers move
with the data draw.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from reproduce_osr import describe, run  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", nargs="+", default=["100:0", "101:1", "102:2"], metavar="VAL:TEST")
    ap.add_argument("--n-per-class", type=int, default=6)
    ap.add_argument("--repetitions", type=int, default=10)
    ap.add_argument("--config")
    args = ap.parse_args()
    for pair in args.pairs:
        val, test = (int(v) for v in pair.split(":"))
        print(f"== validation seed {val}, test seed {test}")
        print(describe(*run(val, test, args.n_per_class, args.repetitions, args.config)), flush=True)


if __name__ == "__main__":
    main()
