"""Prepare a census CSV and an experiment config for the CLI demos.

Uses the real UCI Adult file when it can be downloaded (or has been placed
at data/adult.data manually); otherwise falls back to the calibrated
census surrogate at the same scale. Writes:

    data/adult.csv      the dataset the other demos and the CLI consume
    data/demo.cfg       a ready-to-run experiment config

Run:  python demos/00_prepare_census_csv.py [--rows N]
"""

import argparse
import sys
from pathlib import Path

from fairsynth.adult import (
    download_adult,
    prepare_adult_csv,
    surrogate_adult,
    verify_adult_csv,
)

CONFIG = """\
# fairsynth demo experiment
data.path = "data/adult.csv"
schema.preset = "adult"
schema.protected = ["sex"]
train.fairness_weight = 0.3
train.epochs = 80
seed = 7
proxy.column = "sex"
proxy.reference_value = "Female"
proxy.probability = 0.9
sweep.fairness_weights = [0.0, 0.3, 1.0]
sweep.seeds = [1, 2, 3, 4, 5]
output.dir = "out"
"""


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=32561,
                        help="surrogate size if the real file is unavailable")
    args = parser.parse_args()

    dest = Path("data")
    dest.mkdir(exist_ok=True)
    csv_path = dest / "adult.csv"

    if csv_path.exists():
        record = verify_adult_csv(csv_path)
        print(f"found existing {csv_path}: {record['rows']} rows, "
              f"sha256 {record['sha256'][:16]}…")
    elif (dest / "adult.data").exists():
        record = prepare_adult_csv(dest / "adult.data", csv_path)
        print(f"prepared real census file: {record['rows']} rows")
    else:
        try:
            record = download_adult(dest)
            print(f"downloaded real census file: {record['rows']} rows")
        except OSError as exc:
            print(f"download unavailable ({exc}); writing surrogate instead",
                  file=sys.stderr)
            surrogate_adult(n=args.rows, seed=0).write_csv(csv_path)
            print(f"wrote surrogate census data: {args.rows} rows -> {csv_path}")

    cfg_path = dest / "demo.cfg"
    cfg_path.write_text(CONFIG, encoding="utf-8")
    print(f"wrote config -> {cfg_path}")
    print("\nnext steps:")
    print("  fairsynth fit --config data/demo.cfg")
    print("  fairsynth sample out/model.json 32561 --seed 1 --out out/synthetic.csv")
    print("  fairsynth evaluate data/adult.csv out/synthetic.csv --config data/demo.cfg")


if __name__ == "__main__":
    main()
