"""Run one YAML config and print the CSV; thin wrapper over the CLI.

    python3 scripts/run_config.py scripts/configs/spiked_diag_sweep.yaml [--out results.csv]
"""

import argparse
import sys

from prune_dc.cli import run
from prune_dc.config import config_from_dict, load_config

ap = argparse.ArgumentParser()
ap.add_argument("config")
ap.add_argument("--out")
ap.add_argument("--threads", type=int, default=1)
args = ap.parse_args()

report = run(config_from_dict(load_config(args.config)), args.out, args.threads)
if not args.out:
    sys.stdout.write(report.to_csv())
