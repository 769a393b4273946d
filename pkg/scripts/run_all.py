"""Run every config in configs/ through the CLI and write one CSV per config.

    python3 scripts/run_all.py --seed 1 --out results [--trials 5] [--only arch_compare]
"""
import argparse
import sys
import time
from pathlib import Path

from rdars.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--seed", default="1")
    p.add_argument("--out", default=str(ROOT / "results"))
    p.add_argument("--trials", help="override the trial count of every config")
    p.add_argument("--only", nargs="*", help="config stems to run")
    p.add_argument("--perfect-csi", action="store_true")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    configs = sorted((ROOT / "configs").glob("*.ini"))
    if args.only:
        configs = [c for c in configs if c.stem in args.only]
    failed = 0
    for cfg in configs:
        argv = ["run", "--config", str(cfg), "--seed", args.seed, "--out", str(out / f"{cfg.stem}.csv")]
        if args.trials:
            argv += ["--trials", args.trials]
        if args.perfect_csi:
            argv.append("--perfect-csi")
        t0 = time.time()
        rc = cli_main(argv)
        failed += rc != 0
        print(f"{cfg.stem:24s} exit {rc}  {time.time() - t0:7.1f} s", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
