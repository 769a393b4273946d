"""Mean WSR and standard error per (sweep value, label) for one or more result CSVs.

    python3 scripts/summarize.py results/arch_compare.csv
"""
import argparse
import math
import sys
from collections import defaultdict

from rdars.harness import read_csv


def summarize(path):
    groups = defaultdict(list)
    flags = defaultdict(int)
    for r in read_csv(path):
        groups[(r.sweep_value, r.label)].append(r.wsr)
        if r.flag:
            flags[(r.sweep_value, r.label)] += 1
    print(f"# {path}")
    print(f"{'value':>10s}  {'label':16s} {'trials':>6s} {'mean':>10s} {'stderr':>10s} {'flagged':>7s}")
    for (value, label), vals in sorted(groups.items()):
        n = len(vals)
        mean = sum(vals) / n
        var = sum((v - mean) ** 2 for v in vals) / (n - 1) if n > 1 else 0.0
        print(f"{value:10g}  {label:16s} {n:6d} {mean:10.4f} {math.sqrt(var / n):10.4f} {flags[(value, label)]:7d}")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("csv", nargs="+")
    for path in p.parse_args().csv:
        summarize(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
