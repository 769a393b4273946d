"""rdars-sim command line."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .codebook import (build_connected_rcb, build_dft_codebook, build_fixed_connected,
                       build_hierarchical_codebook, dump_codebook)
from .config import parse_scenario
from .errors import RdarsError
from .harness import emit_csv, passive_book, run_experiment, sdma_modes
from .training import TrainingLog


def _u64(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def cmd_run(args) -> int:
    spec = parse_scenario(args.config)
    spec = replace(spec, seed=args.seed)
    if args.trials is not None:
        if args.trials < 1:
            raise RdarsError("--trials must be >= 1")
        spec = replace(spec, trials=args.trials)
    log = TrainingLog() if args.training_log else None
    rows = run_experiment(spec, perfect_csi=args.perfect_csi, training_log=log)
    emit_csv(rows, args.out)
    if log is not None:
        log.write(args.training_log)
    return 0


def cmd_dump(args) -> int:
    spec = parse_scenario(args.config)
    sc, st = spec.scenario, spec.settings
    lam = sc.wavelength
    mode = sdma_modes(sc, st, st.sdma_a_z or 1, st.sdma_a_y or 1)["rdars"]
    kind = st.codebook_kind
    if kind == "passive":
        book = passive_book(sc, mode, st.passive_res_z, st.passive_res_y)
    elif kind == "connected":
        book = build_connected_rcb(mode.conn_coords_z, mode.conn_coords_y, mode.a_z, mode.a_y, lam)
    elif kind == "fixed_connected":
        book = build_fixed_connected(mode.a_z, mode.a_y, sc.spacing, lam)
    elif kind == "bs":
        book = build_dft_codebook(sc.N_t, lam / 2, lam, "bs")
    elif kind == "ue":
        book = build_dft_codebook(sc.N_u, lam / 2, lam, "ue")
    elif kind == "hierarchical":
        book = build_hierarchical_codebook(sc.N_t, lam / 2, lam, st.branching, "bs")
    else:
        raise RdarsError(f"unknown codebook kind {kind!r}")
    dump_codebook(book, args.out)
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="rdars-sim")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", required=True, type=_u64)
    r.add_argument("--out", required=True)
    r.add_argument("--trials", type=int)
    r.add_argument("--perfect-csi", action="store_true")
    r.add_argument("--training-log", help="write the first trial's beam-training measurements here")
    r.set_defaults(fn=cmd_run)
    d = sub.add_parser("dump-codebook", help="write a codebook as a plain-text table")
    d.add_argument("--config", required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(fn=cmd_dump)
    args = p.parse_args(argv)
    try:
        return args.fn(args)
    except (RdarsError, OSError) as e:
        print(f"rdars-sim: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
