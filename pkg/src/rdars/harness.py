"""Experiment orchestration: UE drops, beam training, optimizers, baselines, CSV."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from itertools import permutations
from typing import Callable, Optional

import numpy as np

from .channel import AngleOverride, ChannelSet, Scenario, build_channels, dbm_to_watts, wsr
from .codebook import (PlanarHierarchy, build_connected_rcb, build_dft_codebook, build_fixed_connected,
                       build_hierarchical_codebook, build_passive_rcb_2d)
from .config import ExperimentSpec, Settings, split_grid
from .errors import Infeasible, OversamplingViolation, RdarsError
from .oracle import exhaustive_beam_search
from .rdars_config import grid_mode, make_mode_config, min_transmit_elements, placed_mode
from .sdma import bs_gains, sdma_design
from .tdma import Books, optimal_te_count, split_for_mode, tdma_solve, tdma_wsr_upper_bound
from .training import TrainingLog, reconstruct_channels, run_beam_training

COLUMNS = ("experiment", "sweep_value", "label", "trial", "wsr", "measurement_count", "iterations", "flag")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    sweep_value: float
    label: str
    trial: int
    wsr: float
    measurement_count: int = 0
    iterations: int = 0
    flag: str = ""


def emit_csv(rows, path) -> None:
    rows = sorted(rows, key=lambda r: (r.sweep_value, r.label, r.trial))
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(COLUMNS)
        for r in rows:
            wr.writerow([r.experiment, f"{r.sweep_value:.17e}", r.label, r.trial, f"{r.wsr:.17e}",
                         r.measurement_count, r.iterations, r.flag])


def read_csv(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [ResultRow(d["experiment"], float(d["sweep_value"]), d["label"], int(d["trial"]), float(d["wsr"]),
                          int(d["measurement_count"]), int(d["iterations"]), d["flag"]) for d in rd]


def drop_ues(center, radius: float, K: int, rng: np.random.Generator) -> tuple:
    """Uniform over a horizontal disc."""
    r = radius * np.sqrt(rng.uniform(size=K))
    t = rng.uniform(0, 2 * np.pi, size=K)
    return tuple((center[0] + r[k] * np.cos(t[k]), center[1] + r[k] * np.sin(t[k]), center[2]) for k in range(K))


def passive_book(sc: Scenario, mode, res_z: int, res_y: int):
    d = sc.spacing
    return build_passive_rcb_2d(np.arange(sc.N_z) * d, np.arange(sc.N_y) * d, (~mode.mask).astype(float),
                                res_z, res_y, sc.wavelength)


def make_books(sc: Scenario, mode, st: Settings, fixed_conn: bool = False) -> Books:
    lam = sc.wavelength
    bs = build_dft_codebook(sc.N_t, lam / 2, lam, "bs")
    ue = build_dft_codebook(sc.N_u, lam / 2, lam, "ue")
    conn = None
    if mode.a:
        if fixed_conn:
            conn = build_fixed_connected(mode.a_z, mode.a_y, sc.spacing, lam)
        else:
            conn = build_connected_rcb(mode.conn_coords_z, mode.conn_coords_y, mode.a_z, mode.a_y, lam)
    return Books(bs, ue, conn, passive_book(sc, mode, st.passive_res_z, st.passive_res_y))


@dataclass
class Csi:
    est: ChannelSet
    measurements: int


def acquire_csi(ch: ChannelSet, sc: Scenario, st: Settings, seed_words, perfect: bool,
                log: Optional[TrainingLog] = None) -> Csi:
    if perfect:
        return Csi(ch, 0)
    lam, M = sc.wavelength, st.branching
    bs_h = build_hierarchical_codebook(sc.N_t, lam / 2, lam, M, "bs")
    recv = PlanarHierarchy(build_hierarchical_codebook(sc.N_z, sc.spacing, lam, M),
                           build_hierarchical_codebook(sc.N_y, sc.spacing, lam, M))
    ue_h = build_hierarchical_codebook(sc.N_u, lam / 2, lam, M, "ue")
    train = grid_mode(sc.N_z, sc.N_y, range(sc.N_z), range(sc.N_y), sc.spacing)
    conn = build_connected_rcb(train.conn_coords_z, train.conn_coords_y, sc.N_z, sc.N_y, lam)
    seed = int(np.random.SeedSequence(list(seed_words)).generate_state(1)[0])
    noise = sc.sigma2 if st.training_noise else 0.0
    tr = run_beam_training(ch, sc, bs_h, recv, train, conn, ue_h, noise, seed, log=log)
    return Csi(reconstruct_channels(tr, sc), tr.measurement_count)


# ---- architectures -------------------------------------------------------

def tdma_modes(sc: Scenario, kappa_b_hat: float):
    a = optimal_te_count(sc.N, kappa_b_hat)
    conn = [(0, 0)] if a else []
    rd = make_mode_config(sc.N_z, sc.N_y, conn, sc.spacing)
    das = make_mode_config(sc.N_z, sc.N_y, conn or [(0, 0)], sc.spacing, passive_enabled=False)
    ris = make_mode_config(sc.N_z, sc.N_y, [], sc.spacing)
    return {"rdars": rd, "das": das, "ris": ris}


def sdma_counts(ch_est: ChannelSet, sc: Scenario, st: Settings, a_z=None, a_y=None):
    """Transmit-element counts plus a flag when the UE spread needs more than the grid or the chosen count."""
    flag = ""
    try:
        az_min, ay_min, _ = min_transmit_elements(sc.K, list(ch_est.angles.vt), list(ch_est.angles.v))
    except Infeasible:
        az_min, ay_min = sc.N_z + 1, sc.N_y + 1
    a_z = st.sdma_a_z if a_z is None else a_z
    a_y = st.sdma_a_y if a_y is None else a_y
    if a_z is None or a_y is None:
        if az_min > sc.N_z or ay_min > sc.N_y:
            flag = "prop4_infeasible"
        a_z = min(az_min, sc.N_z) if a_z is None else a_z
        a_y = min(ay_min, sc.N_y) if a_y is None else a_y
    elif a_z < az_min or a_y < ay_min:
        flag = "below_min_te"
    return min(a_z, sc.N_z), min(a_y, sc.N_y), flag


def sdma_modes(sc: Scenario, st: Settings, a_z: int, a_y: int):
    rd = placed_mode(sc.N_z, sc.N_y, a_z, a_y, sc.spacing, st.placement)
    return {"rdars": rd, "das": replace(rd, passive_enabled=False),
            "ris": make_mode_config(sc.N_z, sc.N_y, [], sc.spacing)}


def run_tdma(ch, csi, sc, mode, st) -> float:
    return tdma_solve(ch, csi.est, sc, mode, make_books(sc, mode, st)).wsr


def run_sdma(ch, csi, sc, mode, st, alt_cw=True, fixed_conn=False, assignment=None):
    books = make_books(sc, mode, st, fixed_conn)
    sol = sdma_design(csi.est, sc, mode, books, alt_cw=alt_cw, max_iters=st.max_iters, tol=st.tol,
                      assignment=assignment)
    return wsr(ch, mode, sol.plan, sc.sigma2, sc.omega), sol


def exhaustive_assignment(gains: np.ndarray, P: float, sigma2: float, weights, cap: int = 10 ** 7):
    """Injective BS codeword assignment maximizing the weighted sum of BS-side SINRs."""
    n, K = gains.shape
    if math.perm(n, K) > cap:
        raise RdarsError("assignment search exceeds cap")
    perms = np.array(list(permutations(range(n), K)), dtype=int).reshape(-1, K)
    g = gains * P
    cols = np.arange(K)
    rx = g[perms[:, :, None], cols[None, None, :]]       # rx[p, j, k]: codeword of UE j seen at UE k
    sig = rx[:, cols, cols]
    intf = rx.sum(axis=1) - sig
    score = (np.asarray(weights) * sig / (intf + sigma2)).sum(axis=1)
    return [int(x) for x in perms[int(np.argmax(score))]]


# ---- per-trial evaluation ---------------------------------------------------

def _scenario_for(spec: ExperimentSpec, value: float) -> Scenario:
    sc = spec.scenario
    v = spec.sweep_var
    if v == "p_tot_dbm":
        return sc.with_(P_tot=dbm_to_watts(value))
    if v == "n_t":
        return sc.with_(N_t=int(value))
    if v == "n":
        nz, ny = split_grid(int(value))
        return sc.with_(N_z=nz, N_y=ny)
    return sc


def _settings_for(spec: ExperimentSpec, value: float) -> Settings:
    if spec.sweep_var == "passive_res":
        return replace(spec.settings, passive_res_z=int(value), passive_res_y=int(value))
    return spec.settings


def _override(st: Settings) -> Optional[AngleOverride]:
    if st.vt_override is None and st.v_override is None:
        return None
    return AngleOverride(vt=st.vt_override, v=st.v_override)


def _wanted(spec, label):
    return spec.settings.labels is None or label in spec.settings.labels


def run_trial(spec: ExperimentSpec, vi: int, value: float, trial: int, perfect: bool,
              log: Optional[TrainingLog] = None) -> list[ResultRow]:
    st = _settings_for(spec, value)
    sc0 = _scenario_for(spec, value)
    rng = np.random.default_rng([spec.seed, trial])
    if not st.fixed_ues:
        sc0 = sc0.with_(ue_positions=drop_ues(st.ue_center, st.ue_radius, sc0.K, rng))
    ch = build_channels(sc0, _override(st))
    csi = acquire_csi(ch, sc0, st, (spec.seed, trial, vi), perfect or st.perfect_csi, log)
    name = spec.name
    rows = []

    def add(label, fn: Callable, flag=""):
        if not _wanted(spec, label):
            return
        try:
            out = fn()
            w, it = (out if isinstance(out, tuple) else (out, 0))
            rows.append(ResultRow(name, value, label, trial, max(float(w), 0.0), csi.measurements, it, flag))
        except OversamplingViolation:
            rows.append(ResultRow(name, value, label, trial, 0.0, csi.measurements, 0, "oversampling_violation"))
        except Infeasible:
            rows.append(ResultRow(name, value, label, trial, 0.0, csi.measurements, 0, "placement_infeasible"))

    def sd(mode, **kw):
        w, sol = run_sdma(ch, csi, sc0, mode, st, **kw)
        return w, sol.iterations

    if name == "tdma_power_sweep":
        modes = tdma_modes(sc0, csi.est.kappa_b)
        add("upper_bound", lambda: tdma_wsr_upper_bound(sc0, ch))
        add("proposed", lambda: run_tdma(ch, csi, sc0, modes["rdars"], st))

        def pbf():
            m = modes["rdars"]
            books = make_books(sc0, m, st)
            P_R, P_B = split_for_mode(m, sc0.N_t, ch.kappa_b, sc0.P_tot)
            return exhaustive_beam_search(ch, m, books, P_B, P_R, sc0.sigma2, sc0.omega).best_value
        add("pbf", pbf)
        return rows

    if name in ("arch_compare",):
        tm = tdma_modes(sc0, csi.est.kappa_b)
        for lab in ("rdars", "das", "ris"):
            add(f"{lab}_tdma", lambda lab=lab: run_tdma(ch, csi, sc0, tm[lab], st))

    if name == "te_threshold_sweep":
        a = int(value)
        _, ay_min, _ = sdma_counts(csi.est, sc0, replace(st, sdma_a_z=None, sdma_a_y=None))
        a_y = min(ay_min, sc0.N_y)
        flag = "" if a % a_y == 0 else "indivisible_a"
        a_z = max(a // a_y, 1)
        _, _, f2 = sdma_counts(csi.est, sc0, st, a_z, a_y)
        flag = flag or f2
        for p in st.powers_dbm:
            scp = sc0.with_(P_tot=dbm_to_watts(p))

            def one(scp=scp):
                mode = placed_mode(scp.N_z, scp.N_y, a_z, a_y, scp.spacing, st.placement)
                w, sol = run_sdma(ch, csi, scp, mode, st)
                return w, sol.iterations
            add(f"p{p:g}dbm", one, flag)
        return rows

    if name == "altcw_compare":
        a_z, a_y, flag = sdma_counts(csi.est, sc0, st)
        mode = sdma_modes(sc0, st, a_z, a_y)["rdars"]
        add("alt_cw", lambda: sd(mode), flag)
        add("wo_alt_cw", lambda: sd(mode, alt_cw=False), flag)

        def exh():
            books = make_books(sc0, mode, st)
            g = bs_gains(csi.est, sc0, books.bs)
            asg = exhaustive_assignment(g, sc0.P_tot / sc0.K, sc0.sigma2, sc0.omega)
            return sd(mode, assignment=asg)
        add("exhaustive", exh, flag)
        return rows

    # remaining experiments are SDMA architecture / codebook studies
    a_z, a_y, flag = sdma_counts(csi.est, sc0, st)
    try:
        modes = sdma_modes(sc0, st, a_z, a_y)
    except Infeasible:
        for lab in ("rdars_sdma",):
            rows.append(ResultRow(name, value, lab, trial, 0.0, csi.measurements, 0, "placement_infeasible"))
        return rows
    if name in ("sdma_power_sweep", "arch_compare", "bs_antenna_sweep"):
        add("rdars_sdma", lambda: sd(modes["rdars"]), flag)
        if name != "sdma_power_sweep":
            add("das_sdma", lambda: sd(modes["das"]), flag)
            add("ris_sdma", lambda: sd(modes["ris"]))
    elif name in ("codebook_compare", "element_count_sweep", "resolution_sweep"):
        add("rdars_rcb", lambda: sd(modes["rdars"]), flag)
        add("rdars_fcb", lambda: sd(modes["rdars"], fixed_conn=True), flag)
        add("ris", lambda: sd(modes["ris"]))
        add("das", lambda: sd(modes["das"]), flag)
    return rows


def run_experiment(spec: ExperimentSpec, perfect_csi: bool = False,
                   training_log: Optional[TrainingLog] = None) -> list[ResultRow]:
    rows = []
    for vi, value in enumerate(spec.values):
        for t in range(spec.trials):
            log = training_log if (vi == 0 and t == 0) else None
            rows.extend(run_trial(spec, vi, value, t, perfect_csi, log))
    return sorted(rows, key=lambda r: (r.sweep_value, r.label, r.trial))
