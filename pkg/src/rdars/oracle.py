"""Brute-force references. These deliberately avoid the main-path helpers
(steering builders, stream_terms, closed forms) and work from raw arrays."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CapExceeded

DEFAULT_CAP = 10 ** 7


@dataclass
class OracleReport:
    best_value: float
    best_config: Any
    evaluations: int


def _argmax_first(vals: np.ndarray) -> int:
    return int(np.flatnonzero(vals == vals.max())[0])


def grid_power_search(a: int, N: int, N_t: int, kappa_b: float, P_tot: float,
                      grid_points: int = 10 ** 6) -> OracleReport:
    """Coherent slot gain (per unit kappa_r^2 N_u) over P_R on a uniform grid in (0, P_tot/a]."""
    if grid_points < 1000:
        raise ValueError("grid_points must be >= 1000")
    if a == 0:
        return OracleReport(P_tot * (kappa_b * N) ** 2, 0.0, 1)
    P_R = np.arange(1, grid_points + 1) * (P_tot / a / grid_points)
    P_B = np.maximum(P_tot - a * P_R, 0.0) / N_t
    gain = (kappa_b * (N - a) * np.sqrt(P_B * N_t) + np.sqrt(P_R * a)) ** 2
    i = _argmax_first(gain)
    return OracleReport(float(gain[i]), float(P_R[i]), grid_points)


def unimodal(seq: np.ndarray, rtol: float = 1e-12) -> bool:
    """True when seq rises then falls (flat steps allowed)."""
    d = np.diff(seq)
    tol = rtol * np.max(np.abs(seq))
    s = np.sign(np.where(np.abs(d) <= tol, 0.0, d))
    s = s[s != 0]
    return bool(np.all(np.diff(s) <= 0))


def enumerate_te_count(N: int, kappa_b: float, kappa_r: float, N_u: int, P_tot: float,
                       sigma2: float) -> OracleReport:
    """Slot rate for every a in 0..N with the best BS/RDARS split (Cauchy-Schwarz optimum)."""
    a = np.arange(N + 1)
    c1sq = kappa_r ** 2 * N_u                               # connected branch, per unit a*P_R
    c2sq = (kappa_b * kappa_r * (N - a)) ** 2 * N_u         # reflected branch, per unit N_t*P_B
    gain = np.where(a > 0, P_tot * (c1sq + c2sq), P_tot * (kappa_b * kappa_r * N) ** 2 * N_u)
    rate = np.log2(1.0 + gain / sigma2)
    i = _argmax_first(rate)
    return OracleReport(float(rate[i]), int(a[i]), N + 1)


def _axis_words(idx: Sequence[int], res: int) -> list:
    # lambda/2 spacing: phase pi * index * angle
    out = []
    for f in range(1, res + 1):
        x = -1.0 + (2 * f - 1) / res
        out.append([cmath.exp(1j * math.pi * m * x) for m in idx])
    return out


def _max_offdiag(rows: Sequence[int], cols: Sequence[int]) -> float:
    wz = _axis_words(rows, len(rows))
    wy = _axis_words(cols, len(cols))
    words = [[zz * yy for zz in a for yy in b] for a in wz for b in wy]
    worst = 0.0
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            s = sum(x.conjugate() * y for x, y in zip(words[i], words[j]))
            worst = max(worst, abs(s) / len(words[i]))
    return worst


def _stride(idx: Sequence[int]) -> Optional[int]:
    if len(idx) < 2:
        return 1
    d = {b - a for a, b in zip(idx, idx[1:])}
    return d.pop() if len(d) == 1 else None


def placement_orthogonality_scan(N_z: int, N_y: int, a_z: int, a_y: int, tol: float = 1e-9,
                                 cap: int = 10 ** 6) -> OracleReport:
    """Classify every axis-aligned rows x cols placement by direct pairwise correlation."""
    n = math.comb(N_z, a_z) * math.comb(N_y, a_y)
    if n > cap:
        raise CapExceeded(f"{n} placements exceed cap {cap}")
    orth, non_orth = [], []
    for rows in combinations(range(N_z), a_z):
        for cols in combinations(range(N_y), a_y):
            c = _max_offdiag(rows, cols)
            (orth if c < tol else non_orth).append((rows, cols, c))
    qs = {_stride(r) for r, _, _ in orth if _stride(r) is not None}
    ps = {_stride(c) for _, c, _ in orth if _stride(c) is not None}
    uniform = {(q, p) for r, c, _ in orth for q, p in [(_stride(r), _stride(c))]
               if q is not None and p is not None}
    cfg = {"orthogonal": orth, "non_orthogonal": non_orth, "strides_z": qs, "strides_y": ps,
           "uniform_pairs": uniform}
    return OracleReport(float(len(orth)), cfg, n)


def stride_correlation(q: int, a: int) -> float:
    """Worst off-diagonal correlation of an a-element axis book with stride q."""
    return _max_offdiag([q * m for m in range(a)], [0])


def exhaustive_pair(H: np.ndarray, tx: np.ndarray, rx: np.ndarray) -> OracleReport:
    """argmax over (rx i, tx j) of |rx_i^H H tx_j|^2."""
    vals = np.abs(np.conj(rx) @ H @ tx.T) ** 2
    i, j = np.unravel_index(_argmax_first(vals.ravel()), vals.shape)
    return OracleReport(float(vals[i, j]), (int(j), int(i)), vals.size)


def _scalar_dot(x, y) -> complex:
    return complex(sum(complex(a) * complex(b) for a, b in zip(x, y)))


def exhaustive_beam_search(ch, mode, books, P_B: float, P_R: float, sigma2: float, weights,
                           cap: int = DEFAULT_CAP) -> OracleReport:
    """TDMA reference: every (w, f, u, phi) tuple per slot, streams co-phased.

    Slots are independent so the WSR optimum is the weighted sum of per-slot optima.
    """
    K = ch.H_r.shape[0]
    bs = books.bs.vectors
    ue = books.ue.vectors
    conn = (np.array([mode.equivalent_codeword(c) for c in books.conn.vectors])
            if mode.a else np.zeros((1, 0), complex))
    pas = books.passive.vectors if mode.passive_enabled else np.zeros((1, mode.N), complex)
    n_eval = K * len(bs) * len(conn) * len(ue) * len(pas)
    if n_eval > cap:
        raise CapExceeded(f"{n_eval} combinations exceed cap {cap}")
    refl_mask = np.array([0.0 if m else 1.0 for m in mode.mask])
    best_cfg, total = [], 0.0
    for k in range(K):
        best = (-1.0, None)
        for iu, u in enumerate(ue):
            row = np.conj(u) @ ch.H_r[k]
            rc = row[mode.connected_flat]
            s_r = np.abs(conn @ rc) if mode.a else np.zeros(1)
            for iw, w in enumerate(bs):
                hw = ch.H_b @ w
                s_b = np.abs((pas * refl_mask) @ (row * hw))          # one value per phi
                amp = np.sqrt(P_B) * s_b[:, None] + np.sqrt(P_R) * s_r[None, :]
                val = np.log2(1.0 + amp ** 2 / sigma2)
                ip, ic = np.unravel_index(_argmax_first(val.ravel()), val.shape)
                if val[ip, ic] > best[0]:
                    best = (float(val[ip, ic]), {"bs": iw, "ue": iu, "conn": int(ic), "passive": int(ip)})
        best_cfg.append(best[1])
        total += weights[k] * best[0]
    return OracleReport(total, best_cfg, n_eval)


def _stream_gains_scalar(ch, mode, U, W, F, phi, beta) -> np.ndarray:
    """G[k, i] with explicit per-element sums; stream i co-phased at its own UE."""
    K = len(U)
    N = mode.N
    mask = list(mode.mask)
    conn_idx = list(mode.connected_flat)
    bB, bR = beta
    refl = np.zeros((K, K), complex)
    conn = np.zeros((K, K), complex)
    for k in range(K):
        row = [sum(complex(np.conj(U[k][j])) * complex(ch.H_r[k][j][n]) for j in range(len(U[k])))
               for n in range(N)]
        for i in range(K):
            hw = [sum(complex(ch.H_b[n][t]) * complex(W[i][t]) for t in range(len(W[i]))) for n in range(N)]
            if mode.passive_enabled:
                refl[k, i] = sum(row[n] * complex(phi[n]) * hw[n] for n in range(N) if not mask[n])
            conn[k, i] = sum(row[n] * complex(F[i][m]) for m, n in enumerate(conn_idx))
    G = np.zeros((K, K))
    for i in range(K):
        rot = 1.0
        if abs(refl[i, i]) > 0 and abs(conn[i, i]) > 0:
            rot = cmath.exp(1j * (cmath.phase(refl[i, i]) - cmath.phase(conn[i, i])))
        for k in range(K):
            G[k, i] = abs(math.sqrt(bB) * refl[k, i] + math.sqrt(bR) * conn[k, i] * rot) ** 2
    return G


def _wsr2(G, p1, P_tot, sigma2, w):
    p2 = P_tot - p1
    g1 = G[0, 0] * p1 / (G[0, 1] * p2 + sigma2)
    g2 = G[1, 1] * p2 / (G[1, 0] * p1 + sigma2)
    return w[0] * np.log2(1.0 + g1) + w[1] * np.log2(1.0 + g2)


def sdma_joint_oracle(ch, mode, U, W, F, passive_book, beta, P_tot: float, sigma2: float, weights,
                      grid_points: int = 10 ** 6, cap: int = DEFAULT_CAP) -> OracleReport:
    """Two-UE joint search over every passive codeword and a power grid, then local refinement."""
    if len(U) != 2:
        raise ValueError("joint oracle implemented for K = 2")
    phis = passive_book.vectors if mode.passive_enabled else np.ones((1, mode.N), complex)
    n_eval = len(phis) * (grid_points + 1)
    if n_eval > cap * 10:
        raise CapExceeded(f"{n_eval} evaluations exceed cap")
    grid = np.linspace(0.0, P_tot, grid_points + 1)
    best = (-np.inf, None)
    for c, phi in enumerate(phis):
        G = _stream_gains_scalar(ch, mode, U, W, F, phi, beta)
        vals = _wsr2(G, grid, P_tot, sigma2, weights)
        i = _argmax_first(vals)
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid_points)]
        v, x = float(vals[i]), float(grid[i])
        if hi > lo:
            r = minimize_scalar(lambda t: -_wsr2(G, t, P_tot, sigma2, weights), bounds=(lo, hi),
                                method="bounded", options={"xatol": 1e-14 * P_tot})
            if -r.fun > v:
                v, x = float(-r.fun), float(r.x)
        if v > best[0]:
            best = (v, {"phi": c, "p1": x})
    return OracleReport(best[0], best[1], n_eval)
