"""SDMA branch: alternative-codeword BS assignment, connected-book beams,
water-filling and the alternating passive-phase / power loop."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import BeamPlan, ChannelSet, Scenario, reconfigurable_steering, steering_vector, stream_terms
from .codebook import Codebook
from .errors import InvalidDimension, RdarsError
from .tdma import Books, embed_phi, select_conn, select_ue


def alt_codeword_assignment(gains: np.ndarray, path_loss: Sequence[float]) -> list[int]:
    """gains[c, k] = codeword response for UE k; path_loss[k] = kappa_r,k (smaller is worse).

    The UE with the largest path loss picks first; ties go to the lower UE index and the
    lower codeword index.
    """
    gains = np.asarray(gains, float)
    n_words, K = gains.shape
    if n_words < K:
        raise InvalidDimension("fewer codewords than UEs")
    order = sorted(range(K), key=lambda k: (path_loss[k], k))
    free = np.ones(n_words, dtype=bool)
    out = [0] * K
    for k in order:
        g = np.where(free, gains[:, k], -np.inf)
        c = int(np.argmax(g))
        out[k] = c
        free[c] = False
    return out


def single_codeword_assignment(gains: np.ndarray) -> list[int]:
    """Baseline without alternative codewords: every UE takes its own best codeword."""
    return [int(np.argmax(gains[:, k])) for k in range(gains.shape[1])]


def bs_gains(ch: ChannelSet, sc: Scenario, book: Codebook) -> np.ndarray:
    a = steering_vector(sc.N_t, sc.wavelength / 2, ch.angles.ups_bar, sc.wavelength)
    resp = np.abs(np.conj(a) @ book.vectors.T) ** 2
    return np.outer(resp, (ch.kappa_b * ch.kappa_r) ** 2)


def beam_conflicts(indices: Sequence[int], a_y: int) -> int:
    """UE pairs sharing a connected beam index along z or along y."""
    zs = [i // a_y for i in indices]
    ys = [i % a_y for i in indices]
    n = 0
    for m in range(len(indices)):
        for l in range(m + 1, len(indices)):
            if zs[m] == zs[l] or ys[m] == ys[l]:
                n += 1
    return n


def sdma_beam_select(ch: ChannelSet, sc: Scenario, mode, conn_book: Codebook, ue_book: Codebook):
    """(F, U, conn indices): connected codeword nearest each UE's direction, MRC combiner."""
    K = ch.K
    U = np.array([ue_book.vectors[select_ue(ch, sc, ue_book, k)] for k in range(K)])
    if mode.a == 0:
        return np.zeros((K, 0), complex), U, []
    idx = [select_conn(ch, sc, mode, conn_book, k) for k in range(K)]
    F = np.array([mode.equivalent_codeword(conn_book.vectors[j]) for j in idx])
    return F, U, idx


def pairwise_interference(mode, f: np.ndarray, vt: float, v: float, wavelength: float) -> float:
    """|a~^H(vt, v) f|^2 over the connected element positions (direct form)."""
    z = mode.coords_z[mode.connected_flat]
    y = mode.coords_y[mode.connected_flat]
    a = np.exp(1j * 2 * np.pi / wavelength * (z * vt + y * v))
    return float(abs(np.conj(a) @ f) ** 2)


def pairwise_interference_factored(mode, fz: np.ndarray, fy: np.ndarray, vt: float, v: float,
                                   wavelength: float) -> float:
    """Axis-separable form L_z * L_y for a product codeword kron(fz, fy)."""
    lz = abs(np.conj(reconfigurable_steering(mode.conn_coords_z, vt, wavelength)) @ fz) ** 2
    ly = abs(np.conj(reconfigurable_steering(mode.conn_coords_y, v, wavelength)) @ fy) ** 2
    return float(lz * ly)


def water_filling(g, interference, sigma2: float, P_tot: float, weights, iters: int = 200) -> np.ndarray:
    """p_k = max(0, w_k mu - (I_k + sigma2) / g_k) with sum p = P_tot.

    Bisection on mu locates the active set; mu is then solved exactly on that set.
    """
    g = np.asarray(g, float)
    w = np.asarray(weights, float)
    n = np.asarray(interference, float) + sigma2
    ok = (g > 0) & (w > 0)
    if not np.any(ok):
        raise RdarsError("water-filling undefined: no UE has positive gain and weight")
    floor = np.full(g.shape, np.inf)
    floor[ok] = n[ok] / g[ok]

    def total(mu):
        return np.sum(np.where(ok, np.maximum(0.0, w * mu - floor), 0.0))

    lo, hi = 0.0, 1.0
    while total(hi) < P_tot:
        hi *= 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if total(mid) < P_tot:
            lo = mid
        else:
            hi = mid
    mu = hi
    for _ in range(len(g) + 1):
        act = ok & (w * mu > floor)
        mu_new = (P_tot + np.sum(floor[act])) / np.sum(w[act])
        if np.array_equal(act, ok & (w * mu_new > floor)):
            mu = mu_new
            break
        mu = mu_new
    p = np.where(ok, np.maximum(0.0, w * mu - floor), 0.0)
    return p * (P_tot / p.sum())


def kkt_residual(p, g, interference, sigma2, weights) -> np.ndarray:
    """Per-UE stationarity residual w_k g_k/(n_k + g_k p_k) - lambda (zero on the active set)."""
    p, g, w = (np.asarray(x, float) for x in (p, g, weights))
    n = np.asarray(interference, float) + sigma2
    d = w * g / (n + g * p)
    lam = np.max(d[p > 0]) if np.any(p > 0) else 0.0
    return d - lam


def stream_split(mode, N_t: int, kappa_b: float) -> tuple[float, float]:
    """(beta_B, beta_R): per-antenna and per-element share of one unit of stream power."""
    if mode.a == 0:
        return 1.0 / N_t, 0.0
    br = 1.0 / (kappa_b ** 2 * mode.n_passive ** 2 * mode.a + mode.a)
    return (1.0 - mode.a * br) / N_t, br


def gain_tensor(ch: ChannelSet, mode, U, W, F, phis, beta) -> tuple[np.ndarray, np.ndarray]:
    """|response|^2 of unit-power stream i at UE k for every phase vector, after co-phasing.

    Returns (G[c, k, i], theta[c, i]) where theta rotates stream i's connected beam.
    """
    refl, conn = stream_terms(ch, mode, U, W, F, phis)
    bB, bR = beta
    diag_r = np.diagonal(refl, axis1=-2, axis2=-1)
    diag_c = np.diag(conn)
    both = (np.abs(diag_r) > 0) & (np.abs(diag_c) > 0)
    theta = np.where(both, np.angle(diag_r) - np.angle(diag_c), 0.0)
    amp = np.sqrt(bB) * refl + np.sqrt(bR) * conn[None, :, :] * np.exp(1j * theta)[..., None, :]
    return np.abs(amp) ** 2, theta


def wsr_table(G: np.ndarray, p: np.ndarray, sigma2: float, w: np.ndarray) -> np.ndarray:
    """WSR for every phase candidate: G is (C, K, K)."""
    sig = np.diagonal(G, axis1=-2, axis2=-1) * p
    intf = G @ p - sig
    return np.sum(w * np.log2(1.0 + sig / (intf + sigma2)), axis=-1)


@dataclass
class SdmaSolution:
    assignment: list
    plan: BeamPlan
    iterations: int
    wsr_trace: list
    phi_index: int
    conn_index: list
    conflicts: int
    p: np.ndarray


def alternating_phase_power_optimize(ch: ChannelSet, sc: Scenario, mode, passive_book: Codebook,
                                     W, F, U, p0=None, phi0: int = 0, max_iters: int = 50,
                                     tol: float = 1e-6) -> SdmaSolution:
    K = ch.K
    w = sc.omega
    beta = stream_split(mode, sc.N_t, ch.kappa_b)
    phis = passive_book.vectors if mode.passive_enabled else np.ones((1, mode.N), complex)
    G, theta = gain_tensor(ch, mode, U, W, F, phis, beta)
    p = np.full(K, sc.P_tot / K) if p0 is None else np.asarray(p0, float)
    c = int(phi0) if mode.passive_enabled else 0
    trace = [float(wsr_table(G[c], p, sc.sigma2, w))]
    iters = 0
    for it in range(max_iters):
        tab = wsr_table(G, p, sc.sigma2, w)
        c_new = int(np.flatnonzero(tab >= tab.max() - 1e-12 * max(1.0, tab.max()))[0])
        if tab[c_new] <= tab[c]:
            c_new = c
        Gc = G[c_new]
        gk = np.diag(Gc)
        intf = Gc @ p - gk * p
        p_new = water_filling(gk, intf, sc.sigma2, sc.P_tot, w)
        val_new = float(wsr_table(Gc, p_new, sc.sigma2, w))
        val_old = float(wsr_table(Gc, p, sc.sigma2, w))
        if val_new < val_old:
            p_new, val_new = p, val_old
        gain = val_new - trace[-1]
        if it > 0 and gain < tol:
            break
        c, p = c_new, p_new
        trace.append(val_new)
        iters += 1
        if gain < tol:
            break
    F_rot = F * np.exp(1j * theta[c])[:, None] if mode.a else F
    phi = embed_phi(mode, phis[c]) if mode.passive_enabled else np.ones(mode.N, complex)
    plan = BeamPlan(np.asarray(W), F_rot, np.asarray(U), phi, beta[0] * p, beta[1] * p)
    return SdmaSolution([], plan, iters, trace, c, [], 0, p)


def sdma_design(ch: ChannelSet, sc: Scenario, mode, books: Books, alt_cw: bool = True,
                max_iters: int = 50, tol: float = 1e-6, assignment: Optional[list] = None) -> SdmaSolution:
    gains = bs_gains(ch, sc, books.bs)
    if assignment is None:
        assignment = alt_codeword_assignment(gains, ch.kappa_r) if alt_cw else single_codeword_assignment(gains)
    W = books.bs.vectors[assignment]
    F, U, idx = sdma_beam_select(ch, sc, mode, books.conn, books.ue)
    sol = alternating_phase_power_optimize(ch, sc, mode, books.passive, W, F, U,
                                           max_iters=max_iters, tol=tol)
    sol.assignment = list(assignment)
    sol.conn_index = idx
    sol.conflicts = beam_conflicts(idx, mode.a_y) if idx else 0
    return sol
