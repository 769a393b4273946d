"""TDMA branch: per-slot beam selection, closed-form power split and element count."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import BeamPlan, ChannelSet, Scenario, sinr, steering_2d, steering_vector
from .codebook import Codebook, best_match_index
from .errors import UnsupportedWeights


@dataclass(frozen=True)
class Books:
    """Codebooks used for data transmission under one mode configuration."""
    bs: Codebook
    ue: Codebook
    conn: Optional[Codebook]
    passive: Codebook


def optimal_power_split(a: int, N: int, N_t: int, kappa_b: float, P_tot: float) -> tuple[float, float]:
    """(P_R, P_B): per-element and per-antenna budgets maximizing the coherent slot gain."""
    if a == 0:
        return 0.0, P_tot / N_t
    P_R = P_tot / (kappa_b ** 2 * (N - a) ** 2 * a + a)
    return P_R, (P_tot - a * P_R) / N_t


def split_for_mode(mode, N_t: int, kappa_b: float, P_tot: float) -> tuple[float, float]:
    """Same closed form with N - a replaced by the number of reflecting elements."""
    return optimal_power_split(mode.a, mode.a + mode.n_passive, N_t, kappa_b, P_tot)


def slot_gain(P_R: float, a: int, N: int, N_t: int, kappa_b: float, kappa_r: float,
              N_u: int, P_tot: float) -> float:
    """(G_B + G_R)^2 for perfectly aligned beams with P_B = (P_tot - a P_R) / N_t."""
    P_B = max(P_tot - a * P_R, 0.0) / N_t
    G_R = kappa_r * np.sqrt(P_R * N_u * a)
    G_B = kappa_b * kappa_r * (N - a) * np.sqrt(P_B * N_u * N_t)
    return float((G_B + G_R) ** 2)


def rdars_gain(a: int, N: int, kappa_b: float, kappa_r: float, N_u: int, P_tot: float) -> float:
    return kappa_r ** 2 * P_tot * N_u * (kappa_b ** 2 * (N - a) ** 2 + 1.0)


def ris_gain(N: int, kappa_b: float, kappa_r: float, N_u: int, P_tot: float) -> float:
    return P_tot * (kappa_b * kappa_r) ** 2 * N_u * N ** 2


def c_tilde(kappa_b: float) -> float:
    return 1.0 / (2.0 * kappa_b ** 2) + 0.5


def optimal_te_count(N: int, kappa_b: float) -> int:
    return 1 if 1 <= N < c_tilde(kappa_b) else 0


def architecture_thresholds(N: int, kappa_b: float) -> dict:
    c_bar = 1.0 / kappa_b
    rad = N ** 2 - 1.0 / kappa_b ** 2
    # below c_bar every a in [1, N] beats RIS; a_T_th is then reported as None
    a_th = N - np.sqrt(rad) if rad >= 0 else None
    return {"c_bar": c_bar, "c_tilde": c_tilde(kappa_b), "a_T_th": a_th}


def tdma_wsr_upper_bound(sc: Scenario, ch: ChannelSet, a_star: Optional[int] = None) -> float:
    w = sc.omega
    if not np.allclose(w, 1.0 / sc.K, rtol=0, atol=1e-12):
        raise UnsupportedWeights("the closed-form bound assumes equal weights 1/K")
    N = sc.N
    if a_star is None:
        a_star = optimal_te_count(N, ch.kappa_b)
    tot = 0.0
    for kr in ch.kappa_r:
        g = rdars_gain(a_star, N, ch.kappa_b, kr, sc.N_u, sc.P_tot) if a_star > 0 \
            else ris_gain(N, ch.kappa_b, kr, sc.N_u, sc.P_tot)
        tot += np.log2(1.0 + g / sc.sigma2)
    return float(tot / sc.K)


def embed_phi(mode, vec: np.ndarray) -> np.ndarray:
    """Unit-modulus phase vector: codeword on reflecting elements, 1 elsewhere."""
    out = np.ones(mode.N, dtype=complex)
    keep = ~mode.mask
    out[keep] = vec[keep]
    return out


def phase_target(ch: ChannelSet, sc: Scenario, k: int) -> np.ndarray:
    """exp(j(arg out_n - arg in_n)): aligns the reflected path toward UE k."""
    lam, d = sc.wavelength, sc.spacing
    zc, yc = np.arange(sc.N_z) * d, np.arange(sc.N_y) * d
    ang = ch.angles
    out = steering_2d(zc, yc, ang.vt[k], ang.v[k], lam)
    inc = steering_2d(zc, yc, ang.chi_r, ang.psi_r, lam)
    return np.exp(1j * (np.angle(out) - np.angle(inc)))


def conn_target(ch: ChannelSet, sc: Scenario, mode, k: int) -> np.ndarray:
    """Steering toward UE k over the connected rows x cols product grid."""
    return steering_2d(mode.conn_coords_z, mode.conn_coords_y, ch.angles.vt[k], ch.angles.v[k],
                       sc.wavelength)


def select_conn(ch, sc, mode, book: Codebook, k: int) -> int:
    return best_match_index(book.vectors, conn_target(ch, sc, mode, k))


def select_ue(ch, sc, book: Codebook, k: int) -> int:
    return best_match_index(book.vectors, steering_vector(sc.N_u, sc.wavelength / 2, ch.angles.vr[k], sc.wavelength))


def select_bs(ch, sc, book: Codebook) -> int:
    return best_match_index(book.vectors, steering_vector(sc.N_t, sc.wavelength / 2, ch.angles.ups_bar, sc.wavelength))


def select_passive(mode, book: Codebook, target: np.ndarray) -> int:
    return best_match_index(book.vectors, target * (~mode.mask))


def cophase(ch: ChannelSet, mode, k: int, u, w, f, phi) -> np.ndarray:
    """Rotate f so its connected term adds in phase with the reflected term at UE k."""
    if mode.a == 0 or not mode.passive_enabled:
        return f
    row = np.conj(u) @ ch.H_r[k]
    s_b = row @ ((~mode.mask) * phi * (ch.H_b @ w))
    s_r = row[mode.connected_flat] @ f
    if abs(s_b) == 0 or abs(s_r) == 0:
        return f
    return f * np.exp(1j * (np.angle(s_b) - np.angle(s_r)))


@dataclass
class SlotBeams:
    w: np.ndarray
    u: np.ndarray
    f: np.ndarray
    phi: np.ndarray
    idx: dict


def tdma_beam_select(ch: ChannelSet, sc: Scenario, mode, books: Books) -> list[SlotBeams]:
    out = []
    ib = select_bs(ch, sc, books.bs)
    w = books.bs.vectors[ib]
    for k in range(ch.K):
        iu = select_ue(ch, sc, books.ue, k)
        u = books.ue.vectors[iu]
        if mode.a:
            ic = select_conn(ch, sc, mode, books.conn, k)
            f = mode.equivalent_codeword(books.conn.vectors[ic])
        else:
            ic, f = -1, np.zeros(0, complex)
        if mode.passive_enabled:
            ip = select_passive(mode, books.passive, phase_target(ch, sc, k))
            phi = embed_phi(mode, books.passive.vectors[ip])
        else:
            ip, phi = -1, np.ones(mode.N, complex)
        f = cophase(ch, mode, k, u, w, f, phi)
        out.append(SlotBeams(w, u, f, phi, {"bs": ib, "ue": iu, "conn": ic, "passive": ip}))
    return out


@dataclass
class TdmaSolution:
    slots: list
    plans: list
    a_star: int
    P_R_star: float
    P_B_star: float
    rates: np.ndarray
    wsr: float
    upper_bound: Optional[float]


def slot_plan(sb: SlotBeams, k: int, K: int, P_B: float, P_R: float) -> BeamPlan:
    PB = np.zeros(K)
    PR = np.zeros(K)
    PB[k], PR[k] = P_B, P_R
    return BeamPlan(np.tile(sb.w, (K, 1)), np.tile(sb.f, (K, 1)), np.tile(sb.u, (K, 1)), sb.phi, PB, PR)


def evaluate_tdma(ch_true: ChannelSet, sc: Scenario, mode, slots, P_B: float, P_R: float):
    K = ch_true.K
    plans, rates = [], []
    for k, sb in enumerate(slots):
        plan = slot_plan(sb, k, K, P_B, P_R)
        plans.append(plan)
        rates.append(np.log2(1.0 + sinr(ch_true, mode, plan, k, sc.sigma2)))
    rates = np.array(rates)
    return plans, rates, float(np.sum(sc.omega * rates))


def tdma_solve(ch_true: ChannelSet, ch_est: ChannelSet, sc: Scenario, mode, books: Books,
               with_bound: bool = True) -> TdmaSolution:
    """Design on ch_est, evaluate on ch_true. Every slot spends the full P_tot."""
    slots = tdma_beam_select(ch_est, sc, mode, books)
    P_R, P_B = split_for_mode(mode, sc.N_t, ch_est.kappa_b, sc.P_tot)
    plans, rates, total = evaluate_tdma(ch_true, sc, mode, slots, P_B, P_R)
    ub = None
    if with_bound and mode.passive_enabled and np.allclose(sc.omega, 1.0 / sc.K):
        ub = tdma_wsr_upper_bound(sc, ch_true, mode.a)
    return TdmaSolution(slots, plans, mode.a, P_R, P_B, rates, total, ub)
