"""Two-phase hierarchical beam training, gain estimation and channel reconstruction.

Static phase: BS transmit hierarchy against the RDARS (all elements receiving).
Instantaneous phase: RDARS transmit elements sweep their connected book while
every UE descends its own receive hierarchy in parallel.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelSet, Scenario, VirtualAngles, channels_from_angles
from .codebook import Codebook, Codeword, PlanarHierarchy, children

STATIC_STREAM = 0
INSTANT_STREAM = 1


def _noise(seed: int, stream: int, counter: int, var: float) -> complex:
    if var <= 0:
        return 0j
    g = np.random.default_rng([seed, stream, counter])
    re, im = g.standard_normal(2)
    return complex(re, im) * np.sqrt(var / 2)


@dataclass
class TrainingLog:
    rows: list = field(default_factory=list)

    def add(self, idx: int, layer: int, beams: tuple, rss: float):
        self.rows.append((idx, layer, beams, rss))

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("measurement\tlayer\tbeams\trss\n")
            for idx, layer, beams, rss in self.rows:
                fh.write(f"{idx}\t{layer}\t{','.join(map(str, beams))}\t{rss:.17e}\n")


@dataclass
class StaticResult:
    b_star: Codeword
    r_star: tuple            # (fz, fy) bottom indices
    xi_r: tuple              # (xi_z, xi_y)
    rss: float
    measurements: int


@dataclass
class InstantResult:
    c_star: list
    e_star: list
    rss: np.ndarray
    measurements: int


@dataclass
class TrainingResult:
    b_star: Codeword
    r_recv_star: tuple
    c_star: list
    e_star: list
    kappa_b_hat: float
    kappa_r_hat: np.ndarray
    measurement_count: int
    log: TrainingLog


def _branching(book: Codebook) -> int:
    return len(book.layers[0]) if book.layers else len(book)


def static_bt(ch: ChannelSet, bs_book: Codebook, recv: PlanarHierarchy, noise_var: float,
              rng_seed: int, tx_power: float = 1.0, log: Optional[TrainingLog] = None) -> StaticResult:
    """Joint layer-by-layer descent; each step measures every child combination."""
    books = [bs_book, recv.z, recv.y]
    Ms = [_branching(b) for b in books]
    depth = max(len(b.layers) for b in books)
    win = [0, 0, 0]
    cnt = 0
    best_rss = 0.0
    for t in range(depth):
        opts = []
        for ax, b in enumerate(books):
            if t < len(b.layers):
                parent = win[ax] if t > 0 else 0
                opts.append([(t, f) for f in children(parent, Ms[ax])])
            else:
                opts.append([(len(b.layers) - 1, win[ax])])
        best = None
        for (lb, fb), (lz, fz), (ly, fy) in product(*opts):
            bvec = bs_book.layers[lb].vectors[fb]
            rvec = recv.vector(lz, fz, ly, fy)
            y = np.sqrt(tx_power) * (np.conj(rvec) @ (ch.H_b @ bvec)) + _noise(rng_seed, STATIC_STREAM, cnt, noise_var)
            rss = abs(y) ** 2
            if log is not None:
                log.add(cnt, t, (fb, fz, fy), rss)
            cnt += 1
            if best is None or rss > best[0]:
                best = (rss, fb, fz, fy)
        best_rss, win = best[0], list(best[1:])
    rz, ry = recv.z.bottom, recv.y.bottom
    return StaticResult(bs_book.bottom[win[0]], (win[1], win[2]),
                        (float(rz.xi_z[win[1]]), float(ry.xi_z[win[2]])), best_rss, cnt)


def instantaneous_bt(ch: ChannelSet, mode, conn_book: Codebook, ue_books: Sequence[Codebook],
                     noise_var: float, rng_seed: int, tx_power: float = 1.0,
                     log: Optional[TrainingLog] = None, index_offset: int = 0) -> InstantResult:
    """Transmit elements sweep conn_book; UEs listen to each beam simultaneously.

    measurements counts transmit slots, which does not depend on K.
    """
    K = ch.K
    rows = [ch.H_r[k][:, mode.connected_flat] for k in range(K)]
    best = [None] * K
    cnt = 0
    slots_per_beam = max(len(b.layers) * _branching(b) for b in ue_books)
    for j in range(len(conn_book)):
        f = mode.equivalent_codeword(conn_book.vectors[j])
        base = cnt
        for k in range(K):
            ub = ue_books[k]
            Mu = _branching(ub)
            hv = rows[k] @ f
            win, slot = 0, base
            for t, layer in enumerate(ub.layers):
                cand = []
                for e in children(win if t > 0 else 0, Mu):
                    y = np.sqrt(tx_power) * (np.conj(layer.vectors[e]) @ hv) + _noise(
                        rng_seed, INSTANT_STREAM, (slot * K + k), noise_var)
                    rss = abs(y) ** 2
                    if log is not None:
                        log.add(index_offset + slot, t, (j, k, e), rss)
                    slot += 1
                    cand.append((rss, e))
                rss_w, win = max(cand, key=lambda c: c[0])
            if best[k] is None or rss_w > best[k][0]:
                best[k] = (rss_w, j, win)
        cnt += slots_per_beam
    c_star = [conn_book[b[1]] for b in best]
    e_star = [ue_books[k].bottom[best[k][2]] for k in range(K)]
    return InstantResult(c_star, e_star, np.array([b[0] for b in best]), cnt)


def estimate_large_scale_gain(rss: float, tx_power: float, gain_product: float,
                              noise_var: float) -> float:
    """Amplitude estimate from the aligned-beam power rss = P * G * kappa^2 + noise."""
    return float(np.sqrt(max(rss - noise_var, 0.0) / (tx_power * gain_product)))


def reconstruct_channels(tr: TrainingResult, sc: Scenario) -> ChannelSet:
    ang = VirtualAngles(
        ups_bar=tr.b_star.xi_z,
        chi_r=tr.r_recv_star[0], psi_r=tr.r_recv_star[1],
        vt=np.array([c.xi_z for c in tr.c_star]),
        v=np.array([c.xi_y for c in tr.c_star]),
        vr=np.array([e.xi_z for e in tr.e_star]),
    )
    return channels_from_angles(sc, ang, tr.kappa_b_hat, tr.kappa_r_hat)


def run_beam_training(ch: ChannelSet, sc: Scenario, bs_book: Codebook, recv: PlanarHierarchy,
                      train_mode, conn_book: Codebook, ue_book: Codebook, noise_var: float,
                      rng_seed: int, tx_power: Optional[float] = None,
                      log: Optional[TrainingLog] = None) -> TrainingResult:
    P = sc.P_tot if tx_power is None else tx_power
    st = static_bt(ch, bs_book, recv, noise_var, rng_seed, P, log)
    inst = instantaneous_bt(ch, train_mode, conn_book, [ue_book] * ch.K, noise_var, rng_seed, P,
                            log, index_offset=st.measurements)
    n_recv = sc.N if recv.mask is None else int(np.count_nonzero(recv.mask))
    kb = estimate_large_scale_gain(st.rss, P, sc.N_t * n_recv, noise_var)
    kr = np.array([estimate_large_scale_gain(r, P, sc.N_u * train_mode.a, noise_var) for r in inst.rss])
    r_xi = st.xi_r
    return TrainingResult(st.b_star, r_xi, inst.c_star, inst.e_star, kb, kr,
                          st.measurements + inst.measurements, log)
