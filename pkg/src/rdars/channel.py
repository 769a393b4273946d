"""Steering vectors, LoS channels, SINR and weighted sum rate."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import GeometryError, InvalidDimension, InvalidPlan

C_LIGHT = 299_792_458.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def watts_to_dbm(w: float) -> float:
    return 10.0 * np.log10(w * 1000.0)


@dataclass(frozen=True)
class PathLoss:
    c0_db: float = 60.4
    alpha_b: float = 2.0
    alpha_r: float = 2.2

    def kappa(self, d: float, alpha: float) -> float:
        """Linear amplitude gain of a log-distance link of length d (m)."""
        pl_db = self.c0_db + 10.0 * alpha * np.log10(d)
        return float(10.0 ** (-pl_db / 20.0))


@dataclass(frozen=True)
class Scenario:
    """Geometry, array sizes, power and noise for one network drop.

    Powers are linear watts; dBm conversion happens in the config parser.
    `bs_axis` / `ue_axis` name the Cartesian axis each ULA lies along.
    """
    bs_position: tuple = (0.0, 0.0, 15.0)
    rdars_position: tuple = (10.0, 0.0, 15.0)
    ue_positions: tuple = ((10.0, 50.0, 2.0),)
    N_t: int = 64
    N_u: int = 4
    N_z: int = 8
    N_y: int = 16
    carrier_hz: float = 28e9
    d_R: Optional[float] = None
    P_tot: float = 1.0
    sigma2: float = dbm_to_watts(-80.0)
    weights: Optional[tuple] = None
    pathloss: PathLoss = field(default_factory=PathLoss)
    bs_axis: str = "y"
    ue_axis: str = "z"

    def __post_init__(self):
        if len(self.ue_positions) < 1:
            raise InvalidDimension("need at least one UE (K >= 1)")
        for name in ("N_t", "N_u", "N_z", "N_y"):
            if int(getattr(self, name)) < 1:
                raise InvalidDimension(f"{name} must be >= 1")
        if not self.P_tot > 0:
            raise ValueError("P_tot must be positive")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.weights is not None:
            wts = np.asarray(self.weights, dtype=float)
            if wts.shape != (self.K,):
                raise InvalidDimension("weights must have one entry per UE")
            if np.any(wts < 0) or not np.all(np.isfinite(wts)):
                raise ValueError("weights must be finite and nonnegative")
        for ax in (self.bs_axis, self.ue_axis):
            if ax not in ("x", "y", "z"):
                raise ValueError(f"unknown axis {ax!r}")

    @property
    def K(self) -> int:
        return len(self.ue_positions)

    @property
    def N(self) -> int:
        return self.N_z * self.N_y

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.carrier_hz

    @property
    def spacing(self) -> float:
        return self.d_R if self.d_R is not None else self.wavelength / 2

    @property
    def omega(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.K, 1.0 / self.K)
        return np.asarray(self.weights, dtype=float)

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


@dataclass(frozen=True)
class VirtualAngles:
    """ups_bar: BS AoD; chi_r/psi_r: RDARS AoA (z/y); vt/v: RDARS AoD per UE (z/y); vr: UE AoA."""
    ups_bar: float
    chi_r: float
    psi_r: float
    vt: np.ndarray
    v: np.ndarray
    vr: np.ndarray


@dataclass(frozen=True)
class AngleOverride:
    ups_bar: Optional[float] = None
    chi_r: Optional[float] = None
    psi_r: Optional[float] = None
    vt: Optional[Sequence[float]] = None
    v: Optional[Sequence[float]] = None
    vr: Optional[Sequence[float]] = None


@dataclass(frozen=True)
class ChannelSet:
    H_b: np.ndarray          # N x N_t
    H_r: np.ndarray          # K x N_u x N
    kappa_b: float
    kappa_r: np.ndarray      # K
    angles: VirtualAngles

    @property
    def K(self) -> int:
        return self.H_r.shape[0]


@dataclass(frozen=True)
class BeamPlan:
    w: np.ndarray    # K x N_t
    f: np.ndarray    # K x a
    u: np.ndarray    # K x N_u
    phi: np.ndarray  # N
    P_B: np.ndarray  # K
    P_R: np.ndarray  # K

    def power_used(self) -> float:
        return float(self.w.shape[1] * np.sum(self.P_B) + self.f.shape[1] * np.sum(self.P_R))

    def with_powers(self, P_B, P_R) -> "BeamPlan":
        return replace(self, P_B=np.asarray(P_B, float), P_R=np.asarray(P_R, float))


def steering_vector(n: int, spacing: float, phi: float, wavelength: float) -> np.ndarray:
    if n < 1:
        raise InvalidDimension("steering vector needs n >= 1")
    return reconfigurable_steering(np.arange(n) * spacing, phi, wavelength)


def reconfigurable_steering(coords, phi: float, wavelength: float) -> np.ndarray:
    """Steering over arbitrary element positions along one axis."""
    coords = np.asarray(coords, dtype=float)
    if coords.size == 0:
        raise InvalidDimension("coords must be nonempty")
    return np.exp(1j * 2 * np.pi / wavelength * coords * phi)


def steering_2d(coords_z, coords_y, phi_z: float, phi_y: float, wavelength: float) -> np.ndarray:
    """Kronecker z (slow) by y (fast); element n = iz * len(coords_y) + iy."""
    return np.kron(reconfigurable_steering(coords_z, phi_z, wavelength),
                   reconfigurable_steering(coords_y, phi_y, wavelength))


_AXIS = {"x": 0, "y": 1, "z": 2}


def _unit(src, dst) -> np.ndarray:
    d = np.asarray(dst, float) - np.asarray(src, float)
    r = np.linalg.norm(d)
    if r < 1e-12:
        raise GeometryError("coincident positions give an undefined angle")
    return d / r


def geometry_angles(sc: Scenario) -> VirtualAngles:
    """Direction cosines; RDARS plane normal along x, grid axes along y and z."""
    to_bs = _unit(sc.rdars_position, sc.bs_position)
    ups_bar = _unit(sc.bs_position, sc.rdars_position)[_AXIS[sc.bs_axis]]
    vt, v, vr = [], [], []
    for ue in sc.ue_positions:
        d = _unit(sc.rdars_position, ue)
        vt.append(d[2])
        v.append(d[1])
        vr.append(_unit(ue, sc.rdars_position)[_AXIS[sc.ue_axis]])
    return VirtualAngles(float(ups_bar), float(to_bs[2]), float(to_bs[1]),
                         np.array(vt), np.array(v), np.array(vr))


def link_gains(sc: Scenario) -> tuple[float, np.ndarray]:
    d_b = np.linalg.norm(np.subtract(sc.rdars_position, sc.bs_position))
    if d_b < 1e-12:
        raise GeometryError("BS and RDARS coincide")
    kb = sc.pathloss.kappa(d_b, sc.pathloss.alpha_b)
    kr = []
    for ue in sc.ue_positions:
        d = np.linalg.norm(np.subtract(ue, sc.rdars_position))
        if d < 1e-12:
            raise GeometryError("UE coincides with RDARS")
        kr.append(sc.pathloss.kappa(d, sc.pathloss.alpha_r))
    return kb, np.array(kr)


def _apply_override(ang: VirtualAngles, ov: Optional[AngleOverride], K: int) -> VirtualAngles:
    if ov is None:
        return ang
    kw = {}
    for name in ("ups_bar", "chi_r", "psi_r"):
        val = getattr(ov, name)
        if val is not None:
            kw[name] = float(val)
    for name in ("vt", "v", "vr"):
        val = getattr(ov, name)
        if val is not None:
            arr = np.asarray(val, dtype=float)
            if arr.shape != (K,):
                raise InvalidDimension(f"override {name} needs {K} entries")
            kw[name] = arr
    out = replace(ang, **kw)
    allv = np.concatenate([[out.ups_bar, out.chi_r, out.psi_r], out.vt, out.v, out.vr])
    if np.any(np.abs(allv) > 1 + 1e-12):
        raise GeometryError("virtual angles must lie in [-1, 1]")
    return out


def channels_from_angles(sc: Scenario, ang: VirtualAngles, kappa_b: float, kappa_r) -> ChannelSet:
    lam, d = sc.wavelength, sc.spacing
    zc = np.arange(sc.N_z) * d
    yc = np.arange(sc.N_y) * d
    a_in = steering_2d(zc, yc, ang.chi_r, ang.psi_r, lam)
    a_bs = steering_vector(sc.N_t, lam / 2, ang.ups_bar, lam)
    H_b = kappa_b * np.outer(a_in, a_bs.conj())
    kappa_r = np.asarray(kappa_r, float)
    H_r = np.empty((len(kappa_r), sc.N_u, sc.N), dtype=complex)
    for k in range(len(kappa_r)):
        a_out = steering_2d(zc, yc, ang.vt[k], ang.v[k], lam)
        a_ue = steering_vector(sc.N_u, lam / 2, ang.vr[k], lam)
        H_r[k] = kappa_r[k] * np.outer(a_ue, a_out.conj())
    return ChannelSet(H_b, H_r, float(kappa_b), kappa_r, ang)


def build_channels(sc: Scenario, ue_angle_override: Optional[AngleOverride] = None) -> ChannelSet:
    ang = _apply_override(geometry_angles(sc), ue_angle_override, sc.K)
    kb, kr = link_gains(sc)
    return channels_from_angles(sc, ang, kb, kr)


def _check_plan(ch: ChannelSet, mode, plan: BeamPlan):
    K = ch.K
    N_t = ch.H_b.shape[1]
    N_u = ch.H_r.shape[1]
    ok = (plan.w.shape == (K, N_t) and plan.u.shape == (K, N_u)
          and plan.f.shape == (K, mode.a) and plan.phi.shape == (ch.H_b.shape[0],)
          and np.shape(plan.P_B) == (K,) and np.shape(plan.P_R) == (K,))
    if not ok:
        raise InvalidPlan("plan dimensions do not match channels/mode")


def effective_channel(ch: ChannelSet, mode, phi: np.ndarray, k: int) -> np.ndarray:
    """H_k = [H_r,k G H_b, H_r,k A~] with G = (I - A) Phi (zero when reflection is off)."""
    g = (~mode.mask) * phi if mode.passive_enabled else np.zeros_like(phi)
    refl = (ch.H_r[k] * g) @ ch.H_b
    conn = ch.H_r[k][:, mode.connected_flat]
    return np.hstack([refl, conn])


def sinr(ch: ChannelSet, mode, plan: BeamPlan, k: int, sigma2: float) -> float:
    _check_plan(ch, mode, plan)
    Hk = effective_channel(ch, mode, plan.phi, k)
    uk = plan.u[k].conj() @ Hk
    sig = 0.0
    intf = 0.0
    for i in range(ch.K):
        fr = np.concatenate([np.sqrt(plan.P_B[i]) * plan.w[i], np.sqrt(plan.P_R[i]) * plan.f[i]])
        p = abs(uk @ fr) ** 2
        if i == k:
            sig = p
        else:
            intf += p
    return float(sig / (intf + sigma2))


def wsr_from_sinrs(gammas, weights) -> float:
    return float(np.sum(np.asarray(weights) * np.log2(1.0 + np.asarray(gammas))))


def wsr(ch: ChannelSet, mode, plan: BeamPlan, sigma2: float, weights) -> float:
    return wsr_from_sinrs([sinr(ch, mode, plan, k, sigma2) for k in range(ch.K)], weights)


def stream_terms(ch: ChannelSet, mode, u, w, f, phis) -> tuple[np.ndarray, np.ndarray]:
    """Per-unit-power responses at UE k of stream i, split into the reflected and connected parts.

    `phis` may be one phase vector (N,) or a stack (C, N); the reflected term gets a
    leading C axis in the second case. Returns (refl[..., k, i], conn[k, i]).
    """
    rows = np.einsum("kj,kjn->kn", np.conj(u), ch.H_r)          # u_k^H H_r,k
    conn = rows[:, mode.connected_flat] @ f.T if mode.a else np.zeros((ch.K, ch.K), complex)
    phis = np.asarray(phis)
    if not mode.passive_enabled:
        shape = phis.shape[:-1] + (ch.K, ch.K)
        return np.zeros(shape, complex), conn
    bw = ch.H_b @ w.T                                           # N x K
    g = phis * (~mode.mask)
    refl = np.einsum("kn,...n,ni->...ki", rows, g, bw)
    return refl, conn
