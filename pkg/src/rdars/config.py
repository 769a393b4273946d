"""INI-style scenario/experiment files with dotted section names.

Every key is optional; anything missing takes the default deployment
(N_t = 64, N = 128, K = 3, BS at (0, 0, 15), RDARS at (10, 0, 15), UEs in a
5 m disc around (10, 50, 2), sigma2 = -80 dBm). See README for the schema.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .channel import PathLoss, Scenario, dbm_to_watts
from .errors import ConfigError

EXPERIMENTS = (
    "tdma_power_sweep", "sdma_power_sweep", "altcw_compare", "arch_compare", "bs_antenna_sweep",
    "codebook_compare", "element_count_sweep", "te_threshold_sweep", "resolution_sweep",
)

POWER_SWEEP = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
DEFAULT_SWEEPS = {
    "tdma_power_sweep": ("p_tot_dbm", POWER_SWEEP),
    "sdma_power_sweep": ("p_tot_dbm", POWER_SWEEP),
    "altcw_compare": ("p_tot_dbm", POWER_SWEEP),
    "arch_compare": ("p_tot_dbm", POWER_SWEEP),
    "bs_antenna_sweep": ("n_t", [16.0, 32.0, 64.0, 128.0, 256.0]),
    "codebook_compare": ("p_tot_dbm", POWER_SWEEP),
    "element_count_sweep": ("n", [64.0, 128.0, 256.0, 512.0]),
    "te_threshold_sweep": ("a", [3.0, 6.0, 9.0, 12.0, 18.0, 24.0]),
    "resolution_sweep": ("passive_res", [16.0, 24.0, 32.0, 64.0]),
}
SWEEP_VARS = ("p_tot_dbm", "n_t", "n", "a", "passive_res")

# Codebook studies need a non-contiguous placement, otherwise the fixed book equals the RCB.
SPREAD_PLACEMENT = ("codebook_compare", "element_count_sweep", "resolution_sweep")

# RDARS-side UE angles used by the transmit-element threshold study
TE_STUDY_VT = (-0.96875, -0.59375, -0.21875)
TE_STUDY_V = (-0.84375, -0.03125, 0.78125)


@dataclass(frozen=True)
class Settings:
    ue_center: tuple = (10.0, 50.0, 2.0)
    ue_radius: float = 5.0
    fixed_ues: bool = False
    branching: int = 2
    passive_res_z: int = 32
    passive_res_y: int = 32
    sdma_a_z: Optional[int] = 6          # None means the minimum implied by the UE angles
    sdma_a_y: Optional[int] = 3
    placement: str = "compact"
    max_iters: int = 50
    tol: float = 1e-6
    perfect_csi: bool = False
    training_noise: bool = True
    vt_override: Optional[tuple] = None
    v_override: Optional[tuple] = None
    powers_dbm: tuple = (25.0,)
    labels: Optional[tuple] = None
    codebook_kind: str = "passive"


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    scenario: Scenario
    sweep_var: str
    values: tuple
    trials: int = 10
    seed: int = 0
    settings: Settings = field(default_factory=Settings)


def split_grid(N: int) -> tuple[int, int]:
    """N_z = largest divisor of N not above sqrt(N); 128 -> 8 x 16."""
    nz = max(d for d in range(1, int(math.isqrt(N)) + 1) if N % d == 0)
    return nz, N // nz


def _floats(s: str, key: str) -> tuple:
    try:
        return tuple(float(x) for x in s.replace(";", ",").split(",") if x.strip())
    except ValueError as e:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {s!r}") from e


def _vec3(s: str, key: str) -> tuple:
    v = _floats(s, key)
    if len(v) != 3:
        raise ConfigError(f"{key}: expected x, y, z")
    return v


def _get(sec, key, conv, default, section):
    if sec is None or key not in sec:
        return default
    raw = sec[key].strip()
    try:
        return conv(raw)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from e


def _bool(s: str) -> bool:
    t = s.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def _opt_int(s: str):
    return None if s.lower() in ("auto", "none", "") else int(s)


def parse_text(text: str) -> ExperimentSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from e
    known = {"scenario", "scenario.pathloss", "experiment", "codebook", "sdma", "training"}
    for s in cp.sections():
        if s not in known:
            raise ConfigError(f"unknown section [{s}]")
    g = lambda name: cp[name] if cp.has_section(name) else None
    sc_s, pl_s, ex_s, cb_s, sd_s, tr_s = (g(n) for n in
                                          ("scenario", "scenario.pathloss", "experiment", "codebook", "sdma", "training"))

    K = _get(sc_s, "k", int, 3, "scenario")
    if K < 1:
        raise ConfigError("[scenario] k: must be >= 1")
    if sc_s is not None and ("n_z" in sc_s or "n_y" in sc_s):
        N_z = _get(sc_s, "n_z", int, 8, "scenario")
        N_y = _get(sc_s, "n_y", int, 16, "scenario")
    else:
        N_z, N_y = split_grid(_get(sc_s, "n", int, 128, "scenario"))
    center = _get(sc_s, "ue_center", lambda s: _vec3(s, "ue_center"), (10.0, 50.0, 2.0), "scenario")
    fixed = sc_s is not None and "ue_positions" in sc_s
    if fixed:
        pts = [p for p in sc_s["ue_positions"].split(";") if p.strip()]
        ues = tuple(_vec3(p, "ue_positions") for p in pts)
        K = len(ues)
    else:
        ues = tuple(center for _ in range(K))
    weights = _get(sc_s, "weights", lambda s: _floats(s, "weights"), None, "scenario")
    pl = PathLoss(
        c0_db=_get(pl_s, "c0_db", float, 60.4, "scenario.pathloss"),
        alpha_b=_get(pl_s, "alpha_b", float, 2.0, "scenario.pathloss"),
        alpha_r=_get(pl_s, "alpha_r", float, 2.2, "scenario.pathloss"),
    )
    try:
        sc = Scenario(
            bs_position=_get(sc_s, "bs_position", lambda s: _vec3(s, "bs_position"), (0.0, 0.0, 15.0), "scenario"),
            rdars_position=_get(sc_s, "rdars_position", lambda s: _vec3(s, "rdars_position"), (10.0, 0.0, 15.0), "scenario"),
            ue_positions=ues,
            N_t=_get(sc_s, "n_t", int, 64, "scenario"),
            N_u=_get(sc_s, "n_u", int, 4, "scenario"),
            N_z=N_z, N_y=N_y,
            carrier_hz=_get(sc_s, "carrier_ghz", float, 28.0, "scenario") * 1e9,
            d_R=_get(sc_s, "d_r", float, None, "scenario"),
            P_tot=dbm_to_watts(_get(sc_s, "p_tot_dbm", float, 20.0, "scenario")),
            sigma2=dbm_to_watts(_get(sc_s, "sigma2_dbm", float, -80.0, "scenario")),
            weights=weights,
            pathloss=pl,
            bs_axis=_get(sc_s, "bs_axis", str, "y", "scenario"),
            ue_axis=_get(sc_s, "ue_axis", str, "z", "scenario"),
        )
    except ValueError as e:
        raise ConfigError(f"[scenario] {e}") from e

    name = _get(ex_s, "name", str, "tdma_power_sweep", "experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"[experiment] name: unknown experiment {name!r}")
    dvar, dvals = DEFAULT_SWEEPS[name]
    var = _get(ex_s, "sweep", str, dvar, "experiment")
    if var not in SWEEP_VARS:
        raise ConfigError(f"[experiment] sweep: unknown variable {var!r}")
    values = _get(ex_s, "values", lambda s: _floats(s, "values"), tuple(dvals), "experiment")
    if not values:
        raise ConfigError("[experiment] values: must be nonempty")
    trials = _get(ex_s, "trials", int, 10, "experiment")
    if trials < 1:
        raise ConfigError("[experiment] trials: must be >= 1")
    labels = _get(ex_s, "labels", lambda s: tuple(x.strip() for x in s.split(",") if x.strip()), None, "experiment")

    te_default = name == "te_threshold_sweep"
    vt = _get(sd_s, "vt", lambda s: _floats(s, "vt"), TE_STUDY_VT if te_default else None, "sdma")
    v = _get(sd_s, "v", lambda s: _floats(s, "v"), TE_STUDY_V if te_default else None, "sdma")
    for arr, key in ((vt, "vt"), (v, "v")):
        if arr is not None and len(arr) != sc.K:
            raise ConfigError(f"[sdma] {key}: need {sc.K} angles")
    st = Settings(
        ue_center=center,
        ue_radius=_get(sc_s, "ue_radius", float, 5.0, "scenario"),
        fixed_ues=fixed,
        branching=_get(cb_s, "branching", int, 2, "codebook"),
        passive_res_z=_get(cb_s, "passive_res_z", int, 32, "codebook"),
        passive_res_y=_get(cb_s, "passive_res_y", int, 32, "codebook"),
        sdma_a_z=_get(sd_s, "a_z", _opt_int, 6, "sdma"),
        sdma_a_y=_get(sd_s, "a_y", _opt_int, 3, "sdma"),
        placement=_get(sd_s, "placement", str, "spread" if name in SPREAD_PLACEMENT else "compact", "sdma"),
        max_iters=_get(sd_s, "max_iters", int, 50, "sdma"),
        tol=_get(sd_s, "tol", float, 1e-6, "sdma"),
        perfect_csi=_get(tr_s, "perfect_csi", _bool, False, "training"),
        training_noise=_get(tr_s, "noise", _bool, True, "training"),
        vt_override=vt,
        v_override=v,
        powers_dbm=_get(ex_s, "powers_dbm", lambda s: _floats(s, "powers_dbm"), (25.0,), "experiment"),
        labels=labels,
        codebook_kind=_get(cb_s, "kind", str, "passive", "codebook"),
    )
    if st.placement not in ("spread", "compact"):
        raise ConfigError("[sdma] placement: expected spread or compact")
    return ExperimentSpec(name, sc, var, tuple(values), trials, _get(ex_s, "seed", int, 0, "experiment"), st)


def parse_scenario(path) -> ExperimentSpec:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_text(text)
