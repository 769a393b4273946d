"""Mode-switching configuration, transmit-element placement and minimum counts."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import Infeasible, InvalidDimension


@dataclass(frozen=True)
class ModeConfig:
    """Connected (transmit) elements of an N_z x N_y surface.

    `connected` holds (iz, iy) grid indices sorted by flat index iz * N_y + iy.
    `passive_enabled=False` switches reflection off entirely (DAS baseline).
    """
    N_z: int
    N_y: int
    connected: tuple
    d_R: float
    passive_enabled: bool = True

    @property
    def N(self) -> int:
        return self.N_z * self.N_y

    @property
    def a(self) -> int:
        return len(self.connected)

    @property
    def b(self) -> int:
        return self.N - self.a

    @property
    def n_passive(self) -> int:
        return self.b if self.passive_enabled else 0

    @cached_property
    def rows(self) -> np.ndarray:
        return np.unique([iz for iz, _ in self.connected]).astype(int)

    @cached_property
    def cols(self) -> np.ndarray:
        return np.unique([iy for _, iy in self.connected]).astype(int)

    @property
    def a_z(self) -> int:
        return len(self.rows)

    @property
    def a_y(self) -> int:
        return len(self.cols)

    @cached_property
    def connected_flat(self) -> np.ndarray:
        return np.array([iz * self.N_y + iy for iz, iy in self.connected], dtype=int)

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.N, dtype=bool)
        m[self.connected_flat] = True
        return m

    @cached_property
    def A(self) -> np.ndarray:
        return np.diag(self.mask.astype(float))

    @cached_property
    def A_tilde(self) -> np.ndarray:
        At = np.zeros((self.N, self.a))
        At[self.connected_flat, np.arange(self.a)] = 1.0
        return At

    @cached_property
    def coords_z(self) -> np.ndarray:
        return np.repeat(np.arange(self.N_z), self.N_y) * self.d_R

    @cached_property
    def coords_y(self) -> np.ndarray:
        return np.tile(np.arange(self.N_y), self.N_z) * self.d_R

    @property
    def conn_coords_z(self) -> np.ndarray:
        return self.rows * self.d_R

    @property
    def conn_coords_y(self) -> np.ndarray:
        return self.cols * self.d_R

    @cached_property
    def product_index(self) -> np.ndarray:
        """Position of each connected element inside the rows x cols product grid."""
        rz = {r: i for i, r in enumerate(self.rows)}
        cy = {c: i for i, c in enumerate(self.cols)}
        return np.array([rz[iz] * self.a_y + cy[iy] for iz, iy in self.connected], dtype=int)

    @property
    def is_product(self) -> bool:
        return self.a == self.a_z * self.a_y

    def connected_block(self):
        """Bounding box ((z0, z1), (y0, y1)) of the connected elements, inclusive."""
        if self.a == 0:
            return None
        return (int(self.rows[0]), int(self.rows[-1])), (int(self.cols[0]), int(self.cols[-1]))

    def passive_block(self):
        pz = [n // self.N_y for n in range(self.N) if not self.mask[n]]
        py = [n % self.N_y for n in range(self.N) if not self.mask[n]]
        if not pz:
            return None
        return (min(pz), max(pz)), (min(py), max(py))

    def equivalent_codeword(self, c: np.ndarray) -> np.ndarray:
        """Restrict a rows x cols codeword to the connected elements, unit norm."""
        v = np.asarray(c)[self.product_index]
        nrm = np.linalg.norm(v)
        return v / nrm if nrm > 0 else v

    def without_reflection(self) -> "ModeConfig":
        return replace(self, passive_enabled=False)


def make_mode_config(N_z: int, N_y: int, connected_indices: Iterable, d_R: float,
                     passive_enabled: bool = True) -> ModeConfig:
    if N_z < 1 or N_y < 1:
        raise InvalidDimension("grid must be at least 1 x 1")
    idx = [(int(iz), int(iy)) for iz, iy in connected_indices]
    if len(set(idx)) != len(idx):
        raise InvalidDimension("duplicate connected index")
    for iz, iy in idx:
        if not (0 <= iz < N_z and 0 <= iy < N_y):
            raise InvalidDimension(f"index {(iz, iy)} outside {N_z}x{N_y} grid")
    idx.sort(key=lambda t: t[0] * N_y + t[1])
    return ModeConfig(N_z, N_y, tuple(idx), float(d_R), passive_enabled)


def admissible_strides(n: int, a: int) -> list[int]:
    """Coprime strides whose aperture (a - 1) * q fits inside n elements."""
    if a > n:
        raise Infeasible(f"{a} transmit elements do not fit in {n}")
    if a < 1:
        raise InvalidDimension("need at least one element per axis")
    if a == 1:
        return [1]
    qmax = (n - 1) // (a - 1)
    return [q for q in range(1, qmax + 1) if math.gcd(q, a) == 1]


@dataclass(frozen=True)
class Placement:
    q: int
    p: int
    rows: tuple
    cols: tuple
    coords_z: np.ndarray
    coords_y: np.ndarray


def placement_candidates(N_z: int, N_y: int, a_z: int, a_y: int, d_R: float,
                         z0: int = 0, y0: int = 0) -> list[Placement]:
    out = []
    for q in admissible_strides(N_z, a_z):
        for p in admissible_strides(N_y, a_y):
            rows = tuple(z0 + q * m for m in range(a_z))
            cols = tuple(y0 + p * n for n in range(a_y))
            if rows[-1] >= N_z or cols[-1] >= N_y:
                continue
            out.append(Placement(q, p, rows, cols, np.array(rows) * d_R, np.array(cols) * d_R))
    return out


def grid_mode(N_z: int, N_y: int, rows: Sequence[int], cols: Sequence[int], d_R: float,
              passive_enabled: bool = True) -> ModeConfig:
    return make_mode_config(N_z, N_y, [(r, c) for r in rows for c in cols], d_R, passive_enabled)


def placed_mode(N_z: int, N_y: int, a_z: int, a_y: int, d_R: float, rule: str = "spread",
                passive_enabled: bool = True) -> ModeConfig:
    """Product-grid mode using the largest ("spread") or smallest ("compact") admissible stride."""
    if a_z == 0 or a_y == 0:
        return make_mode_config(N_z, N_y, [], d_R, passive_enabled)
    cands = placement_candidates(N_z, N_y, a_z, a_y, d_R)
    if not cands:
        raise Infeasible("no admissible placement")
    key = (lambda c: (c.q, c.p)) if rule == "spread" else (lambda c: (-c.q, -c.p))
    best = max(cands, key=key)
    return grid_mode(N_z, N_y, best.rows, best.cols, d_R, passive_enabled)


def _min_gap(vals: Sequence[float]) -> float:
    return min(abs(x - y) for x, y in combinations(vals, 2))


def _ceil(x: float) -> int:
    # tolerant ceiling: 2 / 0.25 must give 8, not 9, under rounding noise
    return int(math.ceil(x - 1e-9))


def min_transmit_elements(K: int, vtilde: Sequence[float], v: Sequence[float],
                          N_z: int | None = None, N_y: int | None = None) -> tuple[int, int, int]:
    """(a_z_min, a_y_min, a_S_th) so that every UE gets its own beam along each axis."""
    if K < 1:
        raise InvalidDimension("K must be >= 1")
    if len(vtilde) != K or len(v) != K:
        raise InvalidDimension("one angle per UE per axis")
    if K == 1:
        az = ay = 1
    else:
        kt, kb = _min_gap(vtilde), _min_gap(v)
        if kt <= 0 or kb <= 0:
            raise Infeasible("two UEs share an angle on one axis")
        az = max(K, _ceil(2.0 / kt))
        ay = max(K, _ceil(2.0 / kb))
    if (N_z is not None and az > N_z) or (N_y is not None and ay > N_y):
        raise Infeasible(f"minimum {az}x{ay} transmit elements exceeds the {N_z}x{N_y} grid")
    return az, ay, az * ay
