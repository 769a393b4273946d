"""Passive, connected, fixed and hierarchical codebooks plus codeword quantization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import reconfigurable_steering
from .errors import InvalidDimension, OversamplingViolation, ResolutionMismatch

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Codeword:
    vec: np.ndarray
    xi_z: float
    xi_y: float
    index: int


@dataclass(frozen=True)
class Codebook:
    kind: str
    vectors: np.ndarray            # words x dim
    xi_z: np.ndarray
    xi_y: np.ndarray
    res_z: int
    res_y: int = 1
    layers: tuple = ()             # hierarchical only: one Codebook per layer, last is bottom

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __getitem__(self, i: int) -> Codeword:
        return Codeword(self.vectors[i], float(self.xi_z[i]), float(self.xi_y[i]), int(i))

    @property
    def bottom(self) -> "Codebook":
        return self.layers[-1] if self.layers else self


def grid_angles(res: int) -> np.ndarray:
    """Bin centres -1 + (2i - 1)/res for i = 1..res."""
    return -1.0 + (2.0 * np.arange(1, res + 1) - 1.0) / res


def _factor_matrix(coords, res: int, wavelength: float) -> np.ndarray:
    return np.array([reconfigurable_steering(coords, x, wavelength) for x in grid_angles(res)])


def build_passive_rcb_2d(block_coords_z, block_coords_y, mask, res_z: int, res_y: int,
                         wavelength: float) -> Codebook:
    """Unit-modulus codewords over a block; entries where mask == 0 (connected) are zeroed."""
    cz = np.asarray(block_coords_z, float)
    cy = np.asarray(block_coords_y, float)
    if res_z < len(cz) or res_y < len(cy):
        raise OversamplingViolation(
            f"resolution {res_z}x{res_y} below block size {len(cz)}x{len(cy)}")
    m = np.asarray(mask, float).reshape(-1)
    if m.size != cz.size * cy.size:
        raise InvalidDimension("mask size must equal block size")
    fz = _factor_matrix(cz, res_z, wavelength)
    fy = _factor_matrix(cy, res_y, wavelength)
    vecs = (fz[:, None, :, None] * fy[None, :, None, :]).reshape(res_z * res_y, -1) * m
    gz, gy = grid_angles(res_z), grid_angles(res_y)
    return Codebook("passive2D", vecs, np.repeat(gz, res_y), np.tile(gy, res_z), res_z, res_y)


def build_connected_rcb(active_coords_z, active_coords_y, a_z: int, a_y: int, wavelength: float,
                        res_z: Optional[int] = None, res_y: Optional[int] = None) -> Codebook:
    """Orthogonal book over the connected rows x cols; resolution must equal the active count."""
    cz = np.asarray(active_coords_z, float)
    cy = np.asarray(active_coords_y, float)
    if len(cz) != a_z or len(cy) != a_y:
        raise InvalidDimension("coordinate lists must have a_z and a_y entries")
    if (res_z is not None and res_z != a_z) or (res_y is not None and res_y != a_y):
        raise ResolutionMismatch("connected book resolution must equal the number of connected elements")
    a = a_z * a_y
    fz = _factor_matrix(cz, a_z, wavelength)
    fy = _factor_matrix(cy, a_y, wavelength)
    vecs = (fz[:, None, :, None] * fy[None, :, None, :]).reshape(a, a) / np.sqrt(a)
    gz, gy = grid_angles(a_z), grid_angles(a_y)
    return Codebook("connected2D", vecs, np.repeat(gz, a_y), np.tile(gy, a_z), a_z, a_y)


def build_fixed_connected(a_z: int, a_y: int, spacing: float, wavelength: float) -> Codebook:
    """FCB baseline: assumes contiguous elements regardless of the real placement."""
    return build_connected_rcb(np.arange(a_z) * spacing, np.arange(a_y) * spacing, a_z, a_y, wavelength)


def build_dft_codebook(n: int, spacing: float, wavelength: float, kind: str = "bs",
                       res: Optional[int] = None) -> Codebook:
    res = n if res is None else res
    if n < 1:
        raise InvalidDimension("n must be >= 1")
    if res < n:
        raise OversamplingViolation("resolution below element count")
    vecs = _factor_matrix(np.arange(n) * spacing, res, wavelength) / np.sqrt(n)
    g = grid_angles(res)
    return Codebook(kind, vecs, g, np.zeros(res), res, 1)


def _layer_count(n: int, M: int) -> int:
    L, m = 0, 1
    while m < n:
        m *= M
        L += 1
    if m != n:
        raise InvalidDimension(f"{n} is not a power of {M}")
    return L


def build_hierarchical_codebook(n: int, spacing: float, wavelength: float, M: int = 2,
                                kind: str = "hierarchical") -> Codebook:
    """DEACT hierarchy: layer l activates M**l elements steered to the M**l bin centres.

    The returned book is the bottom (n-point DFT) layer; `layers` holds all of them.
    """
    if M < 2:
        raise InvalidDimension("branching must be >= 2")
    if n < 1:
        raise InvalidDimension("n must be >= 1")
    L = _layer_count(n, M)
    coords = np.arange(n) * spacing
    layers = []
    for l in range(1, max(L, 1) + 1):
        m = min(M ** l, n)
        vecs = np.zeros((m, n), dtype=complex)
        for f, x in enumerate(grid_angles(m)):
            vecs[f, :m] = reconfigurable_steering(coords[:m], x, wavelength) / np.sqrt(m)
        g = grid_angles(m)
        layers.append(Codebook(kind, vecs, g, np.zeros(m), m, 1))
        if m == n:
            break
    bot = layers[-1]
    return Codebook(kind, bot.vectors, bot.xi_z, bot.xi_y, bot.res_z, 1, tuple(layers))


def children(parent: int, M: int) -> range:
    return range(parent * M, parent * M + M)


@dataclass(frozen=True)
class PlanarHierarchy:
    """Per-axis hierarchies combined by Kronecker product (z slow, y fast)."""
    z: Codebook
    y: Codebook
    mask: Optional[np.ndarray] = None

    @property
    def depth(self) -> int:
        return max(len(self.z.layers), len(self.y.layers))

    def vector(self, lz: int, fz: int, ly: int, fy: int) -> np.ndarray:
        v = np.kron(self.z.layers[lz].vectors[fz], self.y.layers[ly].vectors[fy])
        if self.mask is not None:
            v = v * self.mask
            n = np.linalg.norm(v)
            v = v / n if n > 0 else v
        return v


def nearest_codeword(book: Codebook, target) -> Codeword:
    """Minimum Euclidean distance; ties go to the lowest index."""
    if len(book) == 0:
        raise InvalidDimension("empty codebook")
    t = np.asarray(target)
    if t.shape != (book.dim,):
        raise InvalidDimension("target dimension does not match codebook")
    d = np.linalg.norm(book.vectors - t, axis=1)
    best = d.min()
    i = int(np.flatnonzero(d <= best + TIE_RTOL * max(1.0, best))[0])
    return book[i]


def best_match_index(vectors: np.ndarray, target) -> int:
    """Largest |c^H t| (codeword choice up to a common phase); ties go to the lowest index."""
    s = np.abs(np.conj(vectors) @ np.asarray(target))
    best = s.max()
    return int(np.flatnonzero(s >= best - TIE_RTOL * max(1.0, best))[0])


def correlation_matrix(book: Codebook) -> np.ndarray:
    return np.abs(np.conj(book.vectors) @ book.vectors.T)


def check_orthogonality(book: Codebook) -> float:
    c = correlation_matrix(book)
    if c.shape[0] < 2:
        return 0.0
    return float(np.max(c - np.diag(np.diag(c))))


def dump_codebook(book: Codebook, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# kind={book.kind} words={len(book)} dim={book.dim}\n")
        for i in range(len(book)):
            vals = [f"{i:d}", f"{book.xi_z[i]:.17e}", f"{book.xi_y[i]:.17e}"]
            for z in book.vectors[i]:
                vals.append(f"{z.real:.17e}")
                vals.append(f"{z.imag:.17e}")
            fh.write(" ".join(vals) + "\n")


def load_codebook_dump(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of dump_codebook: (xi_z, xi_y, vectors)."""
    rows = np.loadtxt(path, comments="#", ndmin=2)
    vec = rows[:, 3::2] + 1j * rows[:, 4::2]
    return rows[:, 1], rows[:, 2], vec
