"""Accelerants: construction from spectral data, symmetry, positivity tests and
the associated 2r x 2r block kernel.

The accelerant of spectral data ((lam_j, alpha_j)) is the window-grouped series

    H(x) = sum_n ( sum_{lam_j in D_n} e^{2 i lam_j x} alpha_j - e^{2 i pi n x} I ),

truncated symmetrically in n, with D_n = (pi n - pi/2, pi n + pi/2].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SpectralData, grid_lp_norm, interp_matrices, trapezoid_weights

TOL_SYM = 1e-9
POS_FLOOR = 1e-8


class AccelerantError(ValueError):
    pass


@dataclass(frozen=True)
class AccelerantGrid:
    """Samples of H at ``x_i = -1 + i/k``, i = 0..2k."""

    r: int
    k: int
    values: np.ndarray
    p: float = 1.0

    def __post_init__(self):
        arr = np.array(self.values, dtype=complex)
        if arr.shape != (2 * self.k + 1, self.r, self.r):
            raise ValueError(f"AccelerantGrid: expected {(2 * self.k + 1, self.r, self.r)}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("AccelerantGrid: non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, 2 * self.k + 1)

    def __call__(self, x) -> np.ndarray:
        return interp_matrices(self.x, self.values, x)

    @classmethod
    def from_function(cls, func, r: int, k: int, p: float = 1.0) -> "AccelerantGrid":
        x = np.linspace(-1.0, 1.0, 2 * k + 1)
        vals = np.array([np.broadcast_to(func(xi), (r, r)) for xi in x], dtype=complex)
        return cls(r, k, vals, p)

    @classmethod
    def constant(cls, c, r: int = 1, k: int = 200, p: float = 1.0) -> "AccelerantGrid":
        c = np.broadcast_to(np.asarray(c, dtype=complex) * np.eye(r) if np.ndim(c) == 0 else c, (r, r))
        return cls(r, k, np.broadcast_to(c, (2 * k + 1, r, r)), p)

    def lp_norm(self) -> float:
        return grid_lp_norm(self.values, 2.0, self.p)

    def __sub__(self, other: "AccelerantGrid") -> "AccelerantGrid":
        if (self.r, self.k) != (other.r, other.k):
            raise ValueError("grids differ")
        return AccelerantGrid(self.r, self.k, self.values - other.values, self.p)


def _check_coverage(data: SpectralData, n_terms: int):
    if len(data) == 0:
        raise AccelerantError("empty spectral data")
    lo, hi = data.window_range()
    if lo > -n_terms or hi < n_terms:
        raise AccelerantError(
            f"spectral data cover windows [{lo}, {hi}] but |n| <= {n_terms} is required"
        )


def build_H(data: SpectralData, n_terms: int, k: int, p: float = 1.0) -> AccelerantGrid:
    """Symmetric partial sum of the grouped series over |n| <= n_terms."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    _check_coverage(data, n_terms)
    x = np.linspace(-1.0, 1.0, 2 * k + 1)
    r = data.r
    H = np.zeros((x.size, r, r), dtype=complex)
    windows = data.windows()
    lams = data.lambdas
    alphas = data.alphas
    eye = np.eye(r)
    for n in range(-n_terms, n_terms + 1):
        sel = windows == n
        term = np.einsum("xj,jab->xab", np.exp(2j * np.outer(x, lams[sel])), alphas[sel])
        term -= np.exp(2j * np.pi * n * x)[:, None, None] * eye
        H += term
    return AccelerantGrid(r, k, H, p)


def symmetry_defect(H: AccelerantGrid) -> float:
    """max_i ||H(-x_i) - H(x_i)^*||."""
    flipped = H.values[::-1]
    d = flipped - np.conj(np.swapaxes(H.values, -1, -2))
    return float(np.linalg.norm(d, ord=2, axis=(1, 2)).max())


def convolution_matrix(H: AccelerantGrid, n_sections: int) -> np.ndarray:
    """Symmetrized Nystrom matrix of I + (Hf)(x) = int_0^1 H(x - t) f(t) dt."""
    r = H.r
    t = np.linspace(0.0, 1.0, n_sections + 1)
    w = np.sqrt(trapezoid_weights(n_sections))
    diff = t[:, None] - t[None, :]
    blocks = H(diff)  # (n+1, n+1, r, r)
    M = (w[:, None, None, None] * blocks * w[None, :, None, None])
    M = M.transpose(0, 2, 1, 3).reshape((n_sections + 1) * r, (n_sections + 1) * r)
    return np.eye(M.shape[0]) + M


def block_convolution_matrix(H: AccelerantGrid, n_sections: int) -> np.ndarray:
    """Symmetrized Nystrom matrix of I + F_H on L2((0,1), C^{2r})."""
    r = H.r
    t = np.linspace(0.0, 1.0, n_sections + 1)
    w = np.sqrt(trapezoid_weights(n_sections))
    F = block_kernel_values(H, t, t)  # (n+1, n+1, 2r, 2r)
    M = w[:, None, None, None] * F * w[None, :, None, None]
    size = (n_sections + 1) * 2 * r
    M = M.transpose(0, 2, 1, 3).reshape(size, size)
    return np.eye(size) + M


def _hermitian_min_eig(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])


@dataclass(frozen=True)
class PositivityReport:
    ok: bool
    sections: np.ndarray
    min_eigenvalues: np.ndarray

    def __bool__(self):
        return self.ok


def is_accelerant(H: AccelerantGrid, n_sections: int = 200, pos_floor: float = POS_FLOOR,
                  tol_sym: float = TOL_SYM) -> PositivityReport:
    """Positivity of I + H on every section [0, a], a = i/n_sections.

    Each leading principal block of the Nystrom matrix realizes one section,
    so the whole family a in (0, 1] is covered by one matrix.
    """
    defect = symmetry_defect(H)
    if defect > tol_sym:
        raise AccelerantError(f"H is not Hermitian-symmetric (defect {defect:.3e})")
    M = convolution_matrix(H, n_sections)
    r = H.r
    sections = np.arange(1, n_sections + 1) / n_sections
    mins = np.array([_hermitian_min_eig(M[: (i + 1) * r, : (i + 1) * r]) for i in range(1, n_sections + 1)])
    return PositivityReport(bool(np.all(mins > pos_floor)), sections, mins)


def min_eigenvalues_pair(H: AccelerantGrid, n_sections: int = 200) -> tuple[float, float]:
    """Smallest eigenvalues of the discretized I + H and I + F_H."""
    return (
        _hermitian_min_eig(convolution_matrix(H, n_sections)),
        _hermitian_min_eig(block_convolution_matrix(H, n_sections)),
    )


def block_kernel_values(H: AccelerantGrid, x, t) -> np.ndarray:
    x = np.asarray(x, dtype=float)[:, None]
    t = np.asarray(t, dtype=float)[None, :]
    r = H.r
    F = np.empty((x.shape[0], t.shape[1], 2 * r, 2 * r), dtype=complex)
    F[..., :r, :r] = H((x - t) / 2)
    F[..., :r, r:] = H((x + t) / 2)
    F[..., r:, :r] = H(-(x + t) / 2)
    F[..., r:, r:] = H(-(x - t) / 2)
    return 0.5 * F


@dataclass(frozen=True)
class BlockKernelGrid:
    nodes: np.ndarray
    values: np.ndarray

    def symmetry_defect(self) -> float:
        adj = np.conj(np.swapaxes(np.swapaxes(self.values, 0, 1), -1, -2))
        return float(np.abs(self.values - adj).max())


def block_kernel_F(H: AccelerantGrid, n: int = 100) -> BlockKernelGrid:
    t = np.linspace(0.0, 1.0, n + 1)
    return BlockKernelGrid(t, block_kernel_values(H, t, t))
