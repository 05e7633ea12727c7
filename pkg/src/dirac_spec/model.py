"""Domain types for Dirac operators on (0, 1) with r x r matrix potentials.

A potential ``q`` lives on the uniform grid ``x_i = i/m`` and enters the
first-order system

    theta u' + bq u = lam u,    theta = -i diag(I, -I),
    bq = [[0, q], [q^*, 0]],

with boundary conditions ``a y(0) = a y(1) = 0`` where ``a = (I, -I)/sqrt(2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL_PSD_REL = 1e-10
RANK_REL_TOL = 1e-8


def _as_matrix_stack(values, r: int, count: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.shape != (count, r, r):
        raise ValueError(f"{name}: expected shape {(count, r, r)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PotentialGrid:
    """Samples of q at ``x_i = i/m``, i = 0..m."""

    r: int
    m: int
    values: np.ndarray
    p: float = 1.0

    def __post_init__(self):
        if self.r < 1 or self.m < 1:
            raise ValueError("r and m must be positive")
        if not self.p >= 1 or not np.isfinite(self.p):
            raise ValueError("p must be a finite real >= 1")
        object.__setattr__(
            self, "values", _as_matrix_stack(self.values, self.r, self.m + 1, "PotentialGrid")
        )

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 1)

    def __call__(self, x) -> np.ndarray:
        """Piecewise-linear interpolation of q at arbitrary points of [0, 1]."""
        return interp_matrices(self.x, self.values, x)

    def scaled(self, c: complex) -> "PotentialGrid":
        return PotentialGrid(self.r, self.m, c * self.values, self.p)


def interp_matrices(nodes: np.ndarray, values: np.ndarray, x) -> np.ndarray:
    """Linear interpolation of a stack of matrices given on sorted nodes."""
    x = np.asarray(x, dtype=float)
    flat = values.reshape(len(nodes), -1)
    out = np.empty(x.shape + (flat.shape[1],), dtype=complex)
    xs = x.ravel()
    for col in range(flat.shape[1]):
        re = np.interp(xs, nodes, flat[:, col].real)
        im = np.interp(xs, nodes, flat[:, col].imag)
        out.reshape(-1, flat.shape[1])[:, col] = re + 1j * im
    return out.reshape(x.shape + values.shape[1:])


def trapezoid_weights(n_intervals: int, length: float = 1.0) -> np.ndarray:
    w = np.full(n_intervals + 1, length / n_intervals)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def grid_lp_norm(values: np.ndarray, length: float, p: float) -> float:
    """(int ||f||^p)^(1/p) by composite trapezoid, operator 2-norm per sample."""
    norms = np.linalg.norm(values, ord=2, axis=(-2, -1))
    w = trapezoid_weights(len(norms) - 1, length)
    return float(np.dot(w, norms**p) ** (1.0 / p))


def lp_norm(q: PotentialGrid) -> float:
    return grid_lp_norm(q.values, 1.0, q.p)


def make_test_potential(kind: str, r: int = 1, m: int = 200, **params) -> PotentialGrid:
    """Build one of the corpus potentials.

    kinds: ``zero``; ``constant`` (``c`` times identity, default 0.3);
    ``smooth_random`` (trigonometric polynomial of order ``order`` with seeded
    complex coefficients, sup-amplitude scaled to ``amplitude``);
    ``matrix_demo`` (a fixed non-normal, non-commuting r x r example).
    """
    if r < 1 or m < 2:
        raise ValueError("need r >= 1 and m >= 2")
    p = float(params.get("p", 1.0))
    x = np.linspace(0.0, 1.0, m + 1)
    eye = np.eye(r)
    if kind == "zero":
        values = np.zeros((m + 1, r, r), dtype=complex)
    elif kind == "constant":
        c = complex(params.get("c", 0.3))
        values = np.broadcast_to(c * eye, (m + 1, r, r)).copy()
    elif kind == "smooth_random":
        rng = np.random.default_rng(params.get("seed", 7))
        order = int(params.get("order", 3))
        amplitude = float(params.get("amplitude", 0.5))
        values = np.zeros((m + 1, r, r), dtype=complex)
        for k in range(order + 1):
            a = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
            b = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
            decay = 1.0 / (1 + k) ** 2
            values += decay * (
                np.cos(2 * np.pi * k * x)[:, None, None] * a
                + np.sin(2 * np.pi * k * x)[:, None, None] * b
            )
        peak = np.linalg.norm(values, ord=2, axis=(1, 2)).max()
        values *= amplitude / peak
    elif kind == "matrix_demo":
        amplitude = float(params.get("amplitude", 0.4))
        n = np.arange(r)
        shift = np.roll(np.eye(r), 1, axis=1)
        diag = np.diag(np.exp(1j * np.pi * n / max(r, 2)))
        values = np.empty((m + 1, r, r), dtype=complex)
        for i, xi in enumerate(x):
            values[i] = amplitude * (np.cos(np.pi * xi) * diag + (0.5 + xi) * shift)
            if r == 1:
                values[i] = amplitude * (np.cos(np.pi * xi) + 1j * (0.5 + xi))
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    return PotentialGrid(r, m, values, p)


@dataclass(frozen=True, eq=False)
class SystemCoefficients:
    theta: np.ndarray
    bq: np.ndarray
    a: np.ndarray
    nodes: np.ndarray
    potential: PotentialGrid = field(repr=False)

    @property
    def r(self) -> int:
        return self.a.shape[0]

    def bq_at(self, x) -> np.ndarray:
        return augment_values(self.potential(x))


def augment_values(q_values: np.ndarray) -> np.ndarray:
    r = q_values.shape[-1]
    out = np.zeros(q_values.shape[:-2] + (2 * r, 2 * r), dtype=complex)
    out[..., :r, r:] = q_values
    out[..., r:, :r] = np.conj(np.swapaxes(q_values, -1, -2))
    return out


def theta_matrix(r: int) -> np.ndarray:
    return -1j * np.diag(np.r_[np.ones(r), -np.ones(r)]).astype(complex)


def boundary_row(r: int) -> np.ndarray:
    return np.hstack([np.eye(r), -np.eye(r)]).astype(complex) / np.sqrt(2.0)


def augment(q: PotentialGrid) -> SystemCoefficients:
    bq = augment_values(q.values)
    bq.setflags(write=False)
    return SystemCoefficients(theta_matrix(q.r), bq, boundary_row(q.r), q.x, q)


def hermitize_psd(alpha: np.ndarray, slack: float = 0.0) -> np.ndarray:
    """Symmetrize and clip negative eigenvalues at zero.

    Matrices whose eigenvalues are all >= -slack * ||alpha|| are returned
    Hermitized but otherwise untouched.
    """
    h = 0.5 * (alpha + alpha.conj().T)
    w, v = np.linalg.eigh(h)
    if w.min(initial=0.0) >= -slack * np.abs(w).max(initial=0.0):
        return h
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


def matrix_rank(alpha: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    s = np.linalg.svd(alpha, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def window_index(lam) -> np.ndarray | int:
    """Index n with lam in (pi n - pi/2, pi n + pi/2]."""
    n = np.ceil(np.asarray(lam) / np.pi - 0.5).astype(int)
    return int(n) if n.ndim == 0 else n


@dataclass(frozen=True)
class SpectralDatum:
    lam: float
    alpha: np.ndarray
    rank: int

    @classmethod
    def from_alpha(cls, lam: float, alpha) -> "SpectralDatum":
        alpha = np.atleast_2d(np.asarray(alpha, dtype=complex))
        h = 0.5 * (alpha + alpha.conj().T)
        w = np.linalg.eigvalsh(h)
        tol = TOL_PSD_REL * max(np.abs(w).max(initial=0.0), 1.0)
        if w.min(initial=0.0) < -tol:
            raise ValueError(f"norming matrix at {lam} is not PSD (min eig {w.min():.3e})")
        # rounding slack only, so data that were clipped once ingest unchanged
        a = hermitize_psd(h, slack=64 * np.finfo(float).eps)
        a.setflags(write=False)
        return cls(float(lam), a, matrix_rank(a))


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues with norming matrices, labelled so that lam_0 <= 0 < lam_1."""

    r: int
    data: tuple

    def __post_init__(self):
        data = tuple(self.data)
        object.__setattr__(self, "data", data)
        lams = np.array([d.lam for d in data])
        if len(lams) > 1 and np.any(np.diff(lams) <= 0):
            raise ValueError("eigenvalues must be strictly increasing")
        for d in data:
            if d.alpha.shape != (self.r, self.r):
                raise ValueError("norming matrix has wrong shape")
            if d.rank == 0:
                raise ValueError(f"zero norming matrix at lambda={d.lam}")

    @classmethod
    def from_pairs(cls, r: int, pairs) -> "SpectralData":
        items = sorted((float(l), a) for l, a in pairs)
        return cls(r, tuple(SpectralDatum.from_alpha(l, a) for l, a in items))

    @classmethod
    def free(cls, r: int, N: int) -> "SpectralData":
        eye = np.eye(r)
        return cls.from_pairs(r, [(np.pi * n, eye) for n in range(-N, N + 1)])

    def __len__(self):
        return len(self.data)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([d.lam for d in self.data])

    @property
    def alphas(self) -> np.ndarray:
        return np.array([d.alpha for d in self.data]).reshape(-1, self.r, self.r)

    @property
    def ranks(self) -> np.ndarray:
        return np.array([d.rank for d in self.data], dtype=int)

    @property
    def zero_index(self) -> int:
        """Position in ``data`` of the datum labelled j = 0 (largest lam <= 0)."""
        lams = self.lambdas
        nonpos = np.nonzero(lams <= 0)[0]
        return int(nonpos[-1]) if nonpos.size else -1

    def labelled(self):
        """Pairs (j, datum) with the labelling convention lam_0 <= 0 < lam_1."""
        j0 = self.zero_index
        return [(i - j0, d) for i, d in enumerate(self.data)]

    def windows(self) -> np.ndarray:
        return np.atleast_1d(window_index(self.lambdas))

    def in_window(self, n: int) -> list:
        return [d for d, w in zip(self.data, self.windows()) if w == n]

    def window_range(self) -> tuple[int, int]:
        w = self.windows()
        return int(w.min()), int(w.max())

    def replace(self, pairs) -> "SpectralData":
        return SpectralData.from_pairs(self.r, pairs)
