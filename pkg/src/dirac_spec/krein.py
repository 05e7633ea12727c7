"""Nystrom solution of the Krein equation on the triangle 0 <= t <= x <= 1 and
the Krein mapping q(x) = i R(x, 0).

For every node x_i the equation

    R(x, t) + H(x - t) + int_0^x R(x, s) H(s - t) ds = 0,   0 <= t <= x,

is an independent Fredholm equation in t, discretized by the trapezoid rule
on the nodes t_j = j/m, j <= i.  ``kernel="paper"`` replaces H(s - t) by
H(x - s) inside the integral.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .accelerant import AccelerantGrid
from .model import PotentialGrid, trapezoid_weights

KERNELS = ("standard", "paper")


class KreinError(RuntimeError):
    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


@dataclass(frozen=True)
class KreinTriangle:
    """R(x_i, t_j) for j <= i; entries with j > i are zero and unused."""

    r: int
    m: int
    values: np.ndarray
    kernel: str = "standard"

    def __post_init__(self):
        if self.values.shape != (self.m + 1, self.m + 1, self.r, self.r):
            raise ValueError("KreinTriangle: bad shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("KreinTriangle: non-finite entries")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 1)

    def row(self, i: int) -> np.ndarray:
        return self.values[i, : i + 1]

    def __call__(self, x: float, t) -> np.ndarray:
        """Linear interpolation in x of the piecewise-linear rows R(x_i, .)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        pos = min(max(x * self.m, 0.0), float(self.m))
        i0 = min(int(np.floor(pos)), self.m - 1)
        frac = pos - i0
        out = (1 - frac) * self._row_interp(i0, t)
        if frac > 0:
            out = out + frac * self._row_interp(i0 + 1, t)
        return out

    def _row_interp(self, i: int, t: np.ndarray) -> np.ndarray:
        nodes = self.nodes[: i + 1]
        row = self.row(i).reshape(i + 1, -1)
        if i == 0:
            return np.broadcast_to(row[0], (t.size, row.shape[1])).reshape(t.size, self.r, self.r)
        cols = [np.interp(t, nodes, row[:, c].real) + 1j * np.interp(t, nodes, row[:, c].imag)
                for c in range(row.shape[1])]
        return np.stack(cols, axis=-1).reshape(t.size, self.r, self.r)


def _kernel_blocks(H: AccelerantGrid, m: int, kernel: str):
    nodes = np.linspace(0.0, 1.0, m + 1)
    if kernel == "standard":
        # K[k, j] = H(s_k - t_j)
        return H(nodes[:, None] - nodes[None, :])
    if kernel == "paper":
        return None
    raise ValueError(f"unknown kernel variant {kernel!r}; use one of {KERNELS}")


def _solve_section(i: int, H: AccelerantGrid, m: int, K, kernel: str) -> np.ndarray:
    r = H.r
    nodes = np.linspace(0.0, 1.0, m + 1)
    x = nodes[i]
    h_row = H(x - nodes[: i + 1])  # (i+1, r, r): H(x - t_j)
    if i == 0:
        return -h_row
    w = trapezoid_weights(i, x)
    if kernel == "standard":
        blocks = K[: i + 1, : i + 1]
    else:
        # H(x - s_k), the same for every t_j
        blocks = np.broadcast_to(H(x - nodes[: i + 1])[:, None], (i + 1, i + 1, r, r))
    n = (i + 1) * r
    G = (w[:, None, None, None] * blocks).transpose(0, 2, 1, 3).reshape(n, n)
    G[np.diag_indices(n)] += 1.0
    rhs = -h_row.transpose(1, 0, 2).reshape(r, n)  # row-block vector [H(x - t_0), ...]
    try:
        sol = np.linalg.solve(G.T, rhs.T).T
    except np.linalg.LinAlgError as exc:
        raise KreinError(f"not an accelerant at section x={x:.6g}: singular system", x) from exc
    if np.linalg.cond(G) > 1e13:
        raise KreinError(f"not an accelerant at section x={x:.6g}: ill-conditioned system", x)
    return sol.reshape(r, i + 1, r).transpose(1, 0, 2)


def solve_krein(H: AccelerantGrid, m: int, kernel: str = "standard", workers: int = 1,
                check: bool = True) -> KreinTriangle:
    """Solve the discretized Krein equation for R(x_i, t_j), 0 <= j <= i <= m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if check:
        from .accelerant import is_accelerant

        report = is_accelerant(H, n_sections=min(m, 200))
        if not report.ok:
            bad = report.sections[np.argmax(report.min_eigenvalues <= 0)]
            raise KreinError(f"not an accelerant: I + H loses positivity at section a={bad:.4g}", bad)
    K = _kernel_blocks(H, m, kernel)
    R = np.zeros((m + 1, m + 1, H.r, H.r), dtype=complex)

    def work(i):
        R[i, : i + 1] = _solve_section(i, H, m, K, kernel)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(m + 1)))
    else:
        for i in range(m + 1):
            work(i)
    return KreinTriangle(H.r, m, R, kernel)


def theta(H: AccelerantGrid, m: int, kernel: str = "standard", workers: int = 1,
          check: bool = True) -> PotentialGrid:
    """The Krein mapping: q(x_i) = i R_H(x_i, 0)."""
    R = solve_krein(H, m, kernel, workers, check)
    return potential_from_triangle(R, H.p)


def potential_from_triangle(R: KreinTriangle, p: float = 1.0) -> PotentialGrid:
    return PotentialGrid(R.r, R.m, 1j * R.values[:, 0], p)


def krein_residual(H, R, probe_count: int = 50, seed: int = 0, fine: int = 16,
                   kernel: str = "standard", m_hint: int = 200) -> float:
    """Max residual of the Krein equation at random off-node probes.

    ``H`` and ``R`` may be grids or callables ``H(x) -> (..., r, r)`` and
    ``R(x, t_array) -> (len, r, r)``.
    """
    rng = np.random.default_rng(seed)
    m = R.m if isinstance(R, KreinTriangle) else m_hint
    worst = 0.0
    for _ in range(probe_count):
        x, t = np.sort(rng.uniform(0.0, 1.0, 2))[::-1]
        knots = np.arange(0, int(np.floor(x * m)) + 1) / m
        sub = np.linspace(0.0, x, int(np.ceil(x * m * fine)) + 1)
        s = np.unique(np.concatenate([knots, sub, [x]]))
        Rs = R(x, s)
        Hs = H(s - t) if kernel == "standard" else H(x - s)
        integrand = Rs @ Hs
        ds = np.diff(s)[:, None, None]
        integral = (0.5 * ds * (integrand[1:] + integrand[:-1])).sum(axis=0)
        res = R(x, [t])[0] + np.asarray(H(np.array(x - t))) + integral
        worst = max(worst, float(np.linalg.norm(res, ord=2)))
    return worst


def discrete_residual(H: AccelerantGrid, R: KreinTriangle) -> float:
    """Max residual of the discretized equations that ``R`` was solved from."""
    K = _kernel_blocks(H, R.m, R.kernel)
    nodes = R.nodes
    worst = 0.0
    for i in range(1, R.m + 1):
        x = nodes[i]
        row = R.row(i)
        w = trapezoid_weights(i, x)
        if R.kernel == "standard":
            blocks = K[: i + 1, : i + 1]
        else:
            blocks = np.broadcast_to(H(x - nodes[: i + 1])[:, None], (i + 1, i + 1, H.r, H.r))
        conv = np.einsum("k,kab,kjbc->jac", w, row, blocks)
        res = row + H(x - nodes[: i + 1]) + conv
        worst = max(worst, float(np.abs(res).max()))
    return worst
