"""Kadec-type diagnostics for the exponential system of spectral data.

Per window D_n the vectors v_{j,k} (alpha_j = sum_k v_{j,k} v_{j,k}^*) define
A_n (A_n v_{j,k} = lam_j v_{j,k}) and B_n (B_n e_k = v_{j,k}).  The system is a
Riesz basis as soon as sup ||A_n - pi n I|| < ln 2 and ||B_n|| + ||B_n^{-1}||
stays bounded; the perturbation of the orthonormal system is then at most
e^delta - 1.  Failing this sufficient test proves nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import SpectralData
from .validator import TREND_FLOOR, TREND_RATIO

LN2 = math.log(2.0)


@dataclass
class WindowOperators:
    n: int
    A: np.ndarray
    B: np.ndarray
    deviation: float
    b_norms: float


@dataclass
class KadecReport:
    delta: float
    b_bound: float
    r1_ok: bool
    perturbation: float
    r0_violations: list = field(default_factory=list)
    quadratic_closeness: list = field(default_factory=list)
    closeness_diverging: bool = False
    windows: list = field(default_factory=list, repr=False)

    @property
    def verdict(self) -> str:
        return "riesz-basis (R1 holds)" if self.r1_ok else "inconclusive"

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "b_bound": self.b_bound,
            "r1_ok": self.r1_ok,
            "perturbation": self.perturbation,
            "verdict": self.verdict,
            "r0_violations": self.r0_violations,
            "quadratic_closeness": self.quadratic_closeness,
            "closeness_diverging": self.closeness_diverging,
            "windows": [
                {"n": w.n, "deviation": w.deviation, "b_norms": w.b_norms} for w in self.windows
            ],
        }


def window_frame(data: SpectralData, n: int, rel_tol: float = 1e-8):
    """Eigenvalues and vectors v_{j,k} of the data in window n."""
    lams, vecs = [], []
    for d in data.in_window(n):
        ev, U = np.linalg.eigh(d.alpha)
        keep = ev > rel_tol * max(ev.max(), 0.0)
        for val, col in zip(ev[keep], U[:, keep].T):
            lams.append(d.lam)
            vecs.append(np.sqrt(val) * col)
    return np.array(lams), np.array(vecs).reshape(-1, data.r).T


def window_operators(data: SpectralData, n: int) -> WindowOperators | None:
    lams, V = window_frame(data, n)
    r = data.r
    if V.shape[1] != r or np.linalg.matrix_rank(V) < r:
        return None
    A = V @ np.diag(lams) @ np.linalg.inv(V)
    dev = float(np.linalg.norm(A - np.pi * n * np.eye(r), ord=2))
    bn = float(np.linalg.norm(V, ord=2) + np.linalg.norm(np.linalg.inv(V), ord=2))
    return WindowOperators(n, A, V, dev, bn)


def _closeness_term(data: SpectralData, n: int) -> float:
    # ||e^{i lam t} v - e^{i pi n t} v||^2 in L2(-1, 1) = |v|^2 (4 - 4 sin(d)/d)
    lams, V = window_frame(data, n)
    d = lams - np.pi * n
    return float(np.sum(np.sum(np.abs(V) ** 2, axis=0) * (4 - 4 * np.sinc(d / np.pi))))


def decreasing_trend_flat(inner, outer, ratio: float = TREND_RATIO) -> bool:
    outer_mean = float(np.mean(outer))
    return outer_mean <= TREND_FLOOR or outer_mean < ratio * float(np.mean(inner))


def kadec_check(data: SpectralData, n_min: int = 0, N: int | None = None) -> KadecReport:
    """Check the Kadec-type condition on the windows n_min <= |n| <= N."""
    lo, hi = data.window_range()
    N = min(-lo, hi) if N is None else N
    ns = [n for n in range(-N, N + 1) if abs(n) >= n_min]
    windows, violations = [], []
    for n in ns:
        op = window_operators(data, n)
        if op is None:
            violations.append(n)
        else:
            windows.append(op)
    delta = max((w.deviation for w in windows), default=0.0)
    b_bound = max((w.b_norms for w in windows), default=float("inf"))
    r1_ok = not violations and bool(windows) and delta < LN2 and math.isfinite(b_bound)

    order = sorted(ns, key=lambda n: (abs(n), n))
    partial, acc = [], 0.0
    for n in order:
        acc += _closeness_term(data, n)
        partial.append(acc)
    increments = np.diff([0.0] + partial)
    half = len(increments) // 2
    # terms that stop decaying make the sum of squares grow without bound
    diverging = bool(half) and not decreasing_trend_flat(increments[:half], increments[half:])
    return KadecReport(
        delta=delta,
        b_bound=b_bound,
        r1_ok=r1_ok,
        perturbation=math.expm1(delta) if math.isfinite(delta) else float("inf"),
        r0_violations=violations,
        quadratic_closeness=partial,
        closeness_diverging=diverging,
        windows=windows,
    )
