"""Finite-truncation diagnostics for the four conditions characterizing
spectral data of Dirac operators.

None of these can prove the asymptotic conditions from finitely many data;
they report the quantities whose decay (or non-degeneracy) the conditions
assert, plus simple trend tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import SpectralData, grid_lp_norm

TREND_RATIO = 0.7
TREND_FLOOR = 1e-10  # tails this small are round-off, not a trend
GRAM_FLOOR = 1e-6


class TruncationError(ValueError):
    pass


def _windows(N: int) -> np.ndarray:
    return np.arange(-N, N + 1)


def check_B1(data: SpectralData, N: int):
    """Per-window tails sum |pi n - lam_j| and ||I - sum alpha_j|| for |n| <= N."""
    lams = data.lambdas
    if len(lams) == 0:
        raise TruncationError("no spectral data")
    lo, hi = data.window_range()
    eye = np.eye(data.r)
    lam_tail, alpha_tail = [], []
    for n in _windows(N):
        items = data.in_window(n)
        if not items and (n < lo or n > hi):
            raise TruncationError(f"window {n} lies outside the data range [{lo}, {hi}]")
        lam_tail.append(sum(abs(np.pi * n - d.lam) for d in items))
        beta = sum((d.alpha for d in items), np.zeros((data.r, data.r)))
        alpha_tail.append(float(np.linalg.norm(eye - beta, ord=2)))
    return np.array(lam_tail, dtype=float), np.array(alpha_tail)


def decreasing_trend(tail, ratio: float = TREND_RATIO, floor: float = TREND_FLOOR) -> bool:
    """Mean over the outer half of windows below ``ratio`` times the inner-half mean.

    ``tail`` is indexed by n = -N..N.  An outer mean below ``floor`` counts as
    decreasing.
    """
    tail = np.asarray(tail, dtype=float)
    N = (len(tail) - 1) // 2
    n = np.abs(_windows(N))
    inner = tail[n <= N / 2].mean()
    outer = tail[n > N / 2].mean()
    if outer <= floor:
        return True
    return bool(outer < ratio * inner)


def check_B2(data: SpectralData, N: int):
    """Whether the ranks in the windows |n| <= N add up to (2N + 1) r."""
    w = data.windows()
    ranks = data.ranks
    per_window = {int(n): int(ranks[w == n].sum()) for n in _windows(N)}
    total = sum(per_window.values())
    return total == (2 * N + 1) * data.r, {"total": total, "expected": (2 * N + 1) * data.r,
                                           "per_window": per_window}


def exponential_frame(data: SpectralData, N: int | None = None, rel_tol: float = 1e-8):
    """Frequencies and vectors v_{j,k} with alpha_j = sum_k v_{j,k} v_{j,k}^*."""
    freqs, vecs = [], []
    w = data.windows()
    for d, n in zip(data.data, w):
        if N is not None and abs(n) > N:
            continue
        ev, U = np.linalg.eigh(d.alpha)
        keep = ev > rel_tol * max(ev.max(), 0.0)
        for val, col in zip(ev[keep][::-1], U[:, keep].T[::-1]):
            freqs.append(d.lam)
            vecs.append(np.sqrt(val) * col)
    return np.array(freqs), np.array(vecs).reshape(-1, data.r)


def gram_matrix(freqs: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Gram matrix of e^{i lam t} v / sqrt(2) in L2(-1, 1), closed form."""
    d = freqs[:, None] - freqs[None, :]
    sinc = np.sinc(d / np.pi)  # sin(d)/d; (1/2) int_{-1}^{1} e^{i d t} dt
    inner = np.conj(vecs) @ vecs.T  # <v_j', v_j> arranged as [row j, col j']
    return sinc * inner.T


def check_B3_gram(data: SpectralData, N: int | None = None, vectors=None) -> float:
    """Smallest singular value of the Gram matrix of the truncated exponential system.

    This can expose near-dependence, never prove completeness.
    """
    if vectors is None:
        freqs, vecs = exponential_frame(data, N)
    else:
        freqs, vecs = vectors
    G = gram_matrix(freqs, vecs)
    return float(np.linalg.svd(G, compute_uv=False).min())


def check_B4(data: SpectralData, n_terms: int, k: int = 200, p: float = 1.0):
    """Accelerant partial sum at n_terms and the L_p distance to the n_terms // 2 sum."""
    from .accelerant import build_H

    H = build_H(data, n_terms, k, p)
    H_half = build_H(data, max(n_terms // 2, 1), k, p)
    tail = grid_lp_norm(H.values - H_half.values, 2.0, p)
    return H, tail


@dataclass
class ConditionReport:
    N: int
    b1_lambda_tail: list
    b1_alpha_tail: list
    b1_lambda_decreasing: bool
    b1_alpha_decreasing: bool
    b2_ok: bool
    b2_per_window: dict
    b3_min_singular: float
    b3_ok: bool
    b4_h_norm: float
    b4_tail: float
    b4_tail_previous: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["b2_per_window"] = {str(k): v for k, v in self.b2_per_window.items()}
        return d


def validate(data: SpectralData, N: int, n_terms: int | None = None, k: int = 200,
             p: float = 1.0, ratio: float = TREND_RATIO, gram_floor: float = GRAM_FLOOR) -> ConditionReport:
    n_terms = n_terms or N
    lam_tail, alpha_tail = check_B1(data, N)
    b2_ok, details = check_B2(data, N)
    b3 = check_B3_gram(data, N)
    H, tail = check_B4(data, n_terms, k, p)
    prev = check_B4(data, max(n_terms // 2, 1), k, p)[1] if n_terms >= 2 else float("nan")
    return ConditionReport(
        N=N,
        b1_lambda_tail=lam_tail.tolist(),
        b1_alpha_tail=alpha_tail.tolist(),
        b1_lambda_decreasing=decreasing_trend(lam_tail, ratio),
        b1_alpha_decreasing=decreasing_trend(alpha_tail, ratio),
        b2_ok=b2_ok,
        b2_per_window=details["per_window"],
        b3_min_singular=b3,
        b3_ok=b3 > gram_floor,
        b4_h_norm=H.lp_norm(),
        b4_tail=tail,
        b4_tail_previous=prev,
    )
