"""Reconstruction of a potential from spectral data and round-trip checks."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from . import forward
from .accelerant import AccelerantGrid, build_H, is_accelerant
from .krein import theta
from .model import PotentialGrid, SpectralData, grid_lp_norm, lp_norm
from .validator import check_B2

log = logging.getLogger(__name__)


class ReconstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Config:
    N: int = 16
    n_terms: int = 32
    m: int = 200
    k: int = 200
    p: float = 1.0
    kernel: str = "standard"
    workers: int = 1

    def __post_init__(self):
        if self.N < 1 or self.n_terms < 1:
            raise ValueError("N and n_terms must be >= 1")
        if self.m < 8 or self.k < 8:
            raise ValueError("m and k must be >= 8")
        if not self.p >= 1:
            raise ValueError("p must be >= 1")


@dataclass(frozen=True)
class RoundTripReport:
    potential_error: float
    relative_potential_error: float
    lambda_error: float
    alpha_error: float
    N: int
    n_terms: int
    m: int
    k: int
    kernel: str

    def to_dict(self) -> dict:
        return asdict(self)


def reconstruct(data: SpectralData, cfg: Config = Config(), return_H: bool = False):
    """Spectral data -> accelerant -> Krein equation -> potential."""
    ok, _ = check_B2(data, min(cfg.n_terms, max(abs(w) for w in data.window_range())))
    if not ok:
        log.warning("spectral data fail the rank-count check; reconstruction may be meaningless")
    H = build_H(data, cfg.n_terms, cfg.k, cfg.p)
    report = is_accelerant(H, n_sections=min(cfg.m, 200))
    if not report.ok:
        raise ReconstructionError(
            "the accelerant built from the data is not positive on every section, "
            "so the data are not spectral data of any admissible operator"
        )
    # positivity is established; a singular section now is a numeric failure (KreinError)
    q = theta(H, cfg.m, cfg.kernel, cfg.workers, check=False)
    return (q, H) if return_H else q


def _expanded(items, n: int) -> np.ndarray:
    lams = [d.lam for d in items for _ in range(d.rank)]
    return np.sort(np.array(lams, dtype=float)) if lams else np.empty(0)


def compare_spectral_data(a: SpectralData, b: SpectralData, N: int | None = None):
    """Window-grouped distances (lambda_error, alpha_error) over common windows."""
    if a.r != b.r:
        raise ValueError("spectral data of different matrix size")
    lo = max(a.window_range()[0], b.window_range()[0])
    hi = min(a.window_range()[1], b.window_range()[1])
    if N is not None:
        lo, hi = max(lo, -N), min(hi, N)
    if lo > hi:
        raise ValueError("spectral data share no window")
    lam_err = 0.0
    alpha_err = 0.0
    eye0 = np.zeros((a.r, a.r))
    for n in range(lo, hi + 1):
        wa, wb = a.in_window(n), b.in_window(n)
        la, lb = _expanded(wa, n), _expanded(wb, n)
        k = min(la.size, lb.size)
        err = np.abs(la[:k] - lb[:k]).sum()
        err += np.abs(np.concatenate([la[k:], lb[k:]]) - np.pi * n).sum()
        lam_err = max(lam_err, float(err))
        sa = sum((d.alpha for d in wa), eye0)
        sb = sum((d.alpha for d in wb), eye0)
        alpha_err = max(alpha_err, float(np.linalg.norm(sa - sb, ord=2)))
    return lam_err, alpha_err


def potential_distance(q1: PotentialGrid, q2: PotentialGrid, p: float | None = None) -> float:
    p = q1.p if p is None else p
    if q1.m == q2.m:
        diff = q1.values - q2.values
    else:
        diff = q1.values - q2(q1.x)
    return grid_lp_norm(diff, 1.0, p)


def roundtrip(q: PotentialGrid, cfg: Config = Config(), return_intermediates: bool = False):
    """q -> spectral data -> q_hat -> spectral data, compared window by window.

    With ``return_intermediates`` the result is (report, q_hat, H).
    """
    data = forward.spectral_data(q, max(cfg.N, cfg.n_terms))
    q_hat, H = reconstruct(data, cfg, return_H=True)
    data_hat = forward.spectral_data(q_hat, cfg.N)
    lam_err, alpha_err = compare_spectral_data(data, data_hat, cfg.N)
    dist = potential_distance(q, q_hat, cfg.p)
    norm = lp_norm(PotentialGrid(q.r, q.m, q.values, cfg.p))
    report = RoundTripReport(
        potential_error=dist,
        relative_potential_error=dist / norm if norm > 0 else dist,
        lambda_error=lam_err,
        alpha_error=alpha_err,
        N=cfg.N,
        n_terms=cfg.n_terms,
        m=cfg.m,
        k=cfg.k,
        kernel=cfg.kernel,
    )
    return (report, q_hat, H) if return_intermediates else report
