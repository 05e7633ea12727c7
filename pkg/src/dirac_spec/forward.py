"""Direct spectral problem: characteristic matrices, Weyl function, eigenvalues
and norming matrices.

The Cauchy problem ``theta u' + bq u = lam u, u(0) = I`` is integrated with a
midpoint exponential scheme: on each step q is frozen at the step midpoint and
the step is advanced by the exact exponential of ``i (lam J - J bq) h``,
J = diag(I, -I).  Because ``(lam J - J bq)^2 = diag(lam^2 - q q^*, lam^2 - q^* q)``
the exponential reduces to scalar cos / sinc functions on the eigenvalues of
``q q^*`` and ``q^* q``, so a whole batch of spectral parameters is advanced at
once and the free case ``u_0(x) = diag(e^{i lam x}, e^{-i lam x})`` is exact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import (
    PotentialGrid,
    SpectralData,
    SpectralDatum,
    SystemCoefficients,
    augment,
    hermitize_psd,
    matrix_rank,
    window_index,
)

log = logging.getLogger(__name__)

IMAG_CAP = 10.0
COND_CAP = 1e12
STEPS_PER_WAVELENGTH = 8.0
CONTOUR_HEIGHT = 0.6
CLUSTER_TOL = 1e-7
TOL_REAL = 1e-8


class ForwardError(RuntimeError):
    """Numerical failure in the direct problem."""


class OverflowRisk(ForwardError):
    pass


class AtEigenvalueError(ForwardError):
    pass


@dataclass(frozen=True)
class CharacteristicSample:
    lam: complex
    s: np.ndarray
    c: np.ndarray
    m: np.ndarray | None = None


def step_count(m: int, lam_max: float) -> int:
    return max(int(m), int(math.ceil(abs(lam_max) * STEPS_PER_WAVELENGTH / math.pi)))


class Propagator:
    """Transfer matrices u(1, lam) for a fixed potential and step count."""

    def __init__(self, coeffs: SystemCoefficients, steps: int):
        self.coeffs = coeffs
        self.steps = int(steps)
        r = coeffs.r
        self.r = r
        h = 1.0 / self.steps
        self.h = h
        mids = (np.arange(self.steps) + 0.5) * h
        q = coeffs.potential(mids)
        qh = np.conj(np.swapaxes(q, -1, -2))
        d1, u1 = np.linalg.eigh(q @ qh)
        d2, u2 = np.linalg.eigh(qh @ q)
        self._d = np.concatenate([d1, d2], axis=1)  # (steps, 2r)
        # spectral projectors u_k u_k^* flattened, so f(qq^*) = f(d) @ P
        p1 = np.einsum("sik,sjk->skij", u1, np.conj(u1))
        p2 = np.einsum("sik,sjk->skij", u2, np.conj(u2))
        n = self.steps
        self._p1 = p1.reshape(n, r, r * r)
        self._p2 = p2.reshape(n, r, r * r)
        self._qp2 = (q[:, None] @ p2).reshape(n, r, r * r)
        self._qhp1 = (qh[:, None] @ p1).reshape(n, r, r * r)

    def _step_matrices(self, lam: np.ndarray) -> np.ndarray:
        """Exact exponentials of every step, shape (steps, L, 2r, 2r)."""
        r = self.r
        # cos(h w) and sin(h w)/w with w^2 = lam^2 - d; both are even in w
        w = np.sqrt(lam[None, :, None] ** 2 - self._d[:, None, :])
        hw = self.h * w
        small = np.abs(hw) < 1e-3
        cos = np.cos(hw)
        sinc = np.sin(hw) / np.where(small, 1.0, hw)
        z = hw[small] ** 2
        sinc[small] = 1.0 - z / 6.0 + z * z / 120.0
        sinc *= self.h
        shape = hw.shape[:2] + (r, r)
        cos1, cos2 = cos[..., :r], cos[..., r:]
        sin1, sin2 = sinc[..., :r], sinc[..., r:]
        # E = C + i A S with A = lam J - J bq = [[lam, -q], [q^*, -lam]]
        lam_ = lam[None, :, None, None]
        E = np.empty(hw.shape[:2] + (2 * r, 2 * r), dtype=complex)
        E[..., :r, :r] = ((cos1 @ self._p1).reshape(shape)
                          + 1j * lam_ * (sin1 @ self._p1).reshape(shape))
        E[..., :r, r:] = -1j * (sin2 @ self._qp2).reshape(shape)
        E[..., r:, :r] = 1j * (sin1 @ self._qhp1).reshape(shape)
        E[..., r:, r:] = ((cos2 @ self._p2).reshape(shape)
                          - 1j * lam_ * (sin2 @ self._p2).reshape(shape))
        return E

    def transfer(self, lam, imag_cap: float | None = IMAG_CAP) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        if imag_cap is not None and np.any(np.abs(lam.imag) > imag_cap):
            raise OverflowRisk(
                f"|Im lambda| = {np.abs(lam.imag).max():.3g} exceeds imag_cap={imag_cap}"
            )
        chunk = max(1, int(4e6 // (self.steps * (2 * self.r) ** 2)))
        out = [self._product(lam[i:i + chunk]) for i in range(0, lam.size, chunk)]
        P = np.concatenate(out) if out else np.empty((0, 2 * self.r, 2 * self.r), complex)
        if not np.all(np.isfinite(P)):
            raise OverflowRisk("non-finite transfer matrix")
        return P

    def _product(self, lam: np.ndarray) -> np.ndarray:
        E = self._step_matrices(lam)
        # ordered product E[-1] ... E[0], reduced pairwise
        while E.shape[0] > 1:
            if E.shape[0] % 2:
                tail = E[-1:]
                E = np.concatenate([E[1:-1:2] @ E[0:-1:2], tail])
            else:
                E = E[1::2] @ E[0::2]
        return E[0]

    def characteristic(self, lam, imag_cap: float | None = IMAG_CAP):
        """Return (s, c) stacks with s = a u theta a^*, c = a u a^*."""
        u = self.transfer(lam, imag_cap)
        c = self.coeffs
        s_mat = c.a @ u @ c.theta @ c.a.conj().T
        c_mat = c.a @ u @ c.a.conj().T
        return s_mat, c_mat


@lru_cache(maxsize=32)
def propagator(coeffs: SystemCoefficients, steps: int) -> Propagator:
    return Propagator(coeffs, int(steps))


def propagate(coeffs: SystemCoefficients, lam: complex, imag_cap: float | None = IMAG_CAP,
              steps: int | None = None) -> np.ndarray:
    """u_q(1, lam) as a 2r x 2r matrix."""
    n = steps or step_count(len(coeffs.nodes) - 1, abs(lam))
    return propagator(coeffs, n).transfer([lam], imag_cap)[0]


def char_matrices(coeffs: SystemCoefficients, lam: complex, imag_cap: float | None = IMAG_CAP,
                  steps: int | None = None) -> CharacteristicSample:
    n = steps or step_count(len(coeffs.nodes) - 1, abs(lam))
    s, c = propagator(coeffs, n).characteristic([lam], imag_cap)
    return CharacteristicSample(complex(lam), s[0], c[0])


def weyl_from(s: np.ndarray, c: np.ndarray, cond_cap: float = COND_CAP) -> np.ndarray:
    # s and c never vanish together, so ||[s c]|| is the natural scale for s
    scale = np.linalg.norm(np.concatenate([s, c], axis=-1), ord=2, axis=(-2, -1))
    smin = np.linalg.svd(s, compute_uv=False)[..., -1]
    if np.any(smin * cond_cap < scale):
        raise AtEigenvalueError("s_q(lambda) is numerically singular (lambda at an eigenvalue)")
    return -np.linalg.solve(s, c)


def weyl_m(coeffs: SystemCoefficients, lam: complex, imag_cap: float | None = IMAG_CAP,
           cond_cap: float = COND_CAP, steps: int | None = None) -> CharacteristicSample:
    sample = char_matrices(coeffs, lam, imag_cap, steps)
    m = weyl_from(sample.s, sample.c, cond_cap)
    return CharacteristicSample(sample.lam, sample.s, sample.c, m)


# ---------------------------------------------------------------------------
# eigenvalues


def _winding(values: np.ndarray) -> tuple[float, float]:
    """Winding number of a closed sampled path and the largest phase jump."""
    ph = np.angle(np.append(values, values[0]))
    d = np.diff(ph)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return d.sum() / (2 * np.pi), np.abs(d).max()


def _rectangle(lo: float, hi: float, height: float, per_side: int) -> np.ndarray:
    t = (np.arange(per_side) + 0.5) / per_side
    bottom = lo + (hi - lo) * t - 1j * height
    right = hi + 1j * height * (2 * t - 1)
    top = hi - (hi - lo) * t + 1j * height
    left = lo - 1j * height * (2 * t - 1)
    return np.concatenate([bottom, right, top, left])


def count_zeros(prop: Propagator, lo: float, hi: float, height: float,
                per_side: int = 32, max_per_side: int = 8192) -> int:
    """Zeros of det s_q inside the rectangle [lo, hi] x [-height, height]."""
    while True:
        z = _rectangle(lo, hi, height, per_side)
        s, _ = prop.characteristic(z, imag_cap=None)
        w, jump = _winding(np.linalg.det(s))
        if jump < np.pi / 4 and abs(w - round(w)) < 1e-6:
            return int(round(w))
        if per_side >= max_per_side:
            raise ForwardError(f"winding number on [{lo:.6g}, {hi:.6g}] did not resolve")
        per_side *= 2


def _contour_moments(prop: Propagator, z: np.ndarray, dz: np.ndarray, center: complex):
    s, _ = prop.characteristic(z, imag_cap=None)
    inv = np.linalg.inv(s)
    w = (dz / (2j * np.pi))[:, None, None]
    a0 = (w * inv).sum(axis=0)
    a1 = (w * (z - center)[:, None, None] * inv).sum(axis=0)
    return a0, a1


def _ellipse(center: float, ax: float, ay: float, n: int):
    t = 2 * np.pi * np.arange(n) / n
    z = center + ax * np.cos(t) + 1j * ay * np.sin(t)
    dz = (-ax * np.sin(t) + 1j * ay * np.cos(t)) * (2 * np.pi / n)
    return z, dz


def _beyn(a0: np.ndarray, a1: np.ndarray, k: int) -> np.ndarray | None:
    """Eigenvalues (relative to the contour centre) from the first two moments."""
    V, sig, Wh = np.linalg.svd(a0)
    if k == 0:
        return np.empty(0)
    if k > len(sig) or sig[k - 1] <= 1e-10 * sig[0]:
        return None
    Vk = V[:, :k]
    Wk = Wh[:k].conj().T
    B = Vk.conj().T @ a1 @ Wk / sig[:k]
    return np.linalg.eigvals(B)


def _beyn_region(prop: Propagator, lo: float, hi: float, height: float, k: int,
                 nodes: int = 64, tol: float = 1e-7, max_nodes: int = 8192):
    center = 0.5 * (lo + hi)
    prev = None
    while nodes <= max_nodes:
        z, dz = _ellipse(center, 0.5 * (hi - lo), height, nodes)
        a0, a1 = _contour_moments(prop, z, dz, center)
        ev = _beyn(a0, a1, k)
        if ev is None:
            return None
        ev = np.sort_complex(ev)
        if prev is not None and np.max(np.abs(ev - prev)) < tol:
            return center + ev
        prev = ev
        nodes *= 2
    raise ForwardError(f"contour eigenvalue estimates on [{lo:.6g}, {hi:.6g}] did not converge")


def _polish(prop: Propagator, lam0: float, radius: float, nodes: int = 64,
            tol: float = 1e-13, max_iter: int = 8):
    """Refine an eigenvalue by contour moments on a small circle around it."""
    lam = lam0
    mult = 0
    for _ in range(max_iter):
        z, dz = _ellipse(lam, radius, radius, nodes)
        a0, a1 = _contour_moments(prop, z, dz, lam)
        mult = matrix_rank(a0)
        if mult == 0:
            raise ForwardError(f"no eigenvalue near {lam0:.12g}")
        ev = _beyn(a0, a1, mult)
        new = lam + float(np.mean(ev).real)
        if abs(new - lam) < tol * max(1.0, abs(lam)):
            return new, mult, ev
        lam = new
    return lam, mult, ev


def _partition_point(prop: Propagator, b: float, outward: int = 0) -> float:
    """Move a window boundary slightly if an eigenvalue sits next to it."""
    offsets = np.array([0.0, 0.02, -0.02, 0.05, -0.05, 0.1, -0.1, 0.2, -0.2])
    if outward:
        offsets = np.abs(offsets) * outward
    cand = b + offsets
    s, _ = prop.characteristic(cand, imag_cap=None)
    sv = np.linalg.svd(s, compute_uv=False)
    score = sv[:, -1] / sv[:, 0]
    ok = np.nonzero(score > 1e-2)[0]
    return float(cand[ok[0]] if ok.size else cand[np.argmax(score)])


def _locate(prop: Propagator, N: int, height: float, jitter: float):
    r = prop.r
    bounds = np.pi * (np.arange(-N, N + 2) - 0.5) + jitter
    bounds = [
        _partition_point(prop, b, outward=(-1 if i == 0 else 1 if i == len(bounds) - 1 else 0))
        for i, b in enumerate(bounds)
    ]
    estimates = []
    stack = [(bounds[i], bounds[i + 1], 0) for i in range(len(bounds) - 1)]
    while stack:
        lo, hi, depth = stack.pop()
        k = count_zeros(prop, lo, hi, height)
        if k == 0:
            continue
        ev = _beyn_region(prop, lo, hi, height, k) if k <= r else None
        if ev is None:
            if depth > 12:
                raise ForwardError(f"cannot separate {k} zeros on [{lo:.6g}, {hi:.6g}]")
            mid = _partition_point(prop, 0.5 * (lo + hi))
            stack += [(lo, mid, depth + 1), (mid, hi, depth + 1)]
            continue
        if np.max(np.abs(ev.imag)) > 1e-4:
            raise ForwardError(f"non-real eigenvalue estimates {ev} on [{lo:.6g}, {hi:.6g}]")
        estimates.append((lo, hi, k, np.sort(ev.real)))
    return estimates


def locate_eigenvalues(coeffs: SystemCoefficients, N: int, height: float = CONTOUR_HEIGHT,
                       cluster_tol: float = CLUSTER_TOL, steps: int | None = None,
                       return_imag: bool = False):
    """Distinct eigenvalues in the windows |n| <= N with their multiplicities.

    Returns a list of (lambda, multiplicity), strictly increasing; with
    ``return_imag`` also the largest imaginary part seen before projecting the
    refined roots onto the real axis.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    n_steps = steps or step_count(len(coeffs.nodes) - 1, np.pi * (N + 1) + height)
    prop = propagator(coeffs, n_steps)
    last_err = None
    for attempt, (h, jitter) in enumerate([(height, 0.0), (0.9 * height, 0.013)]):
        try:
            roots, imag = _refine(prop, _locate(prop, N, h, jitter), N, cluster_tol)
            return (roots, imag) if return_imag else roots
        except ForwardError as exc:
            log.info("eigenvalue location attempt %d failed: %s", attempt, exc)
            last_err = exc
    raise last_err


def _refine(prop: Propagator, estimates, N: int, cluster_tol: float):
    raw = []
    for lo, hi, k, ev in estimates:
        groups = []
        for x in ev:
            if groups and abs(x - groups[-1][-1]) < max(1e-6, cluster_tol):
                groups[-1].append(x)
            else:
                groups.append([x])
        for g in groups:
            raw.append((float(np.mean(g)), len(g), k, lo, hi))
    raw.sort()
    centers = np.array([x[0] for x in raw])
    out = []
    worst_imag = 0.0
    for i, (x, cnt, k, lo, hi) in enumerate(raw):
        gaps = np.abs(np.delete(centers, i) - x)
        gap = gaps.min() if gaps.size else np.inf
        radius = min(0.4 * gap, 0.4, 0.9 * (x - lo), 0.9 * (hi - x))
        lam, mult, ev = _polish(prop, x, radius)
        imag = float(np.max(np.abs(ev.imag)))
        if imag > TOL_REAL * max(1.0, abs(lam)):
            raise ForwardError(f"eigenvalue near {lam} is not real: {ev}")
        worst_imag = max(worst_imag, imag)
        out.append((lam, mult))
    # cluster
    merged = []
    for lam, mult in sorted(out):
        if merged and abs(lam - merged[-1][0]) < cluster_tol:
            l0, m0 = merged[-1]
            merged[-1] = ((l0 * m0 + lam * mult) / (m0 + mult), m0 + mult)
        else:
            merged.append((lam, mult))
    # consistency with winding counts, region by region
    for lo, hi, k, _ in estimates:
        tot = sum(mu for lam, mu in merged if lo < lam <= hi)
        if tot != k:
            raise ForwardError(
                f"winding count {k} but refined multiplicity {tot} on [{lo:.6g}, {hi:.6g}]"
            )
    return [(lam, mu) for lam, mu in merged if abs(window_index(lam)) <= N], worst_imag


def norming_matrix(coeffs: SystemCoefficients, lam_j: float, radius: float = 0.4,
                   nodes: int = 64, tol: float = 1e-9, max_nodes: int = 4096,
                   steps: int | None = None) -> np.ndarray:
    """alpha_j = -(1/2 pi i) * contour integral of m_q around lam_j."""
    n_steps = steps or step_count(len(coeffs.nodes) - 1, abs(lam_j) + radius)
    prop = propagator(coeffs, n_steps)
    prev = None
    while nodes <= max_nodes:
        z, dz = _ellipse(lam_j, radius, radius, nodes)
        s, c = prop.characteristic(z, imag_cap=None)
        m = -np.linalg.solve(s, c)
        alpha = -((dz / (2j * np.pi))[:, None, None] * m).sum(axis=0)
        if prev is not None and np.abs(alpha - prev).max() < tol * max(1.0, np.abs(alpha).max()):
            return hermitize_psd(alpha)
        prev = alpha
        nodes *= 2
    raise ForwardError(
        f"residue quadrature around {lam_j:.12g} (radius {radius:.3g}) did not converge; "
        "the contour probably passes near another eigenvalue"
    )


def spectral_data(q: PotentialGrid, N: int, height: float = CONTOUR_HEIGHT,
                  cluster_tol: float = CLUSTER_TOL) -> SpectralData:
    """Eigenvalues and norming matrices of T_q in the windows |n| <= N."""
    coeffs = augment(q)
    steps = step_count(q.m, np.pi * (N + 1) + height)
    located = locate_eigenvalues(coeffs, N, height, cluster_tol, steps=steps)
    lams = np.array([l for l, _ in located])
    pairs = []
    for i, (lam, mult) in enumerate(located):
        gaps = np.abs(np.delete(lams, i) - lam)
        radius = min(0.4 * gaps.min() if gaps.size else 0.4, 0.4)
        alpha = norming_matrix(coeffs, lam, radius, steps=steps)
        rank = matrix_rank(alpha)
        if rank != mult:
            raise ForwardError(
                f"rank of norming matrix ({rank}) differs from multiplicity ({mult}) at {lam:.12g}"
            )
        pairs.append((lam, alpha))
    return SpectralData(q.r, tuple(SpectralDatum.from_alpha(l, a) for l, a in pairs))


def weyl_asymptotic_defect(coeffs: SystemCoefficients, N: int, nodes: int = 256) -> float:
    """max over |lam| = pi N + pi/6 of ||m_q(lam) + cot(lam) I||."""
    R = np.pi * N + np.pi / 6
    z, _ = _ellipse(0.0, R, R, nodes)
    prop = propagator(coeffs, step_count(len(coeffs.nodes) - 1, R))
    s, c = prop.characteristic(z, imag_cap=None)
    m = -np.linalg.solve(s, c)
    eye = np.eye(coeffs.r)
    d = m + (np.cos(z) / np.sin(z))[:, None, None] * eye
    return float(np.linalg.norm(d, ord=2, axis=(1, 2)).max())
