"""Independent reference computations used by the tests.

Nothing here goes through the package's propagator or contour code.
"""

import numpy as np
import scipy.linalg as sla


def cheb(M):
    """Chebyshev points on [-1, 1] (descending) and the differentiation matrix."""
    j = np.arange(M + 1)
    x = np.cos(np.pi * j / M)
    c = np.where((j == 0) | (j == M), 2.0, 1.0) * (-1.0) ** j
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1 / c) / (X + np.eye(M + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def clenshaw_curtis(M):
    """Weights on the points of ``cheb(M)`` for integration over [-1, 1]."""
    theta = np.pi * np.arange(M + 1) / M
    w = np.zeros(M + 1)
    v = np.ones(M - 1)
    inner = theta[1:-1]
    if M % 2 == 0:
        w[0] = w[M] = 1.0 / (M * M - 1)
        for k in range(1, M // 2):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(M * inner) / (M * M - 1)
    else:
        w[0] = w[M] = 1.0 / (M * M)
        for k in range(1, (M - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2 * v / M
    return w


def interp_matrix(nodes, targets):
    """Barycentric interpolation from Chebyshev-Lobatto ``nodes`` to ``targets``."""
    M = len(nodes) - 1
    bw = (-1.0) ** np.arange(M + 1)
    bw[0] *= 0.5
    bw[-1] *= 0.5
    diff = targets[:, None] - nodes[None, :]
    P = bw / diff
    return P / P.sum(axis=1, keepdims=True)


def dense_dirac(qfun, r, M=120):
    """Eigenpairs of theta y' + Q y = lam y, y1 = y2 at both ends.

    Polynomial collocation: y is represented by its values at M + 1
    Chebyshev-Lobatto points, the equation is imposed at the M Gauss-Legendre
    points and the 2r boundary conditions close the system.  ``qfun(x)``
    returns (len(x), r, r).  Returns (x, weights, lams, vectors) with vectors
    of shape (count, M + 1, 2r), finite eigenvalues only.
    """
    s, Ds = cheb(M)
    x = (1 - s) / 2  # ascending from 0 to 1
    D = -2 * Ds
    w = clenshaw_curtis(M) / 2
    g, _ = np.polynomial.legendre.leggauss(M)
    xg = (1 + g) / 2
    P = interp_matrix(x, xg)
    PD = P @ D
    d = 2 * r
    theta = -1j * np.diag(np.r_[np.ones(r), -np.ones(r)])
    q = np.asarray(qfun(xg), dtype=complex).reshape(M, r, r)
    n = (M + 1) * d
    A = np.zeros((n, n), dtype=complex)
    B = np.zeros((n, n), dtype=complex)
    A[: M * d] = np.kron(PD, theta)
    B[: M * d] = np.kron(P, np.eye(d))
    for i in range(M):
        bq = np.zeros((d, d), dtype=complex)
        bq[:r, r:] = q[i]
        bq[r:, :r] = q[i].conj().T
        A[i * d:(i + 1) * d] += np.kron(P[i], bq)
    for k, end in enumerate((0, M)):
        for c in range(r):
            row = M * d + k * r + c
            A[row, end * d + c] = 1
            A[row, end * d + r + c] = -1
    lams, vecs = sla.eig(A, B)
    keep = np.isfinite(lams)
    lams, vecs = lams[keep], vecs[:, keep]
    order = np.argsort(lams.real)
    lams, vecs = lams[order], vecs[:, order]
    return x, w, lams, vecs.T.reshape(-1, M + 1, d)


def dense_eigenvalues(qfun, r, lo, hi, M=120):
    _, _, lams, _ = dense_dirac(qfun, r, M)
    lams = lams[(lams.real > lo) & (lams.real <= hi) & (np.abs(lams.imag) < 1e-6)]
    return np.sort(lams.real), lams


def dense_norming_scalar(qfun, lam_target, M=120):
    """Norming constant 1 / int |phi|^2 with phi(0) = theta a^* (r = 1)."""
    x, w, lams, vecs = dense_dirac(qfun, 1, M)
    i = np.argmin(np.abs(lams - lam_target))
    y = vecs[i]
    y = y * (-1j / np.sqrt(2)) / y[0, 0]
    return lams[i].real, 1.0 / float(np.sum(w * np.sum(np.abs(y) ** 2, axis=1)))


def constant_transfer(c, lam, r=1):
    """u(1, lam) for q = c I by a direct matrix exponential."""
    J = np.diag(np.r_[np.ones(r), -np.ones(r)])
    bq = np.block([[np.zeros((r, r)), c * np.eye(r)], [np.conj(c) * np.eye(r), np.zeros((r, r))]])
    return sla.expm(1j * (lam * J - J @ bq))


def constant_krein_q(c, x):
    """Krein mapping of H = c: R = -c / (1 + c x), q = i R(x, 0)."""
    return -1j * c / (1 + c * x)
