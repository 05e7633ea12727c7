import math

import numpy as np
import pytest

import corpus
from dirac_spec.model import SpectralData
from dirac_spec.riesz import LN2, kadec_check
from dirac_spec.validator import check_B3_gram


def test_free():
    rep = kadec_check(SpectralData.free(2, 5))
    assert rep.delta < 1e-14 and rep.perturbation < 1e-14
    assert rep.b_bound == pytest.approx(2.0) and rep.r1_ok
    assert rep.verdict.startswith("riesz")
    assert check_B3_gram(SpectralData.free(2, 5), 5) == pytest.approx(1.0, abs=1e-12)


def test_shifted():
    data = SpectralData.from_pairs(1, [(d.lam + 0.5, d.alpha) for d in SpectralData.free(1, 6).data])
    rep = kadec_check(data, N=5)
    assert abs(rep.delta - 0.5) < 1e-12
    assert abs(rep.perturbation - math.expm1(0.5)) < 1e-12
    assert rep.r1_ok and rep.perturbation < 1


def test_large_shift_is_inconclusive():
    data = SpectralData.from_pairs(1, [(d.lam + 0.9, d.alpha) for d in SpectralData.free(1, 6).data])
    rep = kadec_check(data, N=4)
    assert not rep.r1_ok and rep.verdict == "inconclusive"


def test_rank_deficient_window_reported():
    free = SpectralData.free(2, 3)
    pairs = [(d.lam, np.diag([1.0, 0.0]) if i == 2 else d.alpha) for i, d in enumerate(free.data)]
    rep = kadec_check(SpectralData.from_pairs(2, pairs))
    assert rep.r0_violations == [-1]
    assert not rep.r1_ok


def test_constant_tail_windows():
    rep = kadec_check(corpus.data("constant", 16), n_min=3)
    assert rep.delta < LN2 and rep.r1_ok


def test_unitary_conjugation_invariance():
    data = corpus.data("smooth_random", 16)
    rng = np.random.default_rng(5)
    U, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    rotated = SpectralData.from_pairs(2, [(d.lam, U @ d.alpha @ U.conj().T) for d in data.data])
    a, b = kadec_check(data, N=12), kadec_check(rotated, N=12)
    assert abs(a.delta - b.delta) < 1e-12


def test_quadratic_closeness_partial_sums():
    rep = kadec_check(corpus.data("constant", 16), N=16)
    s = np.array(rep.quadratic_closeness)
    assert np.all(np.diff(s) >= 0)
    assert not rep.closeness_diverging
    shifted = SpectralData.from_pairs(1, [(d.lam + 0.5, d.alpha) for d in SpectralData.free(1, 8).data])
    assert kadec_check(shifted, N=7).closeness_diverging is True
