import logging

import numpy as np
import pytest

import corpus
from dirac_spec.forward import spectral_data
from dirac_spec.model import SpectralData, lp_norm, make_test_potential
from dirac_spec.pipeline import (
    Config,
    ReconstructionError,
    compare_spectral_data,
    potential_distance,
    reconstruct,
    roundtrip,
)

SMALL = Config(N=8, n_terms=16, m=100, k=100)


def perturbed_free(N, eps=0.1):
    return SpectralData.from_pairs(1, [(eps if d.lam == 0 else d.lam, d.alpha)
                                       for d in SpectralData.free(1, N).data])


def test_config_ranges():
    for bad in (dict(N=0), dict(n_terms=0), dict(m=7), dict(k=4), dict(p=0.5)):
        with pytest.raises(ValueError):
            Config(**bad)


def test_free_reconstructs_zero():
    q, H = reconstruct(SpectralData.free(2, 16), SMALL, return_H=True)
    assert np.abs(q.values).max() < 1e-8
    assert np.abs(H.values).max() < 1e-12


def test_single_perturbation_forward_consistency():
    q = reconstruct(perturbed_free(32), Config(n_terms=32, m=200, k=200))
    assert 0 < lp_norm(q) < 0.5
    data = spectral_data(q, 2)
    lam0 = [d.lam for d in data.in_window(0)]
    assert len(lam0) == 1 and abs(lam0[0] - 0.1) < 1e-3


def test_constant_reconstruction():
    q = reconstruct(corpus.data("constant", 32), Config(n_terms=32))
    ref = corpus.potential("constant")
    assert potential_distance(ref, q) / lp_norm(ref) < 0.05


def test_rejects_non_accelerant(caplog):
    free = SpectralData.free(1, 16)
    missing_zero = SpectralData(1, tuple(d for d in free.data if d.lam != 0))
    with caplog.at_level(logging.WARNING):
        with pytest.raises(ReconstructionError):
            reconstruct(missing_zero, SMALL)
    assert "rank-count" in caplog.text


def test_roundtrip_zero():
    rep = roundtrip(make_test_potential("zero", r=1, m=100), SMALL)
    assert rep.potential_error < 1e-8 and rep.lambda_error < 1e-8 and rep.alpha_error < 1e-8
    d = rep.to_dict()
    assert (d["N"], d["n_terms"], d["m"], d["k"]) == (8, 16, 100, 100)


def test_compare_examples():
    a = corpus.data("constant", 16)
    assert compare_spectral_data(a, a) == (0.0, 0.0)
    free = SpectralData.free(1, 8)
    lam, alpha = compare_spectral_data(free, perturbed_free(8))
    assert abs(lam - 0.1) < 1e-15 and alpha < 1e-15
    b = corpus.data("constant", 8)
    assert compare_spectral_data(a, b, 8) == compare_spectral_data(b, a, 8)
    with pytest.raises(ValueError):
        compare_spectral_data(SpectralData.free(1, 2), SpectralData.free(2, 2))


def test_compare_unmatched_counts():
    free = SpectralData.free(1, 3)
    extra = SpectralData.from_pairs(1, list((d.lam, d.alpha) for d in free.data) + [(0.4, np.eye(1))])
    lam, _ = compare_spectral_data(free, extra)
    assert lam == pytest.approx(0.4)


def test_idempotence_trend():
    q = corpus.potential("constant")
    cfg = Config(N=8, n_terms=16, m=200, k=200)
    q1 = reconstruct(corpus.data("constant", 16), cfg)
    q2 = reconstruct(spectral_data(q1, 16), cfg)
    assert potential_distance(q1, q2) <= 2 * potential_distance(q, q1)


def test_uniqueness_probe():
    other = spectral_data(make_test_potential("smooth_random", r=1, m=200, seed=7, amplitude=0.3), 8)
    lam, alpha = compare_spectral_data(corpus.data("constant", 16), other, 8)
    floor = 1e-4  # round-trip lambda error of the constant potential is a few 1e-5
    assert max(lam, alpha) > 10 * floor
