import json

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_spec import io
from dirac_spec.accelerant import build_H, symmetry_defect
from dirac_spec.model import PotentialGrid, SpectralData, augment, lp_norm
from dirac_spec.pipeline import compare_spectral_data
from dirac_spec.riesz import kadec_check
from dirac_spec.validator import check_B3_gram, exponential_frame

seeds = st.integers(0, 2**32 - 1)


def random_grid(seed, r, m, p):
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=(m + 1, r, r)) + 1j * rng.normal(size=(m + 1, r, r))
    return PotentialGrid(r, m, vals, p)


def random_data(seed, r, N, max_shift=0.3):
    """Free-like data: every window gets r perturbed simple eigenvalues."""
    rng = np.random.default_rng(seed)
    pairs = []
    for n in range(-N, N + 1):
        U, _ = np.linalg.qr(rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
        shifts = np.sort(rng.uniform(-max_shift, max_shift, r))
        weights = rng.uniform(0.5, 1.5, r)
        for k in range(r):
            v = U[:, k] * np.sqrt(weights[k])
            pairs.append((np.pi * n + shifts[k], np.outer(v, v.conj())))
    return SpectralData.from_pairs(r, pairs)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(2, 30), st.floats(1.0, 4.0),
       st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_lp_norm_homogeneous(seed, r, m, p, c):
    q = random_grid(seed, r, m, p)
    scaled = q.scaled(c)
    assert abs(lp_norm(scaled) - abs(c) * lp_norm(q)) <= 1e-12 * max(1.0, abs(c) * lp_norm(q))


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 5))
def test_augment_identities(seed, r):
    co = augment(random_grid(seed, r, 6, 1.0))
    th, a = co.theta, co.a
    assert np.allclose(th.conj().T, -th) and np.allclose(th @ th, -np.eye(2 * r))
    assert np.allclose(a @ a.conj().T, np.eye(r))
    bq = co.bq_at(co.nodes)
    assert np.array_equal(bq, np.conj(np.swapaxes(bq, -1, -2)))


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 5))
def test_gram_unimodular_invariance(seed, r, N):
    data = random_data(seed, r, N)
    freqs, vecs = exponential_frame(data, N)
    base = check_B3_gram(data, N, vectors=(freqs, vecs))
    rng = np.random.default_rng(seed + 1)
    phases = np.exp(2j * np.pi * rng.random(len(freqs)))[:, None]
    assert abs(check_B3_gram(data, N, vectors=(freqs, phases * vecs)) - base) < 1e-12


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 5))
def test_delta_unitary_invariance(seed, r, N):
    data = random_data(seed, r, N)
    rng = np.random.default_rng(seed + 2)
    U, _ = np.linalg.qr(rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
    rotated = SpectralData.from_pairs(r, [(d.lam, U @ d.alpha @ U.conj().T) for d in data.data])
    a, b = kadec_check(data), kadec_check(rotated)
    assert abs(a.delta - b.delta) < 1e-12
    assert abs(a.perturbation - np.expm1(a.delta)) <= 1e-15 * max(1.0, abs(a.perturbation))


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 6))
def test_build_H_symmetry(seed, r, N):
    H = build_H(random_data(seed, r, N), N, 40)
    assert symmetry_defect(H) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seeds, seeds, st.integers(1, 2), st.integers(1, 4))
def test_compare_symmetric(s1, s2, r, N):
    a, b = random_data(s1, r, N), random_data(s2, r, N)
    assert compare_spectral_data(a, b) == compare_spectral_data(b, a)
    assert compare_spectral_data(a, a) == (0.0, 0.0)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(2, 12), st.floats(1.0, 3.0))
def test_potential_json_roundtrip(seed, r, m, p):
    q = random_grid(seed, r, m, p)
    back = io.potential_from_dict(json.loads(io.dumps(io.potential_to_dict(q))))
    assert np.array_equal(back.values, q.values) and back.p == q.p


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 4))
def test_spectral_json_roundtrip(seed, r, N):
    data = random_data(seed, r, N)
    text = io.dumps(io.spectral_to_dict(data))
    back = io.spectral_from_dict(json.loads(text))
    assert np.array_equal(back.alphas, data.alphas)
    assert io.dumps(io.spectral_to_dict(back)) == text
