import json
from pathlib import Path

import numpy as np
import pytest

import corpus
from dirac_spec import io
from dirac_spec.accelerant import AccelerantGrid, build_H
from dirac_spec.model import PotentialGrid, SpectralData, make_test_potential
from dirac_spec.validator import ConditionReport


def test_float_format():
    assert io.dumps(0.1) == "0.10000000000000001"
    assert io.dumps(1.0) == "1.0"
    assert io.dumps(3) == "3"
    assert io.dumps(float("nan")) == "null"
    assert io.dumps([True, None]) == "[true, null]"
    assert json.loads(io.dumps({"a": [1.5, -2e-300]})) == {"a": [1.5, -2e-300]}


def test_potential_roundtrip(tmp_path):
    q = make_test_potential("matrix_demo", r=3, m=12, p=2.0)
    path = tmp_path / "q.json"
    io.write_json(io.potential_to_dict(q), path)
    back = io.load_potential(path)
    assert (back.r, back.m, back.p) == (3, 12, 2.0)
    assert np.array_equal(back.values, q.values)
    raw = json.loads(path.read_text())
    assert len(raw["values"]) == 13 and len(raw["values"][0]) == 9
    # row-major: entry (0, 1) is the second pair
    assert raw["values"][4][1] == [q.values[4, 0, 1].real, q.values[4, 0, 1].imag]


def test_spectral_roundtrip(tmp_path):
    data = corpus.data("smooth_random", 16)
    path = tmp_path / "d.json"
    io.write_json(io.spectral_to_dict(data), path)
    back = io.load_spectral(path)
    assert np.array_equal(back.lambdas, data.lambdas)
    assert np.array_equal(back.alphas, data.alphas)
    assert np.array_equal(back.ranks, data.ranks)


def test_accelerant_roundtrip(tmp_path):
    H = build_H(corpus.data("constant", 16), 16, 40)
    path = tmp_path / "H.json"
    io.write_json(io.accelerant_to_dict(H), path)
    back = io.load_accelerant(path)
    assert isinstance(back, AccelerantGrid) and np.array_equal(back.values, H.values)


def test_byte_identical(tmp_path):
    data = corpus.data("constant", 16)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    io.write_json(io.spectral_to_dict(data), a)
    io.write_json(io.spectral_to_dict(io.load_spectral(a)), b)
    assert a.read_bytes() == b.read_bytes()


def test_malformed_matrix():
    with pytest.raises(ValueError):
        io.spectral_from_dict({"r": 2, "data": [{"lambda": 0.0, "alpha": [[1, 0]]}]})


def test_grid_csv(tmp_path):
    q = PotentialGrid(2, 2, np.arange(12).reshape(3, 2, 2) * (1 + 1j))
    path = tmp_path / "q.csv"
    io.write_grid_csv(path, q.x, q.values)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,re_00,im_00,re_01,im_01,re_10,im_10,re_11,im_11"
    assert lines[2].split(",")[:3] == ["0.5", "4.0", "4.0"]
    assert len(lines) == 4


def test_tails_csv(tmp_path):
    path = tmp_path / "t.csv"
    io.write_tails_csv(path, 1, [0.1, 0.0, 0.2], [1e-3, 0.0, 2e-3])
    rows = path.read_text().splitlines()
    assert rows[0] == "n,b1_lambda_tail,b1_alpha_tail"
    assert rows[1].startswith("-1,0.10000000000000001")


def test_report_dict_serializes():
    rep = ConditionReport(2, [0.0], [0.0], True, True, True, {0: 1}, 1.0, True, 0.0, 0.0)
    text = io.dumps(rep.to_dict())
    assert json.loads(text)["b4_tail_previous"] is None


def test_free_golden_matches_constructor():
    path = Path(__file__).parent / "golden" / "free_r2_N2.json"
    golden = io.load_spectral(path)
    free = SpectralData.free(2, 2)
    assert np.array_equal(golden.lambdas, free.lambdas)
    assert np.array_equal(golden.alphas, free.alphas)
