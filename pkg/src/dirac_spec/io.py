"""JSON and CSV formats.

Complex numbers are ``[re, im]`` pairs, matrices are flattened row-major and
floats are written with 17 significant digits, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .accelerant import AccelerantGrid
from .model import PotentialGrid, SpectralData, SpectralDatum


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 1, level: int = 0) -> str:
    """Deterministic JSON with fixed float formatting."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _fmt(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (bool, int, float, np.integer, np.floating)) or v is None for v in obj):
            return "[" + ", ".join(_fmt(v) if v is not None else "null" for v in obj) + "]"
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _pairs(mat: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(mat).ravel()]


def _matrix(pairs, r: int) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape != (r * r, 2):
        raise ValueError(f"matrix entry list must have {r * r} [re, im] pairs")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(r, r)


def potential_to_dict(q: PotentialGrid) -> dict:
    return {"r": q.r, "m": q.m, "p": q.p, "values": [_pairs(v) for v in q.values]}


def potential_from_dict(d: dict) -> PotentialGrid:
    r, m = int(d["r"]), int(d["m"])
    values = np.array([_matrix(v, r) for v in d["values"]]).reshape(-1, r, r)
    return PotentialGrid(r, m, values, float(d.get("p", 1.0)))


def spectral_to_dict(data: SpectralData) -> dict:
    return {"r": data.r, "data": [{"lambda": d.lam, "alpha": _pairs(d.alpha)} for d in data.data]}


def spectral_from_dict(d: dict) -> SpectralData:
    r = int(d["r"])
    items = tuple(
        SpectralDatum.from_alpha(float(e["lambda"]), _matrix(e["alpha"], r)) for e in d["data"]
    )
    return SpectralData(r, items)


def accelerant_to_dict(H: AccelerantGrid) -> dict:
    return {"r": H.r, "k": H.k, "p": H.p, "values": [_pairs(v) for v in H.values]}


def accelerant_from_dict(d: dict) -> AccelerantGrid:
    r, k = int(d["r"]), int(d["k"])
    values = np.array([_matrix(v, r) for v in d["values"]]).reshape(-1, r, r)
    return AccelerantGrid(r, k, values, float(d.get("p", 1.0)))


def write_json(obj: dict, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_potential(path) -> PotentialGrid:
    return potential_from_dict(read_json(path))


def load_spectral(path) -> SpectralData:
    return spectral_from_dict(read_json(path))


def load_accelerant(path) -> AccelerantGrid:
    return accelerant_from_dict(read_json(path))


def write_grid_csv(path, x: np.ndarray, values: np.ndarray) -> None:
    """Columns x, re_ij, im_ij for each entry (i, j) in row-major order."""
    r = values.shape[-1]
    header = ["x"]
    for i in range(r):
        for j in range(r):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for xi, v in zip(x, values):
            row = [_fmt(xi)]
            for z in v.ravel():
                row += [_fmt(z.real), _fmt(z.imag)]
            w.writerow(row)


def write_tails_csv(path, N: int, lam_tail, alpha_tail) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "b1_lambda_tail", "b1_alpha_tail"])
        for n, a, b in zip(range(-N, N + 1), lam_tail, alpha_tail):
            w.writerow([n, _fmt(a), _fmt(b)])
