"""Command-line interface.

Exit status: 0 on success, 1 on a validation failure (bad usage, unreadable
or malformed input, data failing a check), 2 on a numeric failure, reported
together with the stage that failed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .accelerant import AccelerantError, build_H, is_accelerant
from .forward import ForwardError, spectral_data
from .krein import KERNELS, KreinError
from .model import PotentialGrid, make_test_potential
from .pipeline import Config, ReconstructionError, reconstruct, roundtrip
from .riesz import kadec_check
from .validator import TruncationError, check_B1, validate

SUBCOMMANDS = ("forward", "inverse", "roundtrip", "validate", "accelerant", "riesz-check")
POTENTIAL_KINDS = ("zero", "constant", "smooth_random", "matrix_demo")
THREADS_ENV = "DIRAC_SPEC_THREADS"


class UsageError(ValueError):
    pass


class NumericFailure(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class ValidationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class Command:
    subcommand: str
    input: Path | None = None
    output: Path | None = None
    N: int = 16
    terms: int = 32
    grid: int = 200
    acc_grid: int = 200
    p: float | None = None
    kernel: str = "standard"
    emit_h: bool = False
    threads: int = 1
    seed: int = 7
    potential: str | None = None
    r: int = 1
    c: float = 0.3
    n_min: int = 0
    plot: bool = False

    def config(self, p: float = 1.0) -> Config:
        return Config(N=self.N, n_terms=self.terms, m=self.grid, k=self.acc_grid,
                      p=self.p if self.p is not None else p, kernel=self.kernel,
                      workers=self.threads)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bounded_int(lo: int):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v

    return conv


def _exponent(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (v >= 1 and np.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a finite number >= 1, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--in", dest="input", type=Path, help="input JSON file")
    common.add_argument("--out", dest="output", type=Path,
                        help="output JSON file; CSV and figures go next to it (default: JSON to stdout)")
    common.add_argument("--N", type=_bounded_int(1), default=16, help="windows |n| <= N (default 16)")
    common.add_argument("--terms", type=_bounded_int(1), default=32,
                        help="windows in the accelerant sum (default 32)")
    common.add_argument("--grid", type=_bounded_int(8), default=200,
                        help="potential / Krein grid intervals m (default 200)")
    common.add_argument("--acc-grid", type=_bounded_int(8), default=200,
                        help="accelerant grid parameter k, nodes -1 + i/k (default 200)")
    common.add_argument("--p", type=_exponent, default=None,
                        help="L_p exponent for norms (default: from the input, else 1)")
    common.add_argument("--krein-kernel", dest="kernel", choices=KERNELS, default="standard",
                        help="integral kernel of the Krein equation (default standard)")
    common.add_argument("--emit-h", action="store_true", help="also write the accelerant JSON and CSV")
    common.add_argument("--threads", type=_bounded_int(1), default=None,
                        help=f"worker cap (default ${THREADS_ENV} or 1)")
    common.add_argument("--seed", type=int, default=7, help="seed for --potential smooth_random (default 7)")
    common.add_argument("--potential", choices=POTENTIAL_KINDS, default=None,
                        help="use a built-in test potential instead of --in")
    common.add_argument("--r", type=_bounded_int(1), default=1, help="matrix size for --potential (default 1)")
    common.add_argument("--c", type=float, default=0.3, help="value for --potential constant (default 0.3)")
    common.add_argument("--n-min", type=_bounded_int(0), default=0,
                        help="riesz-check: skip windows |n| < n-min (default 0)")
    common.add_argument("--plot", action="store_true", help="render PNG figures next to the CSV output")

    parser = _Parser(prog="dirac-spec", description="Direct and inverse spectral problems for Dirac operators.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    helps = {
        "forward": "potential JSON -> spectral data JSON",
        "inverse": "spectral data JSON -> potential JSON + CSV",
        "roundtrip": "potential -> data -> potential -> data, report JSON",
        "validate": "spectral data JSON -> condition report JSON + tails CSV",
        "accelerant": "spectral data JSON -> accelerant JSON + CSV",
        "riesz-check": "spectral data JSON -> Kadec report JSON",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _env_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        v = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer >= 1, got {raw!r}")
    if v < 1:
        raise UsageError(f"{THREADS_ENV} must be an integer >= 1, got {raw!r}")
    return v


def parse_args(argv) -> Command:
    ns = build_parser().parse_args(list(argv))
    takes_potential = ns.subcommand in ("forward", "roundtrip")
    if ns.potential is not None and not takes_potential:
        raise UsageError(f"argument --potential: not accepted by {ns.subcommand}")
    if ns.input is None and ns.potential is None:
        hint = " (or --potential)" if takes_potential else ""
        raise UsageError(f"argument --in: required{hint}")
    threads = ns.threads if ns.threads is not None else _env_threads()
    return Command(
        subcommand=ns.subcommand, input=ns.input, output=ns.output, N=ns.N, terms=ns.terms,
        grid=ns.grid, acc_grid=ns.acc_grid, p=ns.p, kernel=ns.kernel, emit_h=ns.emit_h,
        threads=threads, seed=ns.seed, potential=ns.potential, r=ns.r, c=ns.c,
        n_min=ns.n_min, plot=ns.plot,
    )


# --- execution ---------------------------------------------------------------


def _load(loader, path: Path):
    try:
        return loader(path)
    except OSError as exc:
        raise ValidationFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise ValidationFailure(f"malformed input {path}: {exc}") from exc


def _potential(cmd: Command) -> PotentialGrid:
    if cmd.potential is not None:
        params = {"seed": cmd.seed, "c": cmd.c}
        if cmd.p is not None:
            params["p"] = cmd.p
        return make_test_potential(cmd.potential, r=cmd.r, m=cmd.grid, **params)
    q = _load(io.load_potential, cmd.input)
    if cmd.p is not None:
        q = PotentialGrid(q.r, q.m, q.values, cmd.p)
    return q


def _sibling(cmd: Command, suffix: str) -> Path | None:
    if cmd.output is None:
        return None
    return cmd.output.with_name(cmd.output.stem + suffix)


def _emit(cmd: Command, obj: dict, out) -> None:
    if cmd.output is None:
        out.write(io.dumps(obj) + "\n")
    else:
        try:
            io.write_json(obj, cmd.output)
        except OSError as exc:
            raise ValidationFailure(f"cannot write {cmd.output}: {exc.strerror or exc}") from exc


def _write_grid(cmd: Command, suffix: str, x, values, title: str, reference=None) -> None:
    path = _sibling(cmd, suffix + ".csv")
    if path is None:
        return
    io.write_grid_csv(path, x, values)
    if cmd.plot:
        from .plotting import grid_figure

        grid_figure(path.with_suffix(".png"), x, values, title, reference)


def _emit_h(cmd: Command, H) -> None:
    path = _sibling(cmd, "_H.json")
    if path is None:
        return
    io.write_json(io.accelerant_to_dict(H), path)
    _write_grid(cmd, "_H", H.x, H.values, "accelerant H")


def _numeric(stage: str, fn, *args, **kwargs):
    """Run one stage, sorting failures into validation (bad data) and numeric ones."""
    try:
        return fn(*args, **kwargs)
    except (ReconstructionError, AccelerantError, TruncationError) as exc:
        raise ValidationFailure(str(exc)) from exc
    except ForwardError as exc:
        raise NumericFailure("forward", str(exc)) from exc
    except KreinError as exc:
        raise NumericFailure("krein", str(exc)) from exc
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        raise NumericFailure(stage, str(exc)) from exc


def _stage_of(exc) -> str:
    if isinstance(exc, ForwardError):
        return "forward"
    if isinstance(exc, KreinError):
        return "krein"
    if isinstance(exc, AccelerantError):
        return "accelerant"
    return "roundtrip"


def _run_forward(cmd: Command, out) -> int:
    q = _potential(cmd)
    data = _numeric("forward", spectral_data, q, cmd.N)
    _emit(cmd, io.spectral_to_dict(data), out)
    return 0


def _run_inverse(cmd: Command, out) -> int:
    data = _load(io.load_spectral, cmd.input)
    q, H = _numeric("inverse", reconstruct, data, cmd.config(), return_H=True)
    _emit(cmd, io.potential_to_dict(q), out)
    _write_grid(cmd, "", q.x, q.values, "reconstructed potential")
    if cmd.emit_h:
        _emit_h(cmd, H)
    return 0


def _run_roundtrip(cmd: Command, out) -> int:
    q = _potential(cmd)
    cfg = cmd.config(q.p)
    try:
        report, q_hat, H = roundtrip(q, cfg, return_intermediates=True)
    except ReconstructionError as exc:
        # data computed from a potential must yield an accelerant
        raise NumericFailure("inverse", str(exc)) from exc
    except (ForwardError, KreinError, AccelerantError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(_stage_of(exc), str(exc)) from exc
    _emit(cmd, report.to_dict(), out)
    _write_grid(cmd, "_qhat", q_hat.x, q_hat.values, "reconstructed vs original potential",
                reference=q(q_hat.x))
    if cmd.emit_h:
        _emit_h(cmd, H)
    return 0


def _run_validate(cmd: Command, out) -> int:
    data = _load(io.load_spectral, cmd.input)
    report = _numeric("validate", validate, data, cmd.N, cmd.terms, cmd.acc_grid, cmd.p or 1.0)
    _emit(cmd, report.to_dict(), out)
    path = _sibling(cmd, "_tails.csv")
    if path is not None:
        lam_tail, alpha_tail = check_B1(data, cmd.N)
        io.write_tails_csv(path, cmd.N, lam_tail, alpha_tail)
        if cmd.plot:
            from .plotting import tails_figure

            tails_figure(path.with_suffix(".png"), cmd.N, lam_tail, alpha_tail)
    ok = (report.b2_ok and report.b3_ok and report.b1_lambda_decreasing
          and report.b1_alpha_decreasing)
    return 0 if ok else 1


def _run_accelerant(cmd: Command, out) -> int:
    data = _load(io.load_spectral, cmd.input)
    H = _numeric("accelerant", build_H, data, cmd.terms, cmd.acc_grid, cmd.p or 1.0)
    report = _numeric("accelerant", is_accelerant, H, n_sections=min(cmd.grid, 200))
    _emit(cmd, io.accelerant_to_dict(H), out)
    _write_grid(cmd, "", H.x, H.values, "accelerant H")
    if not report.ok:
        print("accelerant check failed: I + H is not positive on every section", file=sys.stderr)
        return 1
    return 0


def _run_riesz(cmd: Command, out) -> int:
    data = _load(io.load_spectral, cmd.input)
    report = _numeric("riesz-check", kadec_check, data, cmd.n_min, cmd.N)
    _emit(cmd, report.to_dict(), out)
    return 0


RUNNERS = {
    "forward": _run_forward,
    "inverse": _run_inverse,
    "roundtrip": _run_roundtrip,
    "validate": _run_validate,
    "accelerant": _run_accelerant,
    "riesz-check": _run_riesz,
}


def execute(cmd: Command, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        return RUNNERS[cmd.subcommand](cmd, out)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericFailure as exc:
        print(f"numeric failure in stage {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    return execute(cmd)


if __name__ == "__main__":
    sys.exit(main())
