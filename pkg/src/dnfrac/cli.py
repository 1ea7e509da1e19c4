"""Command-line front end: ``ml``, ``solve`` and ``verify``.

Exit codes: 0 success, 2 usage or config error, 3 series non-convergence,
4 validation failure without override, 5 solver error, 6 failing checks.
Numbers are written with ``%.17g`` so repeated runs give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from .errors import NonConvergence, SolvabilityError
from .fractional_ops import GridSpec
from .matrix_functions import matrix_ml_grid
from .orders import OrderSequence
from .solver import CauchyProblem, GridF, GridF0, PolyF0, ZeroForcing, solve
from .special_functions import DEFAULT_CONTROL, SeriesControl, prabhakar
from .verify import format_report, run_campaign

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3
EXIT_VALIDATION = 4
EXIT_SOLVER = 5
EXIT_CHECKS = 6

_NUM = {"type": "number"}
_VECTOR = {"type": "array", "items": _NUM, "minItems": 1}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["orders", "matrix", "initial", "grid"],
    "properties": {
        "orders": {"type": "array", "items": _NUM, "minItems": 1},
        "matrix": _MATRIX,
        "initial": {"type": "array", "items": _VECTOR},
        "forcing": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"const": "zero"}}},
                {"type": "object", "additionalProperties": False, "required": ["kind", "values"],
                 "properties": {"kind": {"enum": ["grid_f", "grid_f0"]},
                                "values": {"type": "array", "items": {"anyOf": [_NUM, _VECTOR]}}}},
                {"type": "object", "additionalProperties": False, "required": ["kind", "coeffs"],
                 "properties": {"kind": {"const": "poly_f0"},
                                "coeffs": {"type": "array", "items": {"anyOf": [_NUM, _VECTOR]}, "minItems": 1}}},
            ]
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["N"],
            "properties": {"N": {"type": "integer", "minimum": 4}, "l": {"type": "number", "exclusiveMinimum": 0}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"solution": {"type": "string"}, "diagnostics": {"type": "string"}},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"abs_tol": {"type": "number", "exclusiveMinimum": 0},
                           "max_terms": {"type": "integer", "minimum": 1}},
        },
        "override_solvability": {"type": "boolean"},
        "certify": {"type": "boolean"},
    },
}


class ConfigError(ValueError):
    """Unreadable or schema-invalid configuration."""


def _g(v: float) -> str:
    return "%.17g" % v


def load_config(path: Path) -> dict:
    """Parse and schema-check a problem config, reporting line or field on failure."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{path}: field {where}: {err.message}")
    return cfg


def problem_from_config(cfg: dict) -> tuple[CauchyProblem, GridSpec, SeriesControl]:
    grid_cfg = cfg["grid"]
    length = float(grid_cfg.get("l", 1.0))
    grid = GridSpec(length, int(grid_cfg["N"]))
    try:
        orders = OrderSequence(tuple(cfg["orders"]))
    except ValueError as exc:
        raise ConfigError(f"field orders: {exc}") from exc
    forcing_cfg = cfg.get("forcing", {"kind": "zero"})
    kind = forcing_cfg["kind"]
    if kind == "zero":
        forcing = ZeroForcing()
    elif kind == "poly_f0":
        forcing = PolyF0(np.array(forcing_cfg["coeffs"], dtype=float))
    elif kind == "grid_f":
        forcing = GridF(np.array(forcing_cfg["values"], dtype=float))
    else:
        forcing = GridF0(np.array(forcing_cfg["values"], dtype=float))
    initial = np.array(cfg["initial"], dtype=float).reshape(len(cfg["initial"]), -1) if cfg["initial"] else \
        np.zeros((0, len(cfg["matrix"])))
    try:
        p = CauchyProblem(orders, cfg["matrix"], initial, forcing, length,
                          bool(cfg.get("override_solvability", False)))
    except ValueError as exc:
        raise ConfigError(f"field matrix: {exc}") from exc
    tol = cfg.get("tolerances", {})
    ctl = SeriesControl(tol.get("abs_tol", DEFAULT_CONTROL.abs_tol), tol.get("max_terms", DEFAULT_CONTROL.max_terms))
    return p, grid, ctl


def _resolve(base: Optional[Path], name: str) -> Path:
    path = Path(name)
    return path if base is None or path.is_absolute() else base / path


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


# -- commands ------------------------------------------------------------------


def cmd_ml(args) -> int:
    ctl = SeriesControl(args.abs_tol, args.max_terms)
    zs = args.z if args.z else [0.0]
    if args.matrix_file is None:
        lines = [_g(prabhakar(args.alpha, args.beta, args.gamma, z, ctl)) for z in zs]
    else:
        try:
            mat = np.array(json.loads(Path(args.matrix_file).read_text()), dtype=float)
        except (OSError, ValueError) as exc:
            print(f"error: cannot read matrix file {args.matrix_file}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if args.gamma != 1:
            print("error: --gamma applies to scalar evaluation only", file=sys.stderr)
            return EXIT_USAGE
        vals = matrix_ml_grid(args.alpha, args.beta, mat, zs, ctl)
        n = vals.shape[1]
        header = ["z"] + [f"e_{i + 1}_{j + 1}" for i in range(n) for j in range(n)]
        lines = [",".join(header)]
        lines += [",".join([_g(z)] + [_g(v) for v in m.ravel()]) for z, m in zip(zs, vals)]
    text = "\n".join(lines) + "\n"
    if args.output:
        _write(_resolve(args.output_dir, args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _diagnostics_text(bundle) -> str:
    d = bundle.diagnostics
    lines = ["[validation]"] + d["validation"]
    lines.append("[residual]")
    for key in ("residual_max", "residual_max_tail"):
        if key in d:
            lines.append(f"{key}={_g(d[key])}")
    lines.append("[initial_conditions]")
    for k, (lim, err) in enumerate(zip(d["initial_limits"], d["initial_errors"])):
        lines.append(f"level={k} limit={','.join(_g(v) for v in lim)} error={_g(err)}")
    lines.append("[warnings]")
    lines += d.get("warnings", [])
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    try:
        cfg = load_config(Path(args.config))
        p, grid, ctl = problem_from_config(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        bundle = solve(p, grid, ctl, certify=cfg.get("certify", True))
    except SolvabilityError as exc:
        print("validation failed:", file=sys.stderr)
        for line in exc.report.lines():
            print(f"  {line}", file=sys.stderr)
        return EXIT_VALIDATION
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ArithmeticError, ValueError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = cfg.get("output", {})
    header = "x," + ",".join(f"u_{i + 1}" for i in range(p.n))
    rows = [",".join([_g(x)] + [_g(v) for v in row]) for x, row in zip(grid.x, bundle.u.samples)]
    _write(_resolve(args.output_dir, out.get("solution", "solution.csv")), "\n".join([header] + rows) + "\n")
    _write(_resolve(args.output_dir, out.get("diagnostics", "diagnostics.txt")), _diagnostics_text(bundle))
    return EXIT_OK


def cmd_verify(args) -> int:
    problem = None
    if args.config:
        try:
            problem, _, _ = problem_from_config(load_config(Path(args.config)))
        except (ConfigError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    try:
        results, studies = run_campaign(args.suite, args.seed, problem)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    text = format_report(results, studies)
    report = args.report or f"verify-{args.suite}.txt"
    _write(_resolve(args.output_dir, report), text)
    sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECKS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dnfrac", description="Mittag-Leffler kernels and DN Cauchy problems.")
    parser.add_argument("--output-dir", type=Path, default=None, help="base directory for relative output paths")
    sub = parser.add_subparsers(dest="command", required=True)
    # also accepted after the subcommand; SUPPRESS keeps the global value otherwise
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", type=Path, default=argparse.SUPPRESS)

    p_ml = sub.add_parser("ml", parents=[common], help="evaluate E^gamma_{alpha,beta}(z), or E_{alpha,beta}(A z) with --matrix-file")
    p_ml.add_argument("--alpha", type=float, required=True)
    p_ml.add_argument("--beta", type=float, required=True)
    p_ml.add_argument("--gamma", type=int, default=1, help="Prabhakar parameter (positive integer)")
    p_ml.add_argument("--z", type=float, nargs="+", help="arguments (default 0)")
    p_ml.add_argument("--matrix-file", help="JSON nested array holding a square matrix A")
    p_ml.add_argument("--abs-tol", type=float, default=DEFAULT_CONTROL.abs_tol)
    p_ml.add_argument("--max-terms", type=int, default=DEFAULT_CONTROL.max_terms)
    p_ml.add_argument("--output", help="write to this file instead of stdout")
    p_ml.set_defaults(func=cmd_ml)

    p_solve = sub.add_parser("solve", parents=[common], help="solve the Cauchy problem described by a JSON config")
    p_solve.add_argument("config")
    p_solve.set_defaults(func=cmd_solve)

    p_ver = sub.add_parser("verify", parents=[common], help="run a verification suite and write its report")
    p_ver.add_argument("suite", choices=["identities", "certificate", "oracles"])
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--config", help="problem config for the certificate suite")
    p_ver.add_argument("--report", help="report file name (default verify-<suite>.txt)")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on parse errors
    try:
        return args.func(args)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ValueError as exc:
        # bad numeric arguments such as alpha <= 0
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
