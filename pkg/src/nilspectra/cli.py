"""Command-line surface: drivers, serialization, and plot-data emission.

Subcommands: spectrum | jordan | pseudospec | ensemble | symbol | fit |
oracle-check.  The tool emits plot-ready data (CSV) and reports (JSON),
never images.  All outputs are deterministic functions of the parsed
configuration, including seeds; an optional timestamp header is off by
default.  Exit codes: 0 success, 1 usage error, 2 numerical failure.

Options may also come from a config file (--config): flat `key = value`
lines, where keys are the long option names (dashes or underscores),
values are whitespace/comma separated tokens, and `#` starts a comment.
Explicit command-line flags win over config values, which win over
built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import ensemble as ens
from . import jordan as jrd
from . import resolvent as res
from .exact import QC, exact_charpoly, verify_partition
from .model import ModelParams, multiplicities
from .spectrum import (
    DegenerateSpectrumError,
    RootSolveError,
    UnsupportedCoefficientsError,
    char_poly,
    nonzero_eigenvalues,
)

__all__ = ["main"]

# Options that repeat one value per occurrence (for config-file splicing).
_APPEND_KEYS = {"n", "t", "b", "b-re", "b-im", "eps"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


class UsageError(ValueError):
    pass


def _uint64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _add_model_args(p, *, many_nt=False, rational=False):
    num = str if rational else float
    if many_nt:
        p.add_argument("--n", action="append", type=int, required=True,
                       help="matrix size (repeatable)")
        p.add_argument("--t", action="append", type=int, required=True,
                       help="discrete time (repeatable)")
    else:
        p.add_argument("--n", type=int, required=True, help="matrix size")
        p.add_argument("--t", type=int, required=True, help="discrete time")
    p.add_argument("--b", "--b-re", dest="b_re", action="append", type=num,
                   default=None, metavar="B_RE",
                   help="real part of the next shift coefficient (repeatable)")
    p.add_argument("--b-im", dest="b_im", action="append", type=num,
                   default=None, metavar="B_IM",
                   help="imaginary part of the next shift coefficient")
    p.add_argument("--delta", "--delta-re", dest="delta_re", type=num, default=0,
                   metavar="D_RE", help="real part of the rank-one coefficient")
    p.add_argument("--delta-im", dest="delta_im", type=num, default=0,
                   metavar="D_IM", help="imaginary part of the rank-one coefficient")


def _add_common_args(p):
    p.add_argument("--out", type=Path, default=Path("nilspectra-out"),
                   help="output directory (created if missing)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="format of tabular outputs")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for independent tasks")
    p.add_argument("--timestamp", action="store_true",
                   help="prepend a generation timestamp header to outputs")
    p.add_argument("--config", type=Path, default=None,
                   help="flat key = value config file (flags take precedence)")


def _collect_b(args, rational=False):
    reals = list(args.b_re or [])
    imags = list(args.b_im or [])
    width = max(len(reals), len(imags))
    coeffs = []
    for k in range(width):
        re_part = reals[k] if k < len(reals) else 0
        im_part = imags[k] if k < len(imags) else 0
        if rational:
            coeffs.append(QC(Fraction(re_part), Fraction(im_part)))
        else:
            coeffs.append(complex(float(re_part), float(im_part)))
    return tuple(coeffs)


def _params(args, n=None, t=None, rational=False) -> ModelParams:
    b = _collect_b(args, rational)
    if rational:
        delta = QC(Fraction(args.delta_re), Fraction(args.delta_im))
    else:
        delta = complex(float(args.delta_re), float(args.delta_im))
    return ModelParams(n if n is not None else args.n,
                       t if t is not None else args.t, b, delta)


# ---------------------------------------------------------------------------
# Output helpers: byte-deterministic CSV / JSON.
# ---------------------------------------------------------------------------

def _jsonify(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, QC):
        return {"re": str(obj.re), "im": str(obj.im)}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonify(x) for x in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(x) for x in obj]
    return obj


def _write_json(path: Path, payload: dict, timestamp: bool):
    data = dict(payload)
    if timestamp:
        data["generated"] = datetime.datetime.now().isoformat()
    path.write_text(
        json.dumps(_jsonify(data), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def _write_table(path_base: Path, header, rows, fmt: str, timestamp: bool) -> Path:
    if fmt == "json":
        path = path_base.with_suffix(".json")
        payload = {"columns": list(header),
                   "rows": [[_jsonify(_cell(v)) for v in row] for row in rows]}
        _write_json(path, payload, timestamp)
        return path
    path = path_base.with_suffix(".csv")
    with path.open("w", newline="", encoding="utf-8") as fh:
        if timestamp:
            fh.write(f"# generated {datetime.datetime.now().isoformat()}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _complex_columns(prefix, n):
    cols = []
    for j in range(1, n + 1):
        cols.extend([f"{prefix}{j}_re", f"{prefix}{j}_im"])
    return cols


def _flatten_complex(vec):
    out = []
    for z in np.asarray(vec, dtype=complex):
        out.extend([z.real, z.imag])
    return out


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------

def _cmd_spectrum(args) -> int:
    params = _params(args)
    report = nonzero_eigenvalues(params)
    mult = report.multiplicities
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "spectrum.json", {
        "n": params.n,
        "t": params.t,
        "b": list(params.b_coeffs),
        "delta": params.delta,
        "multiplicities": {
            "p1": mult.p1, "p2": mult.p2,
            "algebraic": mult.algebraic, "geometric": mult.geometric,
            "index": mult.index, "block_sizes": list(mult.block_sizes),
        },
        "polynomial_variant": char_poly(params).variant,
        "roots": [complex(z) for z in report.eigenvalues],
        "residuals": [float(r) for r in report.residuals],
        "trace": params.n * complex(params.delta),
    }, args.timestamp)
    _write_table(out / "roots", ("re", "im"),
                 [(z.real, z.imag) for z in map(complex, report.eigenvalues)],
                 args.format, args.timestamp)
    print(f"wrote {out / 'spectrum.json'} ({report.eigenvalues.size} roots)")
    return 0


def _cmd_jordan(args) -> int:
    params = _params(args)
    basis = jrd.build_basis(params)
    report = nonzero_eigenvalues(params)
    per_block, kappa0 = jrd.condition_numbers(basis)
    v_mat, w_mat = jrd.assemble_similarity(params, basis, report)
    m = jrd.build_matrix(params)
    canon = jrd.jordan_form_matrix(basis.block_sizes, report.eigenvalues)
    sim_residual = float(np.linalg.norm(w_mat @ m @ v_mat - canon))
    gram_err = float(np.abs(jrd.gram_matrix(basis)
                            - np.eye(sum(basis.block_sizes))).max())
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    is_b0 = all(b == 0 for b in params.b_coeffs)
    _write_json(out / "jordan.json", {
        "n": params.n,
        "t": params.t,
        "block_sizes": list(basis.block_sizes),
        "kappa0_per_block": {str(k): v for k, v in per_block.items()},
        "kappa0": kappa0,
        "t_kappa0": params.t * kappa0,
        "t_kappa0_reference_b0": math.sqrt(2 * params.t * (params.t - 1)) if is_b0 else None,
        "similarity_residual": sim_residual,
        "gram_error": gram_err,
        "chain_residual": jrd.chain_residual(params, basis),
    }, args.timestamp)
    header = ["q"] + _complex_columns("v", params.n) + _complex_columns("w", params.n)
    for l, (vchain, wchain) in enumerate(zip(basis.right, basis.left), start=1):
        rows = [[q] + _flatten_complex(v) + _flatten_complex(w)
                for q, (v, w) in enumerate(zip(vchain, wchain), start=1)]
        _write_table(out / f"chain_{l:02d}", header, rows, args.format, args.timestamp)
    print(f"wrote {len(basis.right)} chain files, blocks {list(basis.block_sizes)}")
    return 0


def _cmd_pseudospec(args) -> int:
    params = _params(args)
    m = jrd.build_matrix(params)
    region = tuple(args.region) if args.region else res.default_region(params)
    resolution = tuple(args.resolution)
    grid = res.pseudospectrum_grid(m, region, resolution, threads=args.threads)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for iy, y in enumerate(grid.ys):
        for ix, x in enumerate(grid.xs):
            rows.append((float(x), float(y), float(grid.values[iy, ix])))
    _write_table(out / "grid", ("x", "y", "sigma_min"), rows,
                 args.format, args.timestamp)
    with (out / "grid_matrix.txt").open("w", encoding="utf-8") as fh:
        fh.write("# rows: im axis bottom to top; cols: re axis left to right\n")
        fh.write("# xs " + " ".join(repr(float(x)) for x in grid.xs) + "\n")
        fh.write("# ys " + " ".join(repr(float(y)) for y in grid.ys) + "\n")
        for iy in range(grid.ys.size):
            fh.write(" ".join(repr(float(v)) for v in grid.values[iy]) + "\n")
    eps_list = args.eps or [1e-8]
    disks = []
    if params.delta != 0:
        basis = jrd.build_basis(params)
        report = nonzero_eigenvalues(params)
        for eps in eps_list:
            d = res.enclosure_disks(params, basis, report, eps)
            disks.append({
                "epsilon": d.epsilon,
                "exponent": d.exponent,
                "zero_constant": d.zero_constant,
                "zero_radius": d.zero_radius,
                "eigen_disks": [
                    {"center": c, "radius": r, "constant": k}
                    for c, r, k in zip(d.eigen_centers, d.eigen_radii,
                                       d.eigen_constants)
                ],
            })
    _write_json(out / "disks.json", {
        "region": list(region),
        "resolution": list(resolution),
        "epsilon_levels": list(eps_list),
        "disks": disks,
    }, args.timestamp)
    print(f"wrote {out / 'grid.csv' if args.format == 'csv' else out / 'grid.json'}"
          f" ({resolution[0]}x{resolution[1]})")
    return 0


def _cmd_ensemble(args) -> int:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    td = complex(args.tilde_delta)
    eps = args.eps[0] if args.eps else abs(td)
    sweep = []
    for n in args.n:
        for t in args.t:
            params = _params(args, n=n, t=t)
            report = nonzero_eigenvalues(params)
            cloud = ens.run_ensemble(params, td, args.samples, args.seed,
                                     threads=args.threads)
            cloud = ens.mark_outer(cloud, report)
            rbar = ens.mean_radius(cloud, report)
            sweep.append((t, n, rbar))
            rows = [
                (int(s), z.real, z.imag, int(flag))
                for s, z, flag in zip(cloud.sample_index,
                                      map(complex, cloud.eigenvalues),
                                      cloud.outer_mask)
            ]
            _write_table(out / f"cloud_n{n}_t{t}", ("sample", "re", "im", "outer"),
                         rows, args.format, args.timestamp)
            for tag, radius in (("full", 1.0),
                                ("reduced", ens.reduction_radius(n, t, eps))):
                curve = ens.symbol_curve(t, params.b_coeffs, radius)
                crows = [(float(th), p.real, p.imag)
                         for th, p in zip(curve.thetas, map(complex, curve.points))]
                _write_table(out / f"symbol_n{n}_t{t}_{tag}",
                             ("theta", "re", "im"), crows,
                             args.format, args.timestamp)
    _write_table(out / "rbar", ("t", "n", "rbar"),
                 [(t, n, r) for t, n, r in sweep], args.format, args.timestamp)
    if len(sweep) >= 3:
        try:
            fit = ens.fit_radius_law(sweep)
            _write_json(out / "fit.json", {
                "c1": fit.c1, "c2": fit.c2, "residual": fit.residual,
                "points": len(sweep), "epsilon": eps,
            }, args.timestamp)
        except ValueError as exc:
            print(f"fit skipped: {exc}", file=sys.stderr)
    print(f"wrote {len(sweep)} cloud file(s) to {out}")
    return 0


def _cmd_symbol(args) -> int:
    b = _collect_b(args)
    if args.r is not None:
        radius = args.r
        power = None
    else:
        if args.eps is None or args.n is None:
            raise UsageError("symbol needs either --r or both --eps and --n")
        power = (args.t + 1) * multiplicities(args.n, args.t).index
        radius = float(args.eps[0] ** (1.0 / power))
    curve = ens.symbol_curve(args.t, b, radius, samples=args.samples)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    rows = [(float(th), p.real, p.imag)
            for th, p in zip(curve.thetas, map(complex, curve.points))]
    _write_table(out / "symbol", ("theta", "re", "im"), rows,
                 args.format, args.timestamp)
    _write_json(out / "symbol.json", {
        "t": args.t,
        "b": list(b),
        "radius": radius,
        "theta0": curve.theta0,
        "winding_power": power,
    }, args.timestamp)
    print(f"wrote symbol curve at r = {radius!r} (theta0 = {curve.theta0!r})")
    return 0


def _cmd_fit(args) -> int:
    points = []
    with args.input.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        for rec in reader:
            points.append((int(rec["t"]), int(rec["n"]), float(rec["rbar"])))
    fit = ens.fit_radius_law(points)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_json(args.out / "fit.json", {
        "c1": fit.c1, "c2": fit.c2, "residual": fit.residual,
        "points": len(points),
    }, args.timestamp)
    print(f"c1 = {fit.c1:.4f}, c2 = {fit.c2:.4f}, rms residual = {fit.residual:.4f}")
    return 0


def _cmd_oracle_check(args) -> int:
    params = _params(args, rational=True)
    summary = verify_partition(params)
    poly = exact_charpoly(params)
    formula_ok = None
    if params.delta != QC(0) and not any(b != 0 for b in params.b_coeffs[1:]):
        formula = char_poly(params)
        formula_ok = list(poly.nonzero_factor()) == list(formula.coeffs)
    payload = {
        "n": params.n, "t": params.t,
        "b": list(params.b_coeffs), "delta": params.delta,
        "zero_root_count": summary["zero_root_count"],
        "algebraic": summary["algebraic"],
        "kernel_dim": summary["kernel_dim"],
        "geometric": summary["geometric"],
        "rank_blocks": summary["rank_blocks"],
        "block_sizes": summary["block_sizes"],
        "ranks": summary["ranks"],
        "partition_matches": summary["matches"],
        "charpoly_matches": formula_ok,
    }
    args.out.mkdir(parents=True, exist_ok=True)
    _write_json(args.out / "oracle.json", payload, args.timestamp)
    for key in ("zero_root_count", "algebraic", "kernel_dim", "geometric",
                "rank_blocks", "block_sizes", "partition_matches",
                "charpoly_matches"):
        print(f"{key}: {payload[key]}")
    if not summary["matches"] or formula_ok is False:
        print("oracle check FAILED", file=sys.stderr)
        return 2
    print("oracle check passed")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly and config file handling.
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="nilspectra",
                     description="spectral analysis of rank-one-perturbed "
                                 "nilpotent Toeplitz matrix families")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="closed-form non-zero eigenvalues")
    _add_model_args(p)
    _add_common_args(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("jordan", help="generalized eigenvector chains")
    _add_model_args(p)
    _add_common_args(p)
    p.set_defaults(func=_cmd_jordan)

    p = sub.add_parser("pseudospec", help="sigma_min grid and enclosure disks")
    _add_model_args(p)
    p.add_argument("--region", type=float, nargs=4, default=None,
                   metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    p.add_argument("--resolution", type=int, nargs=2, default=(200, 200),
                   metavar=("NX", "NY"))
    p.add_argument("--eps", action="append", type=float, default=None,
                   help="epsilon level (repeatable)")
    _add_common_args(p)
    p.set_defaults(func=_cmd_pseudospec)

    p = sub.add_parser("ensemble", help="Gaussian-perturbation experiments")
    _add_model_args(p, many_nt=True)
    p.add_argument("--tilde-delta", type=float, default=1e-10,
                   help="Gaussian perturbation scale")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=_uint64, default=0, help="64-bit master seed")
    p.add_argument("--eps", action="append", type=float, default=None,
                   help="epsilon for the size-reduced symbol curve "
                        "(default |tilde-delta|)")
    _add_common_args(p)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("symbol", help="symbol curve sampling")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--n", type=int, default=None,
                   help="matrix size (for --eps size reduction)")
    p.add_argument("--b", "--b-re", dest="b_re", action="append", type=float,
                   default=None, metavar="B_RE")
    p.add_argument("--b-im", dest="b_im", action="append", type=float,
                   default=None, metavar="B_IM")
    p.add_argument("--r", type=float, default=None, help="curve radius in (0, 1]")
    p.add_argument("--eps", action="append", type=float, default=None,
                   help="epsilon for r = eps^(1/w)")
    p.add_argument("--samples", type=int, default=4096)
    _add_common_args(p)
    p.set_defaults(func=_cmd_symbol)

    p = sub.add_parser("fit", help="fit the mean-radius law from a sweep CSV")
    p.add_argument("--input", type=Path, required=True,
                   help="CSV with columns t, n, rbar")
    _add_common_args(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("oracle-check",
                       help="exact-arithmetic validation (n <= 12, rational)")
    _add_model_args(p, rational=True)
    _add_common_args(p)
    p.set_defaults(func=_cmd_oracle_check)
    return parser


def _load_config(path: Path) -> list[tuple[str, list[str]]]:
    entries = []
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        tokens = [tok for tok in re.split(r"[,\s]+", value) if tok]
        if not tokens:
            raise UsageError(f"{path}:{line_no}: empty value for {key!r}")
        entries.append((key, tokens))
    return entries


def _splice_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        return argv
    entries = _load_config(Path(argv[at + 1]))
    explicit = {arg.split("=", 1)[0] for arg in argv if arg.startswith("--")}
    spliced = []
    for key, tokens in entries:
        flag = f"--{key}"
        if flag in explicit:
            continue
        if key in _APPEND_KEYS:
            for tok in tokens:
                spliced.extend([flag, tok])
        else:
            spliced.append(flag)
            spliced.extend(tokens)
    # config values go right after the subcommand so explicit flags,
    # parsed later, win for single-valued options
    return argv[:1] + spliced + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(_splice_config(argv))
        return args.func(args)
    except (UsageError, DegenerateSpectrumError, UnsupportedCoefficientsError,
            ValueError) as exc:
        print(f"nilspectra: error: {exc}", file=sys.stderr)
        return 1
    except (RootSolveError, jrd.JordanError, res.ResolventError,
            ens.EigensolveError, ens.SymbolCurveError, ens.WindingError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"nilspectra: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
