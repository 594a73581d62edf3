"""Command-line frontend emitting reproducible CSV/JSON experiment artifacts.

Subcommands: eigen, cseq, quantizer, distortion, rate, figures.  Every data
file is listed, with a sha256 digest, in a run manifest written next to it;
reruns with identical flags produce byte-identical outputs.  Exit codes:
0 success, 2 usage error, 3 numeric failure.

CSV dialect: comma separator, dot decimal, LF line endings, mandatory
header row.  Floats are serialized with 17 significant digits so they parse
back losslessly.  The environment variable GSPQ_THREADS, when set, caps
worker parallelism (the current implementation evaluates sequentially, so
any cap >= 1 is honored); it must be a positive integer.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .kernel import ProcessParams
from .spectrum import (
    HALF_PI,
    CSeqEntry,
    SolverError,
    c_sequence,
    newton_paper_mode,
    spectrum_batch,
)
from .gauss1d import LloydError
from .funcquant import RENDER_CAP, allocate, build, codebook_paths, exact_distortion
from .mc import McConfig, estimate_distortion
from .rate import estimate_c_inf, fit_rate, remark_constant, theta_bounds

FIG1_KS = (0.0, 0.3, 0.5, 0.7)
FIG2_KS = (0.3, 0.5, 0.7)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_fragment(obj, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{key}": {_json_fragment(val, indent + 1)}' for key, val in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        items = [f"{inner}{_json_fragment(val, indent + 1)}" for val in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return _fmt(obj)


def _write_json(path: Path, obj) -> None:
    path.write_text(_json_fragment(obj, 0) + "\n", encoding="ascii", newline="\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _threads_cap() -> int | None:
    raw = os.environ.get("GSPQ_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"GSPQ_THREADS must be a positive integer, got {raw!r}") from None
    if cap < 1:
        raise UsageError(f"GSPQ_THREADS must be >= 1, got {cap}")
    return cap


def _write_manifest(manifest_path: Path, command: str, parameters: dict, outputs: list[Path], seed=None) -> None:
    _write_json(
        manifest_path,
        {
            "command": command,
            "parameters": parameters,
            "seed": seed,
            "version": __version__,
            "threads_cap": _threads_cap(),
            "outputs": [
                {"path": p.name, "sha256": _sha256(p), "bytes": p.stat().st_size}
                for p in outputs
            ],
        },
    )


class UsageError(Exception):
    """Flag combination or value the CLI rejects before computing anything."""


def _parse_k_list(raw: str) -> list[float]:
    try:
        ks = [float(part) for part in raw.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid float list {raw!r}") from None
    if not ks:
        raise argparse.ArgumentTypeError("empty list")
    return ks


def _parse_int_list(raw: str) -> list[int]:
    try:
        values = [int(part) for part in raw.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {raw!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _wiener_ratio_sq(ell: int, x: float) -> float:
    ratio = (2 * ell - 1) * HALF_PI / x
    return ratio * ratio


EIGEN_HEADER = ["k", "T", "ell", "x", "lambda", "c", "residual", "in_bracket"]


def _eigen_rows(ks, T, count, method, tol):
    rows = []
    for k in sorted(ks):
        params = ProcessParams(k=k, T=T)
        if method == "bracketed":
            spec = spectrum_batch(params, count, tol)
            for pair in spec.pairs:
                rows.append(
                    (k, T, pair.ell, pair.x, pair.lam,
                     _wiener_ratio_sq(pair.ell, pair.x), pair.residual, True)
                )
        else:
            for ell in range(1, count + 1):
                res = newton_paper_mode(params, ell, tol)
                lam = (T / res.x) ** 2
                rows.append(
                    (k, T, ell, res.x, lam,
                     _wiener_ratio_sq(ell, res.x), res.residual, res.in_bracket)
                )
    return rows


def cmd_eigen(args) -> int:
    out = Path(args.out)
    rows = _eigen_rows(args.k, args.T, args.count, args.method, args.tol)
    _write_csv(out, EIGEN_HEADER, rows)
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "eigen",
        {
            "k": args.k,
            "T": args.T,
            "count": args.count,
            "method": args.method,
            "tol": args.tol,
            "out": out.name,
        },
        [out],
    )
    return 0


def cmd_cseq(args) -> int:
    out = Path(args.out)
    rows = []
    diagnostics = []
    for k in sorted(args.k):
        params = ProcessParams(k=k, T=args.T)
        entries = c_sequence(params, args.count)
        rows.extend((k, args.T, e.ell, e.c) for e in entries)
        beyond_first = [e.c for e in entries if e.ell >= 2]
        if beyond_first:
            peak = max(beyond_first)
            verdict = "exceeds" if peak > 1.5 else "within"
            diagnostics.append(
                f"diagnostic: k={_fmt(k)} max c_ell over ell>=2 is {_fmt(peak)} ({verdict} 3/2)"
            )
    _write_csv(out, ["k", "T", "ell", "c"], rows)
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "cseq",
        {"k": args.k, "T": args.T, "count": args.count, "out": out.name},
        [out],
    )
    for line in diagnostics:
        print(line)
    return 0


def cmd_quantizer(args) -> int:
    out = Path(args.out)
    if args.no_paths and args.grid is not None:
        raise UsageError("--no-paths and --grid are mutually exclusive")
    if args.budget > RENDER_CAP and not args.no_paths:
        raise UsageError(
            f"budget {args.budget} exceeds the rendering cap {RENDER_CAP}; pass --no-paths"
        )
    params = ProcessParams(k=args.k, T=args.T)
    count = max(args.count, max(1, args.budget.bit_length() - 1))
    spec = spectrum_batch(params, count)
    alloc = allocate(spec, args.budget, args.alloc)
    pq = build(spec, alloc)
    lower, upper = exact_distortion(pq)
    doc = {
        "params": {"k": params.k, "T": params.T},
        "budget": args.budget,
        "allocation": list(alloc.levels),
        "codebook_size": alloc.codebook_size,
        "coordinates": [
            {"ell": q.ell, "lambda": q.lam, "points": list(map(float, q.points))}
            for q in pq.quantizers
        ],
        "distortion": {"lower": lower, "upper": upper},
    }
    if args.grid is not None:
        grid = np.linspace(0.0, params.T, args.grid)
        paths = codebook_paths(pq, grid)
        doc["paths"] = {
            "grid": list(map(float, grid)),
            "values": [list(map(float, p.values)) for p in paths],
        }
    _write_json(out, doc)
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "quantizer",
        {
            "k": args.k,
            "T": args.T,
            "budget": args.budget,
            "alloc": args.alloc,
            "grid": args.grid,
            "no_paths": args.no_paths,
            "count": count,
            "out": out.name,
        },
        [out],
    )
    return 0


def cmd_distortion(args) -> int:
    out = Path(args.out)
    budgets = sorted(set(args.budgets))
    if budgets[0] < 2:
        raise UsageError(f"budgets must be >= 2, got {budgets[0]}")
    params = ProcessParams(k=args.k, T=args.T)
    spec = spectrum_batch(params, args.count)
    rows = []
    for n in budgets:
        alloc = allocate(spec, n, args.alloc)
        pq = build(spec, alloc)
        lower, upper = exact_distortion(pq)
        cfg = McConfig(
            samples=args.mc_samples,
            seed=args.seed,
            truncation=max(args.mc_trunc, len(alloc.levels)),
        )
        est = estimate_distortion(pq, cfg)
        t_lo, t_hi = theta_bounds(params, n)
        rows.append((n, lower, upper, est.mean, est.stderr, t_lo * t_lo, t_hi * t_hi))
    _write_csv(
        out,
        ["n", "distortion_lower", "distortion_upper", "mc_mean", "mc_stderr",
         "theta_lower", "theta_upper"],
        rows,
    )
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "distortion",
        {
            "k": args.k,
            "T": args.T,
            "budgets": budgets,
            "mc_samples": args.mc_samples,
            "mc_trunc": args.mc_trunc,
            "alloc": args.alloc,
            "count": args.count,
            "out": out.name,
        },
        [out],
        seed=args.seed,
    )
    return 0


def _read_csv_rows(path: Path, required: list[str]) -> list[dict]:
    lines = path.read_text(encoding="ascii").splitlines()
    if not lines:
        raise UsageError(f"{path}: empty file")
    header = lines[0].split(",")
    missing = [c for c in required if c not in header]
    if missing:
        raise UsageError(f"{path}: header is missing columns {missing}")
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise UsageError(f"{path}: row {number} has {len(parts)} fields, expected {len(header)}")
        row = dict(zip(header, parts))
        try:
            rows.append({c: float(row[c]) for c in required})
        except ValueError:
            raise UsageError(f"{path}: row {number} has a non-numeric field") from None
    if not rows:
        raise UsageError(f"{path}: no data rows")
    return rows


def cmd_rate(args) -> int:
    if args.input is None and args.cseq is None:
        raise UsageError("at least one of --input or --cseq is required")
    out = Path(args.out)
    report: dict = {}
    if args.input is not None:
        rows = _read_csv_rows(Path(args.input), ["n", "distortion_upper"])
        fit = fit_rate([(r["n"], r["distortion_upper"]) for r in rows])
        report["fit"] = {
            "coefficient": fit.coefficient,
            "exponent": fit.exponent,
            "r2": fit.r2,
        }
    if args.cseq is not None:
        rows = _read_csv_rows(Path(args.cseq), ["k", "T", "ell", "c"])
        groups: dict[float, list] = {}
        for r in rows:
            groups.setdefault(r["k"], []).append(r)
        per_k = []
        for k in sorted(groups):
            entries = sorted(groups[k], key=lambda r: r["ell"])
            T = entries[0]["T"]
            est = estimate_c_inf([CSeqEntry(ell=int(r["ell"]), c=r["c"]) for r in entries])
            # The fitted limit can undershoot 1 by noise; the implied sharp
            # coefficient is only defined for c_inf >= 1.
            implied = remark_constant(max(est.estimate, 1.0), T)
            per_k.append(
                {
                    "k": k,
                    "T": T,
                    "c_inf": est.estimate,
                    "band": est.band,
                    "window_size": est.window_size,
                    "remark_coefficient": implied,
                }
            )
        report["cseq"] = per_k
    _write_json(out, report)
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "rate",
        {"input": args.input, "cseq": args.cseq, "out": out.name},
        [out],
    )
    return 0


def cmd_figures(args) -> int:
    outdir = Path(args.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write_probe"
        probe.write_text("", encoding="ascii")
        probe.unlink()
    except OSError as err:
        raise UsageError(f"output directory {outdir} is not writable: {err}") from None
    fig1 = outdir / "fig1.csv"
    fig2 = outdir / "fig2.csv"
    _write_csv(fig1, EIGEN_HEADER, _eigen_rows(FIG1_KS, 1.0, 10, "bracketed", 1e-12))
    rows2 = []
    for k in FIG2_KS:
        entries = c_sequence(ProcessParams(k=k, T=1.0), 1000)
        rows2.extend((k, 1.0, e.ell, e.c) for e in entries)
    _write_csv(fig2, ["k", "T", "ell", "c"], rows2)
    _write_manifest(
        outdir / "manifest.json",
        "figures",
        # The output directory itself is not recorded: the manifest lives in
        # it, and the artifact bytes must not depend on where it was written.
        {"T": 1.0, "fig1_k": list(FIG1_KS), "fig1_count": 10,
         "fig2_k": list(FIG2_KS), "fig2_count": 1000},
        [fig1, fig2],
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gspquant",
        description="Covariance spectrum, product codebooks and rate checks "
        "for the Wiener process started from a Gaussian point.",
    )
    parser.add_argument("--version", action="version", version=f"gspquant {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="eigenvalue table (CSV)")
    p.add_argument("--k", type=_parse_k_list, required=True, help="comma list of k values")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--method", choices=["bracketed", "paper-newton"], default="bracketed")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("cseq", help="eigenvalue ratio sequence (CSV)")
    p.add_argument("--k", type=_parse_k_list, required=True)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cseq)

    p = sub.add_parser("quantizer", help="product codebook (JSON)")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--grid", type=int, default=None, help="render codeword paths on this many grid points")
    p.add_argument("--no-paths", action="store_true", help="skip path rendering (required above the cap)")
    p.add_argument("--alloc", choices=["exhaustive", "greedy"], default="exhaustive")
    p.add_argument("--count", type=int, default=64, help="spectrum length")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quantizer)

    p = sub.add_parser("distortion", help="distortion brackets vs Monte Carlo (CSV)")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--budgets", type=_parse_int_list, required=True)
    p.add_argument("--mc-samples", type=int, default=10**5)
    p.add_argument("--mc-trunc", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alloc", choices=["exhaustive", "greedy"], default="exhaustive")
    p.add_argument("--count", type=int, default=128, help="spectrum length")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distortion)

    p = sub.add_parser("rate", help="rate fit / limit extrapolation report (JSON)")
    p.add_argument("--input", default=None, help="distortion CSV to fit")
    p.add_argument("--cseq", default=None, help="ratio-sequence CSV to extrapolate")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("figures", help="reference figure datasets plus manifest")
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_figures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _threads_cap()
        return args.func(args)
    except UsageError as err:
        print(f"gspquant: error: {err}", file=sys.stderr)
        return 2
    except (TypeError, ValueError) as err:
        print(f"gspquant: error: {err}", file=sys.stderr)
        return 2
    except (SolverError, LloydError) as err:
        print(f"gspquant: numeric failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
