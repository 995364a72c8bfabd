"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 computation error, 3 golden mismatch
in ``reproduce``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .aggregate import (
    DEFAULT_NFFT, compound_params, log_sum_mgf, secondary_pmf_fft, sum_pmf_fft,
)
from .allocation import allocation_tables, tvar_contributions
from .errors import MPMRFError
from .exact import covariance_matrix
from .model import Model, load_model, new_model
from .risk import curves_csv, risk_report
from .sampler import sample
from .tree import format_tree_text, generate, parse_tree_text

OUTPUT_ENV = "MPMRF_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_MISMATCH = 0, 1, 2, 3

BETAS = (0.0, 0.3, 0.7, 0.9)
TABLE_VERTICES = (1, 16, 30)

# Reference values for the 50-vertex hub-chain tree with lam = 1.
GOLDEN_TABLE1 = {  # beta -> (lambda_M, E[C_M])
    0.0: (50.0, 1.0), 0.3: (35.3, 1.416), 0.7: (15.7, 3.185), 0.9: (5.9, 8.475),
}
GOLDEN_TABLE2 = {  # beta -> (Var, VaR.9, TVaR.9, VaR.99, TVaR.99, entropic rho=0.1)
    0.0: (50.00, 59, 62.76, 67, 69.82, 52.59),
    0.3: (157.84, 67, 74.60, 84, 90.85, 60.47),
    0.7: (841.80, 90, 109.95, 135, 152.30, 200.01),
    0.9: (1762.60, 105, 137.35, 175, 199.38, 719.77),
}
GOLDEN_TABLE3 = {  # beta -> {vertex: (contribution, percent of TVaR_0.9)}
    0.0: {1: (1.26, 2.00), 16: (1.26, 2.00), 30: (1.26, 2.00)},
    0.3: {1: (1.31, 1.75), 16: (1.86, 2.50), 30: (2.38, 3.19)},
    0.7: {1: (1.88, 1.71), 16: (2.63, 2.40), 30: (2.75, 2.50)},
    0.9: {1: (2.58, 1.88), 16: (2.95, 2.14), 30: (2.96, 2.15)},
}
TOL_TABLE1 = 5e-4
TOL_TWO_DECIMALS = 5e-3
TOL_PERCENT = 0.02


class UsageError(Exception):
    pass


# --- argument handling -------------------------------------------------------

def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _add_model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", help="model JSON file")
    g.add_argument("--tree", help="generated tree: star:<d>, series:<d>, chinary:<chi>:<xi>, hubchain")
    g.add_argument("--tree-file", help="tree edge-list text file")
    g.add_argument("--lambda", dest="lam", type=float, help="Poisson mean of every component")
    g.add_argument("--alpha", type=float, help="dependence parameter applied to every edge")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or .)")
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")


def _add_nfft(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nfft", type=int, default=DEFAULT_NFFT, help="FFT length (power of two)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpmrf", description="Poisson Markov random fields on trees")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw realizations to CSV")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--root", type=int, default=1)

    p = sub.add_parser("sum-pmf", help="pmf of the component sum")
    _add_model_args(p)
    _add_common(p)
    _add_nfft(p)

    p = sub.add_parser("cov", help="covariance matrix")
    _add_model_args(p)
    _add_common(p)

    p = sub.add_parser("alloc", help="expected allocations and TVaR contributions")
    _add_model_args(p)
    _add_common(p)
    _add_nfft(p)
    p.add_argument("--vertices", type=_int_list, help="comma-separated vertex list (default all)")
    p.add_argument("--kappa", type=_float_list, default=[], help="comma-separated TVaR levels")

    p = sub.add_parser("risk", help="variance, VaR, TVaR, entropic measure and curves")
    _add_model_args(p)
    _add_common(p)
    _add_nfft(p)
    p.add_argument("--kappa", type=_float_list, default=[0.9, 0.99])
    p.add_argument("--rho", type=_float_list, default=[0.1])

    p = sub.add_parser("gen-tree", help="write a generated tree as an edge list")
    p.add_argument("shape")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("reproduce", help="recompute the 50-vertex example and diff against reference values")
    _add_common(p)
    _add_nfft(p)
    return parser


def _model_from_args(args) -> Model:
    sources = [s for s in (args.model, args.tree, args.tree_file) if s]
    if len(sources) != 1:
        raise UsageError("give exactly one of --model, --tree, --tree-file")
    if args.model:
        if args.lam is not None or args.alpha is not None:
            raise UsageError("--lambda/--alpha cannot be combined with --model")
        return load_model(args.model)
    if args.lam is None or args.alpha is None:
        raise UsageError("--lambda and --alpha are required with --tree/--tree-file")
    if args.tree:
        tree = generate(args.tree)
    else:
        tree = parse_tree_text(Path(args.tree_file).read_text())
    return new_model(tree, args.lam, args.alpha)


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUTPUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- commands ----------------------------------------------------------------

def cmd_sample(args) -> int:
    model = _model_from_args(args)
    if args.n < 1:
        raise UsageError("--n must be positive")
    panel = sample(model, args.root, args.n, args.seed, args.threads)
    path = _out_dir(args) / "sample.csv"
    panel.to_csv(path)
    v = panel.values
    print("vertex,mean,variance")
    for j in range(panel.d):
        col = v[:, j]
        print(f"{j + 1},{col.mean():.6g},{col.var(ddof=1) if panel.n > 1 else 0.0:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sum_pmf(args) -> int:
    model = _model_from_args(args)
    out = _out_dir(args)
    pmf = sum_pmf_fft(model, 1, args.nfft)
    pmf.to_csv(out / "sum_pmf.csv")
    secondary_pmf_fft(model).to_csv(out / "secondary_pmf.csv")
    cc = compound_params(model)
    print(f"lambda_M={cc.lambda_M!r} mean_C_M={cc.mean_secondary!r} "
          f"mass_deficit={pmf.mass_deficit:.3g}")
    print(f"wrote {out / 'sum_pmf.csv'} and {out / 'secondary_pmf.csv'}")
    return EXIT_OK


def cmd_cov(args) -> int:
    model = _model_from_args(args)
    path = _out_dir(args) / "covariance.csv"
    covariance_matrix(model).to_csv(path)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_alloc(args) -> int:
    model = _model_from_args(args)
    out = _out_dir(args)
    vertices = args.vertices or list(range(1, model.d + 1))
    for v in vertices:
        model.tree.check_vertex(v)
    pmf = sum_pmf_fft(model, 1, args.nfft)
    tables = allocation_tables(model, vertices, args.nfft, pmf, args.threads)
    # truncate rows where the pmf is numerically zero
    last = int(np.flatnonzero(pmf.probs > 0)[-1]) + 1
    cols = [np.arange(last), pmf.probs[:last]]
    header = ["k", "p_M"]
    for v in vertices:
        cols.append(tables[v].alloc[:last])
        cols.append(tables[v].shares()[:last])
        header += [f"alloc_v{v}", f"share_v{v}"]
    np.savetxt(out / "allocations.csv", np.column_stack(cols), delimiter=",",
               header=",".join(header), comments="", fmt="%.17g")
    print(f"wrote {out / 'allocations.csv'}")
    if args.kappa:
        with open(out / "tvar_contributions.csv", "w") as fh:
            fh.write("kappa,vertex,contribution,fraction_of_tvar,tvar\n")
            for kap in args.kappa:
                c = tvar_contributions(model, kap, args.nfft, vertices, pmf, tables)
                fr = c.fractions()
                for v in vertices:
                    fh.write(f"{kap!r},{v},{c.by_vertex[v]!r},{fr[v]!r},{c.tvar!r}\n")
                    print(f"kappa={kap:g} vertex={v} contribution={c.by_vertex[v]:.4f} "
                          f"({100 * fr[v]:.3f}%)")
        print(f"wrote {out / 'tvar_contributions.csv'}")
    return EXIT_OK


def _curve_grid(pmf) -> np.ndarray:
    last = int(np.flatnonzero(pmf.probs > 1e-15)[-1])
    return np.arange(last + 1, dtype=float)


def cmd_risk(args) -> int:
    model = _model_from_args(args)
    out = _out_dir(args)
    pmf = sum_pmf_fft(model, 1, args.nfft)
    rep = risk_report(pmf, args.kappa, args.rho, lambda r: log_sum_mgf(model, r) / r)
    rep.to_csv(out / "risk.csv")
    curves_csv(pmf, _curve_grid(pmf), out / "curves.csv")
    for m, lvl, val in rep.rows():
        print(f"{m}{'@' + lvl if lvl else ''} = {val:.6g}")
    print(f"wrote {out / 'risk.csv'} and {out / 'curves.csv'}")
    return EXIT_OK


def cmd_gen_tree(args) -> int:
    text = format_tree_text(generate(args.shape))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- reproduction of the 50-vertex example ------------------------------------

def example_model(beta: float) -> Model:
    return new_model(generate("hubchain"), 1.0, beta)


def _compare(label: str, got, want, tol: float, failures: list[str]) -> str:
    got = int(got) if tol == 0 else float(got)
    ok = got == want if tol == 0 else abs(got - want) <= tol
    if not ok:
        failures.append(f"{label}: got {got!r}, expected {want!r} (tol {tol:g})")
    return "ok" if ok else "MISMATCH"


def reproduce(out: Path, n_fft: int = DEFAULT_NFFT, threads: int = 1) -> list[str]:
    """Recompute every table and the curve data; return a list of mismatches."""
    failures: list[str] = []
    t1 = open(out / "table1.csv", "w")
    t2 = open(out / "table2.csv", "w")
    t3 = open(out / "table3.csv", "w")
    with t1, t2, t3:
        t1.write("beta,lambda_M,mean_C_M\n")
        t2.write("beta,variance,VaR_0.9,TVaR_0.9,VaR_0.99,TVaR_0.99,entropic_0.1\n")
        t3.write("beta,vertex,contribution,percent\n")
        for beta in BETAS:
            model = example_model(beta)
            tag = f"beta={beta:g}"
            cc = compound_params(model)
            g1 = GOLDEN_TABLE1[beta]
            t1.write(f"{beta},{cc.lambda_M!r},{cc.mean_secondary!r}\n")
            print(f"[table1] {tag} lambda_M={cc.lambda_M:.4f} "
                  f"{_compare(tag + ' lambda_M', cc.lambda_M, g1[0], TOL_TABLE1, failures)} "
                  f"E[C_M]={cc.mean_secondary:.4f} "
                  f"{_compare(tag + ' E[C_M]', cc.mean_secondary, g1[1], TOL_TABLE1, failures)}")

            pmf = sum_pmf_fft(model, 1, n_fft)
            rep = risk_report(pmf, (0.9, 0.99), (0.1,), lambda r: log_sum_mgf(model, r) / r)
            got2 = (rep.variance, rep.var_levels[0.9], rep.tvar_levels[0.9],
                    rep.var_levels[0.99], rep.tvar_levels[0.99], rep.entropic[0.1])
            t2.write(f"{beta}," + ",".join(repr(float(x)) for x in got2) + "\n")
            names = ("Var", "VaR_0.9", "TVaR_0.9", "VaR_0.99", "TVaR_0.99", "entropic_0.1")
            cells = []
            for name, g, w in zip(names, got2, GOLDEN_TABLE2[beta]):
                tol = 0 if name.startswith("VaR") else TOL_TWO_DECIMALS
                status = _compare(f"{tag} {name}", g, w, tol, failures)
                cells.append(f"{name}={g:.4f} {status}" if tol else f"{name}={g} {status}")
            print(f"[table2] {tag} " + " ".join(cells))

            tables = allocation_tables(model, TABLE_VERTICES, n_fft, pmf, threads)
            contrib = tvar_contributions(model, 0.9, n_fft, TABLE_VERTICES, pmf, tables)
            frac = contrib.fractions()
            for v in TABLE_VERTICES:
                c, pct = contrib.by_vertex[v], 100 * frac[v]
                w_c, w_pct = GOLDEN_TABLE3[beta][v]
                t3.write(f"{beta},{v},{c!r},{pct!r}\n")
                print(f"[table3] {tag} v={v} C={c:.4f} "
                      f"{_compare(f'{tag} v{v} contribution', c, w_c, TOL_TWO_DECIMALS, failures)} "
                      f"share={pct:.3f}% "
                      f"{_compare(f'{tag} v{v} percent', pct, w_pct, TOL_PERCENT, failures)}")

            label = f"beta_{beta:g}"
            pmf.to_csv(out / f"pmf_M_{label}.csv")
            secondary_pmf_fft(model).to_csv(out / f"pmf_C_M_{label}.csv")
            curves_csv(pmf, np.arange(251, dtype=float), out / f"curves_{label}.csv")
    return failures


def cmd_reproduce(args) -> int:
    out = _out_dir(args)
    failures = reproduce(out, args.nfft, args.threads)
    if failures:
        print(f"{len(failures)} golden comparison(s) failed:")
        for f in failures:
            print(f"  {f}")
        return EXIT_MISMATCH
    print("all golden comparisons passed")
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "sum-pmf": cmd_sum_pmf,
    "cov": cmd_cov,
    "alloc": cmd_alloc,
    "risk": cmd_risk,
    "gen-tree": cmd_gen_tree,
    "reproduce": cmd_reproduce,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "threads", 1) == 0:
        args.threads = os.cpu_count() or 1
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MPMRFError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
