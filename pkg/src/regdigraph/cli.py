"""Command-line experiment runner.

Exit status: 0 on success, 1 when a checked property fails, 2 on usage
errors. Reports embed the full configuration and the package version.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import RegDigraphError
from .rng import RngStream, default_seed

CSV_FMT = "%.17g"


class UsageError(Exception):
    pass


def version_string() -> str:
    try:
        here = Path(__file__).resolve().parent
        out = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def parse_complex(text) -> complex:
    """Accept 're,im' or a Python complex literal such as '1+1j'."""
    text = str(text).strip()
    try:
        if "," in text:
            re_, im = text.split(",", 1)
            return complex(float(re_), float(im))
        return complex(text.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse complex number {text!r}") from None


def _config(args) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        if isinstance(v, complex):
            v = [v.real, v.imag]
        cfg[k] = v
    return cfg


def _envelope(args, payload) -> dict:
    return {"version": version_string(), "config": _config(args), **payload}


def _jsonable(x):
    from .ensembles import _jsonable as conv
    return conv(x)


def _out_path(args, name):
    base = Path(getattr(args, "out", None) or ".")
    if base.suffix:
        return base
    base.mkdir(parents=True, exist_ok=True)
    return base / name


def _emit_json(args, payload, name="report.json"):
    text = json.dumps(_jsonable(_envelope(args, payload)), indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        path = _out_path(args, name)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path, header, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(CSV_FMT % v for v in r) + "\n")


def _complex_rows(z):
    z = np.asarray(z, dtype=complex)
    return np.column_stack([z.real, z.imag])


def _read_vector_csv(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                continue  # header
            rows.append(complex(vals[0], vals[1] if len(vals) > 1 else 0.0))
    return np.array(rows)


def _load_digraph(args):
    from .digraph import from_dense, from_json, read_matrix_csv
    from .sampler import chain_sample
    if getattr(args, "input", None):
        p = Path(args.input)
        if p.suffix == ".json":
            obj = json.loads(p.read_text())
            if "digraphs" in obj:
                obj = obj["digraphs"][0]
            return from_json(obj)
        M = read_matrix_csv(str(p))
        d = int(M.sum(axis=1)[0])
        return from_dense(M, d)
    if args.n is None or args.d is None:
        raise UsageError("either --in or both --n and --d are required")
    return chain_sample(args.n, args.d, rng=RngStream(args.seed))


# -- subcommands -----------------------------------------------------------------

def cmd_sample(args):
    from .digraph import to_json, write_matrix_csv
    from .sampler import chain_sample, enumerate_regular, rejection_sample
    st = RngStream(args.seed)
    if args.method == "enumerate":
        gs = enumerate_regular(args.n, args.d)
    elif args.method == "chain":
        gs = [chain_sample(args.n, args.d, steps=args.steps, rng=st.child(k)) for k in range(args.count)]
    else:
        gs = [rejection_sample(args.n, args.d, rng=st.child(k), max_tries=args.max_tries)
              for k in range(args.count)]
    if args.out and str(args.out).endswith(".csv"):
        if len(gs) != 1:
            raise UsageError("CSV output holds a single matrix; use --count 1 or JSON")
        with open(args.out, "w") as fh:
            write_matrix_csv(gs[0].dense, fh)
        return 0
    _emit_json(args, {"count": len(gs), "digraphs": [to_json(g) for g in gs]}, "sample.json")
    return 0


def cmd_spectrum(args):
    from .digraph import read_matrix_csv
    from .spectral import eigenvalues, log_potential, singular_values, stieltjes_g
    M = read_matrix_csv(args.input)
    ops = [o.strip() for o in args.ops.split(",") if o.strip()]
    out = {}
    outdir = Path(args.out or ".")
    for op in ops:
        if op == "eigs":
            mu = eigenvalues(M)
            if args.out:
                outdir.mkdir(parents=True, exist_ok=True)
                _write_csv(outdir / "eigenvalues.csv", ["re", "im"], _complex_rows(mu.atoms))
            out["eigenvalues"] = np.asarray(mu.atoms, dtype=complex)
        elif op == "svs":
            out["singular_values"] = singular_values(M).sorted_desc
        elif op == "g":
            out["g"] = stieltjes_g(M, args.z, args.w, route="sv")
        elif op == "logpot":
            out["log_potential"] = log_potential(eigenvalues(M), args.z)
        else:
            raise UsageError(f"unknown op {op!r}")
    _emit_json(args, out, "spectrum.json")
    return 0


def cmd_regularity(args):
    from . import regularity as R
    A = _load_digraph(args)
    st = RngStream(args.seed, 1)
    if args.property == "codeg":
        rep = R.check_codegree(A)
    elif args.property == "edge":
        n0 = args.n0 if args.n0 is not None else min(A.n, R.discrepancy_n0(A.n, A.d, args.delta, args.C))
        rep = R.check_discrepancy(A, n0, args.delta, budget=args.budget, rng=st)
    elif args.property == "expand":
        rep = R.check_expansion(A, args.kappa, budget=args.budget, rng=st)
    else:
        rep = R.verify_expansion_consequences(A, args.kappa, budget=args.budget, rng=st)
    _emit_json(args, {"report": rep.to_dict()}, "regularity.json")
    return 0 if rep.passed else 1


def cmd_netgeom(args):
    from . import netgeom as G
    if args.input:
        x = _read_vector_csv(args.input)
    else:
        gen = RngStream(args.seed).generator()
        x = gen.standard_normal(args.n) + 1j * gen.standard_normal(args.n)
    u = G.UnitVector.from_array(x, project=args.op in ("net", "bimodal") or args.project)
    n = u.n
    if args.op == "q":
        q, lam = G.concentration_function(u, args.rho, return_center=True)
        payload = {"Q": q, "center": lam}
    elif args.op == "flat":
        c = G.flatness_certificate(u, args.m, args.rho)
        payload = {"member": c.member, "lambda": c.lam, "support": (np.asarray(c.support) + 1).tolist(),
                   "residual": c.residual, "method": c.method}
    elif args.op == "net":
        net = G.build_flat_net(n, args.m, args.rho)
        payload = {"cardinality": net.cardinality, "bound": net.cardinality_bound(),
                   "distance": float(net.distances(u.components[None, :])[0])}
    else:
        J1, J2, J1p, info = G.bimodal_sets(u, args.m, args.rho)
        payload = {"J1": (J1 + 1).tolist(), "J2": (J2 + 1).tolist(), "J1_prime": (J1p + 1).tolist(),
                   "info": info}
    _emit_json(args, payload, "netgeom.json")
    return 0


def cmd_circlaw(args):
    from .ensembles import circular_law_check, interlacing_ks, regular_samples
    rows = []
    clouds = []
    for k, A in enumerate(regular_samples(args.n, args.d, args.samples, RngStream(args.seed))):
        r = circular_law_check(A)
        clouds.append(r["eigenvalues"])
        rows.append({"sample": k, "radial_ks": r["radial_ks"], "angular_ks": r["angular_ks"],
                     "interlacing_ks": interlacing_ks(A, 0)})
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        ev = np.concatenate(clouds)
        _write_csv(outdir / "eigenvalues.csv", ["re", "im"], _complex_rows(ev))
    ok = all(r["radial_ks"] <= args.tol and r["angular_ks"] <= args.tol for r in rows)
    _emit_json(args, {"samples": rows, "passed": ok}, "circlaw.json")
    return 0 if ok else 1


def cmd_ssv(args):
    from .ensembles import ssv_tail
    rep = ssv_tail(args.n, args.d, args.z, samples=args.samples, rng=RngStream(args.seed))
    ok = rep.details["min_plain"] > 1e-10 and rep.details["min_shifted_normalized"] >= args.n ** -2.0
    rep.passed = ok
    _emit_json(args, {"report": rep.to_dict()}, "ssv.json")
    if args.out:
        _write_csv(_out_path(args, "ssv.csv"), ["sample", "s_n"],
                   [[k, v] for k, v in enumerate(rep.details["per_sample"])])
    return 0 if ok else 1


def cmd_wegner(args):
    from .ensembles import wegner_profile
    etas = [0.02 * k for k in range(1, 51)]
    rep = wegner_profile(args.n, args.d, args.z, etas, args.samples, RngStream(args.seed), C=args.C)
    _emit_json(args, {"report": rep.to_dict()}, "wegner.json")
    return 0 if rep.passed else 1


def cmd_compare(args):
    from .ensembles import compare_linear_stat, compare_stieltjes, tent
    st = RngStream(args.seed)
    if args.stat == "stieltjes":
        rep = compare_stieltjes(args.n, args.d, args.z, args.w, args.samples, st)
    else:
        rep = compare_linear_stat(args.n, args.d, args.z, tent(), args.samples, st)
    _emit_json(args, {"report": rep.to_dict()}, "compare.json")
    return 0 if rep.passed in (None, True) else 1


def cmd_factor(args):
    from .digraph import read_matrix_csv
    from .factor import factor_probability, find_regular_factor
    if args.prob:
        if None in (args.n, args.p, args.delta):
            raise UsageError("--prob needs --n, --p and --delta")
        rep = factor_probability(args.n, args.p, args.delta, args.samples, RngStream(args.seed))
        _emit_json(args, {"estimate": rep.estimate, "successes": rep.successes,
                          "samples": rep.samples, "d": rep.d, "fitted_c": rep.fitted_c}, "factor.json")
        return 0
    if not args.input or args.d is None:
        raise UsageError("factor needs --in and --d (or --prob)")
    B = read_matrix_csv(args.input)
    res = find_regular_factor(B, args.d)
    payload = {"exists": res.exists, "flow_value": res.flow_value,
               "certificate": None if res.certificate is None else [t + 1 for t in res.certificate],
               "deficit": res.deficit,
               "factor": None if res.factor is None else (res.factor.out_adj + 1).tolist()}
    _emit_json(args, payload, "factor.json")
    return 0


def cmd_accept(args):
    from .acceptance import run_suite
    results = run_suite(args.level, seed=args.seed, only=args.only)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    _emit_json(args, {"results": [r.to_dict() for r in results],
                      "passed": all(r.passed for r in results if r.binding)}, "acceptance.json")
    return 0 if all(r.passed for r in results if r.binding) else 1


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regdigraph", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, out=True):
        if seed:
            sp.add_argument("--seed", type=int, default=default_seed())
        if out:
            sp.add_argument("--out", default=None, help="output file or directory")

    s = sub.add_parser("sample", help="draw elements of A(n, d)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--method", choices=["chain", "reject", "enumerate"], default="chain")
    s.add_argument("--steps", type=int, default=None)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--max-tries", type=int, default=10**6)
    common(s)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("spectrum", help="spectral statistics of a matrix")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--z", type=parse_complex, default=0j)
    s.add_argument("--w", type=parse_complex, default=1j)
    s.add_argument("--ops", default="eigs,svs")
    common(s, seed=False)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("regularity", help="codegree / discrepancy / expansion checks")
    s.add_argument("--in", dest="input", default=None)
    s.add_argument("--n", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--property", choices=["codeg", "edge", "expand", "expand-consequences"],
                   required=True)
    s.add_argument("--kappa", type=float, default=0.4)
    s.add_argument("--n0", type=int, default=None)
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--C", type=float, default=8.0)
    s.add_argument("--budget", type=int, default=10**4)
    common(s)
    s.set_defaults(func=cmd_regularity)

    s = sub.add_parser("netgeom", help="concentration function, flatness, nets, bimodal sets")
    s.add_argument("--in", dest="input", default=None, help="CSV of (re, im) rows")
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--op", choices=["q", "flat", "net", "bimodal"], required=True)
    s.add_argument("--project", action="store_true", help="remove the mean before normalizing")
    common(s)
    s.set_defaults(func=cmd_netgeom)

    for name, fn, hlp in (("circlaw", cmd_circlaw, "eigenvalue cloud vs the circular law"),
                          ("ssv", cmd_ssv, "smallest singular value tail"),
                          ("wegner", cmd_wegner, "small singular value profile"),
                          ("compare", cmd_compare, "ensemble comparisons")):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("--n", type=int, required=True)
        s.add_argument("--d", type=int, required=True)
        s.add_argument("--samples", type=int, default=1)
        if name != "circlaw":
            s.add_argument("--z", type=parse_complex, required=True)
        else:
            s.add_argument("--tol", type=float, default=0.05)
        if name == "compare":
            s.add_argument("--stat", choices=["stieltjes", "linear"], default="stieltjes")
            s.add_argument("--w", type=parse_complex, default=1j)
        if name == "wegner":
            s.add_argument("--C", type=float, default=10.0)
        common(s)
        s.set_defaults(func=fn)

    s = sub.add_parser("factor", help="d-regular factors")
    s.add_argument("--in", dest="input", default=None)
    s.add_argument("--d", type=int)
    s.add_argument("--prob", action="store_true")
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--samples", type=int, default=100)
    common(s)
    s.set_defaults(func=cmd_factor)

    s = sub.add_parser("accept", help="run the acceptance suite")
    s.add_argument("--level", choices=["fast", "full"], default="fast")
    s.add_argument("--only", type=int, nargs="*", default=None)
    common(s)
    s.set_defaults(func=cmd_accept)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"regdigraph: error: {exc}\n")
        return 2
    except (RegDigraphError, OSError) as exc:
        sys.stderr.write(f"regdigraph: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
