"""Command-line front end.

    iterint coeff   --k 2 --p 4 [--j 1,0] [--q 0,1] [--basis legendre] [--t 0 --T 1] [-o table.json]
    iterint expand  --k 2 --comps 1,1 --p 4 --seed 1 [--M 10] [--integral ito]
    iterint verify  {traces,parseval,mse,all} [...]

Exit codes: 0 success, 1 a check failed, 2 usage error.  Stochastic commands
require --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .basis import BasisSystem, TimeInterval, WeightFunction
from .coeffs import KernelSpec, MultiIndex, build_table, compute_coefficient, parseval_residual
from .exact import ExactScalar
from .expansion import HypothesisError, ComponentVector, ito_expand, sample_draws, strat_expand, truncation_mse_distinct
from .identities import check_pair_trace, check_quad_traces, check_triple_traces, reports_to_csv, reports_to_json
from .oracle import MCConfig, mc_mse, mse_csv
from .rng import GENERATOR

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common(sp: argparse.ArgumentParser):
    sp.add_argument("--t", type=float, default=0.0, help="interval start")
    sp.add_argument("--T", type=float, default=1.0, help="interval end")
    sp.add_argument("--basis", choices=["legendre", "trigonometric"], default="legendre")
    sp.add_argument("--q", type=_int_list, default=None,
                    help="weight exponents q_1..q_k (innermost first), psi_l = (t - s)^q_l; default all 0")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iterint", description="Expansions of iterated Ito/Stratonovich integrals.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeff", help="coefficient table or single coefficient")
    _common(c)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--p", type=int, default=None, help="table truncation")
    c.add_argument("--j", type=_int_list, default=None, help="single multi-index j_k,...,j_1")
    c.add_argument("--engine", choices=["auto", "exact", "float"], default="auto")
    c.add_argument("-o", "--output", default=None, help="write the table JSON here instead of stdout")

    e = sub.add_parser("expand", help="sample truncated expansions")
    _common(e)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--p", type=int, default=None)
    e.add_argument("--p1", type=int, default=None, help="k=2 inner truncation")
    e.add_argument("--p2", type=int, default=None, help="k=2 outer truncation")
    e.add_argument("--comps", type=_int_list, default=None, help="components i_1,...,i_k (default 1..k)")
    e.add_argument("--m", type=int, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--M", type=int, default=1, help="number of samples (draw streams 0..M-1)")
    e.add_argument("--integral", choices=["stratonovich", "ito"], default="stratonovich")
    e.add_argument("--format", choices=["json", "csv"], default="json")

    v = sub.add_parser("verify", help="run identity, Parseval or Monte Carlo suites")
    v.add_argument("suite", choices=["traces", "parseval", "mse", "all"])
    _common(v)
    v.add_argument("--k", type=int, default=None, help="restrict to one multiplicity")
    v.add_argument("--p-grid", type=_int_list, default=None, help="trace grid (default 1,2,4,...)")
    v.add_argument("--p", type=_int_list, default=None, help="mse truncations (default 1,3,7)")
    v.add_argument("--p-max", type=int, default=30, help="parseval: check p = 0..p_max")
    v.add_argument("--comps", type=_int_list, default=None)
    v.add_argument("--N", type=int, default=4096)
    v.add_argument("--M", type=int, default=4000)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--output-dir", default=None, help="write JSON/CSV reports here")
    v.add_argument("--no-timing", action="store_true", help="omit runtime_ms from mse.csv")
    return ap


def _interval(args) -> TimeInterval:
    try:
        return TimeInterval(args.t, args.T)
    except ValueError as exc:
        raise UsageError(str(exc))


def _weights(args, k: int) -> tuple:
    qs = args.q if args.q is not None else [0] * k
    if len(qs) != k:
        raise UsageError(f"--q needs {k} exponents, got {len(qs)}")
    if any(q < 0 for q in qs):
        raise UsageError("--q exponents must be nonnegative")
    return tuple(WeightFunction.power(q) for q in qs)


def _check_k(k, allowed=(1, 2, 3, 4)):
    if k not in allowed:
        raise UsageError(f"--k must be one of {', '.join(map(str, allowed))}, got {k}")


def _write(text: str, path: str | None, out):
    if path is None:
        out.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_coeff(args, out) -> int:
    _check_k(args.k)
    iv = _interval(args)
    spec = KernelSpec(_weights(args, args.k), iv)
    basis = BasisSystem(args.basis, iv)
    if args.j is not None:
        if len(args.j) != args.k:
            raise UsageError(f"--j needs {args.k} indices, got {len(args.j)}")
        if any(j < 0 for j in args.j):
            raise UsageError("--j indices must be nonnegative")
        val = compute_coefficient(spec, basis, MultiIndex(tuple(args.j)))
        doc = {"k": args.k, "j": args.j, "basis": args.basis, "t": iv.t_start, "T": iv.t_end,
               "value": float(val)}
        if isinstance(val, ExactScalar):
            doc["exact"] = val.as_triple()
        out.write(f"{float(val)!r}\n")
        if args.output:
            _write(json.dumps(doc, sort_keys=True) + "\n", args.output, out)
        return EXIT_OK
    if args.p is None or args.p < 0:
        raise UsageError("coeff needs --p >= 0 (table) or --j (single coefficient)")
    exact = {"auto": None, "exact": True, "float": False}[args.engine]
    try:
        table = build_table(spec, basis, args.p, exact=exact)
    except ValueError as exc:
        raise UsageError(str(exc))
    _write(table.to_json() + "\n", args.output, out)
    return EXIT_OK


def cmd_expand(args, out) -> int:
    _check_k(args.k)
    if args.seed is None:
        raise UsageError("expand is stochastic and requires --seed")
    if args.M < 1:
        raise UsageError("--M must be positive")
    iv = _interval(args)
    comps = args.comps if args.comps is not None else list(range(1, args.k + 1))
    if len(comps) != args.k:
        raise UsageError(f"--comps needs {args.k} entries, got {len(comps)}")
    m = args.m if args.m is not None else max(max(comps), 1)
    try:
        cv = ComponentVector(tuple(comps), m)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.p1 is not None or args.p2 is not None:
        if args.k != 2 or args.p1 is None or args.p2 is None:
            raise UsageError("--p1/--p2 are only valid together and for --k 2")
        trunc, p_table = (args.p1, args.p2), max(args.p1, args.p2)
    else:
        p_table = args.p if args.p is not None else 0
        trunc = p_table
    if p_table < 0:
        raise UsageError("truncation must be nonnegative")
    basis = BasisSystem(args.basis, iv)
    table = build_table(KernelSpec(_weights(args, args.k), iv), basis, p_table)
    expand = strat_expand if args.integral == "stratonovich" else ito_expand
    values = []
    try:
        for stream in range(args.M):
            draws = sample_draws(args.seed, p_table, m, basis, stream=stream)
            values.append(expand(table, draws, cv, trunc))
    except HypothesisError as exc:
        raise UsageError(f"hypothesis violated: {exc}")
    if args.format == "csv":
        out.write("stream,value\n")
        for s, v in enumerate(values):
            out.write(f"{s},{v!r}\n")
    else:
        doc = {"k": args.k, "comps": comps, "p": trunc, "basis": args.basis, "integral": args.integral,
               "t": iv.t_start, "T": iv.t_end, "seed": args.seed, "generator": GENERATOR, "values": values}
        out.write(json.dumps(doc) + "\n")
    return EXIT_OK


def _default_grid(k):
    return {2: [1, 2, 4, 8, 16, 32, 64, 128], 3: [5, 10, 20, 50], 4: [5, 10, 20, 50]}[k]


def _run_traces(args, basis, out, files) -> bool:
    ks = [args.k] if args.k is not None else [2, 3, 4]
    reports = []
    for k in ks:
        _check_k(k, (2, 3, 4))
        grid = args.p_grid or _default_grid(k)
        if k == 2:
            reports.append(check_pair_trace(_weights(args, 2), basis, grid))
        elif k == 3:
            reports.extend(check_triple_traces(basis, grid, _weights(args, 3)))
        else:
            if args.q is not None and any(args.q):
                raise UsageError("quadruple traces require psi = 1 (all --q zero)")
            reports.extend(check_quad_traces(basis, grid))
    ok = True
    for r in reports:
        good = r.passed and r.monotone
        ok &= good
        out.write(f"{'PASS' if good else 'FAIL'} trace {r.identity} p={r.p_grid[-1]} gap={r.final_gap:.3e}\n")
    files["traces.json"] = reports_to_json(reports) + "\n"
    files["traces.csv"] = reports_to_csv(reports)
    return ok


def _run_parseval(args, basis, out, files) -> bool:
    ks = [args.k] if args.k is not None else [2, 3]
    lines = ["k,p,residual"]
    ok = True
    for k in ks:
        _check_k(k)
        table = build_table(KernelSpec(_weights(args, k), basis.interval), basis, args.p_max)
        res = [parseval_residual(table, p) for p in range(args.p_max + 1)]
        lines += [f"{k},{p},{r!r}" for p, r in enumerate(res)]
        nonneg = all(r >= -1e-12 for r in res)
        mono = all(b <= a + 1e-15 for a, b in zip(res, res[1:]))
        good = nonneg and mono
        ok &= good
        out.write(f"{'PASS' if good else 'FAIL'} parseval k={k} p=0..{args.p_max} residual={res[-1]:.3e}\n")
    files["parseval.csv"] = "\n".join(lines) + "\n"
    return ok


def _run_mse(args, basis, out, files) -> bool:
    if args.seed is None:
        raise UsageError("the mse suite is stochastic and requires --seed")
    k = args.k if args.k is not None else 2
    _check_k(k)
    comps = tuple(args.comps) if args.comps is not None else tuple(range(1, k + 1))
    if len(comps) != k:
        raise UsageError(f"--comps needs {k} entries")
    ps = args.p or [1, 3, 7]
    weights = _weights(args, k)
    results = []
    try:
        for p in ps:
            results.append(mc_mse(MCConfig(k, comps, p, args.N, args.M, args.seed, args.basis, basis.interval,
                                           weights)))
    except HypothesisError as exc:
        raise UsageError(f"hypothesis violated: {exc}")
    ok = True
    distinct = ComponentVector(comps, max(comps)).pairwise_distinct_nonzero()
    for r in results:
        line = f"mse k={k} p={r.p} N={r.N} M={r.M} estimate={r.estimate:.6e} se={r.std_error:.3e}"
        if distinct:
            target = truncation_mse_distinct(build_table(KernelSpec(weights, basis.interval), basis, r.p))
            good = abs(r.estimate - target) <= 3 * r.std_error
            ok &= good
            line = f"{'PASS' if good else 'FAIL'} {line} target={target:.6e}"
        else:
            line = f"INFO {line}"
        out.write(line + "\n")
    for a, b in zip(results, results[1:]):
        if b.p > a.p:
            good = a.estimate - b.estimate > 3 * np.hypot(a.std_error, b.std_error)
            ok &= good
            out.write(f"{'PASS' if good else 'FAIL'} mse decrease p={a.p}->{b.p}\n")
    files["mse.csv"] = mse_csv(results, runtime=not args.no_timing)
    return ok


def cmd_verify(args, out) -> int:
    iv = _interval(args)
    basis = BasisSystem(args.basis, iv)
    files: dict = {}
    suites = ["traces", "parseval", "mse"] if args.suite == "all" else [args.suite]
    if "mse" in suites and args.seed is None:
        raise UsageError("the mse suite is stochastic and requires --seed")
    runners = {"traces": _run_traces, "parseval": _run_parseval, "mse": _run_mse}
    ok = True
    for s in suites:
        ok &= runners[s](args, basis, out, files)
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        for name, text in files.items():
            with open(os.path.join(args.output_dir, name), "w") as fh:
                fh.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    handlers = {"coeff": cmd_coeff, "expand": cmd_expand, "verify": cmd_verify}
    try:
        return handlers[args.command](args, out)
    except UsageError as exc:
        print(f"iterint: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
