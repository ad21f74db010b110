"""Command-line entry point.

Exit codes: 0 success or verified, 2 certificate or check failed, 1 usage
or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import constructions, io, partition, qquery, reduction, spectral, tiling
from ._rng import stream
from .core import boundedness, density, verify
from .errors import ALDCError

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _emit(args, report: dict, lines: list[str]):
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2, default=_jsonable))
    else:
        print("\n".join(lines))


def _fmt(x) -> str:
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def cmd_gen(args) -> int:
    kind = args.kind
    if kind == "hypercube":
        code = constructions.hypercube(args.d)
    elif kind == "perturbed":
        code = constructions.perturbed_hypercube(args.d, args.sigma, args.seed)
    elif kind == "basis":
        code = constructions.basis_code(args.d)
    elif kind == "random":
        code = constructions.random_code(args.d, args.n, args.q, args.alpha, args.seed)
    else:
        code = constructions.random_simple_code(args.d, args.n, args.alpha, args.seed)
    if args.output:
        io.save(code, args.output)
        report = {"kind": kind, "d": code.d, "n": code.n, "q": code.q,
                  "total_matched": code.total_matched, "output": args.output}
        _emit(args, report, [f"wrote {kind} code (n={code.n}, d={code.d}, q={code.q}) to {args.output}"])
    else:
        sys.stdout.write(io.render(code))
    return EXIT_OK


def cmd_verify(args) -> int:
    code = io.load(args.file)
    rep = verify(code, args.alpha)
    lines = [
        f"n={code.n} d={code.d} q={code.q}",
        f"achieved alpha = {_fmt(rep.achieved_alpha)} (claim {_fmt(args.alpha)})",
        f"density = {_fmt(rep.density)}",
        f"simple = {rep.simple}",
        f"pair lengths in [{_fmt(rep.length_min)}, {_fmt(rep.length_max)}]",
        f"tuples below claim: {len(rep.below_claim)}",
        "PASS" if rep.passed else "FAIL",
    ]
    _emit(args, rep.to_dict(), lines)
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_reduce(args) -> int:
    code = io.load(args.file)
    out, trace = reduction.reduce_to_simple(code, args.k, args.alpha)
    report = {"trace": trace.to_dict()}
    if args.bucket:
        out = reduction.bucket_to_2bounded(out)
        report["bucketed"] = {"total_matched": out.total_matched, "boundedness": list(boundedness(out))}
    if args.output:
        io.save(out, args.output)
        report["output"] = args.output
    lines = [
        f"k = {trace.k}",
        f"alpha {_fmt(trace.alpha_in)} -> {_fmt(trace.alpha_out)} (guaranteed {_fmt(trace.alpha_guaranteed)})",
        f"density {_fmt(trace.delta_in)} -> {_fmt(trace.delta_out)} (lower bound {_fmt(trace.delta_lower_bound)})",
        f"points {trace.n_in} -> {trace.n_out}, step-1 removals {trace.pairs_removed_step1}",
    ] + [f"warning: {w}" for w in trace.warnings]
    _emit(args, report, lines)
    return EXIT_OK


def cmd_certify_cut(args) -> int:
    code = io.load(args.file)
    cert = partition.recursive_cut_certificate(code, args.budget, args.seed, args.alpha)
    report = cert.to_dict()
    alpha = cert.extra["alpha"]
    report["bound_chain"] = partition.general_bound_chain(alpha, density(code), code.d)
    lines = [
        f"c = {_fmt(partition.cut_constant(alpha, code.d))}",
        f"edges {cert.total_edges} of {cert.graph_edges}, bound {_fmt(cert.edge_bound)}",
        f"nodes {len(cert.nodes)}",
        "VERIFIED" if cert.verified else f"FAILED: {cert.failure}",
    ]
    _emit(args, report, lines)
    return EXIT_OK if cert.verified else EXIT_FAILED


def cmd_certify_tiling(args) -> int:
    code = io.load(args.file)
    res = tiling.large_alpha_certificate(code, args.eps, args.t, args.retries, args.seed, args.kappa, args.alpha)
    lines = [
        f"alpha = {_fmt(res.alpha)}, kappa = {_fmt(res.kappa)}",
        f"per-edge good probability bound = {_fmt(res.probability_bound)}",
        f"good edges {res.good_edges} of {res.bucketed_edges} bucketed ({res.input_edges} input), rounds {res.rounds}",
        f"implied bound n >= 2^{_fmt(res.log2_implied_bound)}",
        "VERIFIED" if res.verified else f"FAILED: {res.failure}",
    ]
    _emit(args, res.to_dict(), lines)
    return EXIT_OK if res.verified else EXIT_FAILED


def cmd_spectral(args) -> int:
    code = io.load(args.file)
    rep = spectral.trace_inequality_check(code)
    report = rep.to_dict()
    ok = rep.holds
    lines = [
        f"sum ||F^(e_i)||_S1^2 = {_fmt(rep.lhs)}",
        f"2 ln(2en) n^2       = {_fmt(rep.rhs)}",
        f"holds = {rep.holds}",
    ]
    try:
        wit = [spectral.matching_witness_bound(code, i) for i in range(code.d)]
    except ALDCError as exc:
        report["witness"] = None
        lines.append(f"witness skipped: {exc}")
    else:
        report["witness"] = [w.to_dict() for w in wit]
        certified = all(w.certified for w in wit)
        ok = ok and certified
        lines.append(f"matching witnesses certified = {certified}")
    _emit(args, report, lines)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_qquery(args) -> int:
    code = io.load(args.file)
    delta = density(code)
    m = args.m if args.m is not None else qquery.default_sample_size(code.n, delta, code.q)
    counts, checks = [], []
    for trial in range(args.samples):
        subset = np.sort(stream(args.seed, trial).choice(code.n, size=m, replace=False))
        k = qquery.covered_direction_count(code, subset)
        counts.append(k)
        if k:
            w = qquery.witness_matrix(code, subset)
            checks.append(qquery.rank_bound_check(w))
    ok = all(c.holds and c.chain_ok for c in checks)
    report = {
        "m": m, "trials": args.samples, "density": delta,
        "coverage": counts, "mean_coverage": float(np.mean(counts)) if counts else 0.0,
        "rank_checks": [c.to_dict() for c in checks], "all_hold": ok,
    }
    if code.q >= 2:
        report["bound_chain"] = qquery.qquery_bound_chain(verify(code, 0).achieved_alpha, delta, code.d, code.q)
    lines = [f"sample size m = {m}", f"mean covered directions = {_fmt(report['mean_coverage'])}",
             f"rank lemma holds on {sum(c.holds for c in checks)} of {len(checks)} witnesses"]
    _emit(args, report, lines)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_bound(args) -> int:
    th = args.theorem
    need = {"general": ("alpha", "delta", "d"), "bounded": ("alpha", "delta", "d", "c"),
            "large-alpha": ("alpha", "delta", "d", "eps", "t"), "qquery": ("alpha", "delta", "d", "q"),
            "one-query": ("alpha", "delta", "d")}[th]
    missing = [f"--{p}" for p in need if getattr(args, p) is None]
    if missing:
        raise _UsageError(f"bound --theorem {th} needs {' '.join(missing)}")
    a, dl, d = args.alpha, args.delta, args.d
    if th == "general":
        chain = partition.general_bound_chain(a, dl, d, not args.non_simple)
    elif th == "bounded":
        chain = spectral.bounded_code_bound_chain(a, dl, args.c, d)
    elif th == "large-alpha":
        kappa = 2 * math.pi if args.kappa is None else args.kappa
        chain = tiling.large_alpha_bound_chain(a, dl, d, args.eps, args.t, kappa)
    elif th == "qquery":
        chain = qquery.qquery_bound_chain(a, dl, d, args.q)
    else:
        chain = spectral.one_query_bound_chain(a, dl, d)
    lines = [_fmt(float(chain["bound"]))] + [f"  {k} = {_fmt(v)}" for k, v in chain.items() if k != "bound"]
    _emit(args, chain, lines)
    return EXIT_OK


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aldc", description="Approximate 2-query and q-query LDC toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="print a machine-readable report")
        sp.add_argument("--seed", type=int, default=0)
        return sp

    g = common(sub.add_parser("gen", help="generate a code"))
    g.add_argument("kind", choices=["hypercube", "perturbed", "basis", "random", "random-simple"])
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--n", type=int, default=32)
    g.add_argument("--q", type=int, default=2)
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--sigma", type=float, default=0.05)
    g.add_argument("-o", "--output")

    v = common(sub.add_parser("verify", help="check a code file at a claimed alpha"))
    v.add_argument("file")
    v.add_argument("--alpha", type=float, required=True)

    r = common(sub.add_parser("reduce", help="reduce a 2-query code to a simple code"))
    r.add_argument("file")
    r.add_argument("--k", type=int)
    r.add_argument("--alpha", type=float)
    r.add_argument("--bucket", action="store_true", help="also bucket to a 2-bounded code")
    r.add_argument("-o", "--output")

    c = common(sub.add_parser("certify-cut", help="recursive random-cut certificate"))
    c.add_argument("file")
    c.add_argument("--alpha", type=float)
    c.add_argument("--budget", type=int)

    t = common(sub.add_parser("certify-tiling", help="tiling certificate for large alpha"))
    t.add_argument("file")
    t.add_argument("--eps", type=float, default=0.01)
    t.add_argument("--t", type=int, default=500)
    t.add_argument("--kappa", type=float)
    t.add_argument("--alpha", type=float)
    t.add_argument("--retries", type=int, default=16)

    s = common(sub.add_parser("spectral", help="trace-norm inequality and matching witnesses"))
    s.add_argument("file")

    q = common(sub.add_parser("qquery", help="rank lemma on random subsets"))
    q.add_argument("file")
    q.add_argument("--samples", type=int, default=20, help="number of random subsets")
    q.add_argument("--m", type=int, help="subset size (default from density)")

    b = common(sub.add_parser("bound", help="evaluate a lower bound on n"))
    b.add_argument("--theorem", required=True, choices=["general", "bounded", "large-alpha", "qquery", "one-query"])
    for name in ("alpha", "delta", "c", "eps", "kappa"):
        b.add_argument(f"--{name}", type=float)
    for name in ("d", "q", "t"):
        b.add_argument(f"--{name}", type=int)
    b.add_argument("--non-simple", action="store_true")
    return p


_COMMANDS = {
    "gen": cmd_gen, "verify": cmd_verify, "reduce": cmd_reduce, "certify-cut": cmd_certify_cut,
    "certify-tiling": cmd_certify_tiling, "spectral": cmd_spectral, "qquery": cmd_qquery, "bound": cmd_bound,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ALDCError, OSError, _UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
