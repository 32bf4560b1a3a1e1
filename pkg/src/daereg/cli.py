"""Command line interface: ``daereg analyze|regularize|bench|validate``."""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import exactla as la
from .io import DaeFileError, dae_to_json, dump_json, load_dae
from .jacobian import iot_matrix, to_linear_symbolic
from .matroid import lm_rank, trank
from .onecm import validate_vanishing_pair
from .structural import format_sigma
from .symexpr import NEG_INF
from .transform import Status, analyze, float_probe, regularize, retrieval_system
from .validation import check_priority, check_rational_matrix

EXIT_REGULAR = 0
EXIT_USAGE = 1
EXIT_SINGULAR = 2
EXIT_STRUCT_SINGULAR = 3
EXIT_INCONCLUSIVE = 4

CONVENTIONS = {
    "duals": "elementwise-smallest optimal (p, q) with q_j - p_i >= sigma(i, j)",
    "jacobian": "entry (i, j) = d f_i / d x_j^(q_j - p_i)",
    "canonical_form": "flattened sums/products, sorted children, like terms merged; "
                      "arithmetic expansion only",
}


def _substitution_rank(L, seed: int, trials: int = 3) -> int:
    rng = random.Random(seed)
    best = 0
    for _ in range(trials):
        vals = [Fraction(rng.randint(1, 10 ** 9), rng.randint(1, 10 ** 6)) for _ in L.terms]
        best = max(best, la.rank(L.evaluate(vals)))
    return best


def cmd_analyze(args) -> int:
    df = load_dae(args.source)
    dae = df.target
    a = analyze(dae)
    report: dict = {"schema": 1, "name": dae.name, "n": dae.n, "conventions": CONVENTIONS,
                    "sigma": [[None if x is NEG_INF else x for x in row] for row in a.sigma]}
    if a.duals is None:
        report.update(status="StructurallySingular", delta_hat=None)
        code = EXIT_STRUCT_SINGULAR
    else:
        L = to_linear_symbolic(a.jacobian)
        report.update(
            p=list(a.duals.p), q=list(a.duals.q), delta_hat=a.duals.delta_hat,
            lsm_symbols=a.lsm_symbols, compressed_symbols=a.compressed_symbols,
            coefficient_ranks=a.coefficient_ranks, onecm_symbols=a.onecm.m,
            rank_1cm=a.rank.rank, lsm_substitution_rank=_substitution_rank(L, args.seed),
        )
        code = EXIT_REGULAR if a.regular else EXIT_SINGULAR
        report["status"] = "regular" if a.regular else "singular"
        if a.regular and args.probe:
            report["probe"] = float_probe(dae, a.jacobian, seed=args.seed)
            mr = report["probe"]["max_rank"]
            if mr is not None and mr < dae.n:
                report["status"] = "inconclusive"
                code = EXIT_INCONCLUSIVE
    if df.layer is not None:
        supp, N = iot_matrix(df.layer)
        report["layer_mixed"] = {"term_rank": trank(supp, N, N).rank,
                                 "rank": lm_rank(df.layer.lm).rank - df.layer.extra_rank,
                                 "size": N}
    if args.format == "json":
        print(dump_json(report))
    else:
        print(f"DAE {dae.name or args.source}: n = {dae.n}")
        print("sigma (* = -inf):")
        print(format_sigma(a.sigma))
        if a.duals is None:
            print("structurally singular: no perfect matching")
        else:
            print(f"p = {list(a.duals.p)}  q = {list(a.duals.q)}  delta_hat = {a.duals.delta_hat}")
            print(f"LSM symbols: {a.lsm_symbols} (compressed {a.compressed_symbols}); "
                  f"coefficient ranks {a.coefficient_ranks}")
            print(f"1CM rank: {a.rank.rank}/{dae.n} -> {report['status']}")
        if "layer_mixed" in report:
            lm = report["layer_mixed"]
            print(f"layered mixed approximation: term-rank {lm['term_rank']}/{lm['size']}, "
                  f"rank {lm['rank']}")
        print(f"conventions: duals = {CONVENTIONS['duals']}")
    return code


def cmd_regularize(args) -> int:
    df = load_dae(args.source)
    dae = df.target
    res = regularize(dae, max_iters=args.max_iters, probe=args.probe, seed=args.seed)
    trace = res.to_json()
    trace["conventions"] = CONVENTIONS
    trace["name"] = dae.name
    if res.status is Status.STRUCTURALLY_SINGULAR:
        code = EXIT_STRUCT_SINGULAR
    elif res.status is Status.REGULARIZED:
        code = EXIT_REGULAR
    else:
        code = EXIT_INCONCLUSIVE
    if code != EXIT_STRUCT_SINGULAR:
        if args.out:
            Path(args.out).write_text(dump_json(dae_to_json(res.dae)) + "\n")
        if args.retrieval and res.status is Status.REGULARIZED:
            Path(args.retrieval).write_text(dump_json(dae_to_json(retrieval_system(res))) + "\n")
    if args.trace:
        Path(args.trace).write_text(dump_json(trace) + "\n")
    if args.format == "json":
        print(dump_json(trace))
    else:
        print(f"status: {res.status.value}")
        print(f"delta_hat trajectory: {res.delta_hats}")
        print(f"transforms applied: {res.iterations}")
        for k, t in enumerate(res.trace):
            if t.pair is not None:
                print(f"  step {k + 1}: rank_1cm {t.rank}, zero block "
                      f"{len(t.pair.rows)}x{len(t.pair.cols)}")
        if res.probe:
            print(f"probe: {res.probe}")
    return code


def _parse_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    if not sep:
        return range(int(lo), int(lo) + 1)
    return range(int(lo), int(hi) + 1)


def cmd_bench(args) -> int:
    rows = []
    ns = _parse_range(args.n_range) if args.preset == "robot" else [None]
    for n in ns:
        spec = f"robot:N={n}" if n is not None else args.preset
        dae = load_dae(spec).target
        t0 = time.perf_counter()
        res = regularize(dae, max_iters=args.max_iters)
        ms = (time.perf_counter() - t0) * 1000.0
        first = res.trace[0] if res.trace else None
        rows.append({"preset": args.preset, "n": n, "size": dae.n,
                     "m": first.onecm_symbols if first else None,
                     "delta_hat_initial": first.delta_hat if first else None,
                     "iterations": res.iterations, "status": res.status.value,
                     "millis": round(ms, 3)})
    if args.json or args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'preset':<10}{'N':>4}{'size':>6}{'m':>5}{'dhat':>6}{'iters':>7}{'ms':>12}")
        for r in rows:
            print(f"{r['preset']:<10}{str(r['n'] or '-'):>4}{r['size']:>6}{str(r['m']):>5}"
                  f"{str(r['delta_hat_initial']):>6}{r['iterations']:>7}{r['millis']:>12.1f}")
    return EXIT_REGULAR if all(r["status"] == "Regularized" for r in rows) else EXIT_INCONCLUSIVE


def cmd_validate(args) -> int:
    dae = load_dae(args.source).target
    a = analyze(dae)
    if a.duals is None:
        print("structurally singular input", file=sys.stderr)
        return EXIT_STRUCT_SINGULAR
    try:
        doc = json.loads(Path(args.pair).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DaeFileError(f"{args.pair}: {exc}") from None
    if "vanishing_pair" in doc:
        doc = doc["vanishing_pair"]
    n = dae.n
    U = check_rational_matrix(doc["U"], (n, n), name="U")
    V = check_rational_matrix(doc["V"], (n, n), name="V")
    p = check_priority(doc.get("p", a.duals.p), n, "p")
    q = check_priority(doc.get("q", a.duals.q), n, "q")
    verdict = validate_vanishing_pair(a.onecm, U, V, p, q)
    out = {"valid": verdict.ok, "reason": verdict.reason, "term_rank": verdict.term_rank}
    if args.format == "json":
        print(dump_json(out))
    else:
        print(("valid" if verdict.ok else "invalid") + f": {verdict.reason}")
    return EXIT_REGULAR if verdict.ok else EXIT_SINGULAR


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=0, help="seed for random substitutions")
    common.add_argument("--max-iters", type=int, default=None,
                        help="safety cap on transforms (default: initial delta_hat + 1)")
    common.add_argument("--probe", action=argparse.BooleanOptionalAction, default=False,
                        help="cross-check a regular verdict numerically at random points")

    ap = argparse.ArgumentParser(prog="daereg", description="Regularize DAEs via 1CM matrices.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="duals, Jacobian approximation, verdict")
    p.add_argument("source", help="DAE file (.json) or preset: robot:N=<k>, transamp, ringmod, toy, mna")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("regularize", parents=[common], help="run the regularization loop")
    p.add_argument("source")
    p.add_argument("--out", help="write the regularized DAE file here")
    p.add_argument("--retrieval", help="also write the retrieval system here")
    p.add_argument("--trace", help="write the JSON trace here")
    p.set_defaults(func=cmd_regularize)

    p = sub.add_parser("bench", parents=[common], help="time the pipeline on presets")
    p.add_argument("--preset", default="robot")
    p.add_argument("--n-range", default="1..10", help="robot sizes, e.g. 1..10")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", parents=[common], help="check a vanishing pair")
    p.add_argument("source")
    p.add_argument("pair", help="JSON with U, V and optional p, q")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (DaeFileError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
