"""Command-line surface: ratio, certify, round, brute, estimate-k.

Every run writes a JSON manifest (subcommand, flags, seed, versions, wall
time) alongside its outputs, so any number printed here can be reproduced
from the manifest alone.

Exit codes: 0 success (certify: CERTIFIED), 2 certify EXHAUSTED,
3 validation failure (including a failed audit), 4 parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np
import scipy

from . import __version__, kernels
from .configspace import ConfigParseError, load_configuration
from .cutratio import ratio_report
from .instances import (
    GraphParseError,
    ValidationError,
    brute_force_opt,
    load_graph,
    load_solution,
    save_partition,
    sdp_objective,
)
from .rounding import round_pipeline

EXIT_OK = 0
EXIT_EXHAUSTED = 2
EXIT_VALIDATION = 3
EXIT_PARSE = 4


def _write_manifest(path: str, subcommand: str, args: argparse.Namespace,
                    wall: float, extra: dict | None = None) -> None:
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {
        "subcommand": subcommand,
        "flags": flags,
        "seed": flags.get("seed"),
        "versions": {
            "max3section": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernel_backend": kernels.BACKEND,
        },
        "wall_seconds": wall,
    }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, default=str)
        fh.write("\n")


def cmd_ratio(args) -> int:
    start = time.monotonic()
    try:
        config = load_configuration(args.config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep = ratio_report(config)
    if args.fixed_order:
        print("undefined (g=0)" if rep.fixed_order_ratio is None
              else f"{rep.fixed_order_ratio:.6f}")
    else:
        print(f"f                     = {rep.f:.12f}")
        print(f"g                     = {rep.g:.12f}")
        ratio = "undefined (g=0)" if rep.ratio is None else f"{rep.ratio:.12f}"
        print(f"ratio f/g             = {ratio}")
        fr = ("undefined (g=0)" if rep.fixed_order_ratio is None
              else f"{rep.fixed_order_ratio:.12f}")
        print(f"fixed-order f         = {rep.fixed_order_f:.12f}")
        print(f"fixed-order ratio     = {fr}")
        print(f"marginal lower bound  = {rep.lower_bound_marginal:.12f}")
        print(f"feasible              = {'yes' if rep.feasible else 'no'}")
        for v in rep.violations:
            print(f"  violated: {v}")
    _write_manifest(args.manifest or "ratio.manifest.json", "ratio", args,
                    time.monotonic() - start)
    return EXIT_OK


def cmd_certify(args) -> int:
    from .certifier import (
        Box,
        CertifyParams,
        audit_certificate,
        certify,
        load_region,
        read_certificate,
        write_boxes,
        write_certificate,
    )

    start = time.monotonic()
    try:
        region = load_region(args.region) if args.region else None
    except (FileNotFoundError, ValueError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        params = CertifyParams(
            rho=args.rho, delta_prime=args.delta_prime, eta1=args.eta1,
            eta2=args.eta2, tau_num=args.tau_num, max_depth=args.max_depth,
            region=region, workers=args.workers)
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.audit:
        try:
            records = read_certificate(args.audit)
        except (FileNotFoundError, ValueError) as exc:
            print(f"parse error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        result = audit_certificate(records, params, args.probes, args.seed)
        wall = time.monotonic() - start
        _write_manifest(args.audit + ".audit.manifest.json", "certify", args,
                        wall, {"audit_ok": result.ok, "failure": result.failure})
        if result.ok:
            print(f"AUDIT PASSED: {result.eliminated_boxes} eliminated boxes, "
                  f"{result.probes_in_region} member probes, no counterexample")
            return EXIT_OK
        print(f"AUDIT FAILED: {result.failure}")
        if result.witness:
            print(f"  witness: {result.witness}")
        return EXIT_VALIDATION

    result = certify(params)
    wall = time.monotonic() - start
    write_certificate(result.records, args.out)
    if result.survivors:
        write_boxes(result.survivors, args.out + ".survivors")
    _write_manifest(args.out + ".manifest.json", "certify", args, wall, {
        "status": result.status,
        "stats": result.stats,
        "records": len(result.records),
        "survivors": len(result.survivors),
    })
    print(f"{result.status}: {len(result.records)} records, "
          f"{len(result.survivors)} survivors, {wall:.1f}s")
    if result.status == "CERTIFIED":
        print(f"  every box eliminated: ratio >= {params.rho} on the region "
              f"(g >= {params.delta_prime})")
        return EXIT_OK
    print(f"  surviving boxes written to {args.out}.survivors")
    return EXIT_EXHAUSTED


def cmd_round(args) -> int:
    start = time.monotonic()
    try:
        graph = load_graph(args.graph)
        solution = load_solution(args.solution)
    except (FileNotFoundError, GraphParseError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        res = round_pipeline(graph, solution, args.epsilon,
                             args.max_attempts, args.seed)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    value = graph.cut_value(res.partition)
    sdp = sdp_objective(graph, solution)
    print(f"cut value      = {value:.12g}")
    print(f"sdp objective  = {sdp:.12g}")
    ratio = value / sdp if sdp > 0 else float("nan")
    print(f"ratio          = {ratio:.6f}")
    print(f"attempts       = {res.attempts}"
          + (" (exhausted; best attempt rebalanced)" if res.exhausted else ""))
    if args.out:
        save_partition(res.partition, args.out)
    _write_manifest((args.out or "round") + ".manifest.json", "round", args,
                    time.monotonic() - start,
                    {"cut_value": value, "sdp_objective": sdp})
    return EXIT_OK


def cmd_brute(args) -> int:
    start = time.monotonic()
    try:
        graph = load_graph(args.graph)
    except (FileNotFoundError, GraphParseError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        value, part = brute_force_opt(graph)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"optimum = {value:.12g}")
    print("labels  = " + " ".join(str(l) for l in part.labels))
    if args.out:
        save_partition(part, args.out)
    _write_manifest((args.out or "brute") + ".manifest.json", "brute", args,
                    time.monotonic() - start, {"optimum": value})
    return EXIT_OK


def cmd_estimate_k(args) -> int:
    from .kestimate import estimate_mu_k

    start = time.monotonic()
    try:
        est = estimate_mu_k(args.k, starts=args.starts, seed=args.seed,
                            delta_prime=args.delta_prime)
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    flat = " ".join(f"{v:.12g}" for v in est.argmin.joint.reshape(-1))
    print(f"k={est.k} starts={est.starts} min_ratio={est.min_ratio:.6f}")
    print(f"witness_joint = {flat}")
    _write_manifest("estimate-k.manifest.json", "estimate-k", args,
                    time.monotonic() - start, {"min_ratio": est.min_ratio})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="max3section",
                                description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("ratio", help="evaluate f, g, and f/g for a configuration")
    r.add_argument("config", help="configuration file (12 numbers on one line)")
    r.add_argument("--fixed-order", action="store_true",
                   help="print only the fixed-generation-order ratio")
    r.add_argument("--manifest", default=None)
    r.set_defaults(func=cmd_ratio)

    c = sub.add_parser("certify", help="branch-and-bound ratio certification")
    c.add_argument("--rho", type=float, default=0.80)
    c.add_argument("--delta-prime", type=float, default=0.01)
    c.add_argument("--eta1", type=float, default=0.05)
    c.add_argument("--eta2", type=float, default=0.25)
    c.add_argument("--tau-num", type=float, default=1e-8)
    c.add_argument("--max-depth", type=int, default=12)
    c.add_argument("--region", default=None,
                   help="region file (14 interval endpoints)")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--out", default="certificate.txt")
    c.add_argument("--audit", default=None, metavar="CERTIFICATE",
                   help="audit an existing certificate instead of certifying")
    c.add_argument("--probes", type=int, default=64,
                   help="audit probes per eliminated box")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_certify)

    d = sub.add_parser("round", help="round an SDP solution to a balanced partition")
    d.add_argument("graph")
    d.add_argument("solution")
    d.add_argument("--epsilon", type=float, default=0.1)
    d.add_argument("--max-attempts", type=int, default=100)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", default=None, help="partition output file")
    d.set_defaults(func=cmd_round)

    b = sub.add_parser("brute", help="exact optimum by balanced enumeration")
    b.add_argument("graph")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_brute)

    e = sub.add_parser("estimate-k", help="estimate the ratio infimum for k parts")
    e.add_argument("--k", type=int, default=3)
    e.add_argument("--starts", type=int, default=200)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--delta-prime", type=float, default=0.01)
    e.set_defaults(func=cmd_estimate_k)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
