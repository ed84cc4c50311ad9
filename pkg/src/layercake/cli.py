"""``layercake`` command line: solve, gen, verify, bench.

Exit codes: 0 success, 2 protocol precondition violated, 3 unreadable input,
4 an allocation failed verification.
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from decimal import Context, Decimal
from pathlib import Path

from .core import MultiAllocation, PreconditionError, Rational, VerificationFailed
from .ef_protocols import cut_and_choose, ef_noncontiguous, moving_knife_three
from .instances import (
    Instance, InstanceError, allocation_to_dict, dumps, instance_to_dict, parse_allocation,
    parse_instance, random_instance,
)
from .prop_protocols import prop_matching, prop_power_two
from .render import render_svg
from .rw_queries import OddLayerCount, QuerySession
from .verify import check_envy_free, check_proportional, check_structure

PROTOCOLS = {
    "cut-and-choose": cut_and_choose,
    "moving-knife": moving_knife_three,
    "ef-perfect": ef_noncontiguous,
    "prop-pow2": prop_power_two,
    "prop-matching": prop_matching,
}

EXIT_OK, EXIT_PRECONDITION, EXIT_PARSE, EXIT_VERIFY = 0, 2, 3, 4

_DEC = Context(prec=20)


def decimal_str(x: Rational) -> str:
    return str(_DEC.divide(Decimal(int(x.numerator)), Decimal(int(x.denominator))))


def build_report(inst: Instance, alloc: MultiAllocation, counters=None) -> dict:
    structure = check_structure(inst.cake, alloc)
    values = alloc.values(inst.valuations)
    report = {
        "n": inst.n,
        "m": inst.m,
        "bundle_values": [
            {"agent": name, "exact": str(row[i]), "decimal": decimal_str(row[i])}
            for i, (name, row) in enumerate(zip(inst.names, values))
        ],
        "value_matrix": [[str(v) for v in row] for row in values],
        "flags": {
            **structure.as_dict(),
            "envy_free": check_envy_free(inst.valuations, alloc),
            "proportional": check_proportional(inst.valuations, alloc),
        },
        "piece_counts": alloc.piece_counts(),
    }
    if counters is not None:
        report["queries"] = dict(counters)
    return report


def solve(inst: Instance, protocol: str) -> tuple[MultiAllocation, dict]:
    if inst.m > inst.n:
        raise PreconditionError(
            f"{inst.m} layers and {inst.n} agents: no complete and feasible (non-overlapping) "
            f"solution exists when there are more layers than agents")
    session = QuerySession(inst.cake, inst.valuations)
    try:
        alloc = PROTOCOLS[protocol](session)
    except OddLayerCount as exc:
        raise PreconditionError(str(exc)) from None
    return alloc, build_report(inst, alloc, session.counters)


def _fail(code: int, kind: str, exc: Exception) -> int:
    print(f"layercake: {kind}: {exc}", file=sys.stderr)
    return code


def cmd_solve(args) -> int:
    try:
        inst = parse_instance(args.instance)
    except (OSError, InstanceError) as exc:
        return _fail(EXIT_PARSE, "cannot read instance", exc)
    try:
        alloc, report = solve(inst, args.protocol)
    except PreconditionError as exc:
        return _fail(EXIT_PRECONDITION, "precondition violated", exc)
    except VerificationFailed as exc:
        return _fail(EXIT_VERIFY, "verification failed", exc)
    report = {"protocol": args.protocol, "seed": args.seed, **report}
    text = dumps({"allocation": allocation_to_dict(inst, alloc), "report": report})
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(render_svg(alloc, inst.names, inst.extents()))
    return EXIT_OK


def cmd_gen(args) -> int:
    inst = random_instance(args.agents, args.layers, args.breakpoints, args.seed,
                           identical_pair=args.identical_pair, prefer=args.prefer)
    text = dumps(instance_to_dict(inst))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        inst = parse_instance(args.instance)
        alloc = parse_allocation(args.allocation, inst)
    except (OSError, InstanceError) as exc:
        return _fail(EXIT_PARSE, "cannot read input", exc)
    report = build_report(inst, alloc)
    sys.stdout.write(dumps(report))
    flags = report["flags"]
    return EXIT_OK if flags["feasible"] and flags["complete"] else EXIT_VERIFY


def bench_shapes(protocol: str, max_agents: int) -> list[tuple[int, int]]:
    if protocol == "cut-and-choose":
        return [(2, 2)] if max_agents >= 2 else []
    if protocol == "moving-knife":
        return [(3, 2)] if max_agents >= 3 else []
    shapes = []
    for n in range(1, max_agents + 1):
        for m in range(1, n + 1):
            if protocol == "prop-pow2" and m & (m - 1):
                continue
            shapes.append((n, m))
    return shapes


def _bench_one(job) -> dict:
    protocol, n, m, breakpoints, seed = job
    inst = random_instance(n, m, breakpoints, seed, identical_pair=protocol == "moving-knife")
    start = time.perf_counter()
    alloc, report = solve(inst, protocol)
    elapsed = time.perf_counter() - start
    return {"protocol": protocol, "n": n, "m": m, "seed": seed, **report["queries"],
            **report["flags"], "max_pieces": max(max(row) for row in alloc.piece_counts()),
            "seconds": f"{elapsed:.4f}"}


def cmd_bench(args) -> int:
    jobs = [(args.protocol, n, m, args.breakpoints, args.seed * 100003 + k * 7919 + n * 101 + m)
            for n, m in bench_shapes(args.protocol, args.max_agents)
            for k in range(args.instances)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(job) for job in jobs]
    if not rows:
        return _fail(EXIT_PRECONDITION, "nothing to run", ValueError(f"no shapes with at most {args.max_agents} agents"))
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="layercake", description="Exact fair division of layered cakes.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run a protocol on an instance file")
    s.add_argument("--protocol", required=True, choices=sorted(PROTOCOLS))
    s.add_argument("--instance", required=True)
    s.add_argument("--out")
    s.add_argument("--svg")
    s.add_argument("--seed", type=int, default=0, help="recorded in the report; protocols are deterministic")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="write a random instance")
    g.add_argument("--agents", type=int, required=True)
    g.add_argument("--layers", type=int, required=True)
    g.add_argument("--breakpoints", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--identical-pair", action="store_true", help="agent 1 copies agent 0")
    g.add_argument("--prefer", choices=["top", "bottom"], help="two layers: every agent prefers this one")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="check an allocation against an instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--allocation", required=True)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="query counts over random instances, as CSV")
    b.add_argument("--protocol", required=True, choices=sorted(PROTOCOLS))
    b.add_argument("--max-agents", type=int, required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--instances", type=int, default=3, help="instances per (n, m) shape")
    b.add_argument("--breakpoints", type=int, default=4)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "agents", 1) < 1 or getattr(args, "layers", 1) < 1 or getattr(args, "breakpoints", 0) < 0:
        return _fail(EXIT_PRECONDITION, "bad arguments", ValueError("need agents >= 1, layers >= 1, breakpoints >= 0"))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
