"""Command-line surface.

Subcommands: chain, towers, minimize, construct, rotation, verify, twist.
Every run prints a JSON summary to stdout and exits 0 on success, 1 on a
domain or usage error, 2 on solver non-convergence.  Identical invocations
produce byte-identical outputs (fixed iteration orders, round-trip float
formatting, no wall-clock state); FK_THREADS caps internal parallelism and
the sequential evaluator always complies.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import builder as builder_mod
from . import serialize
from .energy import default_model
from .errors import ApproximationError, ConvergenceError, DomainError, RangeError
from .minimize import MinimizeOptions, SegmentProblem, minimize_segment, verify_critical
from .order_checks import check_loop_spread, check_translate_bounds, find_translates
from .rotation import Configuration, rotation_summary
from .substitution import build_chain, crystal_rule, fibonacci_rule, thue_morse_rule
from .towers import build_hierarchy, project
from .twistmap import PhasePoint, orbit


def _parse_window(text: str) -> tuple[float, float]:
    lo, hi = text.split(":")
    return float(lo), float(hi)


def _make_rule(spec: str):
    presets = {"fib": fibonacci_rule, "crystal": crystal_rule, "thue-morse": thue_morse_rule}
    if spec in presets:
        return presets[spec]()
    if os.path.exists(spec):
        with open(spec) as f:
            d = json.load(f)
    else:
        d = json.loads(spec)
    field = serialize.field_from_dict(d.get("lambda", {"p": 1, "q": 1}))
    return serialize.rule_from_dict(d, field)


def _emit(summary: dict) -> None:
    sys.stdout.write(serialize.dump_json(summary) + "\n")


def _cmd_chain(args) -> int:
    rule = _make_rule(args.rule)
    chain = build_chain(rule, _parse_window(args.window))
    doc = serialize.chain_to_dict(chain)
    if args.out:
        serialize.dump_json(doc, args.out)
    _emit(
        {
            "command": "chain",
            "atoms": len(chain.atoms),
            "window": [float(chain.window[0]), float(chain.window[1])],
            "out": args.out,
        }
    )
    return 0


def _cmd_towers(args) -> int:
    rule = _make_rule(args.rule)
    hierarchy = build_hierarchy(rule, args.depth)
    doc = serialize.hierarchy_to_dict(hierarchy)
    if args.out:
        serialize.dump_json(doc, args.out)
    _emit(
        {
            "command": "towers",
            "depth": hierarchy.depth,
            "k": hierarchy.k,
            "exact": hierarchy.exact,
            "out": args.out,
        }
    )
    return 0


def _default_chain_for(rule, lo: float, hi: float, margin: float = 8.0):
    return build_chain(rule, (lo - margin, hi + margin))


def _cmd_minimize(args) -> int:
    rule = _make_rule(args.rule)
    chain = _default_chain_for(rule, min(args.left, 0.0), max(args.right, 0.0))
    model = default_model(chain, amplitude=args.amplitude)
    problem = SegmentProblem(
        model=model, theta_left=args.left, theta_right=args.right, atom_count=args.atoms
    )
    result = minimize_segment(problem, MinimizeOptions(seed=args.seed))
    if args.out:
        serialize.write_config_csv(result.positions, args.out)
    if args.meta:
        serialize.dump_json(
            {
                "energy": result.energy,
                "residual": result.residual,
                "iterations": result.iterations,
                "starts": result.starts_used,
                "monotone": result.monotone,
            },
            args.meta,
        )
    _emit(
        {
            "command": "minimize",
            "energy": result.energy,
            "residual": result.residual,
            "atoms": len(result.positions),
            "out": args.out,
        }
    )
    return 0


def _cmd_construct(args) -> int:
    rule = _make_rule(args.rule)
    window = _parse_window(args.window)
    k = rule.positivity_power()
    if k is None:
        raise DomainError("substitution rule is not primitive")
    hierarchy = build_hierarchy(rule, args.level + k * (args.refine + 12))
    chain = _default_chain_for(rule, window[0], window[1])
    model = default_model(chain, amplitude=args.amplitude)
    counts = [int(x) for x in args.counts.split(",")] if args.counts else None
    if counts is None:
        if args.rho is None:
            raise DomainError("construct needs --counts or --rho")
        level, counts_dict = builder_mod.approximate_rho(
            hierarchy, args.rho, args.tol, max_level=hierarchy.depth
        )
    else:
        level, counts_dict = args.level, {
            c: n for c, n in zip(rule.alphabet, counts)
        }
    config, diag = builder_mod.build_for_counts(
        hierarchy,
        chain,
        model,
        level,
        counts_dict,
        refine_depth=args.refine,
        window=window,
        options=MinimizeOptions(seed=args.seed),
    )
    if args.out:
        serialize.write_config_csv(config.atoms, args.out)
    diag_doc = {
        "rho0": diag["rho0"],
        "base_level": diag["base_level"],
        "final_level": diag["final_level"],
        "counts": {c: int(n) for c, n in diag["counts_history"][0].items()},
        "final_counts": {c: int(n) for c, n in diag["counts_history"][-1].items()},
        "occupancy_exact": bool(diag["occupancy_exact"]),
        "max_gap": diag["max_gap"],
        "el_residual_interior": diag["el_residual_interior"],
        "slope": diag["slope"],
        "tower_bounds": [
            {"level": b.level, "lo": b.lo, "hi": b.hi} for b in diag["tower_bounds"]
        ],
    }
    if args.diag:
        serialize.dump_json(diag_doc, args.diag)
    _emit({"command": "construct", "atoms": len(config), "out": args.out, **diag_doc})
    return 0


def _cmd_rotation(args) -> int:
    rule = _make_rule(args.rule)
    atoms = serialize.read_config_csv(args.config)
    lo, hi = float(atoms[0]), float(atoms[-1])
    chain = _default_chain_for(rule, min(lo, 0.0), max(hi, 0.0))
    depth = args.max_level
    hierarchy = build_hierarchy(rule, depth)
    summary = rotation_summary(
        hierarchy, chain, Configuration(atoms=atoms), levels=range(depth + 1)
    )
    rows = [
        {"level": b.level, "lo": b.lo, "hi": b.hi, "slope": summary.slope}
        for b in summary.tower_bounds
    ]
    if args.out:
        import csv as _csv
        import io as _io

        buf = _io.StringIO()
        w = _csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "lo", "hi", "slope"])
        for r in rows:
            w.writerow([r["level"], repr(r["lo"]), repr(r["hi"]), repr(r["slope"])])
        with open(args.out, "w") as f:
            f.write(buf.getvalue())
    _emit(
        {
            "command": "rotation",
            "slope": summary.slope,
            "lsq_slope": summary.lsq_slope,
            "bounds": rows,
            "out": args.out,
        }
    )
    return 0


def _cmd_verify(args) -> int:
    rule = _make_rule(args.rule)
    atoms = serialize.read_config_csv(args.config)
    lo, hi = float(atoms[0]), float(atoms[-1])
    chain = _default_chain_for(rule, min(lo, 0.0), max(hi, 0.0))
    model = default_model(chain, amplitude=args.amplitude)
    checks = args.checks.split(",")
    report: dict = {"command": "verify", "config": args.config, "violations": []}
    if "translates" in checks:
        mean_gap = float(np.diff(chain.atom_floats).mean())
        base = (0.0, 3.0 * mean_gap)
        radius = model.range
        scan = (lo + radius + 1.0, hi - radius - 1.0)
        family = find_translates(chain, base, radius, scan)
        rep = check_translate_bounds(atoms, family)
        report["translates"] = {
            "shifts": [float(u) for u in family.shifts],
            "counts": list(rep.counts),
            "N": rep.n_min,
            "spread": rep.spread,
        }
        report["violations"] += list(rep.violations)
    if "spread" in checks:
        hierarchy = build_hierarchy(rule, max(args.max_level, 1))
        spread_doc = {}
        for level in range(args.max_level + 1):
            per_loop = check_loop_spread(hierarchy, chain, atoms, level)
            spread_doc[str(level)] = {
                loop: {"counts": list(r.counts), "spread": r.spread}
                for loop, r in per_loop.items()
            }
            for r in per_loop.values():
                report["violations"] += list(r.violations)
        report["spread"] = spread_doc
    if "el" in checks:
        residual = verify_critical(model, atoms) if len(atoms) >= 3 else 0.0
        report["el_residual"] = residual
    report["ok"] = not report["violations"]
    if args.out:
        serialize.dump_json(report, args.out)
    _emit(report)
    return 0


def _cmd_twist(args) -> int:
    rule = _make_rule(args.rule)
    span = max(abs(args.theta0) + abs(args.p0) * args.steps + 10.0, 50.0)
    chain = _default_chain_for(rule, -span, span)
    model = default_model(chain, amplitude=args.amplitude)
    hierarchy = build_hierarchy(rule, 1)
    pts = orbit(model, PhasePoint(args.theta0, args.p0), args.steps)
    rows = []
    for n, pt in enumerate(pts):
        try:
            sk = project(hierarchy, chain, pt.theta, 0)
            loop, off = sk.loop, sk.offset
        except (RangeError, DomainError):
            loop, off = "", float("nan")
        rows.append((n, pt.theta, pt.p, loop, off))
    if args.out:
        serialize.write_orbit_csv(rows, args.out)
    _emit(
        {
            "command": "twist",
            "steps": args.steps,
            "theta_final": pts[-1].theta,
            "p_final": pts[-1].p,
            "out": args.out,
        }
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fkqc",
        description="Frenkel-Kontorova chains on substitution quasicrystals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chain", help="generate a substrate chain")
    p.add_argument("--rule", default="fib")
    p.add_argument("--window", required=True, help="lo:hi")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_chain)

    p = sub.add_parser("towers", help="build the tower hierarchy")
    p.add_argument("--rule", default="fib")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_towers)

    p = sub.add_parser("minimize", help="minimize a fixed-endpoint segment")
    p.add_argument("--rule", default="fib")
    p.add_argument("--left", type=float, required=True)
    p.add_argument("--right", type=float, required=True)
    p.add_argument("--atoms", type=int, required=True, help="total atom count p+1")
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--meta")
    p.set_defaults(func=_cmd_minimize)

    p = sub.add_parser("construct", help="build a configuration with prescribed rotation number")
    p.add_argument("--rule", default="fib")
    p.add_argument("--counts", help="comma-separated per-loop counts")
    p.add_argument("--rho", type=float, help="target rotation number")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--window", default="-100:100", help="lo:hi")
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--diag")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("rotation", help="estimate rotation number with tower bounds")
    p.add_argument("--rule", default="fib")
    p.add_argument("--config", required=True)
    p.add_argument("--max-level", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_rotation)

    p = sub.add_parser("verify", help="run counting and criticality checks on a configuration")
    p.add_argument("--rule", default="fib")
    p.add_argument("--config", required=True)
    p.add_argument("--checks", default="translates,spread,el")
    p.add_argument("--max-level", type=int, default=3)
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("twist", help="iterate the induced phase-space map")
    p.add_argument("--rule", default="fib")
    p.add_argument("--theta0", type=float, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_twist)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (DomainError, RangeError, ApproximationError) as e:
        _emit({"command": args.command, "error": str(e)})
        return 1
    except ConvergenceError as e:
        _emit({"command": args.command, "error": str(e)})
        return 2


if __name__ == "__main__":
    sys.exit(main())
