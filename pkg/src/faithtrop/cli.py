"""Command-line entry point: embed, resolve, genus2, check, export."""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .construction import all_pass, synthesize_parameters, verify_parameters
from .embedding import (
    P1,
    TP,
    EmbeddedTropicalCurve,
    boundary_limit,
    check_injectivity,
    classify_faithfulness,
    construct_curve,
    limit_collisions,
    unbalanced_nodes,
)
from .genus2 import Genus2Config, genus2_preset, verify_genus2
from .lattice import primitive_part
from .metric_graph import GraphError, MetricGraph
from .rational import q, qstr
from .resolution import EmbeddingState, n_profile, resolve_to_smooth, state_from_json, state_to_json

TARGETS = {"tp3": TP, "p1cube": P1}
EXPECTED = {"tp3": "totally_faithful", "p1cube": "fully_faithful"}


class InputError(Exception):
    pass


def _load(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)


def _curve_from(data: dict) -> EmbeddedTropicalCurve:
    try:
        if data.get("kind") == "state":
            data = data["curve"]
        return EmbeddedTropicalCurve.from_json(data)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad embedding file: {e}") from e


def _state_from(data: dict) -> EmbeddingState:
    try:
        return state_from_json(data)
    except (KeyError, TypeError, ValueError, GraphError) as e:
        raise InputError(f"bad state file: {e}") from e


def curve_report(c: EmbeddedTropicalCurve, jobs: int = 1, stored: dict | None = None) -> dict:
    """Every invariant of an embedded curve, recomputed from its points and directions."""
    coll = check_injectivity(c, jobs=jobs)
    inv = {
        "endpoints_distinct": all(s.start != s.end for s in c.segments),
        "directions_primitive": all(any(r.direction) and tuple(r.direction) == primitive_part(r.direction) for r in c.rays),
        "weights_positive": all(s.weight >= 1 for s in c.segments) and all(r.weight >= 1 for r in c.rays),
        "unit_weights": all(s.weight == 1 for s in c.segments) and all(r.weight == 1 for r in c.rays),
        "balanced": not unbalanced_nodes(c),
        "injective": not coll,
    }
    if stored is not None:
        inv["limits_consistent"] = all(
            r["limit_p1"] == boundary_limit(ray, P1).to_json() and r["limit_tp"] == boundary_limit(ray, TP).to_json()
            for r, ray in zip(stored["rays"], c.rays)
        )
    prof = n_profile(c) if inv["directions_primitive"] else {}
    return {
        "dim": c.dim,
        "segments": len(c.segments),
        "rays": len(c.rays),
        "invariants": inv,
        "failed": sorted(k for k, v in inv.items() if not v),
        "collisions": [[x.first, x.second] for x in coll],
        "faithfulness": {name: classify_faithfulness(c, comp) for name, comp in TARGETS.items()},
        "limit_collisions": {
            name: [[c.rays[a].label, c.rays[b].label] for a, b in limit_collisions(c, comp)] for name, comp in TARGETS.items()
        },
        "max_nonsmoothness": max(prof.values(), default=0),
    }


def cmd_embed(args) -> int:
    t0 = time.perf_counter()
    data = _load(args.input)
    try:
        g = MetricGraph.from_json(data)
    except (KeyError, TypeError, ValueError, GraphError) as e:
        raise InputError(f"bad graph: {e}") from e
    params = synthesize_parameters(g, seed=args.seed)
    t1 = time.perf_counter()
    conds = verify_parameters(params)
    sig, curve = construct_curve(params)
    state = EmbeddingState(sig)
    t2 = time.perf_counter()
    cr = curve_report(state.curve, jobs=args.jobs)
    t3 = time.perf_counter()
    achieved = cr["faithfulness"][args.target]
    ok = all_pass(conds) and achieved == EXPECTED[args.target] and not cr["failed"]
    report = {
        "target": args.target,
        "expected": EXPECTED[args.target],
        "achieved": achieved,
        "ok": ok,
        "conditions": {c.name: c.passed for c in conds},
        "parameters": params.to_json(),
        "curve": cr,
        "timings": {"synthesize": t1 - t0, "build": t2 - t1, "verify": t3 - t2},
    }
    _write(args.out, _dump(state_to_json(state)))
    _write(args.report, _dump(report))
    print(_dump({k: v for k, v in report.items() if k != "parameters"}), end="")
    return 0 if ok else 1


def cmd_resolve(args) -> int:
    state = _state_from(_load(args.input))
    if classify_faithfulness(state.curve, P1) != "fully_faithful":
        print("input is not fully faithful in (TP^1)^k", file=sys.stderr)
        return 1
    before = max(n_profile(state).values(), default=0)
    final, reps = resolve_to_smooth(state)
    prof = n_profile(final)
    ok = all(r.decreased and r.support_smooth and r.faithfulness == "fully_faithful" for r in reps)
    ok = ok and not any(prof.values()) and len(reps) <= before
    out = {
        "ok": ok,
        "steps": [r.to_json() for r in reps],
        "initial_dim": state.dim,
        "final_dim": final.dim,
        "initial_max_nonsmoothness": before,
        "final_faithfulness": classify_faithfulness(final.curve, P1),
        "balanced": not unbalanced_nodes(final.curve),
    }
    _write(args.out, _dump(state_to_json(final)))
    print(_dump(out), end="")
    return 0 if ok and out["balanced"] else 1


def cmd_genus2(args) -> int:
    try:
        cfg = Genus2Config(spacing=q(args.spacing), gap=q(args.bumps))
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(str(e)) from e
    state = genus2_preset(cfg)
    rep = verify_genus2(state, expect_hexagon=cfg.spacing == 1)
    _write(args.out, _dump(state_to_json(state)))
    if args.obj:
        _write(args.obj, to_obj(state.curve, q(args.ray_length)))
    print(_dump(rep.to_json()), end="")
    return 0 if rep.ok else 1


def cmd_check(args) -> int:
    data = _load(args.input)
    curve = _curve_from(data)
    stored = data["curve"] if data.get("kind") == "state" else data
    rep = curve_report(curve, jobs=args.jobs, stored=stored)
    print(_dump(rep), end="")
    for name in rep["failed"]:
        print(f"invariant failed: {name}", file=sys.stderr)
    return 0 if not rep["failed"] else 1


def to_obj(c: EmbeddedTropicalCurve, ray_length: Fraction = Fraction(1)) -> str:
    """Wavefront OBJ of the first three coordinates; rays cut at ``ray_length``."""
    pad = lambda p: [float(x) for x in list(p)[:3]] + [0.0] * max(0, 3 - len(p))
    verts: dict[tuple, int] = {}
    lines = []

    def vid(p) -> int:
        key = tuple(p)
        if key not in verts:
            verts[key] = len(verts) + 1
        return verts[key]

    for s in c.segments:
        lines.append((vid(s.start), vid(s.end)))
    for r in c.rays:
        tip = tuple(b + ray_length * d for b, d in zip(r.base, r.direction))
        lines.append((vid(r.base), vid(tip)))
    out = ["# tropical curve, first three coordinates"]
    out += ["v {:.9g} {:.9g} {:.9g}".format(*pad(p)) for p in verts]
    out += [f"l {a} {b}" for a, b in lines]
    return "\n".join(out) + "\n"


def cmd_export(args) -> int:
    curve = _curve_from(_load(args.input))
    length = q(args.ray_length)
    if length <= 0:
        raise InputError("--ray-length must be positive")
    text = to_obj(curve, length)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="faithtrop", description="Faithful tropicalizations of metric graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("embed", help="build and verify an embedding of a metric graph")
    e.add_argument("--input", required=True, help="graph JSON")
    e.add_argument("--out", help="state JSON to write")
    e.add_argument("--report", help="full report JSON to write")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--target", choices=sorted(TARGETS), default="p1cube")
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=cmd_embed)

    r = sub.add_parser("resolve", help="append coordinates until the curve is smooth")
    r.add_argument("--input", required=True, help="state JSON")
    r.add_argument("--out", help="resolved state JSON")
    r.set_defaults(func=cmd_resolve)

    g = sub.add_parser("genus2", help="the two-loop genus-2 example in TP^3")
    g.add_argument("--spacing", default="1")
    g.add_argument("--bumps", default="1/5", help="gap between the inner bump points")
    g.add_argument("--out", help="state JSON")
    g.add_argument("--obj", help="OBJ file")
    g.add_argument("--ray-length", default="1")
    g.set_defaults(func=cmd_genus2)

    c = sub.add_parser("check", help="re-verify a stored embedding")
    c.add_argument("--input", required=True)
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_check)

    x = sub.add_parser("export", help="write OBJ")
    x.add_argument("--input", required=True)
    x.add_argument("--out")
    x.add_argument("--ray-length", default="1")
    x.set_defaults(func=cmd_export)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
