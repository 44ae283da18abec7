"""Command-line front end: ``gaspst info | synthesize | verify``.

Group specs
-----------
``cyclic:N``, ``dihedral:2N``, ``clifford:N``, ``symmetric:N``, ``alternating:N``,
``product:SPEC,SPEC[,...]`` (factors may not themselves be products), or
``@path`` for a JSON file holding either ``{"spec": "dihedral:8"}`` or
``{"kind": "cayley", "table": [[...]], "labels": [...], "name": "..."}``.

Exit codes: 0 ok, 1 other failure, 2 bad arguments or spec, 3 table is not a group,
4 no PST target, 5 gauge search exhausted, 6 transfer fidelity below
tolerance, 7 plan does not belong to the group.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .chartab import export_character_table
from .errors import (GasPstError, InvalidParameter, MalformedTable, NoPstTarget,
                     NoSingletonClass, NotAGroup, SearchExhausted, SizeLimit)
from .formats import dumps, in_pi, num, write_atomic
from .fullspace import DEFAULT_CAP, build_full_hamiltonian, full_transfer_check, oracle_report
from .groups import (DEFAULT_MAX_ORDER, Group, center, direct_product, from_cayley_table,
                     make_alternating, make_clifford, make_cyclic, make_dihedral, make_symmetric)
from .pst import (available_targets, check_target, optimal_fidelity, plan_from_dict, plan_to_dict,
                  product_plan, search_gauge, synthesize_couplings, verify_pst)
from .scheme import GroupScheme, build_scheme, export_graph, symmetrize

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_GROUP = 0, 1, 2, 3
EXIT_NO_TARGET, EXIT_EXHAUSTED, EXIT_FIDELITY, EXIT_HASH = 4, 5, 6, 7

FAMILIES = {
    "cyclic": make_cyclic,
    "dihedral": make_dihedral,
    "clifford": make_clifford,
    "symmetric": make_symmetric,
    "alternating": make_alternating,
}


class SpecError(GasPstError):
    pass


def parse_group(spec: str, max_order: int = DEFAULT_MAX_ORDER) -> Group:
    spec = spec.strip()
    if spec.startswith("@"):
        return _group_from_file(Path(spec[1:]), max_order)
    kind, sep, params = spec.partition(":")
    if not sep:
        raise SpecError(f"group spec {spec!r} lacks ':'; try e.g. dihedral:8")
    if kind == "product":
        factors = [f for f in params.split(",") if f]
        if len(factors) < 2:
            raise SpecError("product needs at least two comma-separated factors")
        if any(f.startswith("product:") for f in factors):
            raise SpecError("nested products are written as one flat list")
        groups = [parse_group(f, max_order) for f in factors]
        out = groups[0]
        for g in groups[1:]:
            out = direct_product(out, g, max_order=max_order)
        return out
    if kind not in FAMILIES:
        raise SpecError(f"unknown group family {kind!r}; known: {', '.join(sorted(FAMILIES))}")
    try:
        n = int(params)
    except ValueError:
        raise SpecError(f"{kind} expects an integer parameter, got {params!r}") from None
    g = FAMILIES[kind](n)
    if g.order > max_order:
        raise SizeLimit(f"group order {g.order} exceeds limit {max_order}")
    return g


def _group_from_file(path: Path, max_order: int) -> Group:
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SpecError(f"{path} must hold a JSON object")
    if "spec" in data:
        return parse_group(str(data["spec"]), max_order)
    if data.get("kind") != "cayley" or "table" not in data:
        raise SpecError(f"{path}: expected a 'spec' string or kind 'cayley' with a 'table'")
    return from_cayley_table(data["table"], data.get("labels"), data.get("name", path.stem),
                             max_order=max_order)


def parse_phase(text: str) -> float:
    """A multiple of pi: ``1``, ``1/2``, ``0.25``."""
    try:
        return float(Fraction(text.strip())) * np.pi
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"cannot read phase {text!r} (give a multiple of pi such as 1/2)") from None


def parse_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise SpecError(f"expected comma-separated integers, got {text!r}") from None


def _scheme(g: Group, seed: int) -> tuple[GroupScheme, bool]:
    s = build_scheme(g, seed=seed)
    if s.symmetric:
        return s, False
    return symmetrize(s), True


def _target(s: GroupScheme, choice: str) -> int:
    if choice == "auto":
        targets = available_targets(s)
        if not targets:
            raise NoPstTarget(f"{s.group.name or 'group'} has trivial center; no PST target")
        return targets[0]
    try:
        m = int(choice)
    except ValueError:
        raise SpecError(f"--target takes a class index or 'auto', got {choice!r}") from None
    check_target(s, m)
    return m


def _fmt(x: float) -> str:
    return f"{num(x):.12g}"


def _print(out, line=""):
    out.write(line + "\n")


# -- commands ------------------------------------------------------------------


def cmd_info(args, out) -> int:
    g = parse_group(args.group, args.max_order)
    s = build_scheme(g, seed=args.seed)
    cs = s.classes
    _print(out, f"group: {args.group}")
    _print(out, f"order: {g.order}")
    _print(out, f"hash: {g.fingerprint()}")
    _print(out, f"abelian: {'yes' if g.is_abelian() else 'no'}")
    _print(out, f"symmetric scheme: {'yes' if s.symmetric else 'no'}")
    _print(out, f"classes: {len(cs)}")
    for i, members in enumerate(cs.classes):
        labels = ", ".join(g.labels[x] for x in members)
        _print(out, f"  C{i} size {len(members)} inverse C{cs.inverse_class[i]}: {{{labels}}}")
    _print(out, "center: {" + ", ".join(g.labels[z] for z in sorted(center(g))) + "}")
    targets = available_targets(s)
    if targets:
        _print(out, "pst targets:")
        for m in targets:
            _print(out, f"  C{m} ({g.labels[s.representative(m)]}) optimal fidelity "
                        f"{_fmt(optimal_fidelity(s, m))}")
    else:
        _print(out, "pst targets: none (trivial center)")
    _print(out, f"seed: {args.seed}")
    out.write(export_character_table(g, cs, s.characters))
    if args.export_graph is not None:
        rel = parse_ints(args.export_graph)
        text = export_graph(s, rel)
        if args.out:
            path = write_atomic(Path(args.out) / f"graph_R{'_'.join(map(str, rel))}.txt", text)
            _print(out, f"graph written to {path}")
        else:
            out.write(text)
    return EXIT_OK


def _factorwise_plan(args):
    """Plan each factor of a product spec on its own, then tensor the plans."""
    kind, _, params = args.group.strip().partition(":")
    if kind != "product":
        raise SpecError("--factorwise needs a product:... group spec")
    if args.l is not None or args.phi is not None or args.target != "auto" or args.allow:
        raise SpecError("--factorwise picks targets and gauges per factor; "
                        "only --search and --t0 apply")
    s = plan = None
    for spec in (f for f in params.split(",") if f):
        g = parse_group(spec, args.max_order)
        fs = build_scheme(g, seed=args.seed)
        if not fs.symmetric:
            raise SpecError(f"factor {spec} has a non-symmetric scheme; products of "
                            "symmetrized schemes are not supported")
        fm = _target(fs, "auto")
        if args.search:
            fp = search_gauge(fs, fm, args.t0, args.search, max_l=args.max_l)
        else:
            fp = synthesize_couplings(fs, fm, args.t0)
        if s is None:
            s, plan = fs, fp
        else:
            s, plan = product_plan(s, plan, fs, fp)
    return s, plan, False


def cmd_synthesize(args, out) -> int:
    g = parse_group(args.group, args.max_order)
    if args.factorwise:
        s, merged, m = None, False, None
    else:
        s, merged = _scheme(g, args.seed)
        m = _target(s, args.target)
    if args.t0 <= 0:
        raise SpecError("--t0 must be positive")
    if args.factorwise:
        s, plan, merged = _factorwise_plan(args)
        m = plan.target
    elif args.search:
        if args.l is not None or args.phi is not None:
            raise SpecError("--search chooses the gauge; drop --phi/--l")
        allowed = parse_ints(args.allow) if args.allow else None
        plan = search_gauge(s, m, args.t0, args.search, max_l=args.max_l, allowed=allowed)
    else:
        phi = parse_phase(args.phi) if args.phi is not None else 0.0
        l = parse_ints(args.l) if args.l is not None else None
        plan = synthesize_couplings(s, m, args.t0, phi, l)
    report = verify_pst(s, plan, args.tol)
    fid = optimal_fidelity(s, m)
    data = plan_to_dict(
        plan, group=args.group, order=g.order, seed=args.seed, symmetrized=merged,
        target_label=g.labels[s.representative(m)],
        classes=[s.describe_class(i) for i in range(len(s))],
        optimal_fidelity=num(fid),
        residual_phase_over_pi=in_pi(report.phase))
    out_dir = Path(args.out or ".")
    path = write_atomic(out_dir / "plan.json", dumps(data))

    nonzero = plan.nonzero()
    _print(out, f"group: {args.group} (order {g.order}{', symmetrized' if merged else ''})")
    _print(out, f"target: C{m} ({g.labels[s.representative(m)]})  t0: {_fmt(plan.t0)}")
    _print(out, f"gauge: phi = {_fmt(plan.gauge.phi / np.pi)} pi, l = {list(plan.gauge.l)}")
    _print(out, "couplings (amplitude form, units of pi / t0):")
    for i, j in enumerate(plan.couplings):
        _print(out, f"  J{i} = {_fmt(j * plan.t0 / np.pi)}")
    _print(out, f"nonzero couplings: {len(nonzero)} {nonzero}")
    _print(out, f"optimal fidelity: {_fmt(fid)}")
    _print(out, f"|f(t0)|: {_fmt(report.peak)}  residual phase: {_fmt(report.phase / np.pi)} pi")
    _print(out, f"plan written to {path}")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    try:
        data = json.loads(Path(args.plan).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read {args.plan}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{args.plan} is not valid JSON: {exc}") from None
    plan = plan_from_dict(data)
    spec = args.group or data.get("group")
    if not spec:
        raise SpecError("plan file names no group; pass --group")
    g = parse_group(spec, args.max_order)
    if g.fingerprint() != plan.group_hash:
        _print(sys.stderr, f"error: plan was made for group hash {plan.group_hash}, "
                           f"{spec} has {g.fingerprint()}")
        return EXIT_HASH
    seed = int(data.get("seed", args.seed))
    s, merged = _scheme(g, seed)
    if len(plan.couplings) != len(s):
        _print(sys.stderr, f"error: plan has {len(plan.couplings)} couplings, scheme has {len(s)} relations")
        return EXIT_HASH
    report = verify_pst(s, plan.amplitude(), args.tol)
    out_dir = Path(args.out or ".")
    write_atomic(out_dir / "trace.csv", report.trace_csv())
    result = {
        "group": spec, "group_hash": plan.group_hash, "seed": seed, "symmetrized": merged,
        "target": plan.target, "t0": num(plan.t0), "tolerance": num(args.tol),
        "peak": num(report.peak), "one_minus_peak": num(1.0 - report.peak),
        "fidelity": num(report.fidelity),
        "residual_phase_over_pi": in_pi(report.phase),
        "unitarity_residual": num(report.unitarity_residual),
        "thetas": [num(x) for x in report.thetas.real],
        "passed": report.passed,
        "phase_convention": "amplitude form, identity term dropped",
    }
    oracle_ok = True
    if args.oracle:
        D = args.levels
        if D**g.order > args.cap:
            result["oracle"] = f"skipped: {D}^{g.order} states exceeds cap {args.cap}"
        elif merged:
            result["oracle"] = "skipped: symmetrized scheme"
        else:
            h = build_full_hamiltonian(s, plan, D, cap=args.cap)
            z = s.representative(plan.target)
            transfer = full_transfer_check(h, 2**-0.5, 2**-0.5, 0, z, plan.t0)
            result["oracle"] = oracle_report(h, s, plan, transfer)
            oracle_ok = transfer.passed
    write_atomic(out_dir / "report.json", dumps(result))

    _print(out, f"group: {spec}  target: C{plan.target}  t0: {_fmt(plan.t0)}")
    _print(out, f"|f(t0)|: {_fmt(report.peak)}  1-|f(t0)|: {_fmt(1 - report.peak)}")
    _print(out, f"residual phase: {_fmt(report.phase / np.pi)} pi")
    _print(out, f"unitarity residual: {_fmt(report.unitarity_residual)}")
    if args.oracle:
        o = result["oracle"]
        if isinstance(o, str):
            _print(out, f"oracle: {o}")
        else:
            t = o["transfer"]
            _print(out, f"oracle: D={o['levels']} dim {o['dimension']}, leakage {_fmt(t['leakage'])}, "
                        f"{'pass' if t['passed'] else 'FAIL'}")
    passed = report.passed and oracle_ok
    _print(out, "PASS" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_FIDELITY


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaspst", description="Perfect state transfer on group association schemes.",
        epilog="Group specs: cyclic:N dihedral:2N clifford:N symmetric:N alternating:N "
               "product:SPEC,SPEC[,...] or @file.json. Phases are multiples of pi.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for the character-table solver")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER)
    common.add_argument("--tol", type=float, default=1e-9, help="pass if 1-|f(t0)| < TOL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", parents=[common], help="classes, center, characters, targets")
    p.add_argument("--group", required=True)
    p.add_argument("--export-graph", metavar="REL", help="relation index (or comma list) to export")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("synthesize", parents=[common], help="compute a coupling plan")
    p.add_argument("--group", required=True)
    p.add_argument("--target", default="auto", help="class index or 'auto'")
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--phi", help="gauge phase, multiple of pi (default 0)")
    p.add_argument("--l", help="gauge integers, comma separated (default all 0)")
    p.add_argument("--search", choices=["min-nonzero", "min-l1"])
    p.add_argument("--max-l", type=int, default=4, help="search box half-width")
    p.add_argument("--allow", help="relations allowed to carry couplings during search")
    p.add_argument("--factorwise", action="store_true",
                   help="for product specs: plan each factor, then take the tensor product")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", parents=[common], help="check a plan and write its trace")
    p.add_argument("plan", help="plan.json written by synthesize")
    p.add_argument("--group", help="override the plan's group spec")
    p.add_argument("--oracle", action="store_true", help="also run the full Hilbert-space check")
    p.add_argument("--levels", type=int, default=2, help="levels per site for the oracle")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest oracle dimension")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol <= 0:
        parser.error("--tol must be positive")
    if getattr(args, "levels", 2) < 2:
        parser.error("--levels must be at least 2")
    try:
        return args.func(args, out)
    except (SpecError, InvalidParameter, SizeLimit) as exc:
        code, exc_ = EXIT_USAGE, exc
    except (NotAGroup, MalformedTable) as exc:
        code, exc_ = EXIT_NOT_GROUP, exc
    except (NoPstTarget, NoSingletonClass) as exc:
        code, exc_ = EXIT_NO_TARGET, exc
    except SearchExhausted as exc:
        code, exc_ = EXIT_EXHAUSTED, exc
    except GasPstError as exc:
        code, exc_ = EXIT_FAIL, exc
    _print(sys.stderr, f"error: {exc_}")
    return code


if __name__ == "__main__":
    sys.exit(main())
