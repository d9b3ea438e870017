"""Command-line interface: ``ect <command> ...``.

Exit codes: 0 equivalent/holds, 1 not equivalent/fails, 2 unknown, 3 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .ecterm import ECTerm, IllFormed, Indeterminate, witness_substitution
from .equiv import METHODS, RouteDisagreement, equiv_auto, position_classes
from .model import Grid
from .oracle import GridTooSmall, OracleConfig, oracle_equiv
from .pg import pg_transform
from .solver import Backend, SolverError, Status, Verdict, make_backend
from .syntax import ProblemFile, format_classes, format_ecterm, format_subst, format_valuation, parse
from .terms import Signature, SortError, fmt_pos

EXIT_ERROR = 3


class UsageError(Exception):
    pass


def _status_code(v: Verdict) -> int:
    return {Status.HOLDS: 0, Status.FAILS: 1, Status.UNKNOWN: 2}[v.status]


def load(path: str, sig: Signature | None = None) -> ProblemFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return parse(text, sig)


def _select(pf: ProblemFile, name: str | None, path: str) -> ECTerm:
    if name is not None:
        if name not in pf.terms:
            raise UsageError(f"{path} has no term named {name!r}")
        return pf.terms[name]
    if not pf.terms:
        raise UsageError(f"{path} contains no terms")
    return next(iter(pf.terms.values()))


def _split(spec: str) -> tuple[str, str | None]:
    """``file.ect`` or ``file.ect::name``."""
    path, sep, name = spec.partition("::")
    return path, (name if sep else None)


def load_pair(specs: list[str]) -> tuple[ECTerm, ECTerm]:
    if len(specs) == 1:
        path, _ = _split(specs[0])
        pf = load(path)
        if len(pf.terms) != 2:
            raise UsageError(f"{path} must contain exactly two terms when given alone")
        a, b = pf.terms.values()
        return a, b
    if len(specs) != 2:
        raise UsageError("expected one file with two terms or two term files")
    (p1, n1), (p2, n2) = map(_split, specs)
    pf1 = load(p1)
    pf2 = load(p2, pf1.signature)
    return _select(pf1, n1, p1), _select(pf2, n2, p2)


def backend_from(args) -> Backend:
    grid = Grid.parse(args.grid) if args.grid else None
    return make_backend(args.backend, grid=grid, exact=args.grid_exact, solver_cmd=args.solver_cmd)


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(human)


def cmd_check(args) -> int:
    e1, e2 = load_pair(args.files)
    with backend_from(args) as backend:
        report = equiv_auto(e1, e2, backend, method=args.method, paranoid=args.paranoid)
    _emit(args, report.to_json(), report.summary())
    return report.exit_code


def cmd_pg(args) -> int:
    pf = load(args.file)
    out = {}
    lines = []
    for name, e in pf.terms.items():
        r = pg_transform(e)
        out[name] = {
            "term": format_ecterm(r.result),
            "holes": [fmt_pos(p) for p in r.hole_positions],
            "back": format_subst(r.back_substitution),
        }
        lines.append(f"{name}: {format_ecterm(r.result)}")
    _emit(args, {"schema": 1, "pg": out}, "\n".join(lines))
    return 0


def cmd_wf(args) -> int:
    try:
        pf = load(args.file)
    except IllFormed as e:
        _emit(args, {"schema": 1, "well_formed": False, "conditions": list(e.conditions), "detail": str(e)},
              f"ill-formed: {e}")
        return 1
    _emit(args, {"schema": 1, "well_formed": True, "terms": pf.names()},
          "\n".join(f"{n}: well-formed" for n in pf.names()))
    return 0


def cmd_sat(args) -> int:
    pf = load(args.file)
    worst = 0
    lines, out = [], {}
    with backend_from(args) as backend:
        for name, e in pf.terms.items():
            try:
                gamma = witness_substitution(e, backend)
            except Indeterminate as err:
                lines.append(f"{name}: unknown ({err})")
                out[name] = {"status": "unknown"}
                worst = max(worst, 2)
                continue
            if gamma is None:
                lines.append(f"{name}: unsatisfiable")
                out[name] = {"status": "fails"}
                worst = max(worst, 1)
            else:
                lines.append(f"{name}: satisfiable" + (f" with {format_valuation(gamma)}" if gamma else ""))
                out[name] = {"status": "holds", "witness": {x.name: str(v) for x, v in gamma.items()}}
    _emit(args, {"schema": 1, "sat": out}, "\n".join(lines))
    return worst


def cmd_classes(args) -> int:
    pf = load(args.file)
    e = _select(pf, args.name, args.file)
    with backend_from(args) as backend:
        pc = position_classes(e, backend)
    payload = {
        "schema": 1,
        "classes": [[fmt_pos(p) for p in c] for c in pc.classes],
        "forced": {fmt_pos(p): str(v) for p, v in pc.forced.items()},
        "unresolved": list(pc.unresolved),
    }
    human = format_classes(pc)
    if pc.unresolved:
        human += "\nunresolved: " + "; ".join(pc.unresolved)
    _emit(args, payload, human)
    return 0 if pc.complete else 2


def cmd_oracle(args) -> int:
    e1, e2 = load_pair(args.files)
    grid = Grid.parse(args.grid) if args.grid else Grid(-3, 3)
    cfg = OracleConfig(grid=grid, exact=not args.approximate)
    v = oracle_equiv(e1, e2, cfg)
    label = {Status.HOLDS: "EQUIVALENT", Status.FAILS: "NOT-EQUIVALENT", Status.UNKNOWN: "UNKNOWN"}[v.status]
    human = label
    if v.witness:
        human += f"\n  witness: {format_valuation(v.witness)} ({v.reason})"
    elif v.reason:
        human += f"\n  {v.reason}"
    payload = {
        "schema": 1,
        "verdict": label,
        "grid": str(grid),
        "witness": None if v.witness is None else {x.name: str(u) for x, u in v.witness.items()},
        "reason": v.reason,
    }
    _emit(args, payload, human)
    return _status_code(v)


def cmd_embed(args) -> int:
    pf = load(args.file)
    lines = [f"term {n} = {format_ecterm(e)} ;" for n, e in pf.terms.items()]
    _emit(args, {"schema": 1, "terms": {n: format_ecterm(e) for n, e in pf.terms.items()}}, "\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--solver-cmd", help="SMT-LIB2 solver command (default: $ECT_SOLVER or 'z3 -in')")
    common.add_argument("--backend", choices=("smt", "grid"), default="smt")
    common.add_argument("--grid", metavar="LO..HI", help="enumeration range for the grid backend and the oracle")
    common.add_argument("--grid-exact", action="store_true", help="assert that the grid covers every solution")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="ect", description="Equivalence of existentially constrained terms.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="decide equivalence of two terms")
    p.add_argument("files", nargs="+", metavar="FILE[::NAME]")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--paranoid", action="store_true", help="cross-check the general and transformation routes")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("pg", parents=[common], help="print the pattern-general form of each term")
    p.add_argument("file")
    p.set_defaults(run=cmd_pg)

    p = sub.add_parser("wf", parents=[common], help="check well-formedness")
    p.add_argument("file")
    p.set_defaults(run=cmd_wf)

    p = sub.add_parser("sat", parents=[common], help="satisfiability with a witness substitution")
    p.add_argument("file")
    p.set_defaults(run=cmd_sat)

    p = sub.add_parser("classes", parents=[common], help="print position classes and forced values")
    p.add_argument("file")
    p.add_argument("--name")
    p.set_defaults(run=cmd_classes)

    p = sub.add_parser("oracle-equiv", parents=[common], help="brute-force equivalence over a grid")
    p.add_argument("files", nargs="+", metavar="FILE[::NAME]")
    p.add_argument("--approximate", action="store_true", help="do not assume the grid covers every solution")
    p.set_defaults(run=cmd_oracle)

    p = sub.add_parser("embed", parents=[common], help="print classical constrained terms in existential form")
    p.add_argument("file")
    p.set_defaults(run=cmd_embed)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.run(args)
    except (UsageError, ValueError, SortError, RouteDisagreement, GridTooSmall) as e:
        print(f"error: {e}", file=sys.stderr)
    except SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)
    return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
