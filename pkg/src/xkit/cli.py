"""Command-line front end.

Exit codes: 0 when a result was computed (whatever the verdict), 2 for
invalid input, 3 when a search ended without a decision.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Any

from . import __version__
from .classify import (DEFAULT_BOUND, UNKNOWN, extension_check, invariants_isomorphic,
                       pointed_isomorphic, realizability_report)
from .cosheaf import Precosheaf, PointedCosheaf, colim, is_cosheaf, is_flabby
from .errors import FormatError, MissingUnit, XkitError
from .graphck import Graph, compare_graphs, ok_invariant
from .homalg import projective_resolution, uct_groups
from .rep import Representation, res
from .space import FiniteSpace, open_key, parse_open_key

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_UNKNOWN = 0, 2, 3


class Report:
    """Accumulates the output of one command."""

    def __init__(self, argv: list[str]):
        self.data: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "command": list(argv),
                                     "inputs": {}, "warnings": []}
        self.lines: list[str] = []

    def input(self, path: str, raw: bytes) -> None:
        self.data["inputs"][path] = hashlib.sha256(raw).hexdigest()

    def set(self, key: str, value) -> None:
        self.data[key] = value

    def warn(self, msg: str) -> None:
        self.data["warnings"].append(msg)

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def emit(self, as_json: bool, out) -> None:
        if as_json:
            out.write(json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        else:
            for line in self.lines:
                out.write(line + "\n")
            for w in self.data["warnings"]:
                out.write(f"warning: {w}\n")


# -- loading ------------------------------------------------------------------

def _read(path: str, report: Report) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    report.input(path, raw)
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return data


def _resolve_space(d: dict, path: str, report: Report) -> dict:
    """Allow ``"space"`` to name a separate space file."""
    sp = d.get("space")
    if isinstance(sp, str):
        d = dict(d)
        d["space"] = _read(os.path.join(os.path.dirname(path), sp), report)
    return d


def load_space(path: str, report: Report) -> FiniteSpace:
    return FiniteSpace.from_dict(_read(path, report))


def _kind(d: dict) -> str:
    if "kind" in d:
        return str(d["kind"])
    if "unit" in d or any(isinstance(m.get("from"), list) for m in d.get("maps", []) if isinstance(m, dict)):
        return "cosheaf"
    return "representation"


def load_rep(path: str, report: Report) -> Representation:
    d = _resolve_space(_read(path, report), path, report)
    if _kind(d) != "representation":
        raise FormatError(f"{path}: expected a representation file")
    return Representation.from_dict(d)


def load_cosheaf(path: str, report: Report) -> tuple[Precosheaf, list | None]:
    d = _resolve_space(_read(path, report), path, report)
    if _kind(d) == "representation":
        raise FormatError(f"{path}: expected a cosheaf file")
    return Precosheaf.from_dict(d), d.get("unit")


def load_rep_or_cosheaf(path: str, report: Report):
    d = _resolve_space(_read(path, report), path, report)
    if _kind(d) == "representation":
        return Representation.from_dict(d), None
    return Precosheaf.from_dict(d), d.get("unit")


def load_graph(path: str, report: Report) -> Graph:
    return Graph.from_dict(_read(path, report))


def _key(U) -> str:
    return open_key(U)


# -- commands -------------------------------------------------------------------

def cmd_space(args, report: Report) -> int:
    X = load_space(args.file, report)
    report.set("valid", True)
    if args.action == "validate":
        report.say(f"valid space with {len(X)} points")
        return EXIT_OK
    info = {
        "points": list(X.points),
        "minimal_open_sets": {p: sorted(X.U(p)) for p in X.points},
        "hasse_arrows": [[y, x] for y, x in X.hasse_arrows()],
        "open_sets": [_key(U) for U in X.opens],
        "unique_path_space": X.is_unique_path_space(),
    }
    report.set("space", info)
    report.say(f"points: {' '.join(X.points)}")
    for p in X.points:
        report.say(f"U_{p} = {{{', '.join(sorted(X.U(p)))}}}")
    report.say("hasse arrows: " + ", ".join(f"{y} -> {x}" for y, x in X.hasse_arrows()))
    report.say(f"open sets: {len(X.opens)}")
    report.say(f"unique path space: {'yes' if info['unique_path_space'] else 'no'}")
    return EXIT_OK


def cmd_rep(args, report: Report) -> int:
    M = load_rep(args.file, report)
    if args.action == "validate":
        report.set("valid", True)
        report.say("valid representation")
        return EXIT_OK
    if args.action == "eval":
        g = M.at(args.point)
        report.set("point", args.point)
        report.set("value", g.to_dict())
        report.say(f"M({args.point}) = {g}")
        return EXIT_OK
    if args.action == "colim":
        C = colim(M)
        chk = is_cosheaf(C)
        report.set("cosheaf", C.to_dict())
        report.set("is_cosheaf", chk.ok)
        report.say(json.dumps(C.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    r = projective_resolution(M)
    report.set("resolution", r.to_dict())
    report.set("exact", r.check_exactness() is None)
    report.say("P0: " + _bundle_str(r.P0))
    report.say("P1: " + _bundle_str(r.P1))
    for p, lr in enumerate(r.layers):
        if lr.gens1:
            report.say(f"d ({'even' if p == 0 else 'odd'}): {[[int(v) for v in row] for row in lr.d]}")
    return EXIT_OK


def _bundle_str(B) -> str:
    parts = [f"P^{x}{'[1]' if p else ''}" + (f"^{m}" if m > 1 else "") for x, p, m in B.summands]
    return " + ".join(parts) if parts else "0"


def cmd_cosheaf(args, report: Report) -> int:
    C, _ = load_cosheaf(args.file, report)
    report.set("valid_precosheaf", True)
    chk = is_cosheaf(C)
    report.set("is_cosheaf", chk.ok)
    report.set("cosheaf_failure", None if chk.ok else {"pair": [sorted(w) for w in chk.witness],
                                                      "detail": chk.detail})
    fl = is_flabby(C)
    report.set("is_flabby", fl.ok)
    report.set("flabby_failure", None if fl.ok else {"pair": [sorted(w) for w in fl.witness],
                                                    "detail": fl.detail})
    report.say("valid precosheaf")
    report.say(f"cosheaf condition: {'holds' if chk else 'fails: ' + chk.detail}")
    report.say(f"flabby: {'yes' if fl else 'no: ' + fl.detail}")
    return EXIT_OK


def cmd_uct(args, report: Report) -> int:
    A = load_rep(args.a, report)
    B = load_rep(args.b, report)
    u = uct_groups(A, B)
    report.set("uct", u.to_dict())
    report.say(f"Hom = {u.hom}")
    report.say(f"Ext = {u.ext}")
    if u.kk is not None:
        report.say(f"KK_0 = {u.kk.even}")
        report.say(f"KK_1 = {u.kk.odd}")
    else:
        report.warn(u.note)
    return EXIT_OK


def cmd_iso(args, report: Report) -> int:
    a, ua = load_rep_or_cosheaf(args.a, report)
    b, ub = load_rep_or_cosheaf(args.b, report)
    report.set("bound", args.bound)
    if args.pointed:
        if not isinstance(a, Precosheaf) or not isinstance(b, Precosheaf):
            raise FormatError("--pointed needs cosheaf files with a unit")
        if ua is None or ub is None:
            raise FormatError("--pointed needs a 'unit' in both files")
        v = pointed_isomorphic(PointedCosheaf(a, ua), PointedCosheaf(b, ub), args.bound)
    else:
        M = res(_as_cosheaf(a)) if isinstance(a, Precosheaf) else a
        N = res(_as_cosheaf(b)) if isinstance(b, Precosheaf) else b
        v = invariants_isomorphic(M, N, args.bound)
    report.set("iso", v.to_dict())
    report.say(f"verdict: {v.verdict}")
    if v.obstruction:
        report.say(f"obstruction: {v.obstruction}")
    if v.verdict == UNKNOWN:
        report.say(f"search exhausted at bound {v.search_bound} ({v.candidates_tried} candidates)")
        return EXIT_UNKNOWN
    return EXIT_OK


def _as_cosheaf(C: Precosheaf) -> Precosheaf:
    chk = is_cosheaf(C)
    if not chk:
        from .errors import NotACosheaf
        raise NotACosheaf(chk.detail)
    return C


def cmd_classify(args, report: Report) -> int:
    C, unit = load_cosheaf(args.file, report)
    _as_cosheaf(C)
    if args.pointed:
        if unit is None:
            raise MissingUnit("--pointed needs a 'unit' in the cosheaf file")
        r = realizability_report(PointedCosheaf(C, unit), pointed=True)
    else:
        r = realizability_report(C)
    report.set("realizability", r.to_dict())
    for w in r.warnings:
        report.warn(w)
    for c in r.classes:
        report.say(f"{c.name}: {c.verdict}" + (f" ({c.failed})" if c.failed and c.verdict != "YES" else ""))
    return EXIT_OK


def cmd_extension(args, report: Report) -> int:
    C, _ = load_cosheaf(args.file, report)
    U = parse_open_key(args.ideal_open)
    r = extension_check(C, U)
    report.set("extension", r.to_dict())
    report.say(f"ideal open set: {{{', '.join(sorted(U))}}}" + (" (degenerate)" if r.degenerate else ""))
    report.say(f"boundary map vanishes: {'yes' if r.boundary_vanishes else 'no'}")
    for c in r.classes:
        report.say(f"{c.name}: whole={c.whole} ideal={c.ideal} quotient={c.quotient} "
                   f"equivalence={'holds' if c.equivalence_holds else 'FAILS'}")
    return EXIT_OK


def cmd_graph(args, report: Report) -> int:
    if args.action == "invariant":
        G = load_graph(args.files[0], report)
        inv = ok_invariant(G)
        report.set("invariant", inv.to_dict())
        report.set("space", inv.space.to_dict())
        for w in inv.warnings:
            report.warn(w)
        for U in inv.space.opens:
            report.say(f"{{{', '.join(sorted(U))}}}: {inv.cosheaf.base.at(U)}")
        report.say(f"unit: {[int(v) for v in inv.cosheaf.unit.flat]}")
        return EXIT_OK
    if len(args.files) != 2:
        raise FormatError("graph compare needs two files")
    G1, G2 = (load_graph(f, report) for f in args.files)
    cmp = compare_graphs(G1, G2, unital=args.unital, bound=args.bound)
    report.set("comparison", cmp.to_dict())
    report.say(f"verdict: {cmp.verdict.verdict}")
    if cmp.verdict.obstruction:
        report.say(f"obstruction: {cmp.verdict.obstruction}")
    report.say(cmp.statement)
    for p in cmp.premises:
        report.warn(f"premise: {p}")
    return EXIT_UNKNOWN if cmp.verdict.verdict == UNKNOWN else EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    p = argparse.ArgumentParser(prog="xkit", description="Invariants of algebras over finite spaces")
    p.add_argument("--version", action="version", version=f"xkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("space", parents=[common], help="finite T0-spaces")
    s.add_argument("action", choices=["validate", "info"])
    s.add_argument("file")

    r = sub.add_parser("rep", parents=[common], help="representations")
    r.add_argument("action", choices=["validate", "eval", "colim", "resolve"])
    r.add_argument("file")
    r.add_argument("--point")

    c = sub.add_parser("cosheaf", parents=[common], help="precosheaves")
    c.add_argument("action", choices=["check"])
    c.add_argument("file")

    u = sub.add_parser("uct", parents=[common], help="Hom, Ext and KK groups")
    u.add_argument("a")
    u.add_argument("b")

    i = sub.add_parser("iso", parents=[common], help="isomorphism of invariants")
    i.add_argument("a")
    i.add_argument("b")
    i.add_argument("--pointed", action="store_true")
    i.add_argument("--bound", type=int, default=DEFAULT_BOUND)

    k = sub.add_parser("classify", parents=[common], help="range conditions")
    k.add_argument("file")
    k.add_argument("--pointed", action="store_true")

    e = sub.add_parser("extension", parents=[common], help="extension permanence")
    e.add_argument("file")
    e.add_argument("--ideal-open", required=True, help='open set key such as "a+b"')

    g = sub.add_parser("graph", parents=[common], help="graph algebras")
    g.add_argument("action", choices=["invariant", "compare"])
    g.add_argument("files", nargs="+")
    g.add_argument("--unital", action="store_true")
    g.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    return p


def run(argv: list[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    report = Report(argv)
    try:
        if args.command == "space":
            code = cmd_space(args, report)
        elif args.command == "rep":
            if args.action == "eval" and not args.point:
                raise FormatError("rep eval needs --point")
            code = cmd_rep(args, report)
        elif args.command == "cosheaf":
            code = cmd_cosheaf(args, report)
        elif args.command == "uct":
            code = cmd_uct(args, report)
        elif args.command == "iso":
            code = cmd_iso(args, report)
        elif args.command == "classify":
            code = cmd_classify(args, report)
        elif args.command == "extension":
            code = cmd_extension(args, report)
        else:
            code = cmd_graph(args, report)
    except XkitError as exc:
        report.set("error", {"type": type(exc).__name__, "message": str(exc)})
        if args.json:
            report.emit(True, out)
        err.write(f"xkit: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    report.set("exit_code", code)
    report.emit(args.json, out)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
