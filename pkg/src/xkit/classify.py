"""Decisions on invariants: isomorphism search, range conditions for
graph and Cuntz-Krieger algebras, realizability, and extension checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._intmat import block_diag, eye, mul, to_lists, zeros
from .abgroup import AbGroup, GradedGroup, cokernel, is_zero_mod, kernel, reduce_vec, solve
from .cosheaf import (Check, Precosheaf, PointedCosheaf, colim, colim_res, is_cosheaf, is_flabby,
                      quotient_closed, restrict_open)
from .errors import IllFormedMap, MissingUnit, NotACosheaf, NotFlabby, SpaceMismatch
from .homalg import LayerHom, hom_layer
from .rep import RepLayer, Representation, is_module_map, res

ISO, NOT_ISO, UNKNOWN = "ISO", "NOT_ISO", "UNKNOWN"
YES, NO, UNDETERMINED, SKIPPED = "YES", "NO", "UNDETERMINED", "SKIPPED"

DEFAULT_BOUND = 3
DEFAULT_MAX_CANDIDATES = 20000


def _fmt(U) -> str:
    return "{" + ",".join(sorted(U)) + "}"


# -- invariants -----------------------------------------------------------------

def canonical_invariants(M: Representation) -> list[tuple[str, object]]:
    """Isomorphism invariants in the order they are compared."""
    sp = M.space
    out: list[tuple[str, object]] = []
    for x in sp.points:
        out.append((f"group at {x}", M.at(x)))
    C = colim(M)
    for U in sp.opens:
        out.append((f"colimit on {_fmt(U)}", C.at(U)))
    for x in sp.points:
        Ux = sp.U(x)
        parts = [cokernel(C.layers[p].composite(Ux - {x}, Ux), C.layers[p].orders(Ux)).group
                 for p in (0, 1)]
        out.append((f"colimit quotient at {x}", GradedGroup(*parts)))
    for x in sp.points:
        for y in sorted(sp.U(x) - {x}):
            cok, ker = [], []
            for p in (0, 1):
                L = M.layers[p]
                A = L.composite(y, x)
                cok.append(cokernel(A, L.orders(x)).group)
                ker.append(kernel(A, L.orders(y), L.orders(x)).group)
            out.append((f"cokernel of {y} -> {x}", GradedGroup(*cok)))
            out.append((f"kernel of {y} -> {x}", GradedGroup(*ker)))
    return out


def unit_invariant(A: PointedCosheaf) -> AbGroup:
    """Even part on the whole space modulo the unit."""
    whole = A.space.whole
    return cokernel(A.unit, A.base.layers[0].orders(whole)).group


def first_mismatch(inv_a, inv_b) -> str | None:
    for (name, a), (_, b) in zip(inv_a, inv_b):
        if a != b:
            return f"{name}: {a} vs {b}"
    return None


# -- iso search -----------------------------------------------------------------

@dataclass
class IsoVerdict:
    verdict: str
    witness: dict | None = None
    obstruction: str | None = None
    search_bound: int | None = None
    candidates_tried: int = 0

    def to_dict(self) -> dict:
        wit = None
        if self.witness is not None:
            wit = {x: {"even": to_lists(f[0]), "odd": to_lists(f[1])}
                   for x, f in sorted(self.witness.items())}
        return {"verdict": self.verdict, "witness": wit, "obstruction": self.obstruction,
                "search_bound": self.search_bound, "candidates_tried": self.candidates_tried}


def coefficient_vectors(n: int, bound: int):
    """Integer vectors in ``[-bound, bound]^n`` by increasing max-norm,
    lexicographic within each norm."""
    yield (0,) * n
    if n == 0:
        return
    for r in range(1, bound + 1):
        for c in itertools.product(range(-r, r + 1), repeat=n):
            if max(abs(v) for v in c) == r:
                yield c


def _det(A: np.ndarray) -> int:
    """Fraction-free Gaussian elimination."""
    n = A.shape[0]
    if n == 0:
        return 1
    M = [[int(v) for v in row] for row in A]
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def _pointwise_iso(f: np.ndarray, src: AbGroup, dst: AbGroup) -> bool:
    """``f: src -> dst`` bijective, given ``src ≅ dst``."""
    r = src.rank
    if r and abs(_det(f[:r, :r])) != 1:
        return False
    if src.is_free:
        return True
    # a surjection between isomorphic finitely generated groups is injective
    return cokernel(f, dst.orders).group.is_trivial


def _family_iso(fam: dict, L: RepLayer, K: RepLayer) -> bool:
    return all(_pointwise_iso(fam[x], L.groups[x], K.groups[x]) for x in L.space.points)


def _search_layer(H: LayerHom, bound: int, budget: list[int], accept=None) -> dict | None:
    n = H.group.ngens
    for c in coefficient_vectors(n, bound):
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        fam = H.family(c)
        if _family_iso(fam, H.source, H.target) and (accept is None or accept(fam)):
            return fam
    return None


def verify_iso_witness(M: Representation, N: Representation, witness: dict) -> bool:
    fam = {x: list(witness[x]) for x in M.space.points}
    if not is_module_map(M, N, fam, 0):
        return False
    for p in (0, 1):
        L, K = M.layers[p], N.layers[p]
        for x in M.space.points:
            f = fam[x][p]
            if L.groups[x] != K.groups[x]:
                return False
            if kernel(f, L.orders(x), K.orders(x)).group.ngens or cokernel(f, K.orders(x)).group.ngens:
                return False
    return True


def invariants_isomorphic(M: Representation, N: Representation, bound: int = DEFAULT_BOUND,
                          *, max_candidates: int = DEFAULT_MAX_CANDIDATES) -> IsoVerdict:
    """Three-valued isomorphism test for representations."""
    if M.space != N.space:
        raise SpaceMismatch("representations live on different spaces")
    bad = first_mismatch(canonical_invariants(M), canonical_invariants(N))
    if bad:
        return IsoVerdict(NOT_ISO, obstruction=bad)
    return _search(M, N, bound, max_candidates)


def _search(M, N, bound, max_candidates, even_accept=None) -> IsoVerdict:
    budget = [max_candidates]
    found = []
    for p in (0, 1):
        H = hom_layer(M.layers[p], N.layers[p])
        fam = _search_layer(H, bound, budget, even_accept if p == 0 else None)
        if fam is None:
            return IsoVerdict(UNKNOWN, search_bound=bound, candidates_tried=max_candidates - budget[0])
        found.append(fam)
    witness = {x: (found[0][x], found[1][x]) for x in M.space.points}
    return IsoVerdict(ISO, witness=witness, search_bound=bound,
                      candidates_tried=max_candidates - budget[0])


def _colim_transport(A: Precosheaf):
    """Comparison ``Colim(Res(A))(X) -> A(X)`` in even degree, its inverse,
    and the presentation data of the colimit."""
    D, cmp = colim_res(A)
    whole = A.space.whole
    phi = cmp.maps[whole][0]
    orders = A.layers[0].orders(whole)
    inv = solve(phi, eye(len(orders)), orders) if orders else zeros(0, 0)
    return D, phi, reduce_vec(inv, D.layers[0].orders(whole)) if orders else inv


def pointed_isomorphic(A: PointedCosheaf, B: PointedCosheaf, bound: int = DEFAULT_BOUND,
                       *, max_candidates: int = DEFAULT_MAX_CANDIDATES) -> IsoVerdict:
    """Isomorphism of pointed cosheaves: the induced map on the whole space
    must send unit to unit."""
    if A.space != B.space:
        raise SpaceMismatch("pointed cosheaves live on different spaces")
    M, N = res(A.base), res(B.base)
    inv_a = canonical_invariants(M) + [("even part modulo the unit", unit_invariant(A))]
    inv_b = canonical_invariants(N) + [("even part modulo the unit", unit_invariant(B))]
    bad = first_mismatch(inv_a, inv_b)
    if bad:
        return IsoVerdict(NOT_ISO, obstruction=bad)
    whole = A.space.whole
    DA, _, inv_a_map = _colim_transport(A.base)
    DB, phi_b, _ = _colim_transport(B.base)
    da, db = DA.layers[0].colim_data[whole], DB.layers[0].colim_data[whole]
    u_a = mul(da.quotient.section, mul(inv_a_map, A.unit))
    target = B.unit
    orders_b = B.base.layers[0].orders(whole)

    def preserves_unit(fam: dict) -> bool:
        big = block_diag([fam[x] for x in da.points])
        image = mul(phi_b, mul(db.quotient.proj, mul(big, u_a)))
        return is_zero_mod(image - target, orders_b)

    return _search(M, N, bound, max_candidates, preserves_unit)


# -- range conditions -----------------------------------------------------------

def _require_flabby(C: Precosheaf) -> None:
    chk = is_flabby(C)
    if not chk:
        raise NotFlabby(chk.detail)


def has_free_quotients_odd(C: Precosheaf) -> Check:
    """``C(V)_1 / C(U)_1`` free for all opens ``U ⊆ V``."""
    _require_flabby(C)
    L = C.layers[1]
    for U in C.space.opens:
        for V in C.space.opens:
            if U < V:
                q = cokernel(L.composite(U, V), L.orders(V)).group
                if not q.is_free:
                    return Check(False, (U, V), f"C({_fmt(V)})_1 / C({_fmt(U)})_1 = {q}")
    return Check(True)


def has_finite_ordered_ranks(C: Precosheaf) -> Check:
    """``rank C(U)_1 <= rank C(U)_0`` for every open ``U``."""
    _require_flabby(C)
    for U in C.space.opens:
        g = C.at(U)
        if g.odd.rank > g.even.rank:
            return Check(False, (U, U), f"rank C({_fmt(U)})_1 = {g.odd.rank} > {g.even.rank}")
    return Check(True)


def has_finite_equal_ranks(C: Precosheaf) -> Check:
    """``rank C(U)_1 == rank C(U)_0`` for every open ``U``."""
    _require_flabby(C)
    for U in C.space.opens:
        g = C.at(U)
        if g.odd.rank != g.even.rank:
            return Check(False, (U, U), f"rank C({_fmt(U)})_1 = {g.odd.rank} != {g.even.rank}")
    return Check(True)


def verify_range_counterexample(C: Precosheaf, which: str, witness) -> bool:
    """Re-check a reported failing pair from scratch."""
    U, V = witness
    if which == "free_quotients_odd":
        L = C.layers[1]
        return U <= V and not cokernel(L.composite(U, V), L.orders(V)).group.is_free
    g = C.at(U)
    if which == "ordered_ranks":
        return g.odd.rank > g.even.rank
    if which == "equal_ranks":
        return g.odd.rank != g.even.rank
    raise ValueError(which)


@dataclass
class ClassVerdict:
    name: str
    verdict: str
    conditions: dict[str, bool] = field(default_factory=dict)
    failed: str | None = None
    witness: list | None = None

    def to_dict(self) -> dict:
        return {"class": self.name, "verdict": self.verdict, "conditions": self.conditions,
                "failed": self.failed, "witness": self.witness}


@dataclass
class RealizabilityReport:
    classes: list[ClassVerdict]
    flabby: bool
    unique_path: bool
    degenerate: bool
    warnings: list[str]

    def __getitem__(self, name: str) -> ClassVerdict:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"flabby": self.flabby, "unique_path_space": self.unique_path,
                "degenerate": self.degenerate, "warnings": self.warnings,
                "classes": [c.to_dict() for c in self.classes]}


STABLE_KIRCHBERG = "stable_kirchberg"
STABLE_GRAPH = "stable_graph"
UNITAL_GRAPH = "unital_graph"
CUNTZ_KRIEGER = "cuntz_krieger"

_CONDITIONS = {
    STABLE_GRAPH: ("flabby", "free_quotients_odd"),
    UNITAL_GRAPH: ("flabby", "free_quotients_odd", "ordered_ranks"),
    CUNTZ_KRIEGER: ("flabby", "free_quotients_odd", "equal_ranks"),
}


def _condition_checks(C: Precosheaf) -> dict[str, Check]:
    fl = is_flabby(C)
    out = {"flabby": fl}
    if fl:
        out["free_quotients_odd"] = has_free_quotients_odd(C)
        out["ordered_ranks"] = has_finite_ordered_ranks(C)
        out["equal_ranks"] = has_finite_equal_ranks(C)
    return out


def _class_verdict(name: str, checks: dict[str, Check]) -> ClassVerdict:
    conds = {}
    for c in _CONDITIONS[name]:
        chk = checks.get(c)
        if chk is None:
            continue
        conds[c] = chk.ok
        if not chk.ok:
            wit = [sorted(w) for w in chk.witness] if chk.witness else None
            return ClassVerdict(name, NO, conds, f"{c}: {chk.detail}", wit)
    return ClassVerdict(name, YES, conds)


def class_holds(C: Precosheaf, name: str) -> bool:
    return _class_verdict(name, _condition_checks(C)).verdict == YES


def realizability_report(C: Precosheaf | PointedCosheaf, pointed: bool = False) -> RealizabilityReport:
    """Which classes of algebras have ``C`` as invariant, per the range
    conditions.  Pointed classes need a unit."""
    if isinstance(C, PointedCosheaf):
        base = C.base
    else:
        base = C
        if pointed:
            raise MissingUnit("pointed classes need a cosheaf with a unit")
        chk = is_cosheaf(base)
        if not chk:
            raise NotACosheaf(chk.detail)
    checks = _condition_checks(base)
    flabby = checks["flabby"].ok
    unique = base.space.is_unique_path_space()
    warnings = []
    kirch = ClassVerdict(STABLE_KIRCHBERG, YES, {"flabby": flabby, "unique_path_space": unique})
    if not flabby:
        kirch.verdict = NO
        kirch.failed = f"flabby: {checks['flabby'].detail}"
    elif not unique:
        kirch.verdict = UNDETERMINED
        kirch.failed = "unique_path_space: the range result needs a unique path space"
    classes = [kirch, _class_verdict(STABLE_GRAPH, checks)]
    for name in (UNITAL_GRAPH, CUNTZ_KRIEGER):
        if pointed:
            classes.append(_class_verdict(name, checks))
        else:
            classes.append(ClassVerdict(name, SKIPPED, failed="input is not pointed"))
    degenerate = base.is_zero()
    if degenerate:
        warnings.append("zero cosheaf: realized only by the zero algebra")
    if not flabby:
        warnings.append("not flabby: no range theorem applies")
    return RealizabilityReport(classes, flabby, unique, degenerate, warnings)


# -- fibres and R-modules -------------------------------------------------------

def fibre(C: Precosheaf, x: str) -> GradedGroup:
    Ux = C.space.U(x)
    parts = [cokernel(L.composite(Ux - {x}, Ux), L.orders(Ux)).group for L in C.layers]
    return GradedGroup(*parts)


def fibres_look_like_CK(C: Precosheaf) -> tuple[dict[str, bool], bool]:
    """Per point: odd fibre free and of the same rank as the even fibre."""
    _require_flabby(C)
    out = {}
    for x in C.space.points:
        F = fibre(C, x)
        out[x] = F.odd.is_free and F.odd.rank == F.even.rank
    return out, all(out.values())


@dataclass
class RModulePoint:
    """Data attached to one point; ``delta`` is always zero."""

    U_even: AbGroup
    punctured_even: AbGroup
    point_odd: AbGroup
    i_punctured: np.ndarray
    i_from: dict[str, np.ndarray]
    delta: np.ndarray


@dataclass
class RModule:
    space: object
    points: dict[str, RModulePoint]
    checks: dict[str, bool]

    def to_dict(self) -> dict:
        return {
            "checks": self.checks,
            "points": {
                x: {"U_even": d.U_even.to_dict(), "punctured_even": d.punctured_even.to_dict(),
                    "point_odd": d.point_odd.to_dict(),
                    "i_punctured": to_lists(d.i_punctured),
                    "i_from": {y: to_lists(m) for y, m in d.i_from.items()},
                    "delta": to_lists(d.delta)}
                for x, d in self.points.items()
            },
        }


def to_R_module(C: Precosheaf) -> RModule:
    _require_flabby(C)
    sp = C.space
    E, O = C.layers
    pts = {}
    checks = {}
    for x in sp.points:
        Ux = sp.U(x)
        P = Ux - {x}
        q = cokernel(O.composite(P, Ux), O.orders(Ux))
        i_p = E.composite(P, Ux)
        i_from = {y: E.composite(sp.U(y), P) for y in sp.arrows_into(x)}
        pts[x] = RModulePoint(E.groups[Ux], E.groups[P], q.group, i_p, i_from,
                              zeros(E.groups[P].ngens, q.group.ngens))
        # the punctured neighbourhood injects and is generated by the U_y
        checks[f"injective at {x}"] = kernel(i_p, E.orders(P), E.orders(Ux)).group.is_trivial
        gens = [m for m in i_from.values()]
        span = np.hstack(gens) if gens else zeros(E.groups[P].ngens, 0)
        checks[f"generated at {x}"] = cokernel(span, E.orders(P)).group.is_trivial
    return RModule(sp, pts, checks)


# -- extensions -----------------------------------------------------------------

EXTENSION_CLASSES = (STABLE_GRAPH, UNITAL_GRAPH, CUNTZ_KRIEGER)


@dataclass
class ExtensionClass:
    name: str
    whole: bool
    ideal: bool | None
    quotient: bool | None
    boundary: bool
    equivalence_holds: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"class": self.name, "whole": self.whole, "ideal": self.ideal,
                "quotient": self.quotient, "boundary_vanishes": self.boundary,
                "equivalence_holds": self.equivalence_holds, "notes": self.notes}


@dataclass
class ExtensionReport:
    ideal_open: frozenset
    degenerate: bool
    boundary_vanishes: bool
    classes: list[ExtensionClass]
    fibres_ck: dict
    whole_report: RealizabilityReport | None

    def __getitem__(self, name: str) -> ExtensionClass:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def equivalence_holds(self) -> bool:
        return all(c.equivalence_holds for c in self.classes)

    def to_dict(self) -> dict:
        return {"ideal_open": sorted(self.ideal_open), "degenerate": self.degenerate,
                "boundary_vanishes": self.boundary_vanishes,
                "classes": [c.to_dict() for c in self.classes],
                "fibres_look_like_ck": self.fibres_ck,
                "whole": None if self.whole_report is None else self.whole_report.to_dict()}


def boundary_vanishes(C: Precosheaf, U: frozenset) -> bool:
    """``C(U) -> C(X)`` injective in both degrees."""
    whole = C.space.whole
    return all(kernel(L.composite(U, whole), L.orders(U), L.orders(whole)).group.is_trivial
               for L in C.layers)


def extension_check(C: Precosheaf, U) -> ExtensionReport:
    """Compare the class of ``C`` with the classes of its restriction to
    the open ``U`` and its quotient on the complement."""
    U = frozenset(U)
    chk = is_cosheaf(C)
    if not chk:
        raise NotACosheaf(chk.detail)
    sp = C.space
    if not sp.is_open(U):
        raise IllFormedMap(f"{_fmt(U)} is not open")
    whole_checks = _condition_checks(C)
    if not U or U == sp.whole:
        classes = []
        for name in EXTENSION_CLASSES:
            w = _class_verdict(name, whole_checks).verdict == YES
            classes.append(ExtensionClass(name, w, None, None, True, True,
                                          ["degenerate extension: the report echoes the whole"]))
        return ExtensionReport(U, True, True, classes, {}, realizability_report(C))
    bnd = boundary_vanishes(C, U)
    ideal = restrict_open(C, U)
    ideal_checks = _condition_checks(ideal)
    quot_checks = None
    fib = {}
    if whole_checks["flabby"]:
        Q = quotient_closed(C, U)
        quot_checks = _condition_checks(Q)
        if quot_checks["flabby"]:
            fib = {"ideal": fibres_look_like_CK(ideal)[1], "quotient": fibres_look_like_CK(Q)[1],
                   "whole": fibres_look_like_CK(C)[1]}
    classes = []
    for name in EXTENSION_CLASSES:
        w = _class_verdict(name, whole_checks).verdict == YES
        i = _class_verdict(name, ideal_checks).verdict == YES
        notes = []
        if quot_checks is not None:
            q = _class_verdict(name, quot_checks).verdict == YES
        elif ideal_checks["flabby"] and bnd:
            # flabby ideal and injective boundary force the defect into the quotient
            q = False
            notes.append("quotient not flabby: whole fails flabbiness although ideal and boundary pass")
        else:
            q = None
            notes.append("quotient not computed: no invariant-level quotient without flabbiness")
        rhs = bool(i and q and bnd)
        classes.append(ExtensionClass(name, w, i, q, bnd, w == rhs, notes))
    return ExtensionReport(U, False, bnd, classes, fib, None)
