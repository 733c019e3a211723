"""From a finite directed graph to its ideal space and its K-theory cosheaf.

Scope: finite graphs without sinks satisfying condition (K), where every
ideal is gauge-invariant and comes from a hereditary saturated vertex set
``H``.  The K-theory of the ideal for ``H`` is read off the restricted
adjacency matrix: ``K_0 = coker(A_H^t - I)``, ``K_1 = ker(A_H^t - I)``.
Structure maps are the maps induced by coordinate inclusion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._intmat import eye, mul, zeros
from .abgroup import GradedGroup, cokernel, kernel, reduce_vec, solve_exact
from .classify import (DEFAULT_BOUND, DEFAULT_MAX_CANDIDATES, ISO, NOT_ISO, UNKNOWN, IsoVerdict,
                       invariants_isomorphic, pointed_isomorphic)
from .cosheaf import Precosheaf, PointedCosheaf, is_cosheaf, is_flabby
from .errors import ConditionKFailure, FormatError, HasSink, TooManyPoints, UnknownPoint
from .rep import res
from .space import FiniteSpace, max_points

MAX_VERTICES = 16


@dataclass
class Graph:
    """Vertices and edges; parallel edges are repeated pairs."""

    vertices: list[str]
    edges: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.vertices = [str(v) for v in self.vertices]
        if len(set(self.vertices)) != len(self.vertices):
            raise FormatError("duplicate vertex")
        if not self.vertices:
            raise FormatError("a graph needs at least one vertex")
        if len(self.vertices) > MAX_VERTICES:
            raise TooManyPoints(f"{len(self.vertices)} vertices exceeds the cap of {MAX_VERTICES}")
        self.edges = [(str(a), str(b)) for a, b in self.edges]
        idx = set(self.vertices)
        for a, b in self.edges:
            if a not in idx or b not in idx:
                raise UnknownPoint(a if a not in idx else b)

    @property
    def adjacency(self) -> np.ndarray:
        """``A[v, w]`` = number of edges ``v -> w``."""
        pos = {v: i for i, v in enumerate(self.vertices)}
        A = zeros(len(self.vertices), len(self.vertices))
        for a, b in self.edges:
            A[pos[a], pos[b]] += 1
        return A

    @classmethod
    def from_matrix(cls, A, names: list[str] | None = None) -> "Graph":
        A = np.asarray(A, dtype=object)
        n = A.shape[0]
        names = names or [f"v{i + 1}" for i in range(n)]
        edges = [(names[i], names[j]) for i in range(n) for j in range(n) for _ in range(int(A[i, j]))]
        return cls(names, edges)

    def to_dict(self) -> dict:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        if not isinstance(d, dict) or "vertices" not in d:
            raise FormatError("graph must be an object with 'vertices' and 'edges'")
        try:
            edges = [(a, b) for a, b in d.get("edges", [])]
        except (TypeError, ValueError) as exc:
            raise FormatError(f"bad edge list: {exc}") from exc
        return cls(list(d["vertices"]), edges)

    # -- combinatorics ------------------------------------------------------

    def successors(self) -> dict[str, set[str]]:
        out = {v: set() for v in self.vertices}
        for a, b in self.edges:
            out[a].add(b)
        return out

    def sinks(self) -> list[str]:
        succ = self.successors()
        return [v for v in self.vertices if not succ[v]]

    def strong_components(self) -> list[set[str]]:
        succ = self.successors()
        reach = {v: self._reachable(v, succ) for v in self.vertices}
        seen: set[str] = set()
        out = []
        for v in self.vertices:
            if v in seen:
                continue
            comp = {w for w in reach[v] if v in reach[w]} | {v}
            seen |= comp
            out.append(comp)
        return out

    @staticmethod
    def _reachable(v: str, succ) -> set[str]:
        """Vertices reachable from ``v`` by a path of length at least one."""
        out: set[str] = set()
        stack = list(succ[v])
        while stack:
            w = stack.pop()
            if w not in out:
                out.add(w)
                stack.extend(succ[w])
        return out

    def condition_k_failure(self) -> list[str] | None:
        """A cycle without exits inside its strong component, i.e. a vertex
        with exactly one return path; ``None`` if condition (K) holds."""
        for comp in self.strong_components():
            inner = [(a, b) for a, b in self.edges if a in comp and b in comp]
            if inner and len(inner) == len(comp):
                v = min(comp)
                cycle, cur = [v], v
                while True:
                    cur = next(b for a, b in inner if a == cur)
                    if cur == v:
                        return cycle
                    cycle.append(cur)
        return None

    def validate(self) -> None:
        sinks = self.sinks()
        if sinks:
            raise HasSink(f"sinks: {', '.join(sinks)}")
        cyc = self.condition_k_failure()
        if cyc:
            raise ConditionKFailure(f"cycle {' -> '.join(cyc + [cyc[0]])} has a unique return path")

    def is_hereditary(self, H: frozenset) -> bool:
        return all(b in H for a, b in self.edges if a in H)

    def is_saturated(self, H: frozenset) -> bool:
        succ = self.successors()
        return all(v in H or not succ[v] or not succ[v] <= H for v in self.vertices)

    def hereditary_saturated_sets(self) -> list[frozenset]:
        out = []
        for r in range(len(self.vertices) + 1):
            for S in itertools.combinations(sorted(self.vertices), r):
                H = frozenset(S)
                if self.is_hereditary(H) and self.is_saturated(H):
                    out.append(H)
        return out


@dataclass
class IdealSpace:
    """The ideal space with its dictionary to hereditary saturated sets."""

    space: FiniteSpace
    point_sets: dict[str, frozenset]
    open_sets: dict[frozenset, frozenset]


def _ideal_space(G: Graph) -> IdealSpace:
    G.validate()
    hs = G.hereditary_saturated_sets()
    irreducible = {}
    for H in hs:
        below = [K for K in hs if K < H]
        maximal = [K for K in below if not any(K < L for L in below)]
        if len(maximal) == 1:
            irreducible[H] = maximal[0]
    names = {}
    for H, K in sorted(irreducible.items(), key=lambda kv: sorted(kv[0])):
        name = ",".join(sorted(H - K))
        while name in names.values():
            name += "'"
        names[H] = name
    if len(names) > max_points():
        raise TooManyPoints(f"ideal space has {len(names)} points")
    pts = [names[H] for H in sorted(names, key=lambda H: (len(H), sorted(H)))]
    rel = [(names[H], names[K]) for H in names for K in names if H < K]
    space = FiniteSpace(pts, rel)
    by_name = {n: H for H, n in names.items()}
    opens = {}
    for K in hs:
        U = frozenset(n for n, H in by_name.items() if H <= K)
        opens[U] = K
    if set(opens) != set(space.opens):
        raise AssertionError("hereditary saturated sets do not match the open sets")
    return IdealSpace(space, by_name, opens)


def ideal_lattice(G: Graph) -> FiniteSpace:
    """Points are the join-irreducible hereditary saturated sets, named by
    the vertices they add to their unique maximal proper such subset."""
    return _ideal_space(G).space


@dataclass
class GraphInvariant:
    space: FiniteSpace
    cosheaf: PointedCosheaf
    point_sets: dict[str, frozenset]
    open_sets: dict[frozenset, frozenset]
    flabby: bool
    warnings: list[str]

    def to_dict(self) -> dict:
        out = self.cosheaf.to_dict()
        out["kind"] = "pointed_cosheaf"
        out["ideal_vertex_sets"] = {p: sorted(H) for p, H in sorted(self.point_sets.items())}
        out["flabby"] = self.flabby
        out["warnings"] = list(self.warnings)
        return out


def _k_groups(G: Graph, H: frozenset):
    verts = [v for v in G.vertices if v in H]
    pos = [G.vertices.index(v) for v in verts]
    A = G.adjacency[np.ix_(pos, pos)] if pos else zeros(0, 0)
    B = A.T - eye(len(verts))
    zero = (0,) * len(verts)
    return verts, cokernel(B, zero), kernel(B, zero, zero)


def ok_invariant(G: Graph) -> GraphInvariant:
    ideal = _ideal_space(G)
    sp = ideal.space
    data = {U: _k_groups(G, ideal.open_sets[U]) for U in sp.opens}
    at = {U: GradedGroup(q.group, k.group) for U, (_, q, k) in data.items()}
    maps = {}
    for U, V in sp.open_covering_pairs:
        vu, qu, ku = data[U]
        vv, qv, kv = data[V]
        incl = zeros(len(vv), len(vu))
        for j, v in enumerate(vu):
            incl[vv.index(v), j] = 1
        even = reduce_vec(mul(mul(qv.proj, incl), qu.section), qv.group.orders)
        if ku.group.ngens:
            odd = solve_exact(kv.incl, mul(incl, ku.incl))
            if odd is None:
                raise AssertionError("odd structure map does not land in the kernel")
        else:
            odd = zeros(kv.group.ngens, 0)
        maps[(U, V)] = (even, odd)
    C = Precosheaf(sp, at, maps)
    chk = is_cosheaf(C)
    if not chk:
        raise AssertionError(f"graph invariant fails the cosheaf condition: {chk.detail}")
    verts, q, _ = data[sp.whole]
    unit = reduce_vec(mul(q.proj, np.full((len(verts), 1), 1, dtype=object)), q.group.orders)
    fl = bool(is_flabby(C))
    warnings = ["unit is the class of the sum of all vertex projections (convention)"]
    if not fl:
        warnings.append("invariant is not flabby: boundary maps do not vanish and the "
                        "classification results do not apply")
    return GraphInvariant(sp, PointedCosheaf(C, unit), ideal.point_sets, ideal.open_sets, fl, warnings)


# -- comparison -----------------------------------------------------------------

def relabel_cosheaf(C: Precosheaf, mapping: dict[str, str], target: FiniteSpace) -> Precosheaf:
    f = lambda U: frozenset(mapping[p] for p in U)
    at = {f(U): C.at(U) for U in C.space.opens}
    maps = {(f(U), f(V)): C.map(U, V) for U, V in C.space.open_covering_pairs}
    return Precosheaf(target, at, maps)


PREMISES = [
    "pure infiniteness of both graph algebras (not verified)",
    "tightness over the computed ideal space (assumed from condition (K))",
]


@dataclass
class GraphComparison:
    verdict: IsoVerdict
    unital: bool
    homeomorphism: dict | None
    statement: str
    premises: list[str]
    flabby: tuple[bool, bool]

    def to_dict(self) -> dict:
        return {"unital": self.unital, "homeomorphism": self.homeomorphism,
                "statement": self.statement, "premises": self.premises,
                "flabby": list(self.flabby), **self.verdict.to_dict()}


def compare_graphs(G1: Graph, G2: Graph, unital: bool = False, bound: int = DEFAULT_BOUND,
                   *, max_candidates: int = DEFAULT_MAX_CANDIDATES) -> GraphComparison:
    I1, I2 = ok_invariant(G1), ok_invariant(G2)
    flabby = (I1.flabby, I2.flabby)
    premises = list(PREMISES)
    if not all(flabby):
        premises.append("intermediate cancellation FAILS for at least one input (not flabby)")
    else:
        premises.append("intermediate cancellation (verified: both invariants flabby)")
    homeos = list(I1.space.isomorphisms_to(I2.space))
    if not homeos:
        v = IsoVerdict(NOT_ISO, obstruction="ideal spaces are not homeomorphic")
        return GraphComparison(v, unital, None, "the algebras are not isomorphic over any identification",
                               premises, flabby)
    unknown = None
    first_no = None
    for m in homeos:
        C1 = relabel_cosheaf(I1.cosheaf.base, m, I2.space)
        if unital:
            A = PointedCosheaf(C1, I1.cosheaf.unit)
            v = pointed_isomorphic(A, I2.cosheaf, bound, max_candidates=max_candidates)
        else:
            v = invariants_isomorphic(res(C1), res(I2.cosheaf.base), bound,
                                      max_candidates=max_candidates)
        if v.verdict == ISO:
            kind = "isomorphic" if unital else "stably isomorphic"
            stmt = f"invariants agree; under the premises the graph algebras are {kind}"
            return GraphComparison(v, unital, m, stmt, premises, flabby)
        if v.verdict == UNKNOWN and unknown is None:
            unknown = v
        if v.verdict == NOT_ISO and first_no is None:
            first_no = v
    if unknown is not None:
        return GraphComparison(unknown, unital, None, "search exhausted without a decision",
                               premises, flabby)
    return GraphComparison(first_no, unital, None,
                           "invariants differ under every homeomorphism of the ideal spaces",
                           premises, flabby)
