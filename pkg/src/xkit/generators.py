"""Random and exhaustive instance generators for tests and experiments.

All randomness goes through a caller-supplied :class:`random.Random`.
"""

from __future__ import annotations

import itertools
import random
import string
from math import gcd

import numpy as np

from ._intmat import hstack, mul, zeros
from .abgroup import AbGroup, GradedGroup, quotient, reduce_vec, relation_matrix
from .cosheaf import Precosheaf, PrecosheafLayer, colim, colim_layer
from .graphck import Graph
from .rep import RepLayer, Representation
from .space import FiniteSpace

NAMES = string.ascii_lowercase


# -- spaces ---------------------------------------------------------------------

def all_spaces(n: int) -> list[FiniteSpace]:
    """Every T0-space with ``n`` points up to homeomorphism, named a, b, ..."""
    names = list(NAMES[:n])
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    seen = set()
    out = []
    for bits in range(1 << len(pairs)):
        rel = {pairs[k] for k in range(len(pairs)) if bits >> k & 1}
        if any((i, j) in rel and (j, k) in rel and (i, k) not in rel
               for i in range(n) for j in range(n) for k in range(n)):
            continue
        canon = min(tuple(sorted((p[i], p[j]) for i, j in rel))
                    for p in itertools.permutations(range(n)))
        if canon in seen:
            continue
        seen.add(canon)
        out.append(FiniteSpace(names, [(names[i], names[j]) for i, j in canon]))
    return out


def spaces_up_to(n: int, unique_path: bool | None = None) -> list[FiniteSpace]:
    out = [X for k in range(1, n + 1) for X in all_spaces(k)]
    if unique_path is not None:
        out = [X for X in out if X.is_unique_path_space() == unique_path]
    return out


def v_space() -> FiniteSpace:
    """Two open points below a common closed point: opens ∅, {a}, {b}, {a,b}, X."""
    return FiniteSpace(["a", "b", "c"], [("a", "c"), ("b", "c")])


# -- groups and maps ------------------------------------------------------------

def random_group(rng: random.Random, max_rank: int = 2, torsion=(2, 3, 4),
                 max_torsion: int = 2) -> AbGroup:
    orders = [0] * rng.randint(0, max_rank)
    orders += [rng.choice(torsion) for _ in range(rng.randint(0, max_torsion))]
    return AbGroup.from_orders(orders)


def random_graded_group(rng: random.Random, **kw) -> GradedGroup:
    return GradedGroup(random_group(rng, **kw), random_group(rng, **kw))


def random_hom(rng: random.Random, G: AbGroup, H: AbGroup, span: int = 3) -> np.ndarray:
    """A random well-defined homomorphism ``G -> H``."""
    out = zeros(H.ngens, G.ngens)
    for k, beta in enumerate(H.orders):
        for i, alpha in enumerate(G.orders):
            if alpha == 0:
                out[k, i] = rng.randint(-span, span)
            elif beta != 0:
                out[k, i] = (beta // gcd(alpha, beta)) * rng.randint(-span, span)
    return reduce_vec(out, H.orders)


# -- representations ------------------------------------------------------------

def random_free_layer(rng: random.Random, space: FiniteSpace, **kw) -> RepLayer:
    """Arbitrary groups and arrow maps; coherent only on unique path spaces."""
    groups = {x: random_group(rng, **kw) for x in space.points}
    arrows = {(y, x): random_hom(rng, groups[y], groups[x]) for y, x in space.hasse_arrows()}
    return RepLayer(space, groups, arrows)


def presented_layer(rng: random.Random, space: FiniteSpace, gens: int = 3, rels: int = 3,
                    span: int = 3) -> RepLayer:
    """Cokernel of a random map between projective bundles; coherent on any
    space."""
    pts = space.points
    g0 = [rng.choice(pts) for _ in range(rng.randint(0, gens))]
    g1 = [rng.choice(pts) for _ in range(rng.randint(0, rels))] if g0 else []
    d = zeros(len(g0), len(g1))
    for j, xj in enumerate(g1):
        for k, xk in enumerate(g0):
            if space.u_subset(xk, xj):
                d[k, j] = rng.randint(-span, span)
    idx = {y: [k for k, x in enumerate(g0) if space.u_subset(x, y)] for y in pts}
    quots = {}
    for y in pts:
        rows = idx[y]
        cols = [j for j, x in enumerate(g1) if space.u_subset(x, y)]
        R = d[np.ix_(rows, cols)] if rows and cols else zeros(len(rows), len(cols))
        quots[y] = quotient(R, len(rows))
    arrows = {}
    for w, y in space.hasse_arrows():
        incl = zeros(len(idx[y]), len(idx[w]))
        for j, k in enumerate(idx[w]):
            incl[idx[y].index(k), j] = 1
        arrows[(w, y)] = mul(mul(quots[y].proj, incl), quots[w].section)
    return RepLayer(space, {y: q.group for y, q in quots.items()}, arrows)


def random_rep(rng: random.Random, space: FiniteSpace, **kw) -> Representation:
    """Free choice of maps on unique path spaces, presented otherwise."""
    if space.is_unique_path_space():
        layers = [random_free_layer(rng, space, **kw) for _ in (0, 1)]
    else:
        layers = [presented_layer(rng, space) for _ in (0, 1)]
    return Representation.from_layers(*layers)


def _flabby_layer(rng: random.Random, space: FiniteSpace, fibres: dict | None = None,
                  **kw) -> RepLayer:
    """Built along a filtration: ``M(x)`` is an extension of a random fibre
    by the colimit over ``U_x \\ {x}``, which keeps every step injective."""
    order = space.singleton_filtration()
    groups: dict[str, AbGroup] = {}
    arrows: dict = {}
    for i, x in enumerate(order):
        prefix = order[:i]
        sub = space.subspace(prefix) if prefix else None
        P = sorted(space.U(x) - {x})
        if sub is not None:
            partial = RepLayer(sub, {p: groups[p] for p in prefix},
                               {a: m for a, m in arrows.items() if a[0] in prefix and a[1] in prefix})
            CP = colim_layer(partial)
            Pset = frozenset(P)
            base = CP.groups[Pset]
            inj = {y: _inject(CP, Pset, y, partial) for y in space.arrows_into(x)}
        else:
            base = AbGroup()
            inj = {}
        fib = fibres[x] if fibres else random_group(rng, **kw)
        # Z^{base} ⊕ Z^{fib} modulo base relations and (-c_j, d_j e_j)
        nb, nf = base.ngens, fib.ngens
        n = nb + nf
        R = [_embed(relation_matrix(base.orders), 0, n)]
        for j, dj in enumerate(fib.orders):
            if dj:
                col = zeros(n, 1)
                col[nb + j, 0] = dj
                for k in range(nb):
                    col[k, 0] = -rng.randint(-2, 2) if base.orders[k] == 0 else -rng.randint(0, base.orders[k] - 1)
                R.append(col)
        q = quotient(hstack(R, n), n)
        groups[x] = q.group
        to_x = q.proj[:, :nb] if nb else zeros(q.group.ngens, 0)
        for y, m in inj.items():
            arrows[(y, x)] = reduce_vec(mul(to_x, m), q.group.orders)
    return RepLayer(space, groups, arrows)


def _inject(CP: PrecosheafLayer, P: frozenset, y: str, partial: RepLayer) -> np.ndarray:
    d = CP.colim_data[P]
    start = d.offsets[y]
    k = partial.ngens(y)
    block = zeros(len(d.orders), k)
    for i in range(k):
        block[start + i, i] = 1
    return reduce_vec(mul(d.quotient.proj, block), CP.orders(P))


def _embed(block: np.ndarray, offset: int, n: int) -> np.ndarray:
    out = zeros(n, block.shape[1])
    out[offset:offset + block.shape[0], :] = block
    return out


def random_flabby_rep(rng: random.Random, space: FiniteSpace, *, odd_free: bool = False,
                      equal_ranks: bool = False, **kw) -> Representation:
    """A representation whose colimit is flabby.

    ``odd_free`` makes every odd fibre free; ``equal_ranks`` gives the odd
    fibre at each point the rank of the even one.  Since colimits of
    flabby representations are additive in the fibres, these yield free
    odd quotients and equal ranks on every open set.
    """
    if not (odd_free or equal_ranks):
        return Representation.from_layers(_flabby_layer(rng, space, **kw),
                                          _flabby_layer(rng, space, **kw))
    even = {x: random_group(rng, **kw) for x in space.points}
    odd = {}
    for x in space.points:
        g = random_group(rng, **kw)
        r = even[x].rank if equal_ranks else g.rank
        odd[x] = AbGroup.from_orders([0] * r + ([] if odd_free else [d for d in g.orders if d]))
    return Representation.from_layers(_flabby_layer(rng, space, even, **kw),
                                      _flabby_layer(rng, space, odd, **kw))


def random_flabby_cosheaf(rng: random.Random, space: FiniteSpace, **kw) -> Precosheaf:
    return colim(random_flabby_rep(rng, space, **kw))


def range_suite(rng: random.Random, spaces: list[FiniteSpace], count: int) -> list[Precosheaf]:
    """Flabby cosheaves cycling through ``spaces``, a quarter each plain,
    with free odd fibres, with equal fibre ranks, and both."""
    modes = [{}, {"odd_free": True}, {"equal_ranks": True}, {"odd_free": True, "equal_ranks": True}]
    return [random_flabby_cosheaf(rng, spaces[k % len(spaces)], **modes[k % 4]) for k in range(count)]


def random_precosheaf(rng: random.Random, space: FiniteSpace) -> Precosheaf:
    """A precosheaf with zero on the empty set: a presented representation of
    the poset of nonempty opens.  Usually not a cosheaf."""
    nonempty = [U for U in space.opens if U]
    name = {U: "+".join(sorted(U)) for U in nonempty}
    poset = FiniteSpace([name[U] for U in nonempty],
                        [(name[U], name[V]) for U in nonempty for V in nonempty if U < V],
                        limit=len(nonempty))
    layers = [presented_layer(rng, poset, gens=4, rels=3) for _ in (0, 1)]
    at = {U: GradedGroup(layers[0].groups[name[U]], layers[1].groups[name[U]]) for U in nonempty}
    maps = {}
    for U, V in space.open_covering_pairs:
        if U:
            maps[(U, V)] = tuple(L.composite(name[U], name[V]) for L in layers)
    return Precosheaf(space, at, maps)


# -- graphs ---------------------------------------------------------------------

def random_graph(rng: random.Random, max_vertices: int = 5, max_mult: int = 4,
                 density: float = 0.4, tries: int = 1000) -> Graph:
    """A random graph without sinks satisfying condition (K)."""
    for _ in range(tries):
        n = rng.randint(1, max_vertices)
        names = [f"v{i + 1}" for i in range(n)]
        A = [[rng.randint(1, max_mult) if rng.random() < density else 0 for _ in range(n)]
             for _ in range(n)]
        G = Graph.from_matrix(np.array(A, dtype=object), names)
        if G.sinks() or G.condition_k_failure():
            continue
        return G
    raise RuntimeError("no admissible graph found")


def cuntz_graph(n: int) -> Graph:
    """One vertex with ``n`` loops."""
    return Graph(["v"], [("v", "v")] * n)


def delay_graph(n: int) -> Graph:
    """``cuntz_graph(n)`` with one loop routed through a new vertex."""
    return Graph(["v", "d"], [("v", "v")] * (n - 1) + [("v", "d"), ("d", "v")])
