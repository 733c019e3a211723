import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import group_from_relations
from xkit.abgroup import AbGroup, GradedGroup
from xkit.classify import ISO, NOT_ISO, has_finite_equal_ranks
from xkit.cosheaf import is_cosheaf
from xkit.errors import ConditionKFailure, FormatError, HasSink, UnknownPoint
from xkit.generators import cuntz_graph, delay_graph, random_graph
from xkit.graphck import Graph, compare_graphs, ideal_lattice, ok_invariant


def two_vertex(loops=3):
    return Graph(["v", "w"], [("v", "v")] * loops + [("w", "w")] * loops + [("v", "w")])


def hs_oracle(G):
    """Hereditary saturated sets straight from the definitions."""
    out = set()
    for r in range(len(G.vertices) + 1):
        for S in itertools.combinations(G.vertices, r):
            H = set(S)
            hered = all(b in H for a, b in G.edges if a in H)
            sat = all(v in H for v in G.vertices
                      if {b for a, b in G.edges if a == v} and {b for a, b in G.edges if a == v} <= H)
            if hered and sat:
                out.add(frozenset(H))
    return out


def k_oracle(G, H):
    verts = [v for v in G.vertices if v in H]
    A = np.array([[sum(1 for e in G.edges if e == (a, b)) for b in verts] for a in verts],
                 dtype=object).reshape(len(verts), len(verts))
    B = A.T - np.eye(len(verts), dtype=object)
    rank, tors = group_from_relations(B, len(verts))
    # the kernel of a square matrix has the rank of its cokernel
    return AbGroup(rank, tuple(tors)), AbGroup(rank)


@pytest.mark.parametrize("n", range(2, 8))
def test_cuntz_graph_invariant(n):
    inv = ok_invariant(cuntz_graph(n))
    assert len(inv.space) == 1
    top = inv.cosheaf.base.at(inv.space.whole)
    assert top == GradedGroup(AbGroup.cyclic(n - 1), AbGroup())
    if n > 2:
        assert inv.cosheaf.unit.tolist() == [[1]]


def test_ideal_lattice_examples():
    assert len(ideal_lattice(cuntz_graph(3))) == 1
    X = ideal_lattice(two_vertex(2))
    assert len(X) == 2 and len(X.hasse_arrows()) == 1
    y, x = X.hasse_arrows()[0]
    assert y == "w" and x == "v"
    pair = Graph(["a", "b"], [("a", "a")] * 2 + [("b", "b")] * 2)
    Y = ideal_lattice(pair)
    assert len(Y) == 2 and not Y.hasse_arrows()


def test_two_vertex_invariant_by_hand():
    inv = ok_invariant(two_vertex(3))
    C = inv.cosheaf.base
    assert C.at(frozenset({"w"})) == GradedGroup(AbGroup.cyclic(2), AbGroup())
    # A^t - I = [[2, 0], [1, 2]] has invariant factors 1, 4
    assert C.at(inv.space.whole) == GradedGroup(AbGroup.cyclic(4), AbGroup())
    assert inv.flabby and is_cosheaf(C)


def test_refused_graphs():
    with pytest.raises(ConditionKFailure) as exc:
        ok_invariant(cuntz_graph(1))
    assert "v" in str(exc.value)
    with pytest.raises(HasSink):
        ideal_lattice(Graph(["v", "w"], [("v", "v"), ("v", "v"), ("v", "w")]))
    with pytest.raises(UnknownPoint):
        Graph(["v"], [("v", "x")])
    with pytest.raises(FormatError):
        Graph.from_dict({"edges": []})


def test_compare_cuntz_graphs():
    a, b = cuntz_graph(3), Graph(["u"], [("u", "u")] * 3)
    assert compare_graphs(a, b).verdict.verdict == ISO
    assert compare_graphs(a, b, unital=True).verdict.verdict == ISO
    v = compare_graphs(cuntz_graph(2), cuntz_graph(3))
    assert v.verdict.verdict == NOT_ISO and v.premises


def test_unit_moved_to_trivial_class():
    # K_0 = Z/2 in both, but the vertex sum is zero in the second graph
    other = Graph.from_matrix([[2, 1], [1, 0]])
    assert compare_graphs(cuntz_graph(3), other).verdict.verdict == ISO
    v = compare_graphs(cuntz_graph(3), other, unital=True)
    assert v.verdict.verdict == NOT_ISO and "unit" in v.verdict.obstruction


@pytest.mark.parametrize("n", range(2, 7))
def test_delay_vertex_keeps_k_groups(n):
    a, b = ok_invariant(cuntz_graph(n)), ok_invariant(delay_graph(n))
    assert a.cosheaf.base.at(a.space.whole) == b.cosheaf.base.at(b.space.whole)
    assert compare_graphs(cuntz_graph(n), delay_graph(n)).verdict.verdict == ISO


def test_graph_round_trip():
    G = two_vertex()
    assert Graph.from_dict(G.to_dict()) == G
    assert G.adjacency.tolist() == [[3, 1], [0, 3]]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_graphs(seed):
    G = random_graph(random.Random(seed), max_vertices=4)
    assert set(G.hereditary_saturated_sets()) == hs_oracle(G)
    inv = ok_invariant(G)
    C = inv.cosheaf.base
    assert is_cosheaf(C)
    for U, H in inv.open_sets.items():
        assert (C.at(U).even, C.at(U).odd) == k_oracle(G, H)
    if inv.flabby:
        assert has_finite_equal_ranks(C)
