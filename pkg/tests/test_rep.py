import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import count_module_maps
from xkit._intmat import eye, mat, zeros
from xkit.abgroup import AbGroup, GradedGroup
from xkit.errors import IllFormedMap, PathIncoherence, SpaceMismatch, UnknownPoint
from xkit.generators import random_rep, spaces_up_to
from xkit.homalg import hom_module
from xkit.rep import (ProjectiveBundle, Representation, bundle_hom_into, direct_sum, identity_map,
                      is_module_map, projective, realize_bundle, zero_rep)
from xkit.space import FiniteSpace, diamond, sierpinski

Z, Z2, O = AbGroup(1), AbGroup.cyclic(2), AbGroup()
E = zeros(0, 0)


def ev(g):
    return GradedGroup(g, O)


def sier(k, ga=Z, gb=Z):
    return Representation(sierpinski(), {"a": ev(ga), "b": ev(gb)},
                          {("a", "b"): (mat([[k]]), E)})


def test_sierpinski_rep_is_fine():
    M = sier(3)
    assert M.map("a", "b")[0][0, 0] == 3
    assert M.at("b") == ev(Z)


def test_diamond_incoherent_paths():
    X = diamond()
    one, two = mat([[1]]), mat([[2]])
    maps = {("t", "m1"): (one, E), ("m1", "b"): (one, E),
            ("t", "m2"): (one, E), ("m2", "b"): (two, E)}
    with pytest.raises(PathIncoherence) as exc:
        Representation(X, {x: ev(Z) for x in X.points}, maps)
    assert "t" in str(exc.value) and "b" in str(exc.value)


def test_zero_rep_is_fine():
    assert zero_rep(diamond()).is_zero()


def test_ill_formed_maps():
    with pytest.raises(IllFormedMap):
        sier(1, ga=Z2, gb=Z)
    with pytest.raises(IllFormedMap):
        Representation(sierpinski(), {"a": ev(Z), "b": ev(Z)}, {("b", "a"): (mat([[1]]), E)})
    with pytest.raises(UnknownPoint):
        Representation(sierpinski(), {"z": ev(Z)})


def test_projective_shape():
    X = sierpinski()
    Pa, Pb = projective(X, "a"), projective(X, "b")
    assert Pa.at("a") == ev(Z) and Pa.at("b") == ev(Z)
    assert Pb.at("a") == ev(O) and Pb.at("b") == ev(Z)
    assert projective(X, "a", 1).at("b") == GradedGroup(O, Z)


def test_hom_from_projectives_is_evaluation():
    X = sierpinski()
    N = Representation(X, {"a": GradedGroup(Z, Z2), "b": GradedGroup(AbGroup(1, (3,)), O)},
                       {("a", "b"): (mat([[2], [1]]), zeros(0, 1))})
    for x in X.points:
        assert hom_module(projective(X, x), N).group == N.at(x)
    P = FiniteSpace(["p"])
    Np = Representation(P, {"p": GradedGroup(Z, Z2)})
    assert hom_module(projective(P, "p", 1), Np).group == GradedGroup(Z2, Z)


def test_bundle_hom_matches_hom_module_and_is_natural():
    rng = random.Random(3)
    for X in spaces_up_to(3):
        N = random_rep(rng, X)
        B = ProjectiveBundle([(x, rng.randint(0, 1), 1) for x in X.points])
        bh = bundle_hom_into(X, B, N)
        R = realize_bundle(X, B)
        assert bh.group == hom_module(R, N).group
        for degree in (0, 1):
            for j in range(bh.group[degree].ngens):
                e = [int(i == j) for i in range(bh.group[degree].ngens)]
                assert is_module_map(R, N, bh.module_map(e, degree), degree)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(spaces_up_to(3)), st.integers(0, 10 ** 6))
def test_hom_module_order_matches_enumeration(X, seed):
    """Count module maps between small finite representations by brute force."""
    rng = random.Random(seed)
    kw = dict(max_rank=0, torsion=(2, 3), max_torsion=1)
    M, N = random_rep(rng, X, **kw), random_rep(rng, X, **kw)
    if any(g.rank for R in (M, N) for x in X.points for g in (R.at(x).even, R.at(x).odd)):
        return
    H = hom_module(M, N)
    for degree in (0, 1):
        assert H.group[degree].order == count_module_maps(M, N, degree)


def test_hom_generators_are_module_maps():
    rng = random.Random(5)
    for X in spaces_up_to(3):
        M, N = random_rep(rng, X), random_rep(rng, X)
        H = hom_module(M, N)
        for degree in (0, 1):
            for fam in H.generators(degree):
                assert is_module_map(M, N, fam, degree)


def test_identity_and_direct_sum():
    M = sier(2)
    assert is_module_map(M, M, identity_map(M))
    S = direct_sum(M, sier(3))
    assert S.at("a") == ev(AbGroup(2))
    assert (S.map("a", "b")[0] == mat([[2, 0], [0, 3]])).all()


def test_space_mismatch():
    with pytest.raises(SpaceMismatch):
        hom_module(sier(1), zero_rep(diamond()))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(spaces_up_to(4)), st.integers(0, 10 ** 6))
def test_dict_round_trip_and_shift(X, seed):
    M = random_rep(random.Random(seed), X)
    back = Representation.from_dict(M.to_dict())
    for x in X.points:
        assert back.at(x) == M.at(x)
        assert back.shift().at(x) == M.at(x).shift()
    for y, x in X.hasse_arrows():
        for p in (0, 1):
            assert np.array_equal(back.map(y, x)[p], M.map(y, x)[p])


def test_composites_along_chain():
    from xkit.space import chain
    X = chain("abc")
    M = Representation(X, {x: ev(Z) for x in "abc"},
                       {("a", "b"): (mat([[2]]), E), ("b", "c"): (mat([[3]]), E)})
    assert M.layers[0].composite("a", "c")[0, 0] == 6
    assert (M.layers[0].composite("b", "b") == eye(1)).all()
