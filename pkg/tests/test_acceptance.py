"""Acceptance criteria 1-11.  Each test records one PASS/FAIL line; the
terminal summary repeats them at the end of the run."""

import random
import time
from functools import lru_cache
from math import gcd, prod

import numpy as np
import pytest

from oracles import count_ext, count_homs
from xkit._intmat import zeros
from xkit.abgroup import AbGroup, GradedGroup, direct_sum
from xkit.classify import (CUNTZ_KRIEGER, EXTENSION_CLASSES, STABLE_GRAPH, UNITAL_GRAPH,
                           class_holds, extension_check, has_finite_equal_ranks,
                           has_finite_ordered_ranks, has_free_quotients_odd,
                           verify_range_counterexample)
from xkit.cosheaf import colim, colim_res, is_cosheaf, is_flabby, is_flabby_bruteforce, res_colim
from xkit.generators import (all_spaces, cuntz_graph, random_flabby_cosheaf, random_flabby_rep,
                             random_graded_group, random_graph, random_precosheaf, random_rep,
                             range_suite, spaces_up_to, v_space)
from xkit.homalg import ext_module, fibre_groups, is_projective, projective_resolution, uct_groups
from xkit.rep import ProjectiveBundle, Representation, projective, realize_bundle
from xkit.space import FiniteSpace, diamond, sierpinski

# -- shared suites ----------------------------------------------------------------

@lru_cache(maxsize=None)
def suite1():
    """200 representations cycling over every unique-path space with at most
    five points; ranks at most 2, torsion from {2, 3, 4}."""
    spaces = spaces_up_to(5, unique_path=True)
    rng = random.Random(1)
    return [random_rep(rng, spaces[k % len(spaces)], max_rank=2, torsion=(2, 3, 4))
            for k in range(200)]


def _extra_spaces():
    # the non-unique-path 4-point space is the diamond; the V-shaped spaces
    # are the ones with two minimal points below a common point
    four = [X for X in all_spaces(4) if len(X.hasse_arrows()) >= 2]
    return [diamond(), v_space()] + four


SUITE3_SPACES = spaces_up_to(4) + [diamond()]


@lru_cache(maxsize=None)
def suite3():
    """200 pairs (M, N) of flabby representations."""
    rng = random.Random(3)
    out = []
    for k in range(200):
        X = SUITE3_SPACES[k % len(SUITE3_SPACES)]
        out.append((random_flabby_rep(rng, X), random_flabby_rep(rng, X)))
    return out


@lru_cache(maxsize=None)
def suite9():
    return range_suite(random.Random(9), spaces_up_to(4), 500)


# -- 1-2: Res/Colim ---------------------------------------------------------------

def test_ac1_res_colim_equivalence(acceptance):
    t0 = time.perf_counter()
    bad = []
    for k, M in enumerate(suite1()):
        X = M.space
        R, cmp = res_colim(M)
        exact = cmp.ok and all(R.at(x) == M.at(x) for x in X.points) and all(
            np.array_equal(R.map(y, x)[p], M.map(y, x)[p])
            for y, x in X.hasse_arrows() for p in (0, 1))
        C = colim(M)
        _, cmp2 = colim_res(C)
        if not (exact and cmp2.ok):
            bad.append(k)
    # a second family of cosheaves that are not built as colimits here
    rng = random.Random(11)
    spaces = spaces_up_to(5, unique_path=True)
    for k in range(50):
        C = random_flabby_cosheaf(rng, spaces[k % len(spaces)])
        if not colim_res(C)[1].ok:
            bad.append(("cosheaf", k))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    acceptance(1, ok, f"{len(suite1())} reps over {len(spaces)} unique-path spaces, "
                      f"{len(bad)} failures, {dt:.1f}s (< 60s)")
    assert ok, bad[:5]


def test_ac2_colim_lands_in_cosheaves(acceptance):
    bad = [k for k, M in enumerate(suite1()) if not is_cosheaf(colim(M))]
    rng = random.Random(2)
    extra = _extra_spaces()
    n = 0
    for X in extra:
        for _ in range(10):
            n += 1
            if not is_cosheaf(colim(random_rep(rng, X, max_rank=2, torsion=(2, 3, 4)))):
                bad.append(repr(X))
    ok = not bad
    acceptance(2, ok, f"{len(suite1())} suite-1 colimits + {n} on {len(extra)} non-unique-path "
                      f"or V-shaped spaces, {len(bad)} failures")
    assert ok, bad[:5]


# -- 3-7: homological algebra -----------------------------------------------------

def test_ac3_resolution_and_filtration_independence(acceptance):
    bad = []
    rev = lambda p: [-ord(c) for c in p]
    for k, (M, N) in enumerate(suite3()):
        r = projective_resolution(M)
        if r.check_exactness() is not None:
            bad.append((k, "exactness"))
        r2 = projective_resolution(M, key=rev)
        if r2.check_exactness() is not None:
            bad.append((k, "exactness, reversed"))
        if dict(fibre_groups(M)) != dict(fibre_groups(M, key=rev)):
            bad.append((k, "fibres"))
        if ext_module(M, N) != ext_module(M, N, key=rev):
            bad.append((k, "ext"))
    ok = not bad
    acceptance(3, ok, f"{len(suite3())} flabby instances, two filtrations, {len(bad)} failures")
    assert ok, bad[:5]


def _cyclics(g: AbGroup) -> list[int]:
    return [0] * g.rank + list(g.torsion)


def _hom_closed(G: AbGroup, H: AbGroup) -> AbGroup:
    """Hom(Z, Z) = Z, Hom(Z, Z/b) = Z/b, Hom(Z/a, Z) = 0, Hom(Z/a, Z/b) = Z/gcd(a, b)."""
    out = []
    for a in _cyclics(G):
        for b in _cyclics(H):
            if a == 0:
                out.append(b)
            elif b:
                out.append(gcd(a, b))
    return AbGroup.from_orders([v for v in out if v != 1])


def _ext_closed(G: AbGroup, H: AbGroup) -> AbGroup:
    """Ext(Z/a, Z) = Z/a, Ext(Z/a, Z/b) = Z/gcd(a, b), Ext(Z, -) = 0."""
    out = []
    for a in _cyclics(G):
        if a == 0:
            continue
        for b in _cyclics(H):
            out.append(a if b == 0 else gcd(a, b))
    return AbGroup.from_orders([v for v in out if v != 1])


def _graded(f, G: GradedGroup, H: GradedGroup) -> GradedGroup:
    return GradedGroup(direct_sum(f(G.even, H.even), f(G.odd, H.odd)),
                       direct_sum(f(G.even, H.odd), f(G.odd, H.even)))


def test_ac4_one_point_is_classical(acceptance):
    P = FiniteSpace(["p"])
    rng = random.Random(4)
    bad, enumerated = [], 0
    for k in range(100):
        # every other pair is finite so the enumeration oracle applies
        kw = {"max_rank": 0} if k % 2 else {}
        G, H = random_graded_group(rng, **kw), random_graded_group(rng, **kw)
        M, N = Representation(P, {"p": G}), Representation(P, {"p": H})
        hom, ext = uct_groups(M, N).hom, ext_module(M, N)
        if hom != _graded(_hom_closed, G, H) or ext != _graded(_ext_closed, G, H):
            bad.append(k)
        finite = all(g.rank == 0 for g in (G.even, G.odd, H.even, H.odd))
        if finite:
            enumerated += 1
            for e in (0, 1):
                pairs = [(G.even, H[e]), (G.odd, H[1 - e])]
                if hom[e].order != prod(count_homs(a.orders, b.orders) for a, b in pairs) or \
                        ext[e].order != prod(count_ext(a.orders, b.orders) for a, b in pairs):
                    bad.append((k, "enumeration"))
    ok = not bad
    acceptance(4, ok, f"100 one-point pairs vs closed forms ({enumerated} also enumerated), "
                      f"{len(bad)} failures")
    assert ok, bad[:5]


def _elementary_divisors(g: AbGroup) -> list[int]:
    out = []
    for d in g.torsion:
        p = 2
        while d > 1:
            if d % p == 0:
                q = 1
                while d % p == 0:
                    d //= p
                    q *= p
                out.append(q)
            p += 1
    return sorted(out)


def test_ac5_uct_assembly(acceptance):
    bad = []
    for k, (M, N) in enumerate(suite3()):
        rep = uct_groups(M, N)
        if rep.kk is None or not rep.split:
            bad.append((k, "unsplit"))
            continue
        for i in (0, 1):
            H, X, K = rep.hom[i], rep.ext[1 - i], rep.kk[i]
            if K.rank != H.rank + X.rank:
                bad.append((k, i, "rank"))
            if _elementary_divisors(K) != sorted(_elementary_divisors(H) + _elementary_divisors(X)):
                bad.append((k, i, "torsion"))
    # Sierpinski, 0 at a and Z/2 at b.  The resolution is P^b --2--> P^b, so
    # Hom(M, M) = Z/2 (the map at b), Ext(M, M) = coker(2 on Z/2) = Z/2, both
    # even, and KK_0 = Hom_0 + Ext_1 = Z/2, KK_1 = Hom_1 + Ext_0 = Z/2.
    Z2, O = AbGroup.cyclic(2), AbGroup()
    W = Representation(sierpinski(), {"a": GradedGroup(O, O), "b": GradedGroup(Z2, O)},
                       {("a", "b"): (zeros(1, 0), zeros(0, 0))})
    rep = uct_groups(W, W)
    hand = (rep.hom == GradedGroup(Z2, O) and rep.ext == GradedGroup(Z2, O)
            and rep.kk == GradedGroup(Z2, Z2))
    ok = not bad and hand
    acceptance(5, ok, f"{len(suite3())} suite-3 pairs, {len(bad)} failures; "
                      f"Sierpinski hand example {'reproduced' if hand else 'WRONG'}")
    assert ok, bad[:5]


def test_ac6_adjointness(acceptance):
    rng = random.Random(6)
    bad, n = [], 0
    for X in SUITE3_SPACES:
        for _ in range(50):
            N = random_rep(rng, X)
            for x in X.points:
                n += 1
                if uct_groups(projective(X, x), N).kk != N.at(x):
                    bad.append((repr(X), x))
    ok = not bad
    acceptance(6, ok, f"{len(SUITE3_SPACES)} spaces x 50 targets, {n} checks, {len(bad)} failures")
    assert ok, bad[:5]


def test_ac7_projectivity_criterion(acceptance):
    rng = random.Random(7)
    bad, n_proj = [], 0
    for X in SUITE3_SPACES:
        B = ProjectiveBundle([(x, rng.randint(0, 1), rng.randint(1, 2)) for x in X.points])
        sources = [realize_bundle(X, B), random_flabby_rep(rng, X, max_rank=2, max_torsion=0)]
        for M in sources:
            if not is_projective(M):
                continue
            n_proj += 1
            for _ in range(50):
                if not ext_module(M, random_rep(rng, X)).is_trivial:
                    bad.append(repr(X))
    Z2, O = AbGroup.cyclic(2), AbGroup()
    W = Representation(sierpinski(), {"a": GradedGroup(O, O), "b": GradedGroup(Z2, O)},
                       {("a", "b"): (zeros(1, 0), zeros(0, 0))})
    witness = not is_projective(W) and not ext_module(W, W).is_trivial
    ok = not bad and witness
    acceptance(7, ok, f"{n_proj} projective sources x 50 targets, {len(bad)} nonzero Ext; "
                      f"Z/2 witness {'not projective' if witness else 'WRONG'}")
    assert ok, bad[:5]


# -- 8: flabbiness ----------------------------------------------------------------

def test_ac8_single_step_flabbiness(acceptance):
    rng = random.Random(8)
    spaces = spaces_up_to(5)
    bad, yes, total = [], 0, 0
    for X in spaces:
        for k in range(100):
            C = random_flabby_cosheaf(rng, X) if k % 2 else random_precosheaf(rng, X)
            a, b = bool(is_flabby(C)), bool(is_flabby_bruteforce(C))
            total += 1
            yes += a
            if a != b:
                bad.append(repr(X))
    ok = not bad
    acceptance(8, ok, f"{len(spaces)} spaces x 100 precosheaves ({yes} flabby, {total - yes} not), "
                      f"{len(bad)} disagreements")
    assert ok, bad[:5]


# -- 9: range conditions ----------------------------------------------------------

def test_ac9_range_nesting(acceptance):
    bad = []
    counts = {STABLE_GRAPH: 0, UNITAL_GRAPH: 0, CUNTZ_KRIEGER: 0}
    checks = (("free_quotients_odd", has_free_quotients_odd),
              ("ordered_ranks", has_finite_ordered_ranks),
              ("equal_ranks", has_finite_equal_ranks))
    wit = 0
    for k, C in enumerate(suite9()):
        h = {n: class_holds(C, n) for n in counts}
        for n, v in h.items():
            counts[n] += v
        if h[CUNTZ_KRIEGER] and not h[UNITAL_GRAPH] or h[UNITAL_GRAPH] and not h[STABLE_GRAPH]:
            bad.append((k, "nesting"))
        for name, f in checks:
            chk = f(C)
            if not chk:
                wit += 1
                if not verify_range_counterexample(C, name, chk.witness):
                    bad.append((k, name))
    ok = not bad
    acceptance(9, ok, f"{len(suite9())} flabby cosheaves (SG {counts[STABLE_GRAPH]}, "
                      f"UG {counts[UNITAL_GRAPH]}, CK {counts[CUNTZ_KRIEGER]} YES), "
                      f"{wit} counterexamples re-verified, {len(bad)} failures")
    assert ok, bad[:5]


# -- 10: graphs -------------------------------------------------------------------

def test_ac10_graph_ingestion(acceptance):
    from xkit.graphck import ok_invariant
    t0 = time.perf_counter()
    bad = []
    for n in range(2, 13):
        inv = ok_invariant(cuntz_graph(n))
        if inv.cosheaf.base.at(inv.space.whole) != GradedGroup(AbGroup.cyclic(n - 1), AbGroup()):
            bad.append(("O_n", n))
    rng = random.Random(10)
    flabby = 0
    for k in range(100):
        G = random_graph(rng, max_vertices=5, max_mult=4)
        inv = ok_invariant(G)
        C = inv.cosheaf.base
        if any(C.at(U).even.rank != C.at(U).odd.rank for U in inv.space.opens):
            bad.append((k, "ranks"))
        if inv.flabby:
            flabby += 1
            if not is_cosheaf(C):
                bad.append((k, "cosheaf"))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 30
    acceptance(10, ok, f"O_2..O_12 and 100 random graphs ({flabby} flabby), "
                       f"{len(bad)} failures, {dt:.1f}s (< 30s)")
    assert ok, bad[:5]


# -- 11: extensions ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _extension_reports():
    out = []
    for C in suite9():
        if not is_flabby(C):
            continue
        for U in C.space.opens:
            out.append((C, U, extension_check(C, U)))
    return out


def _ac11(name):
    reports = _extension_reports()
    fails = [(C, U) for C, U, r in reports if not r[name].equivalence_holds]
    return len(reports), fails


@pytest.mark.parametrize("name", [
    STABLE_GRAPH,
    pytest.param(UNITAL_GRAPH, marks=pytest.mark.xfail(
        strict=True, reason="literal ordered-ranks condition is not inherited by quotients; "
                            "analysis in the decisions ledger")),
    CUNTZ_KRIEGER,
])
def test_ac11_extension_permanence(acceptance, name):
    assert name in EXTENSION_CLASSES
    n, fails = _ac11(name)
    ok = not fails
    detail = f"{name}: {n} extension checks, {len(fails)} equivalence failures"
    if fails:
        C, U = fails[0]
        detail += f" (first: ideal {sorted(U)} on {C.space!r})"
    acceptance(11, ok, detail)
    assert ok
