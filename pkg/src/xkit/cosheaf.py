"""Precosheaves on the lattice of open sets, the cosheaf condition,
flabbiness, and the colimit construction from representations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._intmat import eye, hstack, mat, mul, to_lists, vec, zeros
from .abgroup import (ZERO, AbGroup, GradedGroup, Quotient, check_well_defined, cokernel,
                      is_zero_mod, kernel, quotient, reduce_vec, relation_matrix, solve)
from .errors import (EmptySpace, FormatError, IllFormedMap, NotACosheaf, NotFlabby,
                     PathIncoherence, SpaceMismatch, UnknownPoint)
from .rep import RepLayer, Representation, res
from .space import FiniteSpace, open_key, parse_open_key

OpenPair = tuple[frozenset, frozenset]


@dataclass
class Check:
    """Verdict with the first failing witness (``None`` when ``ok``)."""

    ok: bool
    witness: object = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _fmt(U: frozenset) -> str:
    return "{" + ",".join(sorted(U)) + "}"


class PrecosheafLayer:
    """One parity: a group per open set and a map per covering inclusion."""

    def __init__(self, space: FiniteSpace, groups: dict[frozenset, AbGroup],
                 maps: dict[OpenPair, np.ndarray] | None = None):
        self.space = space
        opens = set(space.opens)
        for U in groups:
            if U not in opens:
                raise IllFormedMap(f"{_fmt(U)} is not open")
        self.groups = {U: groups.get(U, ZERO) for U in space.opens}
        if not self.groups[frozenset()].is_trivial:
            raise IllFormedMap("the value on the empty set must be 0")
        maps = maps or {}
        self.maps: dict[OpenPair, np.ndarray] = {}
        self._extra: dict[OpenPair, np.ndarray] = {}
        covering = set(space.open_covering_pairs)
        for (U, V), m in maps.items():
            if U not in opens or V not in opens or not U <= V:
                raise IllFormedMap(f"no inclusion {_fmt(U)} -> {_fmt(V)} of open sets")
        for U, V in list(covering) + [k for k in maps if k not in covering]:
            shape = (self.groups[V].ngens, self.groups[U].ngens)
            m = maps.get((U, V))
            m = zeros(*shape) if m is None else mat(m, shape)
            m = reduce_vec(m, self.groups[V].orders)
            try:
                check_well_defined(m, self.groups[U].orders, self.groups[V].orders)
            except IllFormedMap as exc:
                raise IllFormedMap(f"map {_fmt(U)} -> {_fmt(V)}: {exc}") from None
            if (U, V) in covering:
                self.maps[(U, V)] = m
            elif U != V:
                self._extra[(U, V)] = m
        self._comp: dict[OpenPair, np.ndarray] = {}

    def orders(self, U: frozenset) -> tuple[int, ...]:
        return self.groups[U].orders

    def composite(self, U: frozenset, V: frozenset) -> np.ndarray:
        """The structure map ``C(U) -> C(V)`` for ``U ⊆ V``."""
        hit = self._comp.get((U, V))
        if hit is not None:
            return hit
        if U == V:
            out = eye(self.groups[U].ngens)
        else:
            if not U <= V:
                raise IllFormedMap(f"{_fmt(U)} is not contained in {_fmt(V)}")
            W = next(W for W in self.space.open_covers(U) if W <= V)
            out = reduce_vec(mul(self.composite(W, V), self.maps[(U, W)]), self.orders(V))
        self._comp[(U, V)] = out
        return out

    def validate(self) -> None:
        """Every chain of covering inclusions between two opens gives the
        same composite (and explicitly given longer maps agree)."""
        for U in self.space.opens:
            covers = self.space.open_covers(U)
            for V in self.space.opens:
                if not U < V:
                    continue
                ref = self.composite(U, V)
                for W in covers:
                    if W <= V:
                        other = mul(self.composite(W, V), self.maps[(U, W)])
                        if not is_zero_mod(other - ref, self.orders(V)):
                            raise PathIncoherence(
                                f"composites {_fmt(U)} -> {_fmt(V)} disagree (via {_fmt(W)})")
        for (U, V), m in self._extra.items():
            if not is_zero_mod(m - self.composite(U, V), self.orders(V)):
                raise PathIncoherence(f"given map {_fmt(U)} -> {_fmt(V)} is not the composite")

    def is_zero(self) -> bool:
        return all(g.is_trivial for g in self.groups.values())


class Precosheaf:
    """A graded precosheaf; ``layers[0]`` even, ``layers[1]`` odd."""

    def __init__(self, space: FiniteSpace, at: dict[frozenset, GradedGroup] | None = None,
                 maps: dict[OpenPair, tuple] | None = None, *, validate: bool = True):
        at = at or {}
        maps = maps or {}
        self.space = space
        self.layers = tuple(
            PrecosheafLayer(space, {U: g[p] for U, g in at.items()},
                            {k: m[p] for k, m in maps.items() if m[p] is not None})
            for p in (0, 1))
        if validate:
            self.validate()

    @classmethod
    def from_layers(cls, even: PrecosheafLayer, odd: PrecosheafLayer,
                    *, validate: bool = True) -> "Precosheaf":
        obj = cls.__new__(cls)
        obj.space = even.space
        obj.layers = (even, odd)
        if validate:
            obj.validate()
        return obj

    def validate(self) -> None:
        for layer in self.layers:
            layer.validate()

    def at(self, U: Iterable[str]) -> GradedGroup:
        U = frozenset(U)
        if U not in self.layers[0].groups:
            raise IllFormedMap(f"{_fmt(U)} is not open")
        return GradedGroup(self.layers[0].groups[U], self.layers[1].groups[U])

    def map(self, U: Iterable[str], V: Iterable[str]) -> tuple[np.ndarray, np.ndarray]:
        U, V = frozenset(U), frozenset(V)
        return self.layers[0].composite(U, V), self.layers[1].composite(U, V)

    def is_zero(self) -> bool:
        return all(layer.is_zero() for layer in self.layers)

    def __repr__(self) -> str:
        return "Precosheaf(" + ", ".join(f"{_fmt(U)}: {self.at(U)}" for U in self.space.opens) + ")"

    def to_dict(self) -> dict:
        return {
            "kind": "cosheaf",
            "space": self.space.to_dict(),
            "at": {open_key(U): self.at(U).to_dict() for U in self.space.opens},
            "maps": [
                {"from": sorted(U), "to": sorted(V),
                 "even": to_lists(self.layers[0].maps[(U, V)]),
                 "odd": to_lists(self.layers[1].maps[(U, V)])}
                for U, V in self.space.open_covering_pairs
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, space: FiniteSpace | None = None) -> "Precosheaf":
        if space is None:
            if "space" not in d:
                raise FormatError("cosheaf needs a 'space'")
            space = FiniteSpace.from_dict(d["space"])
        at = {}
        for key, g in d.get("at", {}).items():
            U = parse_open_key(key)
            for p in U:
                if p not in space:
                    raise UnknownPoint(p)
            at[U] = GradedGroup.from_dict(g)
        maps = {}
        for entry in d.get("maps", []):
            try:
                U, V = frozenset(entry["from"]), frozenset(entry["to"])
            except (KeyError, TypeError) as exc:
                raise FormatError(f"bad map entry {entry!r}") from exc
            mats = []
            for parity, name in enumerate(("even", "odd")):
                src = at.get(U, GradedGroup())[parity].ngens
                dst = at.get(V, GradedGroup())[parity].ngens
                raw = entry.get(name)
                if raw is None:
                    mats.append(None)
                    continue
                try:
                    mats.append(zeros(dst, src) if dst == 0 or src == 0 else mat(raw, (dst, src)))
                except (ValueError, TypeError) as exc:
                    raise FormatError(f"map {_fmt(U)} -> {_fmt(V)} {name}: {exc}") from None
            maps[(U, V)] = tuple(mats)
        return cls(space, at, maps)


@dataclass
class PointedCosheaf:
    """A cosheaf with a distinguished even class on the whole space."""

    base: Precosheaf
    unit: np.ndarray = field(default=None)

    def __post_init__(self):
        whole = self.base.space.whole
        g = self.base.layers[0].groups[whole]
        u = zeros(g.ngens, 1) if self.unit is None else vec(list(np.asarray(self.unit).flat), g.ngens)
        self.unit = reduce_vec(u, g.orders)
        chk = is_cosheaf(self.base)
        if not chk:
            raise NotACosheaf(chk.detail)

    @property
    def space(self) -> FiniteSpace:
        return self.base.space

    def to_dict(self) -> dict:
        out = self.base.to_dict()
        out["unit"] = [int(v) for v in self.unit.flat]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "PointedCosheaf":
        if "unit" not in d:
            raise FormatError("pointed cosheaf needs a 'unit'")
        return cls(Precosheaf.from_dict(d), d["unit"])


# -- checks ---------------------------------------------------------------------

def _two_set_cover(layer: PrecosheafLayer, U: frozenset, V: frozenset) -> str | None:
    """``None`` if ``C(U∩V) -> C(U)⊕C(V) -> C(U∪V) -> 0`` is exact."""
    I, J = U & V, U | V
    oI, oU, oV, oJ = (layer.orders(W) for W in (I, U, V, J))
    mid = oU + oV
    if not mid:
        return None if not oJ else "sum map is not surjective"
    beta = hstack([layer.composite(U, J), layer.composite(V, J)], len(oJ))
    if not cokernel(beta, oJ).group.is_trivial:
        return "sum map is not surjective"
    alpha = np.vstack([layer.composite(I, U), -layer.composite(I, V)]) if len(mid) else zeros(0, len(oI))
    ker = kernel(beta, mid, oJ)
    if ker.group.is_trivial:
        return None
    if solve(alpha, ker.incl, mid) is None:
        return "kernel of the sum map is larger than the image of the difference map"
    return None


def _incomparable_pairs(space: FiniteSpace):
    opens = space.opens
    for i, U in enumerate(opens):
        for V in opens[i + 1:]:
            if not (U <= V or V <= U):
                yield U, V


def _first_bad_cover(layer: PrecosheafLayer):
    # cached like _first_non_injective below
    if not hasattr(layer, "_bad_cover"):
        layer._bad_cover = None
        for U, V in _incomparable_pairs(layer.space):
            why = _two_set_cover(layer, U, V)
            if why:
                layer._bad_cover = (U, V, why)
                break
    return layer._bad_cover


def is_cosheaf(C: Precosheaf) -> Check:
    """Two-set cover condition for all pairs of opens."""
    if not C.at(frozenset()).is_trivial:
        return Check(False, (frozenset(), frozenset()), "value on the empty set is not 0")
    bad = [_first_bad_cover(layer) for layer in C.layers]
    for U, V in _incomparable_pairs(C.space):
        for parity in (0, 1):
            if bad[parity] and bad[parity][:2] == (U, V):
                return Check(False, (U, V), f"cover {_fmt(U)}, {_fmt(V)} "
                                            f"({'even' if parity == 0 else 'odd'}): {bad[parity][2]}")
    return Check(True)


def _injective(layer: PrecosheafLayer, U: frozenset, V: frozenset) -> bool:
    return kernel(layer.composite(U, V), layer.orders(U), layer.orders(V)).group.is_trivial


def _first_non_injective(layer: PrecosheafLayer):
    # layers are not mutated after validation, so the answer is cached
    if not hasattr(layer, "_non_injective"):
        layer._non_injective = next(((U, V) for U, V in layer.space.open_covering_pairs
                                     if not _injective(layer, U, V)), None)
    return layer._non_injective


def is_flabby(C: Precosheaf) -> Check:
    """Injectivity along covering inclusions of the open-set lattice; every
    inclusion of opens is a composite of these."""
    bad = [_first_non_injective(layer) for layer in C.layers]
    for U, V in C.space.open_covering_pairs:
        for parity in (0, 1):
            if bad[parity] == (U, V):
                return Check(False, (U, V), f"{_fmt(U)} -> {_fmt(V)} is not injective"
                                            f" ({'even' if parity == 0 else 'odd'})")
    return Check(True)


def is_flabby_bruteforce(C: Precosheaf) -> Check:
    """Same verdict as :func:`is_flabby`, checking every inclusion."""
    for U in C.space.opens:
        for V in C.space.opens:
            if U < V:
                for layer in C.layers:
                    if not _injective(layer, U, V):
                        return Check(False, (U, V), f"{_fmt(U)} -> {_fmt(V)} is not injective")
    return Check(True)


def require_flabby(C: Precosheaf) -> None:
    chk = is_flabby(C)
    if not chk:
        raise NotFlabby(chk.detail)


# -- colimit --------------------------------------------------------------------

@dataclass
class ColimData:
    """Presentation of ``Colim(M)(U)`` as a quotient of ``⊕_{x∈U} M(x)``."""

    points: list[str]
    offsets: dict[str, int]
    orders: list[int]
    quotient: Quotient


def _colim_relations(layer: RepLayer, pts: list[str], offsets: dict[str, int], n: int,
                     full: bool) -> np.ndarray:
    sp = layer.space
    cols = [relation_matrix(layer.orders(x)) for x in pts]
    cols = [_embed(c, offsets[x], n) for c, x in zip(cols, pts)]
    inside = set(pts)
    if full:
        # every pair x, y and every z in U_x ∩ U_y
        for i, x in enumerate(pts):
            for y in pts[i + 1:]:
                for z in sorted(sp.U(x) & sp.U(y)):
                    block = zeros(n, layer.ngens(z))
                    block[offsets[x]:offsets[x] + layer.ngens(x), :] = layer.composite(z, x)
                    block[offsets[y]:offsets[y] + layer.ngens(y), :] -= layer.composite(z, y)
                    cols.append(block)
        # x = y gives zero columns; z ⊊ x is the pair (x, z) with z ∈ U_x ∩ U_z
    else:
        for z, x in sp.hasse_arrows():
            if z in inside and x in inside:
                block = zeros(n, layer.ngens(z))
                block[offsets[z]:offsets[z] + layer.ngens(z), :] = eye(layer.ngens(z))
                block[offsets[x]:offsets[x] + layer.ngens(x), :] -= layer.arrows[(z, x)]
                cols.append(block)
    return hstack(cols, n)


def _embed(block: np.ndarray, offset: int, n: int) -> np.ndarray:
    out = zeros(n, block.shape[1])
    out[offset:offset + block.shape[0], :] = block
    return out


def _invert_auto(A: np.ndarray, orders) -> np.ndarray:
    inv = solve(A, eye(len(orders)), orders)
    if inv is None:
        raise AssertionError("comparison map is not invertible")
    return reduce_vec(inv, orders)


def colim_layer(layer: RepLayer, *, full: bool = False) -> PrecosheafLayer:
    """``Colim`` of one parity.  On ``U_x`` the canonical basis is chosen so
    that the comparison with ``M(x)`` is the identity."""
    sp = layer.space
    data: dict[frozenset, ColimData] = {}
    for U in sp.opens:
        pts = [p for p in sp.points if p in U]
        offsets, n = {}, 0
        for p in pts:
            offsets[p] = n
            n += layer.ngens(p)
        orders = [d for p in pts for d in layer.orders(p)]
        q = quotient(_colim_relations(layer, pts, offsets, n, full), n)
        data[U] = ColimData(pts, offsets, orders, q)
    for x in sp.points:
        d = data[sp.U(x)]
        k = layer.ngens(x)
        phi = reduce_vec(mul(d.quotient.proj[:, d.offsets[x]:d.offsets[x] + k], eye(k)),
                         layer.orders(x)) if k else zeros(0, 0)
        if d.quotient.group != layer.groups[x]:
            raise AssertionError("colimit at a minimal open differs from the stalk")
        if k:
            inv = _invert_auto(phi, layer.orders(x))
            d.quotient = Quotient(d.quotient.group, reduce_vec(mul(inv, d.quotient.proj), layer.orders(x)),
                                  mul(d.quotient.section, phi))
    groups = {U: d.quotient.group for U, d in data.items()}
    maps = {}
    for U, V in sp.open_covering_pairs:
        dU, dV = data[U], data[V]
        incl = zeros(len(dV.orders), len(dU.orders))
        for p in dU.points:
            k = layer.ngens(p)
            for i in range(k):
                incl[dV.offsets[p] + i, dU.offsets[p] + i] = 1
        maps[(U, V)] = mul(mul(dV.quotient.proj, incl), dU.quotient.section)
    out = PrecosheafLayer(sp, groups, maps)
    out.colim_data = data
    return out


def colim(M: Representation, *, full: bool = False) -> Precosheaf:
    """``Colim(M)(U) = ⊕_{x∈U} M(x)`` modulo the identifications along
    inclusions inside ``U``.

    With ``full=True`` every pair ``x, y ∈ U`` and every ``z ∈ U_x ∩ U_y``
    contributes a relation; the default uses only Hasse arrows inside ``U``,
    which spans the same subgroup.
    """
    return Precosheaf.from_layers(*(colim_layer(L, full=full) for L in M.layers), validate=False)


def colim_injection(C: Precosheaf, parity: int, U: frozenset, x: str) -> np.ndarray:
    """Map ``M(x) -> Colim(M)(U)`` for ``x ∈ U`` (colimits built here only)."""
    d = C.layers[parity].colim_data[U]
    n = len(d.orders)
    start = d.offsets[x]
    end = d.points.index(x) + 1
    stop = d.offsets[d.points[end]] if end < len(d.points) else n
    block = zeros(n, stop - start)
    for i in range(stop - start):
        block[start + i, i] = 1
    return reduce_vec(mul(d.quotient.proj, block), C.layers[parity].orders(U))


@dataclass
class Comparison:
    """Explicit comparison maps, per parity and per index, with the verdict
    of their verification."""

    maps: dict
    ok: bool


def res_colim(M: Representation) -> tuple[Representation, Comparison]:
    """``Res(Colim(M))`` together with the comparison ``M(x) -> Res(Colim(M))(x)``
    (the identity by construction of the bases)."""
    C = colim(M)
    R = res(C)
    maps = {}
    ok = True
    for x in M.space.points:
        pair = []
        for p in (0, 1):
            f = colim_injection(C, p, M.space.U(x), x)
            pair.append(f)
            if R.layers[p].groups[x] != M.layers[p].groups[x]:
                ok = False
            elif not is_zero_mod(f - eye(f.shape[0]), R.layers[p].orders(x)):
                ok = False
        maps[x] = pair
    for y, x in M.space.hasse_arrows():
        for p in (0, 1):
            if not is_zero_mod(R.layers[p].arrows[(y, x)] - M.layers[p].arrows[(y, x)],
                               M.layers[p].orders(x)):
                ok = False
    return R, Comparison(maps, ok)


def colim_res(C: Precosheaf) -> tuple[Precosheaf, Comparison]:
    """``Colim(Res(C))`` with the comparison maps ``Colim(Res(C))(U) -> C(U)``
    induced by the structure maps ``C(U_x) -> C(U)``."""
    chk = is_cosheaf(C)
    if not chk:
        raise NotACosheaf(chk.detail)
    D = colim(res(C))
    sp = C.space
    maps = {}
    ok = True
    for U in sp.opens:
        pair = []
        for p in (0, 1):
            Dl, Cl = D.layers[p], C.layers[p]
            d = Dl.colim_data[U]
            blocks = [Cl.composite(sp.U(x), U) for x in d.points]
            raw = hstack(blocks, Cl.groups[U].ngens)
            phi = reduce_vec(mul(raw, d.quotient.section), Cl.orders(U))
            pair.append(phi)
            if Dl.groups[U] != Cl.groups[U]:
                ok = False
            elif Cl.groups[U].ngens:
                dom, cod = Dl.orders(U), Cl.orders(U)
                if not (kernel(phi, dom, cod).group.is_trivial and cokernel(phi, cod).group.is_trivial):
                    ok = False
        maps[U] = pair
    for U, V in sp.open_covering_pairs:
        for p in (0, 1):
            lhs = mul(maps[V][p], D.layers[p].maps[(U, V)])
            rhs = mul(C.layers[p].maps[(U, V)], maps[U][p])
            if not is_zero_mod(lhs - rhs, C.layers[p].orders(V)):
                ok = False
    return D, Comparison(maps, ok)


# -- restriction and quotient ---------------------------------------------------

def restrict_open(C: Precosheaf, U: Iterable[str]) -> Precosheaf:
    """``C`` on the open subspace ``U``."""
    U = frozenset(U)
    sp = C.space
    if not sp.is_open(U):
        raise IllFormedMap(f"{_fmt(U)} is not open")
    if not U:
        raise EmptySpace("restriction to the empty open set")
    sub = sp.subspace(U)
    at = {W: C.at(W) for W in sp.opens if W <= U}
    maps = {(W, V): C.map(W, V) for W, V in sub.open_covering_pairs}
    return Precosheaf(sub, at, maps, validate=False)


def quotient_closed(C: Precosheaf, U: Iterable[str]) -> Precosheaf:
    """``W ↦ C(W ∪ U) / C(U)`` on the closed complement of the open ``U``."""
    U = frozenset(U)
    sp = C.space
    if not sp.is_open(U):
        raise IllFormedMap(f"{_fmt(U)} is not open")
    if U == sp.whole:
        raise EmptySpace("quotient onto the empty closed set")
    require_flabby(C)
    sub = sp.subspace(sp.whole - U)
    groups = ({}, {})
    procs = ({}, {})
    for W in sub.opens:
        for p in (0, 1):
            L = C.layers[p]
            q = cokernel(L.composite(U, W | U), L.orders(W | U))
            groups[p][W] = q.group
            procs[p][W] = q
    maps = {}
    for W, V in sub.open_covering_pairs:
        pair = []
        for p in (0, 1):
            L = C.layers[p]
            m = mul(mul(procs[p][V].proj, L.composite(W | U, V | U)), procs[p][W].section)
            pair.append(m)
        maps[(W, V)] = tuple(pair)
    at = {W: GradedGroup(groups[0][W], groups[1][W]) for W in sub.opens}
    return Precosheaf(sub, at, maps, validate=False)


def zero_cosheaf(space: FiniteSpace) -> Precosheaf:
    return Precosheaf(space, {}, {}, validate=False)


def same_space(*objs) -> FiniteSpace:
    sp = objs[0].space
    for o in objs[1:]:
        if o.space != sp:
            raise SpaceMismatch("inputs live on different spaces")
    return sp
