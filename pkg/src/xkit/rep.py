"""Representations of a finite space, i.e. Z/2-graded modules over the
integral incidence algebra.

A representation puts a graded group at every point and an even map
``M(y) -> M(x)`` along every Hasse arrow ``y -> x`` (``U_y ⊊ U_x``).  Maps
along longer inclusions are composites; on spaces with several Hasse paths
between two points they must agree, which :meth:`RepLayer.validate` checks.

The two parities never interact (structure maps are even), so most of the
algebra is done on the ungraded :class:`RepLayer` and assembled afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._intmat import block_diag, eye, mat, mul, to_lists, zeros
from .abgroup import (ZERO, AbGroup, GradedGroup, canonicalize_orders, check_well_defined,
                      is_zero_mod, reduce_vec)
from .errors import FormatError, IllFormedMap, PathIncoherence, SpaceMismatch, UnknownPoint
from .space import FiniteSpace

Arrow = tuple[str, str]


class RepLayer:
    """One parity of a representation: groups and Hasse-arrow maps."""

    def __init__(self, space: FiniteSpace, groups: dict[str, AbGroup],
                 arrows: dict[Arrow, np.ndarray] | None = None):
        self.space = space
        for p in groups:
            if p not in space:
                raise UnknownPoint(p)
        self.groups = {p: groups.get(p, ZERO) for p in space.points}
        arrows = arrows or {}
        hasse = set(space.hasse_arrows())
        for a in arrows:
            if a not in hasse:
                raise IllFormedMap(f"{a[0]} -> {a[1]} is not a Hasse arrow")
        self.arrows: dict[Arrow, np.ndarray] = {}
        for y, x in space.hasse_arrows():
            shape = (self.groups[x].ngens, self.groups[y].ngens)
            m = arrows.get((y, x))
            m = zeros(*shape) if m is None else mat(m, shape)
            m = reduce_vec(m, self.groups[x].orders)
            try:
                check_well_defined(m, self.groups[y].orders, self.groups[x].orders)
            except IllFormedMap as exc:
                raise IllFormedMap(f"map {y} -> {x}: {exc}") from None
            self.arrows[(y, x)] = m
        self._comp: dict[Arrow, np.ndarray] = {}

    def orders(self, x: str) -> tuple[int, ...]:
        return self.groups[x].orders

    def ngens(self, x: str) -> int:
        return self.groups[x].ngens

    def composite(self, y: str, x: str) -> np.ndarray:
        """The structure map ``M(y) -> M(x)`` for ``U_y ⊆ U_x``."""
        key = (y, x)
        hit = self._comp.get(key)
        if hit is not None:
            return hit
        if y == x:
            out = eye(self.ngens(x))
        else:
            if not self.space.u_subset(y, x):
                raise IllFormedMap(f"U_{y} is not contained in U_{x}")
            w = next(w for w in self.space.arrows_out_of(y) if self.space.u_subset(w, x))
            out = reduce_vec(mul(self.composite(w, x), self.arrows[(y, w)]), self.orders(x))
        self._comp[key] = out
        return out

    def validate(self) -> None:
        """Raise :class:`PathIncoherence` if two Hasse paths disagree."""
        sp = self.space
        for x in sp.points:
            for y in sorted(sp.U(x) - {x}):
                ref = self.composite(y, x)
                for w in sp.arrows_out_of(y):
                    if not sp.u_subset(w, x):
                        continue
                    other = mul(self.composite(w, x), self.arrows[(y, w)])
                    if not is_zero_mod(other - ref, self.orders(x)):
                        raise PathIncoherence(
                            f"paths {y} -> {x} disagree: {to_lists(ref)} vs "
                            f"{to_lists(reduce_vec(other, self.orders(x)))} (via {w})")

    def is_zero(self) -> bool:
        return all(g.is_trivial for g in self.groups.values())


class Representation:
    """A Z/2-graded representation; ``layers[0]`` is even, ``layers[1]`` odd."""

    def __init__(self, space: FiniteSpace, at: dict[str, GradedGroup] | None = None,
                 maps: dict[Arrow, tuple] | None = None, *, validate: bool = True):
        at = at or {}
        maps = maps or {}
        layers = []
        for parity in (0, 1):
            groups = {p: g[parity] for p, g in at.items()}
            arrows = {a: m[parity] for a, m in maps.items() if m[parity] is not None}
            layers.append(RepLayer(space, groups, arrows))
        self.space = space
        self.layers: tuple[RepLayer, RepLayer] = tuple(layers)
        if validate:
            self.validate()

    @classmethod
    def from_layers(cls, even: RepLayer, odd: RepLayer, *, validate: bool = True) -> "Representation":
        if even.space is not odd.space and even.space != odd.space:
            raise SpaceMismatch("layers live on different spaces")
        obj = cls.__new__(cls)
        obj.space = even.space
        obj.layers = (even, odd)
        if validate:
            obj.validate()
        return obj

    def validate(self) -> None:
        for layer in self.layers:
            layer.validate()

    def at(self, x: str) -> GradedGroup:
        self.space.index(x)
        return GradedGroup(self.layers[0].groups[x], self.layers[1].groups[x])

    def map(self, y: str, x: str) -> tuple[np.ndarray, np.ndarray]:
        return self.layers[0].composite(y, x), self.layers[1].composite(y, x)

    def is_zero(self) -> bool:
        return all(layer.is_zero() for layer in self.layers)

    def shift(self) -> "Representation":
        return Representation.from_layers(self.layers[1], self.layers[0], validate=False)

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {self.at(p)}" for p in self.space.points)
        return f"Representation({body})"

    def to_dict(self, *, inline_space: bool = True) -> dict:
        out = {
            "kind": "representation",
            "at": {p: self.at(p).to_dict() for p in self.space.points},
            "maps": [
                {"from": y, "to": x,
                 "even": to_lists(self.layers[0].arrows[(y, x)]),
                 "odd": to_lists(self.layers[1].arrows[(y, x)])}
                for y, x in self.space.hasse_arrows()
            ],
        }
        if inline_space:
            out["space"] = self.space.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict, space: FiniteSpace | None = None) -> "Representation":
        if space is None:
            if "space" not in d:
                raise FormatError("representation needs a 'space'")
            space = FiniteSpace.from_dict(d["space"])
        at = {str(p): GradedGroup.from_dict(g) for p, g in d.get("at", {}).items()}
        maps = {}
        for entry in d.get("maps", []):
            try:
                key = (str(entry["from"]), str(entry["to"]))
            except (KeyError, TypeError) as exc:
                raise FormatError(f"bad map entry {entry!r}") from exc
            mats = []
            for parity, name in enumerate(("even", "odd")):
                src = at.get(key[0], GradedGroup())[parity].ngens
                dst = at.get(key[1], GradedGroup())[parity].ngens
                raw = entry.get(name)
                mats.append(None if raw is None else _parse_matrix(raw, dst, src, f"{key} {name}"))
            maps[key] = tuple(mats)
        return cls(space, at, maps)


def _parse_matrix(raw, rows: int, cols: int, what: str) -> np.ndarray:
    try:
        if rows == 0 or cols == 0:
            return zeros(rows, cols)
        return mat(raw, (rows, cols))
    except (ValueError, TypeError) as exc:
        raise FormatError(f"matrix for {what}: {exc}") from None


# -- projectives --------------------------------------------------------------

def projective_layer(space: FiniteSpace, x: str) -> RepLayer:
    """Ungraded ``P^x``: ``Z`` wherever ``U_x ⊆ U_y``, identities between."""
    space.index(x)
    groups = {y: AbGroup(1) if space.u_subset(x, y) else ZERO for y in space.points}
    arrows = {}
    for w, y in space.hasse_arrows():
        if space.u_subset(x, w):
            arrows[(w, y)] = eye(1)
    return RepLayer(space, groups, arrows)


def projective(space: FiniteSpace, x: str, parity: int = 0) -> Representation:
    """``P^x`` concentrated in the given parity."""
    layer = projective_layer(space, x)
    empty = RepLayer(space, {})
    pair = (layer, empty) if parity == 0 else (empty, layer)
    return Representation.from_layers(*pair, validate=False)


@dataclass
class ProjectiveBundle:
    """``⊕ P^x[p]^m`` given as a list of ``(x, p, m)``."""

    summands: list[tuple[str, int, int]] = field(default_factory=list)

    def __post_init__(self):
        for x, p, m in self.summands:
            if m < 1:
                raise ValueError("multiplicities must be at least 1")
            if p not in (0, 1):
                raise ValueError("parity must be 0 or 1")

    def generators(self, parity: int | None = None) -> list[tuple[str, int]]:
        """``(point, parity)`` per generator in summand order."""
        out = []
        for x, p, m in self.summands:
            if parity is None or p == parity:
                out += [(x, p)] * m
        return out

    def to_list(self) -> list[dict]:
        return [{"point": x, "parity": p, "multiplicity": m} for x, p, m in self.summands]


def bundle_layer(space: FiniteSpace, points: list[str]) -> RepLayer:
    """Ungraded ``⊕ P^{x_k}`` for the listed generator points.  At ``y`` the
    coordinates are the ``k`` with ``U_{x_k} ⊆ U_y`` in list order."""
    groups = {}
    idx = {}
    for y in space.points:
        idx[y] = [k for k, x in enumerate(points) if space.u_subset(x, y)]
        groups[y] = AbGroup(len(idx[y]))
    arrows = {}
    for w, y in space.hasse_arrows():
        m = zeros(len(idx[y]), len(idx[w]))
        pos = {k: i for i, k in enumerate(idx[y])}
        for j, k in enumerate(idx[w]):
            m[pos[k], j] = 1
        arrows[(w, y)] = m
    layer = RepLayer(space, groups, arrows)
    layer.bundle_index = idx
    return layer


def realize_bundle(space: FiniteSpace, bundle: ProjectiveBundle) -> Representation:
    layers = [bundle_layer(space, [x for x, _ in bundle.generators(p)]) for p in (0, 1)]
    return Representation.from_layers(*layers, validate=False)


@dataclass
class BundleHom:
    """``Hom(B, N)`` for a projective bundle ``B``, identified with
    ``⊕ N(x)`` over the generators of ``B`` (parity shifted as needed)."""

    space: FiniteSpace
    bundle: ProjectiveBundle
    target: Representation
    group: GradedGroup
    blocks: tuple[list[tuple[str, int]], list[tuple[str, int]]]
    embed: tuple[np.ndarray, np.ndarray]
    section: tuple[np.ndarray, np.ndarray]

    def module_map(self, element, degree: int = 0) -> dict[str, list[np.ndarray]]:
        """The module map ``B -> N`` of the given degree encoded by
        ``element`` (canonical coordinates of ``group[degree]``).  Returns, for
        each point, the matrices ``B(y)_p -> N(y)_{p+degree}`` for ``p = 0, 1``."""
        v = mul(self.section[degree], mat(list(element), (self.group[degree].ngens, 1))
                if self.group[degree].ngens else zeros(0, 1))
        values = []
        off = 0
        for x, p in self.blocks[degree]:
            n = self.target.layers[(p + degree) % 2].ngens(x)
            values.append((x, p, v[off:off + n, :]))
            off += n
        out = {}
        for y in self.space.points:
            per_parity = []
            for p in (0, 1):
                tgt = self.target.layers[(p + degree) % 2]
                cols = [tgt.composite(x, y).dot(val) if val.shape[0] else zeros(tgt.ngens(y), 1)
                        for x, q, val in values if q == p and self.space.u_subset(x, y)]
                per_parity.append(reduce_vec(np.hstack(cols), tgt.orders(y)) if cols
                                  else zeros(tgt.ngens(y), 0))
            out[y] = per_parity
        return out


def bundle_hom_into(space: FiniteSpace, bundle: ProjectiveBundle, N: Representation) -> BundleHom:
    if N.space != space:
        raise SpaceMismatch("bundle and target live on different spaces")
    blocks = ([], [])
    parts = []
    embeds = []
    sections = []
    for degree in (0, 1):
        orders = []
        for x, p in bundle.generators():
            blocks[degree].append((x, p))
            orders += N.layers[(p + degree) % 2].orders(x)
        g, proj, sec = canonicalize_orders(orders)
        parts.append(g)
        embeds.append(proj)
        sections.append(sec)
    return BundleHom(space, bundle, N, GradedGroup(parts[0], parts[1]), blocks,
                     tuple(embeds), tuple(sections))


# -- module maps --------------------------------------------------------------

def is_module_map(M: Representation, N: Representation, family: dict[str, list[np.ndarray]],
                  degree: int = 0) -> bool:
    """Check well-definedness and naturality of a family of matrices
    ``M(y)_p -> N(y)_{p+degree}``."""
    for p in (0, 1):
        src, dst = M.layers[p], N.layers[(p + degree) % 2]
        for y in M.space.points:
            f = family[y][p]
            if f.shape != (dst.ngens(y), src.ngens(y)):
                return False
            try:
                check_well_defined(reduce_vec(f, dst.orders(y)), src.orders(y), dst.orders(y))
            except IllFormedMap:
                return False
        for w, y in M.space.hasse_arrows():
            lhs = mul(family[y][p], src.arrows[(w, y)])
            rhs = mul(dst.arrows[(w, y)], family[w][p])
            if not is_zero_mod(lhs - rhs, dst.orders(y)):
                return False
    return True


def identity_map(M: Representation) -> dict[str, list[np.ndarray]]:
    return {y: [eye(M.layers[p].ngens(y)) for p in (0, 1)] for y in M.space.points}


# -- restriction of a precosheaf ---------------------------------------------

def res_layer(C_layer) -> RepLayer:
    sp = C_layer.space
    groups = {x: C_layer.groups[sp.U(x)] for x in sp.points}
    arrows = {(y, x): C_layer.composite(sp.U(y), sp.U(x)) for y, x in sp.hasse_arrows()}
    return RepLayer(sp, groups, arrows)


def res(C) -> Representation:
    """Restriction of a precosheaf to the basis ``{U_x}``."""
    return Representation.from_layers(res_layer(C.layers[0]), res_layer(C.layers[1]))


# -- direct sums ----------------------------------------------------------------

def direct_sum_layer(layers: list[RepLayer]) -> RepLayer:
    space = layers[0].space
    groups = {}
    procs = {}
    for x in space.points:
        orders = [d for L in layers for d in L.orders(x)]
        g, proj, sec = canonicalize_orders(orders)
        groups[x] = g
        procs[x] = (proj, sec)
    arrows = {}
    for y, x in space.hasse_arrows():
        raw = block_diag([L.arrows[(y, x)] for L in layers])
        arrows[(y, x)] = mul(mul(procs[x][0], raw), procs[y][1])
    return RepLayer(space, groups, arrows)


def direct_sum(*reps: Representation) -> Representation:
    space = reps[0].space
    for r in reps[1:]:
        if r.space != space:
            raise SpaceMismatch("direct sum of representations on different spaces")
    return Representation.from_layers(*(direct_sum_layer([r.layers[p] for r in reps]) for p in (0, 1)),
                                      validate=False)


def zero_rep(space: FiniteSpace) -> Representation:
    return Representation(space, {}, {}, validate=False)


def evaluate(M: Representation, x: str) -> GradedGroup:
    return M.at(x)


def validate(M: Representation) -> None:
    M.validate()


def points_of(space: FiniteSpace, S: Iterable[str]) -> list[str]:
    return [p for p in space.points if p in S]
