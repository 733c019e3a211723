"""Finite T0-spaces, stored as the inclusion order of minimal open sets.

Relations are always given as ``(x, y)`` meaning ``U_x ⊆ U_y``.  The
specialization order is the reverse (``x <= y`` iff ``U_y ⊆ U_x``), and it is
only exposed through :meth:`FiniteSpace.leq`.
"""

from __future__ import annotations

import itertools
import os
from functools import cached_property
from typing import Callable, Iterable

from .errors import DuplicatePoint, EmptySpace, FormatError, NotT0, TooManyPoints, UnknownPoint

DEFAULT_MAX_POINTS = 16

OpenSet = frozenset


def max_points() -> int:
    return int(os.environ.get("XKIT_MAX_POINTS", DEFAULT_MAX_POINTS))


def open_key(U: Iterable[str]) -> str:
    """File-format key of a set of points: sorted names joined by ``+``."""
    return "+".join(sorted(U))


def parse_open_key(key: str) -> frozenset:
    return frozenset(p for p in key.split("+") if p) if key else frozenset()


class FiniteSpace:
    """A finite T0-space.  Immutable after construction."""

    def __init__(self, points: Iterable[str], u_incl: Iterable[tuple[str, str]] = (),
                 *, limit: int | None = None):
        pts = [str(p) for p in points]
        if not pts:
            raise EmptySpace("a space needs at least one point")
        seen = set()
        for p in pts:
            if p in seen:
                raise DuplicatePoint(p)
            seen.add(p)
        limit = max_points() if limit is None else limit
        if len(pts) > limit:
            raise TooManyPoints(f"{len(pts)} points exceeds the cap of {limit} (set XKIT_MAX_POINTS)")
        self.points: tuple[str, ...] = tuple(pts)
        self._index = {p: i for i, p in enumerate(pts)}
        n = len(pts)
        sub = [[i == j for j in range(n)] for i in range(n)]
        for x, y in u_incl:
            sub[self.index(x)][self.index(y)] = True
        for k in range(n):
            for i in range(n):
                if sub[i][k]:
                    row_k = sub[k]
                    row_i = sub[i]
                    for j in range(n):
                        if row_k[j]:
                            row_i[j] = True
        for i in range(n):
            for j in range(i + 1, n):
                if sub[i][j] and sub[j][i]:
                    raise NotT0(f"U_{pts[i]} and U_{pts[j]} contain each other")
        self._sub = sub
        self._U = {pts[i]: frozenset(pts[j] for j in range(n) if sub[j][i]) for i in range(n)}

    # -- basic structure ----------------------------------------------------

    def index(self, x: str) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise UnknownPoint(x) from None

    def __contains__(self, x) -> bool:
        return x in self._index

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteSpace) and set(self.points) == set(other.points)
                and all(self._U[p] == other._U[p] for p in self.points))

    def __hash__(self) -> int:
        return hash(frozenset(self._U.items()))

    def __repr__(self) -> str:
        return f"FiniteSpace({list(self.points)}, {self.u_relations()})"

    def U(self, x: str) -> frozenset:
        """The smallest open set containing ``x``."""
        self.index(x)
        return self._U[x]

    def u_subset(self, x: str, y: str) -> bool:
        """``U_x ⊆ U_y``, i.e. ``x ∈ U_y``."""
        return self._sub[self.index(x)][self.index(y)]

    def leq(self, x: str, y: str) -> bool:
        """Specialization order: ``x <= y`` iff ``U_y ⊆ U_x``."""
        return self.u_subset(y, x)

    def u_relations(self) -> list[tuple[str, str]]:
        """All strict inclusions ``U_x ⊊ U_y`` as pairs."""
        return [(x, y) for x in self.points for y in self.points if x != y and self.u_subset(x, y)]

    # -- topology -----------------------------------------------------------

    def is_open(self, S: Iterable[str]) -> bool:
        S = frozenset(S)
        return all(self._U[x] <= S for x in S)

    def open_hull(self, S: Iterable[str]) -> frozenset:
        out = frozenset()
        for x in S:
            out |= self._U[x]
        return out

    @cached_property
    def opens(self) -> tuple[frozenset, ...]:
        found = {frozenset()}
        frontier = [frozenset()]
        while frontier:
            nxt = []
            for U in frontier:
                for p in self.points:
                    if p not in U and self._U[p] <= U | {p}:
                        V = U | {p}
                        if V not in found:
                            found.add(V)
                            nxt.append(V)
            frontier = nxt
        return tuple(sorted(found, key=lambda U: (len(U), sorted(U))))

    def open_sets(self) -> list[frozenset]:
        """All open subsets sorted by (cardinality, sorted names)."""
        return list(self.opens)

    @cached_property
    def whole(self) -> frozenset:
        return frozenset(self.points)

    def open_covers(self, U: frozenset) -> list[frozenset]:
        """Opens ``V = U ∪ {p}`` covering ``U`` in the lattice of opens."""
        return [U | {p} for p in sorted(self.points) if p not in U and self._U[p] <= U | {p}]

    @cached_property
    def open_covering_pairs(self) -> tuple[tuple[frozenset, frozenset], ...]:
        return tuple((U, V) for U in self.opens for V in self.open_covers(U))

    def punctured(self, x: str) -> frozenset:
        """``U_x \\ {x}``, which is always open."""
        return self._U[x] - {x}

    @cached_property
    def _arrows(self) -> tuple[tuple[str, str], ...]:
        out = []
        for x in self.points:
            rest = self._U[x] - {x}
            for y in sorted(rest):
                # y is closed in rest iff no other z in rest has y ∈ U_z
                if not any(z != y and y in self._U[z] for z in rest):
                    out.append((y, x))
        return tuple(out)

    def hasse_arrows(self) -> list[tuple[str, str]]:
        """Pairs ``(y, x)`` with ``y`` a closed point of ``U_x \\ {x}``;
        equivalently the covering relations ``U_y ⊊ U_x``."""
        return list(self._arrows)

    @cached_property
    def _below(self) -> dict[str, tuple[str, ...]]:
        out = {x: [] for x in self.points}
        for y, x in self._arrows:
            out[x].append(y)
        return {x: tuple(v) for x, v in out.items()}

    @cached_property
    def _above(self) -> dict[str, tuple[str, ...]]:
        out = {x: [] for x in self.points}
        for y, x in self._arrows:
            out[y].append(x)
        return {x: tuple(v) for x, v in out.items()}

    def arrows_into(self, x: str) -> tuple[str, ...]:
        """Points ``y`` with a Hasse arrow ``y -> x``."""
        return self._below[x]

    def arrows_out_of(self, y: str) -> tuple[str, ...]:
        return self._above[y]

    def path_counts(self) -> dict[tuple[str, str], int]:
        """Number of directed Hasse paths ``y -> ... -> x`` for each pair
        with ``U_y ⊊ U_x``."""
        order = sorted(self.points, key=lambda p: len(self._U[p]))
        counts: dict[tuple[str, str], int] = {}
        for x in order:
            for y in self._U[x] - {x}:
                counts[(y, x)] = sum(
                    1 if w == y else counts.get((y, w), 0)
                    for w in self._below[x] if y in self._U[w])
        return counts

    def is_unique_path_space(self) -> bool:
        return all(c <= 1 for c in self.path_counts().values())

    def singleton_filtration(self, key: Callable[[str], object] | None = None) -> list[str]:
        """An ordering ``x_1, ..., x_l`` with every prefix open.

        Among the points that may come next, the smallest under ``key``
        (default: the name) is taken.
        """
        key = key or (lambda p: p)
        done: set[str] = set()
        out = []
        while len(out) < len(self.points):
            ready = [p for p in self.points if p not in done and self._U[p] - {p} <= done]
            p = min(ready, key=key)
            out.append(p)
            done.add(p)
        return out

    def is_locally_closed(self, Y: Iterable[str]) -> bool:
        return self.as_difference(Y) is not None

    def as_difference(self, Y: Iterable[str]) -> tuple[frozenset, frozenset] | None:
        """``(V, W)`` with ``Y = V \\ W`` and ``W ⊆ V`` open, taking the
        smallest possible ``V``; ``None`` if ``Y`` is not locally closed."""
        Y = frozenset(Y)
        for y in Y:
            self.index(y)
        V = self.open_hull(Y)
        W = V - Y
        return (V, W) if self.is_open(W) else None

    # -- derived spaces -----------------------------------------------------

    def subspace(self, S: Iterable[str]) -> "FiniteSpace":
        S = frozenset(S)
        pts = [p for p in self.points if p in S]
        return FiniteSpace(pts, [(x, y) for x in pts for y in pts if x != y and self.u_subset(x, y)],
                           limit=len(pts) or 1)

    def relabel(self, mapping: dict[str, str]) -> "FiniteSpace":
        return FiniteSpace([mapping[p] for p in self.points],
                           [(mapping[x], mapping[y]) for x, y in self.u_relations()])

    def isomorphisms_to(self, other: "FiniteSpace") -> Iterable[dict[str, str]]:
        """All homeomorphisms ``self -> other`` as point mappings."""
        if len(self) != len(other):
            return
        sig = lambda sp, p: (len(sp._U[p]), sum(p in sp._U[q] for q in sp.points))
        mine = sorted(self.points)
        theirs = sorted(other.points)
        for perm in itertools.permutations(theirs):
            m = dict(zip(mine, perm))
            if any(sig(self, p) != sig(other, m[p]) for p in mine):
                continue
            if all(self.u_subset(x, y) == other.u_subset(m[x], m[y]) for x in mine for y in mine):
                yield m

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        rel = [[y, x] for y, x in self._arrows]
        return {"points": list(self.points), "u_incl": rel}

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteSpace":
        if not isinstance(d, dict) or "points" not in d:
            raise FormatError("space must be an object with a 'points' list")
        try:
            rel = [(str(a), str(b)) for a, b in d.get("u_incl", [])]
        except (TypeError, ValueError) as exc:
            raise FormatError(f"bad u_incl entry: {exc}") from exc
        return cls(d["points"], rel)


def sierpinski() -> FiniteSpace:
    return FiniteSpace(["a", "b"], [("a", "b")])


def chain(names: Iterable[str]) -> FiniteSpace:
    """``U_{n_0} ⊆ U_{n_1} ⊆ ...``"""
    names = list(names)
    return FiniteSpace(names, list(zip(names, names[1:])))


def antichain(names: Iterable[str]) -> FiniteSpace:
    return FiniteSpace(list(names))


def diamond() -> FiniteSpace:
    """``U_t ⊆ U_m1, U_m2 ⊆ U_b``: two Hasse paths from ``t`` to ``b``."""
    return FiniteSpace(["b", "m1", "m2", "t"],
                       [("t", "m1"), ("t", "m2"), ("m1", "b"), ("m2", "b")])
