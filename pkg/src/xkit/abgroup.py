"""Finitely generated abelian groups over exact integers.

Groups are stored in canonical form ``Z^r + Z/d_1 + ... + Z/d_k`` with
``d_1 | d_2 | ... | d_k`` and every ``d_i >= 2``.  Generators are ordered
free first, then torsion by increasing divisor; all matrices in this package
refer to that order.  A homomorphism ``G -> H`` is an integer matrix with one
row per generator of ``H`` and one column per generator of ``G``.

Internally many routines work with *diagonal* groups, i.e. tuples of cyclic
orders where ``0`` stands for ``Z`` and ``1`` for a redundant trivial
generator.  A canonical group is the special case ``orders``.

Everything reduces to :func:`smith_normal_form`.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

import numpy as np

from ._intmat import eye, hstack, mat, mul, zeros
from .errors import FormatError, IllFormedMap

Orders = Sequence[int]


# -- Smith normal form -------------------------------------------------------

@dataclass
class SNF:
    """``U @ R @ V == D`` with ``U``, ``V`` unimodular.  ``Uinv`` is the
    inverse of ``U``.  Transforms not requested are ``None``."""

    D: np.ndarray
    U: np.ndarray | None
    V: np.ndarray | None
    Uinv: np.ndarray | None
    rank: int

    @property
    def diagonal(self) -> list[int]:
        m, n = self.D.shape
        return [self.D[i, i] for i in range(min(m, n))]


def smith_normal_form(R, *, left: bool = True, right: bool = True) -> SNF:
    """Smith normal form of an integer matrix.

    ``left`` controls whether ``U``/``Uinv`` are tracked and ``right``
    whether ``V`` is; skipping them saves most of the work on wide
    relation matrices.
    """
    R = mat(R)
    m, n = R.shape
    # plain lists of Python ints: far faster than object arrays elementwise
    A = [[int(v) for v in row] for row in R.tolist()] if m and n else [[0] * n for _ in range(m)]
    U = [[int(i == j) for j in range(m)] for i in range(m)] if left else None
    Uinv = [[int(i == j) for j in range(m)] for i in range(m)] if left else None
    V = [[int(i == j) for j in range(n)] for i in range(n)] if right else None

    def row_add(dst, src, q):
        # row_dst += q * row_src
        a, b = A[dst], A[src]
        for k in range(n):
            if b[k]:
                a[k] += q * b[k]
        if left:
            u, w = U[dst], U[src]
            for k in range(m):
                if w[k]:
                    u[k] += q * w[k]
            for row in Uinv:
                if row[dst]:
                    row[src] -= q * row[dst]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        if left:
            U[i], U[j] = U[j], U[i]
            for row in Uinv:
                row[i], row[j] = row[j], row[i]

    def col_add(dst, src, q):
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        if right:
            for row in V:
                if row[src]:
                    row[dst] += q * row[src]

    def col_swap(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        if right:
            for row in V:
                row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        _, i, j = best
        if i != t:
            row_swap(i, t)
        if j != t:
            col_swap(j, t)
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    row_add(i, t, -(A[i][t] // p))
                    dirty = dirty or A[i][t] != 0
            for j in range(t + 1, n):
                if A[t][j]:
                    col_add(j, t, -(A[t][j] // p))
                    dirty = dirty or A[t][j] != 0
            if dirty:
                # move the smallest leftover in row/col t onto the pivot
                cands = [(abs(A[i][t]), 0, i) for i in range(t + 1, m) if A[i][t] != 0]
                cands += [(abs(A[t][j]), 1, j) for j in range(t + 1, n) if A[t][j] != 0]
                _, kind, k = min(cands)
                if kind == 0:
                    row_swap(k, t)
                else:
                    col_swap(k, t)
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is not None:
                row_add(t, bad, 1)
                continue
            break
        if A[t][t] < 0:
            A[t] = [-v for v in A[t]]
            if left:
                U[t] = [-v for v in U[t]]
                for row in Uinv:
                    row[t] = -row[t]
        t += 1
    return SNF(_obj(A, m, n), _obj(U, m, m) if left else None, _obj(V, n, n) if right else None,
               _obj(Uinv, m, m) if left else None, t)


def _obj(rows: list[list[int]], m: int, n: int) -> np.ndarray:
    out = np.empty((m, n), dtype=object)
    for i, row in enumerate(rows):
        out[i, :] = row
    return out


def invariant_factors(R) -> list[int]:
    return smith_normal_form(R, left=False, right=False).diagonal


# -- canonical groups ---------------------------------------------------------

@dataclass(frozen=True)
class AbGroup:
    """A finitely generated abelian group in canonical form."""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(d) for d in self.torsion))
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        for k, d in enumerate(self.torsion):
            if d < 2:
                raise ValueError(f"invariant factor {d} < 2")
            if k and d % self.torsion[k - 1]:
                raise ValueError(f"torsion {self.torsion} is not a divisor chain")

    @property
    def orders(self) -> tuple[int, ...]:
        return (0,) * self.rank + self.torsion

    @property
    def ngens(self) -> int:
        return self.rank + len(self.torsion)

    @property
    def is_trivial(self) -> bool:
        return self.ngens == 0

    @property
    def is_free(self) -> bool:
        return not self.torsion

    @property
    def order(self) -> int | None:
        """Cardinality, or ``None`` when infinite."""
        if self.rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    @classmethod
    def from_orders(cls, orders: Orders) -> "AbGroup":
        return canonicalize_orders(orders)[0]

    @classmethod
    def cyclic(cls, n: int) -> "AbGroup":
        return cls.from_orders([n])

    def __str__(self) -> str:
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    def to_dict(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion)}

    @classmethod
    def from_dict(cls, d: dict) -> "AbGroup":
        try:
            return cls(int(d.get("rank", 0)), tuple(int(t) for t in d.get("torsion", [])))
        except (TypeError, ValueError, AttributeError) as exc:
            raise FormatError(f"bad group {d!r}: {exc}") from exc

    def reduce(self, v: np.ndarray) -> np.ndarray:
        return reduce_vec(v, self.orders)

    def is_zero(self, v: np.ndarray) -> bool:
        return is_zero_mod(v, self.orders)


ZERO = AbGroup()
Z = AbGroup(1)


# -- diagonal-group primitives ----------------------------------------------

def relation_matrix(orders: Orders) -> np.ndarray:
    """Columns ``d_i e_i`` for every finite order ``d_i``."""
    idx = [i for i, d in enumerate(orders) if d != 0]
    out = zeros(len(orders), len(idx))
    for col, i in enumerate(idx):
        out[i, col] = orders[i]
    return out


def reduce_vec(v: np.ndarray, orders: Orders) -> np.ndarray:
    out = v.copy()
    for i, d in enumerate(orders):
        if d:
            out[i, :] %= d
    return out


def is_zero_mod(v: np.ndarray, orders: Orders) -> bool:
    for i, d in enumerate(orders):
        row = v[i, :]
        if d == 0:
            if any(x != 0 for x in row):
                return False
        elif any(x % d for x in row):
            return False
    return True


def check_well_defined(A: np.ndarray, dom: Orders, cod: Orders) -> None:
    """Raise :class:`IllFormedMap` unless ``A`` respects the relations."""
    if A.shape != (len(cod), len(dom)):
        raise IllFormedMap(f"matrix shape {A.shape} does not match {len(cod)}x{len(dom)}")
    for j, d in enumerate(dom):
        if d and not is_zero_mod(d * A[:, j:j + 1], cod):
            raise IllFormedMap(f"generator {j} of order {d} is not sent to an element of order dividing {d}")


@dataclass
class Quotient:
    """``group`` is ``Z^n / relations``; ``proj`` maps ambient coordinates to
    canonical ones, ``section`` picks a representative of each canonical
    generator."""

    group: AbGroup
    proj: np.ndarray
    section: np.ndarray


def quotient(rels: np.ndarray, n: int) -> Quotient:
    """Canonical form of ``Z^n`` modulo the column span of ``rels``."""
    if n == 0:
        return Quotient(ZERO, zeros(0, 0), zeros(0, 0))
    # drop zero columns and duplicates cheaply before the SNF
    cols = []
    seen = set()
    for j in range(rels.shape[1]):
        c = tuple(rels[:, j])
        if any(c) and c not in seen:
            seen.add(c)
            cols.append(j)
    R = rels[:, cols] if cols else zeros(n, 0)
    snf = smith_normal_form(R, right=False)
    diag = snf.diagonal + [0] * (n - min(R.shape))
    free = [i for i in range(n) if diag[i] == 0]
    tors = [i for i in range(n) if diag[i] > 1]
    idx = free + tors
    group = AbGroup(len(free), tuple(diag[i] for i in tors))
    proj = reduce_vec(snf.U[idx, :], group.orders) if idx else zeros(0, n)
    section = snf.Uinv[:, idx] if idx else zeros(n, 0)
    return Quotient(group, proj, section)


def canonicalize_orders(orders: Orders) -> tuple[AbGroup, np.ndarray, np.ndarray]:
    """Canonical form of a diagonal group with the comparison maps
    ``diag -> canonical`` and ``canonical -> diag``."""
    q = quotient(relation_matrix(orders), len(orders))
    return q.group, q.proj, q.section


def cokernel(A: np.ndarray, cod: Orders) -> Quotient:
    n = len(cod)
    return quotient(hstack([mat(A, (n, A.shape[1])), relation_matrix(cod)], n), n)


def integer_kernel(A: np.ndarray) -> np.ndarray:
    """Basis (as columns) of ``{x in Z^n : A x = 0}``."""
    m, n = A.shape
    if n == 0:
        return zeros(0, 0)
    if m == 0:
        return eye(n)
    snf = smith_normal_form(A, left=False)
    return snf.V[:, snf.rank:]


def lattice_basis(gens: np.ndarray) -> np.ndarray:
    """A basis of the column span of ``gens``."""
    n = gens.shape[0]
    if gens.shape[1] == 0:
        return zeros(n, 0)
    snf = smith_normal_form(gens, right=False)
    r = snf.rank
    out = snf.Uinv[:, :r].copy()
    for k, d in enumerate(snf.diagonal[:r]):
        out[:, k] *= d
    return out


@dataclass
class Subgroup:
    """``group`` with ``incl`` giving each canonical generator in ambient
    coordinates."""

    group: AbGroup
    incl: np.ndarray


def kernel(A: np.ndarray, dom: Orders, cod: Orders) -> Subgroup:
    """Kernel of a (well-defined) map between diagonal groups."""
    nd, nc = len(dom), len(cod)
    A = mat(A, (nc, nd))
    if nd == 0:
        return Subgroup(ZERO, zeros(0, 0))
    B = hstack([A, relation_matrix(cod)], nc)
    L = integer_kernel(B)[:nd, :]
    basis = lattice_basis(L)
    r = basis.shape[1]
    if r == 0:
        return Subgroup(ZERO, zeros(nd, 0))
    # express the domain relations in the basis of L
    Rd = relation_matrix(dom)
    C = solve_exact(basis, Rd)
    if C is None:
        raise IllFormedMap("map is not well defined on the domain relations")
    q = quotient(C, r)
    return Subgroup(q.group, reduce_vec(mul(basis, q.section), dom))


def solve(A: np.ndarray, b: np.ndarray, cod: Orders) -> np.ndarray | None:
    """Some integer ``x`` with ``A x = b`` modulo the relations of ``cod``,
    or ``None``.  ``b`` may have several columns."""
    nc = len(cod)
    A = mat(A, (nc, A.shape[1]))
    B = hstack([A, relation_matrix(cod)], nc)
    y = solve_exact(B, b)
    if y is None:
        return None
    return y[:A.shape[1], :]


def solve_exact(A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Integer solution of ``A x = b`` (exact equality) or ``None``.

    Free variables are set to zero, which makes the answer deterministic.
    """
    m, n = A.shape
    k = b.shape[1]
    if m == 0:
        return zeros(n, k)
    if n == 0:
        return zeros(0, k) if all(v == 0 for v in b.flat) else None
    snf = smith_normal_form(A)
    c = mul(snf.U, b)
    y = zeros(n, k)
    diag = snf.diagonal
    for i in range(m):
        d = diag[i] if i < len(diag) else 0
        for col in range(k):
            if d == 0:
                if c[i, col] != 0:
                    return None
            else:
                if c[i, col] % d:
                    return None
                y[i, col] = c[i, col] // d
    return mul(snf.V, y)


def in_image(A: np.ndarray, b: np.ndarray, cod: Orders) -> bool:
    return solve(A, b, cod) is not None


def is_surjective(A: np.ndarray, cod: Orders) -> bool:
    return cokernel(A, cod).group.is_trivial


def is_injective(A: np.ndarray, dom: Orders, cod: Orders) -> bool:
    return kernel(A, dom, cod).group.is_trivial


def is_isomorphism(A: np.ndarray, dom: Orders, cod: Orders) -> bool:
    return is_surjective(A, cod) and is_injective(A, dom, cod)


def image(A: np.ndarray, dom: Orders, cod: Orders) -> AbGroup:
    """Canonical form of the image of ``A``."""
    k = kernel(A, dom, cod)
    # image = dom / ker
    nd = len(dom)
    rels = hstack([relation_matrix(dom), k.incl], nd)
    return quotient(rels, nd).group


# -- presentations and maps -------------------------------------------------

@dataclass
class Presentation:
    """``Z^gens`` modulo the column span of ``rels``."""

    gens: int
    rels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.rels, dtype=object)
        ncols = arr.shape[1] if arr.ndim == 2 else 0
        self.rels = mat(self.rels, (self.gens, ncols))
        if self.rels.shape[0] != self.gens:
            raise ValueError("relation matrix must have one row per generator")

    def canonicalize(self) -> Quotient:
        return quotient(self.rels, self.gens)


def canonicalize(p: Presentation) -> AbGroup:
    return p.canonicalize().group


@dataclass
class GroupMap:
    """A homomorphism between canonical groups, checked for
    well-definedness on construction."""

    domain: AbGroup
    codomain: AbGroup
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = reduce_vec(mat(self.matrix, (self.codomain.ngens, self.domain.ngens)),
                                 self.codomain.orders)
        check_well_defined(self.matrix, self.domain.orders, self.codomain.orders)

    @classmethod
    def identity(cls, g: AbGroup) -> "GroupMap":
        return cls(g, g, eye(g.ngens))

    @classmethod
    def zero(cls, g: AbGroup, h: AbGroup) -> "GroupMap":
        return cls(g, h, zeros(h.ngens, g.ngens))

    def __matmul__(self, other: "GroupMap") -> "GroupMap":
        if other.codomain != self.domain:
            raise IllFormedMap("cannot compose: codomain/domain mismatch")
        return GroupMap(other.domain, self.codomain, mul(self.matrix, other.matrix))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupMap):
            return NotImplemented
        return (self.domain == other.domain and self.codomain == other.codomain
                and is_zero_mod(self.matrix - other.matrix, self.codomain.orders))

    def kernel(self) -> Subgroup:
        return kernel(self.matrix, self.domain.orders, self.codomain.orders)

    def cokernel(self) -> Quotient:
        return cokernel(self.matrix, self.codomain.orders)

    def is_injective(self) -> bool:
        return self.kernel().group.is_trivial

    def is_surjective(self) -> bool:
        return self.cokernel().group.is_trivial

    def is_isomorphism(self) -> bool:
        return self.is_injective() and self.is_surjective()


def direct_sum(*groups: AbGroup) -> AbGroup:
    return AbGroup.from_orders([d for g in groups for d in g.orders])


def is_free(g: AbGroup) -> bool:
    return g.is_free


def rank(g: AbGroup) -> int:
    return g.rank


# -- Hom and Ext closed forms -------------------------------------------------

def hom_group(G: AbGroup, H: AbGroup) -> AbGroup:
    """``Hom(G, H)`` by additivity: ``Hom(Z, H) = H`` and
    ``Hom(Z/n, H) = H[n]``."""
    orders = []
    for a in G.orders:
        for b in H.orders:
            if a == 0:
                orders.append(b)
            elif b != 0:
                orders.append(gcd(a, b))
    return AbGroup.from_orders(orders)


def ext_group(G: AbGroup, H: AbGroup) -> AbGroup:
    """``Ext^1(G, H)``: zero on free summands, ``H/nH`` on ``Z/n``."""
    orders = []
    for a in G.torsion:
        for b in H.orders:
            orders.append(a if b == 0 else gcd(a, b))
    return AbGroup.from_orders(orders)


@dataclass(frozen=True)
class GradedGroup:
    """A Z/2-graded group; ``even`` is degree 0, ``odd`` degree 1."""

    even: AbGroup = ZERO
    odd: AbGroup = ZERO

    def __getitem__(self, parity: int) -> AbGroup:
        return (self.even, self.odd)[parity]

    def shift(self) -> "GradedGroup":
        return GradedGroup(self.odd, self.even)

    @property
    def is_trivial(self) -> bool:
        return self.even.is_trivial and self.odd.is_trivial

    def __str__(self) -> str:
        return f"({self.even} | {self.odd})"

    def to_dict(self) -> dict:
        return {"even": self.even.to_dict(), "odd": self.odd.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "GradedGroup":
        if not isinstance(d, dict):
            raise FormatError(f"bad graded group {d!r}")
        return cls(AbGroup.from_dict(d.get("even", {})), AbGroup.from_dict(d.get("odd", {})))

    @classmethod
    def of(cls, parts: Sequence[AbGroup]) -> "GradedGroup":
        return cls(parts[0], parts[1])


def graded_sum(*gs: GradedGroup) -> GradedGroup:
    return GradedGroup(direct_sum(*(g.even for g in gs)), direct_sum(*(g.odd for g in gs)))


def shift(g: GradedGroup) -> GradedGroup:
    return g.shift()


def graded_hom(G: GradedGroup, H: GradedGroup) -> GradedGroup:
    return GradedGroup(
        direct_sum(hom_group(G.even, H.even), hom_group(G.odd, H.odd)),
        direct_sum(hom_group(G.even, H.odd), hom_group(G.odd, H.even)),
    )


def graded_ext(G: GradedGroup, H: GradedGroup) -> GradedGroup:
    return GradedGroup(
        direct_sum(ext_group(G.even, H.even), ext_group(G.odd, H.odd)),
        direct_sum(ext_group(G.even, H.odd), ext_group(G.odd, H.even)),
    )
