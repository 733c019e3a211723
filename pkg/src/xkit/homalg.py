"""Projective resolutions of length one, Hom and Ext over the incidence
algebra, and assembly of the KK-groups from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Callable

import numpy as np

from ._intmat import hstack, mat, mul, zeros
from .abgroup import (AbGroup, GradedGroup, Quotient, canonicalize_orders, cokernel, direct_sum,
                      is_zero_mod, kernel, reduce_vec, solve, solve_exact)
from .cosheaf import Check, colim, is_flabby
from .errors import LiftFailure, NotFlabby, SpaceMismatch
from .rep import ProjectiveBundle, RepLayer, Representation

Family = dict[str, np.ndarray]


def _flabby_check(M: Representation) -> Check:
    return is_flabby(colim(M))


def require_flabby_rep(M: Representation, what: str = "input") -> None:
    chk = _flabby_check(M)
    if not chk:
        raise NotFlabby(f"{what}: colimit is not flabby ({chk.detail})")


# -- fibres ---------------------------------------------------------------------

def _fibre_quotient(layer: RepLayer, x: str) -> Quotient:
    """``M(x)`` modulo the images of all arrows into ``x``."""
    sp = layer.space
    n = layer.ngens(x)
    blocks = [layer.arrows[(y, x)] for y in sp.arrows_into(x)]
    return cokernel(hstack(blocks, n), layer.orders(x))


def _fibre_via_colim(C_layer, x: str) -> Quotient:
    sp = C_layer.space
    Ux = sp.U(x)
    return cokernel(C_layer.composite(Ux - {x}, Ux), C_layer.orders(Ux))


def fibre_groups(M: Representation, key: Callable[[str], object] | None = None,
                 *, check: bool = True) -> list[tuple[str, GradedGroup]]:
    """``Colim(M)(U_x) / Colim(M)(U_x \\ {x})`` along a singleton filtration."""
    C = colim(M)
    if check:
        chk = is_flabby(C)
        if not chk:
            raise NotFlabby(f"colimit is not flabby ({chk.detail})")
    out = []
    for x in M.space.singleton_filtration(key):
        parts = [_fibre_via_colim(C.layers[p], x).group for p in (0, 1)]
        out.append((x, GradedGroup(*parts)))
    return out


# -- resolutions ----------------------------------------------------------------

@dataclass
class LayerResolution:
    """Ungraded ``0 -> P1 -> P0 -> L -> 0``.  Generators of ``P0`` sit at
    ``gens0[k]`` and map to ``aug[k] ∈ L(gens0[k])``; ``d`` has one column
    per generator of ``P1`` written in the generators of ``P0``."""

    layer: RepLayer
    gens0: list[str]
    aug: list[np.ndarray]
    gens1: list[str]
    d: np.ndarray

    def index(self, gens: list[str], y: str) -> list[int]:
        sp = self.layer.space
        return [k for k, x in enumerate(gens) if sp.u_subset(x, y)]

    def d_at(self, y: str) -> np.ndarray:
        rows, cols = self.index(self.gens0, y), self.index(self.gens1, y)
        return self.d[np.ix_(rows, cols)] if rows and cols else zeros(len(rows), len(cols))

    def aug_at(self, y: str) -> np.ndarray:
        L = self.layer
        cols = [mul(L.composite(self.gens0[k], y), self.aug[k]) for k in self.index(self.gens0, y)]
        return reduce_vec(hstack(cols, L.ngens(y)), L.orders(y))

    def exactness_failure(self) -> str | None:
        L = self.layer
        for y in L.space.points:
            dy, ay = self.d_at(y), self.aug_at(y)
            n0, n1 = dy.shape
            if n1 and kernel(dy, (0,) * n1, (0,) * n0).group.ngens:
                return f"P1 -> P0 is not injective at {y}"
            if not cokernel(ay, L.orders(y)).group.is_trivial:
                return f"augmentation is not surjective at {y}"
            if n1 and not is_zero_mod(mul(ay, dy), L.orders(y)):
                return f"augmentation does not kill the image of P1 at {y}"
            ker = kernel(ay, (0,) * n0, L.orders(y))
            if ker.group.ngens and solve_exact(dy, ker.incl) is None:
                return f"kernel of the augmentation is not the image of P1 at {y}"
        return None


def resolve_layer(layer: RepLayer, filtration: list[str]) -> LayerResolution:
    sp = layer.space
    gens0: list[str] = []
    aug: list[np.ndarray] = []
    gens1: list[str] = []
    cols: list[dict[int, int]] = []
    for x in filtration:
        q = _fibre_quotient(layer, x)
        earlier = [k for k, z in enumerate(gens0) if z != x and sp.u_subset(z, x)]
        A = hstack([mul(layer.composite(gens0[k], x), aug[k]) for k in earlier], layer.ngens(x))
        for g, dg in enumerate(q.group.orders):
            m = q.section[:, g:g + 1]
            k_new = len(gens0)
            gens0.append(x)
            aug.append(m)
            if dg == 0:
                continue
            c = solve(A, dg * m, layer.orders(x))
            if c is None:
                raise LiftFailure(f"cannot lift relation of order {dg} at {x}")
            col = {k_new: dg}
            for k, v in zip(earlier, c[:, 0]):
                if v:
                    col[k] = -int(v)
            gens1.append(x)
            cols.append(col)
    d = zeros(len(gens0), len(gens1))
    for j, col in enumerate(cols):
        for k, v in col.items():
            d[k, j] = v
    return LayerResolution(layer, gens0, aug, gens1, d)


@dataclass
class ProjectiveResolution:
    """``0 -> P1 -> P0 -> M -> 0`` assembled from the two parities."""

    target: Representation
    filtration: list[str]
    layers: tuple[LayerResolution, LayerResolution]
    P0: ProjectiveBundle = field(init=False)
    P1: ProjectiveBundle = field(init=False)

    def __post_init__(self):
        self.P0 = _bundle([r.gens0 for r in self.layers])
        self.P1 = _bundle([r.gens1 for r in self.layers])

    def check_exactness(self) -> str | None:
        for r in self.layers:
            why = r.exactness_failure()
            if why:
                return why
        return None

    def to_dict(self) -> dict:
        from ._intmat import to_lists
        return {
            "filtration": list(self.filtration),
            "P0": self.P0.to_list(),
            "P1": self.P1.to_list(),
            "layers": [
                {"P0_generators": r.gens0, "P1_generators": r.gens1,
                 "augmentation": [[int(v) for v in a.flat] for a in r.aug],
                 "d": to_lists(r.d)}
                for r in self.layers
            ],
        }


def _bundle(gens_by_parity: list[list[str]]) -> ProjectiveBundle:
    summands: list[tuple[str, int, int]] = []
    for p, gens in enumerate(gens_by_parity):
        for x in gens:
            if summands and summands[-1][0] == x and summands[-1][1] == p:
                summands[-1] = (x, p, summands[-1][2] + 1)
            else:
                summands.append((x, p, 1))
    return ProjectiveBundle(summands)


def projective_resolution(M: Representation, key: Callable[[str], object] | None = None,
                          *, check: bool = True) -> ProjectiveResolution:
    """Resolution built along a singleton filtration: one free generator
    per canonical generator of each fibre group, one relation per torsion
    generator, corrected by terms from earlier points."""
    if check:
        require_flabby_rep(M)
    filt = M.space.singleton_filtration(key)
    res = ProjectiveResolution(M, filt, tuple(resolve_layer(L, filt) for L in M.layers))
    if check:
        why = res.check_exactness()
        if why:
            raise LiftFailure(why)
    return res


def is_projective(M: Representation) -> bool:
    return all(G.even.is_free and G.odd.is_free for _, G in fibre_groups(M))


# -- Hom ------------------------------------------------------------------------

@dataclass
class LayerHom:
    """``Hom(L, K)`` for ungraded layers as the kernel of the naturality
    constraints on pointwise matrices.

    Entry ``(k, i)`` of ``f_x`` is ``unit * v`` for a variable ``v`` of the
    given order; ``incl`` expresses canonical generators in variables."""

    source: RepLayer
    target: RepLayer
    group: AbGroup
    var_orders: list[int]
    entries: dict[str, list[tuple[int, int, int, int]]]
    incl: np.ndarray

    def family(self, coeffs) -> Family:
        """Pointwise matrices of the element with the given canonical
        coordinates."""
        c = mat(list(coeffs), (self.group.ngens, 1)) if self.group.ngens else zeros(0, 1)
        v = mul(self.incl, c)
        return self.family_from_vars(v)

    def family_from_vars(self, v: np.ndarray) -> Family:
        out = {}
        for x in self.source.space.points:
            f = zeros(self.target.ngens(x), self.source.ngens(x))
            for k, i, unit, var in self.entries[x]:
                f[k, i] = unit * v[var, 0]
            out[x] = reduce_vec(f, self.target.orders(x))
        return out


def hom_layer(L: RepLayer, K: RepLayer) -> LayerHom:
    sp = L.space
    var_orders: list[int] = []
    entries: dict[str, list] = {}
    for x in sp.points:
        ent = []
        for k, beta in enumerate(K.orders(x)):
            for i, alpha in enumerate(L.orders(x)):
                if alpha == 0:
                    unit, order = 1, beta
                elif beta == 0:
                    continue
                else:
                    g = gcd(alpha, beta)
                    if g == 1:
                        continue
                    unit, order = beta // g, g
                ent.append((k, i, unit, len(var_orders)))
                var_orders.append(order)
        entries[x] = ent
    nv = len(var_orders)
    rows = []
    cod: list[int] = []
    for y, x in sp.hasse_arrows():
        m, n = L.arrows[(y, x)], K.arrows[(y, x)]
        ny = L.ngens(y)
        # (f_x m - n f_y)[k, j] for k in K(x), j in L(y)
        block = zeros(K.ngens(x) * ny, nv)
        for k_, i, unit, var in entries[x]:
            for j in range(ny):
                block[k_ * ny + j, var] += unit * m[i, j]
        for l, j, unit, var in entries[y]:
            for k_ in range(K.ngens(x)):
                block[k_ * ny + j, var] -= n[k_, l] * unit
        rows.append(block)
        cod += [beta for beta in K.orders(x) for _ in range(ny)]
    Phi = np.vstack(rows) if rows else zeros(0, nv)
    sub = kernel(Phi, var_orders, cod)
    return LayerHom(L, K, sub.group, var_orders, entries, sub.incl)


@dataclass
class HomModule:
    """Graded ``Hom(M, N)``.  Degree ``e`` collects the layer pairs
    ``(p, p + e)``; ``parts[e]`` lists them as ``(p, LayerHom)``."""

    group: GradedGroup
    parts: tuple[list, list]
    comparison: tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]

    def module_map(self, degree: int, coeffs) -> dict[str, list[np.ndarray]]:
        """Explicit module map for an element given in canonical coordinates
        of ``group[degree]``: per point, matrices ``M(x)_p -> N(x)_{p+degree}``."""
        _, section = self.comparison[degree]
        n = self.group[degree].ngens
        c = mat(list(coeffs), (n, 1)) if n else zeros(0, 1)
        raw = mul(section, c)
        out: dict[str, list] = {}
        off = 0
        for p, lh in self.parts[degree]:
            k = lh.group.ngens
            fam = lh.family(list(raw[off:off + k, 0]))
            off += k
            for x, f in fam.items():
                out.setdefault(x, [None, None])[p] = f
        return out

    def generators(self, degree: int) -> list[dict[str, list[np.ndarray]]]:
        n = self.group[degree].ngens
        return [self.module_map(degree, [int(i == j) for i in range(n)]) for j in range(n)]


def hom_module(M: Representation, N: Representation) -> HomModule:
    if M.space != N.space:
        raise SpaceMismatch("Hom between representations on different spaces")
    parts = ([], [])
    for e in (0, 1):
        for p in (0, 1):
            parts[e].append((p, hom_layer(M.layers[p], N.layers[(p + e) % 2])))
    groups, comps = [], []
    for e in (0, 1):
        g, proj, sec = canonicalize_orders([d for _, lh in parts[e] for d in lh.group.orders])
        groups.append(g)
        comps.append((proj, sec))
    return HomModule(GradedGroup(*groups), parts, tuple(comps))


# -- Ext ------------------------------------------------------------------------

def _pullback_matrix(r: LayerResolution, K: RepLayer) -> tuple[np.ndarray, list[int], list[int]]:
    """``d^*: Hom(P0, K) -> Hom(P1, K)`` with both sides written as sums
    of ``K(x)`` over generators."""
    dom = [o for x in r.gens0 for o in K.orders(x)]
    cod = [o for x in r.gens1 for o in K.orders(x)]
    off0, n = [], 0
    for x in r.gens0:
        off0.append(n)
        n += K.ngens(x)
    out = zeros(len(cod), len(dom))
    row = 0
    for j, xj in enumerate(r.gens1):
        nj = K.ngens(xj)
        for k, xk in enumerate(r.gens0):
            c = r.d[k, j]
            if c:
                out[row:row + nj, off0[k]:off0[k] + K.ngens(xk)] += c * K.composite(xk, xj)
        row += nj
    return reduce_vec(out, cod), dom, cod


def ext_layer(r: LayerResolution, K: RepLayer) -> AbGroup:
    A, _, cod = _pullback_matrix(r, K)
    return cokernel(A, cod).group


def hom_via_resolution(r: LayerResolution, K: RepLayer) -> AbGroup:
    A, dom, cod = _pullback_matrix(r, K)
    return kernel(A, dom, cod).group


def ext_module(M: Representation, N: Representation, key: Callable[[str], object] | None = None,
               *, resolution: ProjectiveResolution | None = None) -> GradedGroup:
    """``coker(Hom(P0, N) -> Hom(P1, N))`` for the filtration resolution of ``M``."""
    if M.space != N.space:
        raise SpaceMismatch("Ext between representations on different spaces")
    res = resolution or projective_resolution(M, key)
    parts = []
    for e in (0, 1):
        parts.append(direct_sum(*(ext_layer(res.layers[p], N.layers[(p + e) % 2]) for p in (0, 1))))
    return GradedGroup(*parts)


def bundle_hom_ranks(res: ProjectiveResolution, N: Representation) -> tuple[GradedGroup, GradedGroup]:
    """``Hom(P0, N)`` and ``Hom(P1, N)`` as graded groups."""
    out = []
    for which in ("gens0", "gens1"):
        parts = []
        for e in (0, 1):
            orders = []
            for p in (0, 1):
                K = N.layers[(p + e) % 2]
                orders += [o for x in getattr(res.layers[p], which) for o in K.orders(x)]
            parts.append(AbGroup.from_orders(orders))
        out.append(GradedGroup(*parts))
    return out[0], out[1]


# -- UCT ------------------------------------------------------------------------

@dataclass
class UCTReport:
    """``hom`` and ``ext`` are the end terms of the short exact sequence;
    ``kk`` is their degreewise split sum when both inputs are flabby."""

    hom: GradedGroup
    ext: GradedGroup
    kk: GradedGroup | None
    split: bool
    source_flabby: bool
    target_flabby: bool
    note: str

    def to_dict(self) -> dict:
        return {
            "hom": self.hom.to_dict(),
            "ext": self.ext.to_dict(),
            "kk": None if self.kk is None else self.kk.to_dict(),
            "split": self.split,
            "source_flabby": self.source_flabby,
            "target_flabby": self.target_flabby,
            "note": self.note,
        }


def kk_from_parts(hom: GradedGroup, ext: GradedGroup) -> GradedGroup:
    """``KK_i = Hom_i ⊕ Ext_{i+1}``."""
    return GradedGroup(direct_sum(hom.even, ext.odd), direct_sum(hom.odd, ext.even))


def uct_groups(MA: Representation, MB: Representation) -> UCTReport:
    if MA.space != MB.space:
        raise SpaceMismatch("UCT inputs live on different spaces")
    chk_a = _flabby_check(MA)
    if not chk_a:
        raise NotFlabby(f"source: colimit is not flabby ({chk_a.detail}); no UCT applies")
    flabby_b = bool(_flabby_check(MB))
    hom = hom_module(MA, MB).group
    ext = ext_module(MA, MB)
    if flabby_b:
        return UCTReport(hom, ext, kk_from_parts(hom, ext), True, True, True,
                         "both inputs flabby: the sequence splits degreewise")
    if ext.is_trivial or hom.is_trivial:
        return UCTReport(hom, ext, kk_from_parts(hom, ext), False, True, False,
                         "target not flabby, but one end term vanishes so the sequence "
                         "determines KK")
    return UCTReport(hom, ext, None, False, True, False,
                     "target not flabby: KK is an extension of Hom by shifted Ext, "
                     "determined only up to that extension")
