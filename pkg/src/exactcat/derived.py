"""Derived limits and colimits: telescopes, Roos/coRoos complexes, lim/lim¹ reports,
deformation-computed left derived functors and the transfer checks built on them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, lcm

import sympy

from .chain import (
    ChainMap,
    Complex,
    HomologyReport,
    homology,
    is_quasi_iso,
)
from .core import (
    ExactStructure,
    FgModule,
    Morphism,
    ShortSeq,
    cokernel,
    direct_sum,
    factor_through_mono,
    image,
    is_exact_pair,
    kernel,
    tf_reflect,
    tf_reflect_map,
)
from .errors import HypothesisFailed, NotAdapted, PreconditionError
from .functors import Functor
from .indpro import (
    IndObject,
    IndResolution,
    ProObject,
    Stationary,
    _image_chain,
    ind_resolution,
    check_ind_resolution,
    ml_check,
    MlVerdict,
    restrict_to_lattice,
    stable_image,
    _torsion_log,
)
from .linalg import IntMatrix, right_kernel
from .resolution import FREE_COVER, DeformationFunctor, resolve


# -- telescope ------------------------------------------------------------------------

@dataclass(frozen=True)
class TelescopeComplex:
    """``∏ X_n`` in degree 0 mapped to ``∏ X_n`` in degree -1 by ``Id - shift∘t``.

    For stationary towers the products are folded to the finite prefix.  A
    constant-map tower is represented (by its stable image in degree 0) only
    when the Mittag-Leffler condition holds.
    """

    complex: Complex | None
    representable: bool
    ml: MlVerdict


def telescope(t: ProObject) -> TelescopeComplex:
    if not t.is_tower:
        raise PreconditionError("telescope expects an ω-tower")
    tail = t.shape.tail
    if isinstance(tail, Stationary):
        k = tail.k
        top = [t.obj(n) for n in range(k + 1)]
        bot = [t.obj(n) for n in range(k)]
        p0, p1 = direct_sum(*top), direct_sum(*bot)
        rows = []
        offs = [0]
        for m in top:
            offs.append(offs[-1] + m.generator_count)
        for n in range(k):
            tr = t.transition(n, n + 1).matrix   # X_{n+1} -> X_n
            g = t.obj(n).generator_count
            for r in range(g):
                row = [0] * p0.generator_count
                row[offs[n] + r] = 1
                for c in range(tr.ncols):
                    row[offs[n + 1] + c] -= tr.rows[r][c]
                rows.append(row)
        d = Morphism(p0, p1, IntMatrix.of(rows, p0.generator_count))
        cx = Complex.build({0: p0, -1: p1}, {0: d}, validate=False)
        return TelescopeComplex(cx, True, ml_check(t))
    ml = ml_check(t)
    if not ml.holds:
        return TelescopeComplex(None, False, ml)
    a, f = t.objects[0], t.arrows[0]
    lat, _ = stable_image(a, f)
    b, _, _ = restrict_to_lattice(a, f, lat)
    cx = Complex.build({0: b.pruned.module, -1: FgModule.zero()}, validate=False)
    return TelescopeComplex(cx, True, ml)


@dataclass(frozen=True)
class LimReport:
    lim: FgModule | None          # None: not representable
    lim1: str                     # "Zero" | "Nonzero" | "NotRepresentable"
    rationale: str

    def lines(self) -> list[str]:
        lim = "NotRepresentable" if self.lim is None else f"{list(self.lim.invariants)}"
        return [f"lim: {lim}", f"lim1: {self.lim1}", f"ml: {self.rationale}"]


def lim_report(t: ProObject) -> LimReport:
    tel = telescope(t)
    tail = t.shape.tail
    if isinstance(tail, Stationary):
        h = homology(tel.complex)
        lim = kernel(tel.complex.d(0))[0].pruned.module
        return LimReport(lim, "Zero" if not h[-1] else "Nonzero", str(tel.ml))
    if tel.ml.holds:
        return LimReport(tel.complex.obj(0), "Zero", str(tel.ml))
    if tel.ml.status == "Fails":
        return LimReport(divisible_core(t.objects[0], t.arrows[0]), "Nonzero", str(tel.ml))
    return LimReport(None, "NotRepresentable", str(tel.ml))


def _poly_at(poly: sympy.Poly, m: IntMatrix) -> IntMatrix:
    n = m.nrows
    out = IntMatrix.zeros(n, n)
    for c in poly.all_coeffs():
        out = out @ m + IntMatrix.identity(n).scale(int(c))
    return out


def divisible_core(a: FgModule, f: Morphism) -> FgModule:
    """Largest subgroup of ``a`` on which ``f`` is onto (equivalently an automorphism).

    Inside the stable-rank image, the free quotient splits rationally along the
    characteristic polynomial of ``f``; the factors with constant term ±1 carve
    out the saturated sublattice on which ``f`` is unimodular.  The preimage of
    that sublattice is then iterated to its stable image.
    """
    rel_rank = a.smith.rank
    prev, lat_r = None, None
    for lat, _ in _image_chain(a, f):
        rk = lat.nrows - rel_rank
        if prev is not None and rk == prev[1]:
            lat_r = prev[0]
            break
        prev = (lat, rk)
    b, fb, _ = restrict_to_lattice(a, f, lat_r)
    free, q = tf_reflect(b)
    fbar = tf_reflect_map(fb)
    n = free.generator_count
    if n:
        x = sympy.Symbol("x")
        cp = sympy.Matrix(fbar.matrix.tolist()).charpoly(x)
        _, factors = sympy.factor_list(cp.as_expr(), x)
        g = sympy.Poly(1, x)
        for fac, mult in factors:
            p = sympy.Poly(fac, x)
            if abs(p.eval(0)) == 1:
                g = g * p ** mult
        gm = _poly_at(g, fbar.matrix)
        dbar = right_kernel(gm)
    else:
        dbar = IntMatrix.zeros(0, 0)
    sub = Morphism(FgModule.free(dbar.ncols), free, dbar)
    _, to_quot = cokernel(sub)
    c0, c0_incl = kernel(to_quot @ q)
    fc = factor_through_mono(fb @ c0_incl, c0_incl)
    bound = c0.generator_count + _torsion_log(c0) + 2
    st = stable_image(c0, fc, bound)
    if st is None:
        raise PreconditionError("core iteration did not settle")
    core, _, _ = restrict_to_lattice(c0, fc, st[0])
    return core.pruned.module


def brute_force_prefix(t: ProObject) -> tuple[dict[int, int], int]:
    """Enumerate the finite prefix of a stationary tower of finite groups.

    Returns the element-order histogram of the compatible sequences (the limit)
    and the order of the cokernel of ``Id - shift∘t`` (the lim¹ term).
    """
    k = t.shape.tail.k
    elems = [_elements(t.obj(n)) for n in range(k + 1)]
    maps = [t.transition(n, n + 1) for n in range(k)]
    lim_counts: dict[int, int] = {}
    image = set()
    for seq in itertools.product(*elems):
        diff = tuple(_canon(t.obj(n), tuple(a - b for a, b in zip(seq[n], _apply(maps[n], seq[n + 1]))))
                     for n in range(k))
        image.add(diff)
        if all(not any(c) for c in diff):
            o = 1
            for n, v in enumerate(seq):
                o = lcm(o, _order(t.obj(n), v))
            lim_counts[o] = lim_counts.get(o, 0) + 1
    total = 1
    for n in range(k):
        total *= len(elems[n])
    return lim_counts, total // len(image)


def _canon(m: FgModule, v: tuple[int, ...]) -> tuple[int, ...]:
    p = m.pruned
    c = _apply_matrix(p.to_pruned.matrix, v)
    return tuple(c[i] % row[i] for i, row in enumerate(p.module.relations.rows))


def _elements(m: FgModule) -> list[tuple[int, ...]]:
    """All elements of a finite module, as coordinate vectors on its generators."""
    p = m.pruned
    if p.module.rank:
        raise PreconditionError("brute force needs finite groups")
    orders = [r[i] for i, r in enumerate(p.module.relations.rows)]
    back = p.from_pruned.matrix
    out = []
    for coords in itertools.product(*(range(d) for d in orders)):
        out.append(_apply_matrix(back, coords))
    return out


def _apply_matrix(mat: IntMatrix, v) -> tuple[int, ...]:
    return tuple(sum(a * b for a, b in zip(row, v)) for row in mat.rows)


def _apply(f: Morphism, v: tuple[int, ...]) -> tuple[int, ...]:
    return _apply_matrix(f.matrix, v)


def _order(m: FgModule, v: tuple[int, ...]) -> int:
    p = m.pruned
    c = _apply_matrix(p.to_pruned.matrix, v)
    o = 1
    for i, row in enumerate(p.module.relations.rows):
        o = lcm(o, row[i] // gcd(row[i], c[i]))
    return o


def order_histogram(m: FgModule) -> dict[int, int]:
    counts: dict[int, int] = {}
    for v in _elements(m):
        o = _order(m, v)
        counts[o] = counts.get(o, 0) + 1
    return counts


# -- Roos and coRoos complexes ---------------------------------------------------------------

@dataclass(frozen=True)
class RoosComplex:
    """Value at each index of the (co)Roos complex, plus the augmentation at the maximum.

    ``at[i]`` is a complex in degrees ``-n .. 0`` (Roos) or ``0 .. n`` (coRoos).
    ``augmentation`` is ``X(max) -> R(X)(max)`` for Roos and
    ``cR(X)(max) -> X(max)`` for coRoos.
    """

    at: dict
    augmentation: ChainMap
    chains: dict
    kind: str = "roos"

    @property
    def limit(self) -> Complex:
        """The (co)limit over the shape, i.e. the value at the maximum."""
        return self.augmentation.target if self.kind == "roos" else self.augmentation.source


def _chain_terms(x, i):
    p = x.shape
    out = []
    n = 0
    while True:
        cs = p.chains(n, below=i)
        if not cs:
            break
        out.append(cs)
        n += 1
    return out


def _roos_at(x: ProObject, i) -> tuple[Complex, list]:
    terms = _chain_terms(x, i)
    objs, diffs = {}, {}
    for n, cs in enumerate(terms):
        objs[-n] = direct_sum(*(x.obj(c[0]) for c in cs))
    for n in range(len(terms) - 1):
        src_chains, tgt_chains = terms[n], terms[n + 1]
        src_off = _offsets([x.obj(c[0]) for c in src_chains])
        tgt_off = _offsets([x.obj(c[0]) for c in tgt_chains])
        pos = {c: k for k, c in enumerate(src_chains)}
        rows = [[0] * objs[-n].generator_count for _ in range(objs[-n - 1].generator_count)]
        for ti, c in enumerate(tgt_chains):
            g0 = x.obj(c[0]).generator_count
            for j in range(len(c)):
                face = c[:j] + c[j + 1:]
                sign = -1 if j % 2 else 1
                si = pos[face]
                if j == 0:
                    block = x.transition(c[0], c[1]).matrix   # X(c1) -> X(c0)
                else:
                    block = IntMatrix.identity(g0)
                for r in range(block.nrows):
                    for cc in range(block.ncols):
                        rows[tgt_off[ti] + r][src_off[si] + cc] += sign * block.rows[r][cc]
        diffs[-n] = Morphism(objs[-n], objs[-n - 1], IntMatrix.of(rows, objs[-n].generator_count))
    return Complex.build(objs, diffs, validate=False), terms


def _offsets(mods) -> list[int]:
    out = [0]
    for m in mods:
        out.append(out[-1] + m.generator_count)
    return out


def roos(x: ProObject) -> RoosComplex:
    """``R^n(X)(i) = ∏ X(i_0)`` over strict chains ``i_0 < ... < i_n <= i``, in degree ``-n``."""
    if x.is_tower:
        raise PreconditionError("Roos complexes are built over finite filtered shapes")
    at, chains = {}, {}
    for i in x.shape.elements:
        at[i], chains[i] = _roos_at(x, i)
    top = x.shape.maximum()
    r = at[top]
    src = Complex.concentrated(x.obj(top), 0)
    cols = [x.transition(c[0], top).matrix for c in chains[top][0]]
    aug = Morphism(x.obj(top), r.obj(0), IntMatrix.vstack(*cols))
    return RoosComplex(at, ChainMap.build(src, r, {0: aug}, validate=False), chains, "roos")


def _coroos_at(x: IndObject, i) -> tuple[Complex, list]:
    terms = _chain_terms(x, i)
    objs, diffs = {}, {}
    for n, cs in enumerate(terms):
        objs[n] = direct_sum(*(x.obj(c[0]) for c in cs))
    for n in range(1, len(terms)):
        src_chains, tgt_chains = terms[n], terms[n - 1]
        src_off = _offsets([x.obj(c[0]) for c in src_chains])
        tgt_off = _offsets([x.obj(c[0]) for c in tgt_chains])
        pos = {c: k for k, c in enumerate(tgt_chains)}
        rows = [[0] * objs[n].generator_count for _ in range(objs[n - 1].generator_count)]
        for si, c in enumerate(src_chains):
            g0 = x.obj(c[0]).generator_count
            for j in range(len(c)):
                face = c[:j] + c[j + 1:]
                sign = -1 if j % 2 else 1
                ti = pos[face]
                block = x.transition(c[0], c[1]).matrix if j == 0 else IntMatrix.identity(g0)
                for r in range(block.nrows):
                    for cc in range(block.ncols):
                        rows[tgt_off[ti] + r][src_off[si] + cc] += sign * block.rows[r][cc]
        diffs[n] = Morphism(objs[n], objs[n - 1], IntMatrix.of(rows, objs[n].generator_count))
    return Complex.build(objs, diffs, validate=False), terms


def coroos(x: IndObject) -> RoosComplex:
    """``cR_n(X)(i) = ⊕ X(i_0)`` over strict chains ``i_0 < ... < i_n <= i``, in degree ``n``."""
    if x.is_tower:
        raise PreconditionError("coRoos complexes are built over finite filtered shapes")
    at, chains = {}, {}
    for i in x.shape.elements:
        at[i], chains[i] = _coroos_at(x, i)
    top = x.shape.maximum()
    r = at[top]
    tgt = Complex.concentrated(x.obj(top), 0)
    cols = [x.transition(c[0], top).matrix for c in chains[top][0]]
    aug = Morphism(r.obj(0), x.obj(top), IntMatrix.hstack(*cols))
    return RoosComplex(at, ChainMap.build(r, tgt, {0: aug}, validate=False), chains, "coroos")


def is_roos_acyclic(x: ProObject) -> bool:
    """Whether ``lim X -> lim R(X)`` is a quasi-isomorphism."""
    return is_quasi_iso(roos(x).augmentation)


# -- derived functors -----------------------------------------------------------------

def apply_functor(f: Functor, x: Complex) -> Complex:
    objs = {n: f.obj(x.obj(n)) for n in x.degrees}
    diffs = {n: f.mor(x.d(n)) for n in x.degrees[1:]}
    return Complex.build(objs, diffs, validate=False)


def _check_adapted(f: Functor, q: Complex) -> None:
    for n in q.degrees:
        if not f.adapted(q.obj(n)):
            raise NotAdapted(f"{f.name}: term {q.obj(n)} in degree {n} lies outside the adapted class")
    for n in q.degrees:
        # 0 -> Z_n -> Q_n -> B_{n-1} -> 0 lives in the adapted class; its image must stay exact
        z, zi = kernel(q.d(n))
        b, core, _ = image(q.d(n))
        s = ShortSeq(zi, core)
        if not all(f.adapted(m) for m in (z, b)):
            continue
        fs = ShortSeq(f.mor(s.left), f.mor(s.right))
        if not is_exact_pair(fs, ExactStructure.ABELIAN):
            raise NotAdapted(f"{f.name} does not keep the cycle sequence in degree {n} exact")


def left_derive(f: Functor, x: Complex, q: DeformationFunctor = FREE_COVER) -> HomologyReport:
    """Homology of ``F(Q_+ x)``."""
    res = resolve(x, q)
    _check_adapted(f, res.complex)
    return homology(apply_functor(f, res.complex))


def tor_oracle(m: FgModule, k: int) -> dict[int, tuple[int, ...]]:
    """Closed-form ``L(- ⊗ Z/k)(m)`` from invariant factors."""
    h0, h1 = [], []
    for d in m.invariants:
        if d == 0:
            h0.append(k)
        else:
            h0.append(gcd(d, k))
            h1.append(gcd(d, k))
    out = {0: FgModule.from_invariants(h0).invariants, 1: FgModule.from_invariants(h1).invariants}
    return {n: v for n, v in out.items() if v}


def derive_colim(f: Functor, x: IndObject) -> HomologyReport:
    """Homology of the colimit of the coRoos resolution of ``F∘X`` (its value at the maximum)."""
    y = x.map(f.obj, f.mor)
    return homology(coroos(y).augmentation.source)


@dataclass(frozen=True)
class TwoTermResult:
    ok: bool
    homology: HomologyReport
    resolution_exact: bool
    matches_colimit: bool

    def lines(self) -> list[str]:
        return self.homology.lines() + [
            f"resolution exact: {'yes' if self.resolution_exact else 'no'}",
            f"H_0 equals colimit value: {'yes' if self.matches_colimit else 'no'}",
            "verdict: " + ("pass" if self.ok else "FAIL"),
        ]


def two_term_check(f: Functor, x: IndObject, resolution: IndResolution | None = None) -> TwoTermResult:
    """``[F K(I) -> F Xbar(I)]`` in degrees 1, 0 through the Ind resolution."""
    r = resolution or ind_resolution(x)
    checks = check_ind_resolution(r)
    exact = checks["levelwise_exact"] and checks["natural"]
    top = r.cover.shape.maximum()
    mono = r.mono[top]
    cx = Complex.build({1: f.obj(mono.source), 0: f.obj(mono.target)}, {1: f.mor(mono)}, validate=False)
    h = homology(cx)
    concentrated = all(n in (0, 1) for n in h.nonzero())
    target = f.obj(x.obj(x.shape.maximum())).invariants
    matches = h[0] == target
    return TwoTermResult(exact and concentrated and matches, h, exact, matches)


# -- lim transfer ---------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexTower:
    """``complexes[n]`` with ``transitions[n]: complexes[n+1] -> complexes[n]``, stationary after the last."""

    complexes: tuple[Complex, ...]
    transitions: tuple[ChainMap, ...]

    def __post_init__(self):
        if len(self.transitions) != len(self.complexes) - 1:
            raise PreconditionError("a tower of k+1 complexes needs k transitions")

    @property
    def k(self) -> int:
        return len(self.complexes) - 1

    def limit(self) -> Complex:
        return self.complexes[-1]

    def projection(self, n: int) -> ChainMap:
        out = ChainMap.identity(self.limit())
        for m in range(self.k - 1, n - 1, -1):
            out = self.transitions[m] @ out
        return out


def lim_transfer_check(kt: ComplexTower, lt: ComplexTower, f: ChainMap, psi: list[ChainMap]) -> bool:
    """With levelwise quasi-isomorphisms ``psi`` compatible with the transitions and with ``f``,
    report whether ``f: lim K -> lim L`` is a quasi-isomorphism."""
    if kt.k != lt.k or len(psi) != kt.k + 1:
        raise HypothesisFailed("towers and comparison maps have different lengths")
    for n, p in enumerate(psi):
        if p.source != kt.complexes[n] or p.target != lt.complexes[n]:
            raise HypothesisFailed(f"comparison map at level {n} has the wrong ends")
        if not p.commutes():
            raise HypothesisFailed(f"comparison map at level {n} is not a chain map")
        if not is_quasi_iso(p):
            raise HypothesisFailed(f"comparison map at level {n} is not a quasi-isomorphism")
    for n in range(kt.k):
        lhs = lt.transitions[n] @ psi[n + 1]
        rhs = psi[n] @ kt.transitions[n]
        if not lhs.equals(rhs):
            raise HypothesisFailed(f"square between levels {n + 1} and {n} does not commute")
    for n in range(kt.k + 1):
        if not (psi[n] @ kt.projection(n)).equals(lt.projection(n) @ f):
            raise HypothesisFailed(f"limit square at level {n} does not commute")
    return is_quasi_iso(f)
