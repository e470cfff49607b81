"""Finitely supported, homologically graded chain complexes of f.g. abelian groups."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import (
    ExactStructure,
    FgModule,
    Morphism,
    ShortSeq,
    cokernel,
    direct_sum,
    direct_sum_maps,
    factor_through_mono,
    find_retraction,
    is_exact_pair,
    kernel,
    describe_invariants,
)
from .errors import ChainComplexError, PreconditionError, StructureMismatch
from .linalg import IntMatrix

ZERO = FgModule.zero()


@dataclass(frozen=True)
class Complex:
    """``objects[k]`` sits in degree ``lo + k``; ``diffs[k]`` is ``d_{lo+k+1}``.

    Use :meth:`build` to construct with validation.
    """

    lo: int
    objects: tuple[FgModule, ...]
    diffs: tuple[Morphism, ...]

    @property
    def hi(self) -> int:
        return self.lo + len(self.objects) - 1

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def is_empty(self) -> bool:
        return not self.objects

    def obj(self, n: int) -> FgModule:
        if self.lo <= n <= self.hi:
            return self.objects[n - self.lo]
        return ZERO

    def d(self, n: int) -> Morphism:
        """``d_n: X_n -> X_{n-1}``."""
        if self.lo < n <= self.hi:
            return self.diffs[n - self.lo - 1]
        return Morphism.zero(self.obj(n), self.obj(n - 1))

    @classmethod
    def zero(cls) -> "Complex":
        return cls(0, (), ())

    @classmethod
    def concentrated(cls, m: FgModule, degree: int = 0) -> "Complex":
        return cls(degree, (m,), ())

    @classmethod
    def build(cls, objects: Mapping[int, FgModule],
              differentials: Mapping[int, Morphism | Iterable[Iterable[int]] | IntMatrix] | None = None,
              validate: bool = True) -> "Complex":
        """Build from ``{degree: module}`` and ``{degree n: d_n}``.

        Differentials may be given as morphisms or raw matrices; missing ones are zero.
        """
        differentials = dict(differentials or {})
        if not objects:
            if any(not _as_matrix(v).is_zero() for v in differentials.values()):
                raise ChainComplexError("differentials given for an empty complex")
            return cls.zero()
        lo, hi = min(objects), max(objects)
        for n in differentials:
            if not lo < n <= hi:
                if n in (lo, hi + 1) and _as_matrix(differentials[n]).is_zero():
                    continue
                raise ChainComplexError(f"differential d_{n} outside support [{lo}, {hi}]")
        objs = tuple(objects.get(n, ZERO) for n in range(lo, hi + 1))
        diffs = []
        for n in range(lo + 1, hi + 1):
            src, tgt = objs[n - lo], objs[n - 1 - lo]
            raw = differentials.get(n)
            if raw is None:
                diffs.append(Morphism.zero(src, tgt))
                continue
            if isinstance(raw, Morphism):
                if raw.source != src or raw.target != tgt:
                    raise ChainComplexError(f"d_{n} has wrong source or target")
                diffs.append(raw)
            else:
                try:
                    diffs.append(Morphism(src, tgt, _as_matrix(raw, src.generator_count)))
                except ValueError as e:
                    raise ChainComplexError(f"d_{n}: {e}") from None
        x = cls(lo, objs, tuple(diffs))
        if validate:
            x.check()
        return x

    def check(self) -> None:
        for n in range(self.lo + 1, self.hi + 1):
            if not self.d(n).is_well_defined():
                raise ChainComplexError(f"d_{n} does not respect relations")
            if n - 1 > self.lo and not (self.d(n - 1) @ self.d(n)).is_zero():
                raise ChainComplexError(f"d_{n - 1} ∘ d_{n} != 0")

    def is_free(self) -> bool:
        return all(m.is_free() for m in self.objects)

    def restrict(self, a: int, b: int) -> "Complex":
        """Brutal truncation keeping degrees ``a..b``."""
        a, b = max(a, self.lo), min(b, self.hi)
        if a > b:
            return Complex.zero()
        return Complex(a, self.objects[a - self.lo:b - self.lo + 1], self.diffs[a - self.lo:b - self.lo])

    def __str__(self) -> str:
        if self.is_empty():
            return "0"
        return "  ".join(f"[{n}] {self.obj(n)}" for n in reversed(self.degrees))


def _as_matrix(raw, ncols: int | None = None) -> IntMatrix:
    if isinstance(raw, IntMatrix):
        return raw
    if isinstance(raw, Morphism):
        return raw.matrix
    return IntMatrix.of(raw, ncols)


def _span(*xs: Complex) -> range:
    live = [x for x in xs if not x.is_empty()]
    if not live:
        return range(0)
    return range(min(x.lo for x in live), max(x.hi for x in live) + 1)


@dataclass(frozen=True)
class ChainMap:
    """Components ``comps[k]`` in degree ``lo + k``; anything outside is zero."""

    source: Complex
    target: Complex
    lo: int
    comps: tuple[Morphism, ...]

    def comp(self, n: int) -> Morphism:
        if self.lo <= n < self.lo + len(self.comps):
            return self.comps[n - self.lo]
        return Morphism.zero(self.source.obj(n), self.target.obj(n))

    @classmethod
    def build(cls, source: Complex, target: Complex,
              components: Mapping[int, Morphism | Iterable[Iterable[int]] | IntMatrix],
              validate: bool = True) -> "ChainMap":
        span = _span(source, target)
        comps = []
        for n in span:
            raw = components.get(n)
            s, t = source.obj(n), target.obj(n)
            if raw is None:
                comps.append(Morphism.zero(s, t))
            elif isinstance(raw, Morphism):
                if raw.source != s or raw.target != t:
                    raise ChainComplexError(f"component {n} has wrong source or target")
                comps.append(raw)
            else:
                try:
                    comps.append(Morphism(s, t, _as_matrix(raw, s.generator_count)))
                except ValueError as e:
                    raise ChainComplexError(f"component {n}: {e}") from None
        for n, raw in components.items():
            if n not in span and not _as_matrix(raw).is_zero():
                raise ChainComplexError(f"component {n} outside both supports")
        f = cls(source, target, span.start, tuple(comps))
        if validate:
            f.check()
        return f

    @classmethod
    def identity(cls, x: Complex) -> "ChainMap":
        return cls(x, x, x.lo, tuple(Morphism.identity(m) for m in x.objects))

    @classmethod
    def zero(cls, x: Complex, y: Complex) -> "ChainMap":
        span = _span(x, y)
        return cls(x, y, span.start, tuple(Morphism.zero(x.obj(n), y.obj(n)) for n in span))

    @property
    def degrees(self) -> range:
        return _span(self.source, self.target)

    def check(self) -> None:
        for n in self.degrees:
            if not self.comp(n).is_well_defined():
                raise ChainComplexError(f"component {n} does not respect relations")
        for n in range(self.degrees.start, self.degrees.stop + 1):
            lhs = self.target.d(n) @ self.comp(n)
            rhs = self.comp(n - 1) @ self.source.d(n)
            if not lhs.equals(rhs):
                raise ChainComplexError(f"chain map does not commute with d_{n}")

    def commutes(self) -> bool:
        try:
            self.check()
        except ChainComplexError:
            return False
        return True

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        if other.target != self.source:
            raise PreconditionError("chain maps not composable")
        span = _span(other.source, self.target)
        return ChainMap(other.source, self.target, span.start,
                        tuple(self.comp(n) @ other.comp(n) for n in span))

    def __add__(self, other: "ChainMap") -> "ChainMap":
        span = self.degrees
        return ChainMap(self.source, self.target, span.start, tuple(self.comp(n) + other.comp(n) for n in span))

    def __neg__(self) -> "ChainMap":
        return ChainMap(self.source, self.target, self.lo, tuple(-c for c in self.comps))

    def scale(self, c: int) -> "ChainMap":
        return ChainMap(self.source, self.target, self.lo, tuple(m.scale(c) for m in self.comps))

    def equals(self, other: "ChainMap") -> bool:
        return all(self.comp(n).equals(other.comp(n)) for n in _span(self.source, self.target, other.source))


# -- constructions ------------------------------------------------------------------

def shift(x: Complex, k: int) -> Complex:
    """``X[k]_n = X_{n+k}`` with differential ``(-1)^k d``."""
    if x.is_empty():
        return x
    sign = -1 if k % 2 else 1
    return Complex(x.lo - k, x.objects, tuple(d.scale(sign) for d in x.diffs))


def shift_map(f: ChainMap, k: int) -> ChainMap:
    return ChainMap(shift(f.source, k), shift(f.target, k), f.lo - k, f.comps)


def direct_sum_complexes(*xs: Complex) -> Complex:
    span = _span(*xs)
    if not span:
        return Complex.zero()
    objs = {n: direct_sum(*(x.obj(n) for x in xs)) for n in span}
    diffs = {n: direct_sum_maps(*(x.d(n) for x in xs)) for n in span[1:]}
    return Complex.build(objs, diffs, validate=False)


def cone(f: ChainMap) -> Complex:
    """``cone(f)_n = X_{n-1} + Y_n`` with ``d(x, y) = (-d x, d y - f x)``."""
    x, y = f.source, f.target
    span = _span(shift(x, -1), y)
    if not span:
        return Complex.zero()
    objs = {n: direct_sum(x.obj(n - 1), y.obj(n)) for n in span}
    diffs = {}
    for n in span[1:]:
        top = IntMatrix.hstack((-x.d(n - 1)).matrix, IntMatrix.zeros(x.obj(n - 2).generator_count,
                                                                     y.obj(n).generator_count))
        bot = IntMatrix.hstack((-f.comp(n - 1)).matrix, y.d(n).matrix)
        diffs[n] = Morphism(objs[n], objs[n - 1], IntMatrix.vstack(top, bot))
    return Complex.build(objs, diffs, validate=False)


def cone_inclusion(f: ChainMap) -> ChainMap:
    """``Y -> cone(f)``, ``y -> (0, y)``."""
    c = cone(f)
    comps = {}
    for n in c.degrees:
        a = f.source.obj(n - 1).generator_count
        b = f.target.obj(n).generator_count
        comps[n] = Morphism(f.target.obj(n), c.obj(n),
                            IntMatrix.vstack(IntMatrix.zeros(a, b), IntMatrix.identity(b)))
    return ChainMap.build(f.target, c, comps, validate=False)


# -- homology --------------------------------------------------------------------------

@dataclass(frozen=True)
class HomologyData:
    """``H = Z / B`` with ``Z`` the cycles, ``incl: Z -> X_n`` and ``proj: Z -> H``."""

    homology: FgModule
    cycles: FgModule
    incl: Morphism
    proj: Morphism


def homology_data(x: Complex, n: int) -> HomologyData:
    z, incl = kernel(x.d(n))
    boundary = factor_through_mono(x.d(n + 1), incl)
    h, proj = cokernel(boundary)
    return HomologyData(h, z, incl, proj)


@dataclass(frozen=True)
class HomologyReport:
    """Invariant factors of ``H_n`` for every degree ``n`` of the support."""

    groups: tuple[tuple[int, tuple[int, ...]], ...]

    def __getitem__(self, n: int) -> tuple[int, ...]:
        return dict(self.groups).get(n, ())

    @property
    def degrees(self) -> list[int]:
        return [n for n, _ in self.groups]

    def nonzero(self) -> dict[int, tuple[int, ...]]:
        return {n: inv for n, inv in self.groups if inv}

    def is_zero(self) -> bool:
        return not self.nonzero()

    def iso(self, other: "HomologyReport") -> bool:
        return self.nonzero() == other.nonzero()

    def lines(self, style: str = "factors") -> list[str]:
        out = []
        for n, inv in sorted(self.groups, reverse=True):
            shown = describe_invariants(inv) if style == "groups" else "[" + ", ".join(map(str, inv)) + "]"
            out.append(f"degree {n}: {shown}")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines()) if self.groups else "(empty)"


def _require_tf_complex(x: Complex):
    for m in x.objects:
        if not m.is_torsion_free():
            raise StructureMismatch(f"PureTf structure applied to a complex with torsion term {m}")


def homology(x: Complex, structure: ExactStructure | str = ExactStructure.ABELIAN) -> HomologyReport:
    """Homology in the ambient abelian category (PureTf complexes are included first)."""
    if ExactStructure.parse(structure) is ExactStructure.PURE_TF:
        _require_tf_complex(x)
    return HomologyReport(tuple((n, homology_data(x, n).homology.invariants) for n in x.degrees))


def is_acyclic(x: Complex, structure: ExactStructure | str = ExactStructure.ABELIAN) -> bool:
    """Acyclicity relative to an exact structure.

    Split: contractible (every short sequence of cycles splits).  PureTf: every
    ``0 -> im d_{n+1} -> X_n -> im d_n -> 0`` is an admissible pair.
    """
    q = ExactStructure.parse(structure)
    if q is ExactStructure.PURE_TF:
        _require_tf_complex(x)
        return all(_pure_exact_at(x, n) for n in x.degrees)
    if not all(homology_data(x, n).homology.is_zero() for n in x.degrees):
        return False
    if q is ExactStructure.SPLIT:
        return all(find_retraction(homology_data(x, n).incl) is not None for n in x.degrees)
    return True


def _pure_exact_at(x: Complex, n: int) -> bool:
    from .core import image
    _, _, b_in = image(x.d(n + 1))
    im_out, core_out, _ = image(x.d(n))
    s = ShortSeq(b_in, core_out)
    if not (s.right @ s.left).is_zero():
        return False
    return is_exact_pair(s, ExactStructure.PURE_TF)


def is_quasi_iso(f: ChainMap, structure: ExactStructure | str = ExactStructure.ABELIAN) -> bool:
    """Acyclic cone (in the Split case: contractible cone, i.e. homotopy equivalence)."""
    return is_acyclic(cone(f), structure)


def induced_map(f: ChainMap, n: int) -> Morphism:
    """``H_n(f)``."""
    hx, hy = homology_data(f.source, n), homology_data(f.target, n)
    on_cycles = factor_through_mono(f.comp(n) @ hx.incl, hy.incl)
    return Morphism(hx.homology, hy.homology, on_cycles.matrix)


def is_quasi_iso_by_homology(f: ChainMap) -> bool:
    """Independent route: every ``H_n(f)`` is an isomorphism."""
    return all(induced_map(f, n).is_iso() for n in f.degrees)


# -- truncations -------------------------------------------------------------------------

def truncate_left(x: Complex, n: int) -> Complex:
    """``τ^L_{≥n}``: zero below ``n``, ``ker d_n`` in degree ``n``."""
    return _left_data(x, n)[0]


def _left_data(x: Complex, n: int) -> tuple[Complex, Morphism | None]:
    if x.is_empty() or n > x.hi:
        return Complex.zero(), None
    if n <= x.lo:
        return x, None
    k, incl = kernel(x.d(n))
    objs = {n: k}
    diffs = {}
    for m in range(n + 1, x.hi + 1):
        objs[m] = x.obj(m)
        diffs[m] = x.d(m)
    if n + 1 <= x.hi:
        diffs[n + 1] = factor_through_mono(x.d(n + 1), incl)
    return Complex.build(objs, diffs, validate=False), incl


def truncation_inclusion(x: Complex, n: int) -> ChainMap:
    """The canonical ``τ^L_{≥n} X -> X``."""
    t, incl = _left_data(x, n)
    comps = {m: Morphism.identity(t.obj(m)) for m in t.degrees if m > n or incl is None}
    if incl is not None:
        comps[n] = incl
    return ChainMap.build(t, x, comps, validate=False)


def truncate_left_map(f: ChainMap, n: int) -> ChainMap:
    """Functorially induced ``τ^L_{≥n} f`` (restriction to kernels in degree ``n``)."""
    tx, ix = _left_data(f.source, n)
    ty, iy = _left_data(f.target, n)
    comps = {}
    for m in _span(tx, ty):
        if m < n or m not in tx.degrees or m not in ty.degrees:
            continue
        c = f.comp(m)
        if m == n:
            if ix is not None:
                c = c @ ix
            if iy is not None:
                c = factor_through_mono(c, iy)
        comps[m] = c
    return ChainMap.build(tx, ty, comps, validate=False)


def truncate_right(x: Complex, n: int) -> Complex:
    """``τ^R_{≤n}``: zero above ``n``, ``coker d_{n+1}`` in degree ``n``."""
    if x.is_empty() or n < x.lo:
        return Complex.zero()
    if n >= x.hi:
        return x
    c, _ = cokernel(x.d(n + 1))
    objs = {m: x.obj(m) for m in range(x.lo, n)}
    objs[n] = c
    diffs = {m: x.d(m) for m in range(x.lo + 1, n)}
    if n > x.lo:
        diffs[n] = Morphism(c, x.obj(n - 1), x.d(n).matrix)
    return Complex.build(objs, diffs, validate=False)


def truncation_projection(x: Complex, n: int) -> ChainMap:
    """The canonical ``X -> τ^R_{≤n} X``."""
    t = truncate_right(x, n)
    comps = {m: Morphism(x.obj(m), t.obj(m), IntMatrix.identity(x.obj(m).generator_count))
             for m in t.degrees}
    return ChainMap.build(x, t, comps, validate=False)


def truncate_right_map(f: ChainMap, n: int) -> ChainMap:
    tx, ty = truncate_right(f.source, n), truncate_right(f.target, n)
    comps = {m: Morphism(tx.obj(m), ty.obj(m), f.comp(m).matrix) for m in _span(tx, ty)}
    return ChainMap.build(tx, ty, comps, validate=False)


def is_degreewise_split_exact(left: ChainMap, right: ChainMap) -> bool:
    """Whether ``0 -> A -> B -> C -> 0`` splits in every degree."""
    if left.target != right.source:
        raise PreconditionError("chain maps do not chain")
    for n in _span(left.source, left.target, right.target):
        if not is_exact_pair(ShortSeq(left.comp(n), right.comp(n)), ExactStructure.SPLIT):
            return False
    return True
