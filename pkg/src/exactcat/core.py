"""Finitely generated abelian groups by presentation, their morphisms, and the
three exact structures (abelian, split, pure/torsion-free).

A module is ``Z^n / L`` where ``L`` is the row lattice of the relation matrix.
A morphism ``M -> N`` is an integer matrix whose column ``j`` is the image of
generator ``j`` of ``M`` written in the generators of ``N``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import IllDefinedMorphism, PreconditionError, StructureMismatch
from .linalg import IntMatrix, hermite_basis, right_kernel, solve


def _in_lattice(relations: IntMatrix, columns: IntMatrix) -> bool:
    """Every column of ``columns`` lies in the row lattice of ``relations``."""
    if columns.ncols == 0:
        return True
    if relations.nrows == 0:
        return columns.is_zero()
    return solve(relations.T, columns) is not None


@dataclass(frozen=True)
class FgModule:
    generator_count: int
    relations: IntMatrix

    def __post_init__(self):
        if self.relations.ncols != self.generator_count:
            raise ValueError(
                f"relation width {self.relations.ncols} != generator_count {self.generator_count}")

    @classmethod
    def zero(cls) -> "FgModule":
        return cls(0, IntMatrix(0, 0, ()))

    @classmethod
    def free(cls, n: int) -> "FgModule":
        return cls(n, IntMatrix(0, n, ()))

    @classmethod
    def presented(cls, generator_count: int, relations: Iterable[Sequence[int]]) -> "FgModule":
        return cls(generator_count, IntMatrix.of(relations, generator_count))

    @classmethod
    def cyclic(cls, order: int) -> "FgModule":
        """``Z/order``; order 0 gives ``Z``."""
        if order == 0:
            return cls.free(1)
        return cls.presented(1, [[order]])

    @classmethod
    def from_invariants(cls, factors: Sequence[int]) -> "FgModule":
        """Diagonal presentation, e.g. ``[2, 6, 0]`` is ``Z/2 + Z/6 + Z``."""
        n = len(factors)
        rows = [[d if i == j else 0 for j in range(n)] for i, d in enumerate(factors) if d != 0]
        return cls.presented(n, rows)

    @cached_property
    def smith(self):
        return self.relations.smith

    @cached_property
    def invariants(self) -> tuple[int, ...]:
        """Invariant factors in divisibility order, units dropped, one ``0`` per free summand."""
        s = self.smith
        return tuple(d for d in s.d if d != 1) + (0,) * (self.generator_count - s.rank)

    @property
    def rank(self) -> int:
        return self.generator_count - self.smith.rank

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.invariants if d)

    def is_zero(self) -> bool:
        return not self.invariants

    def is_torsion_free(self) -> bool:
        return not self.torsion

    # over Z a f.g. group is free iff torsion-free
    is_free = is_torsion_free

    def is_isomorphic(self, other: "FgModule") -> bool:
        return self.invariants == other.invariants

    def order(self) -> int | None:
        """Group order, or ``None`` when infinite."""
        if self.rank:
            return None
        out = 1
        for d in self.invariants:
            out *= d
        return out

    @cached_property
    def pruned(self) -> "Pruning":
        """An isomorphic diagonal presentation with no unit relations."""
        if self.relations.nrows == 0:
            ident = Morphism.identity(self)
            return Pruning(self, ident, ident)
        s = self.smith
        n = self.generator_count
        keep = [i for i in range(n) if i >= s.rank or s.d[i] != 1]
        rows = []
        for k, i in enumerate(keep):
            if i < s.rank:
                rows.append([s.d[i] if c == k else 0 for c in range(len(keep))])
        module = FgModule.presented(len(keep), rows)
        to_p = Morphism(self, module, s.v.T.select(rows=keep))
        from_p = Morphism(module, self, s.v_inv.select(rows=keep).T)
        return Pruning(module, to_p, from_p)

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.torsion]
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        return " + ".join(parts) if parts else "0"


def describe_invariants(factors: Sequence[int]) -> str:
    return str(FgModule.from_invariants(list(factors)))


@dataclass(frozen=True)
class Morphism:
    source: FgModule
    target: FgModule
    matrix: IntMatrix

    def __post_init__(self):
        if self.matrix.shape != (self.target.generator_count, self.source.generator_count):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not fit "
                f"{self.source.generator_count} -> {self.target.generator_count} generators")

    @classmethod
    def identity(cls, m: FgModule) -> "Morphism":
        return cls(m, m, IntMatrix.identity(m.generator_count))

    @classmethod
    def zero(cls, source: FgModule, target: FgModule) -> "Morphism":
        return cls(source, target, IntMatrix.zeros(target.generator_count, source.generator_count))

    def is_well_defined(self) -> bool:
        if self.source.relations.nrows == 0:
            return True
        return _in_lattice(self.target.relations, self.matrix @ self.source.relations.T)

    def __matmul__(self, other: "Morphism") -> "Morphism":
        """Composition: ``(g @ f)(x) = g(f(x))``."""
        if other.target != self.source:
            raise PreconditionError("composition of non-composable morphisms")
        return Morphism(other.source, self.target, self.matrix @ other.matrix)

    def __add__(self, other: "Morphism") -> "Morphism":
        self._same_hom(other)
        return Morphism(self.source, self.target, self.matrix + other.matrix)

    def __sub__(self, other: "Morphism") -> "Morphism":
        self._same_hom(other)
        return Morphism(self.source, self.target, self.matrix - other.matrix)

    def __neg__(self) -> "Morphism":
        return Morphism(self.source, self.target, -self.matrix)

    def scale(self, c: int) -> "Morphism":
        return Morphism(self.source, self.target, self.matrix.scale(c))

    def _same_hom(self, other: "Morphism"):
        if self.source != other.source or self.target != other.target:
            raise PreconditionError("morphisms live in different Hom groups")

    def is_zero(self) -> bool:
        return _in_lattice(self.target.relations, self.matrix)

    def equals(self, other: "Morphism") -> bool:
        """Equality as group homomorphisms (matrices may differ by relations)."""
        return (self - other).is_zero()

    def is_injective(self) -> bool:
        return kernel(self)[0].is_zero()

    def is_surjective(self) -> bool:
        return cokernel(self)[0].is_zero()

    def is_iso(self) -> bool:
        return self.is_injective() and self.is_surjective()


@dataclass(frozen=True)
class Pruning:
    module: FgModule
    to_pruned: Morphism
    from_pruned: Morphism


def morphism(source: FgModule, target: FgModule, matrix: Iterable[Sequence[int]] | IntMatrix) -> Morphism:
    """Validated constructor; raises ``IllDefinedMorphism`` if relations are not respected."""
    if not isinstance(matrix, IntMatrix):
        matrix = IntMatrix.of(matrix, source.generator_count)
    f = Morphism(source, target, matrix)
    if not f.is_well_defined():
        raise IllDefinedMorphism("matrix does not map source relations into target relations")
    return f


# -- biproducts ----------------------------------------------------------------

def direct_sum(*mods: FgModule) -> FgModule:
    if not mods:
        return FgModule.zero()
    if len(mods) == 1:
        return mods[0]
    n = sum(m.generator_count for m in mods)
    rel = IntMatrix.block_diag(*(m.relations for m in mods))
    return FgModule(n, rel)


def direct_sum_maps(*fs: Morphism) -> Morphism:
    return Morphism(direct_sum(*(f.source for f in fs)), direct_sum(*(f.target for f in fs)),
                    IntMatrix.block_diag(*(f.matrix for f in fs)))


def injection(mods: Sequence[FgModule], i: int) -> Morphism:
    total = direct_sum(*mods)
    off = sum(m.generator_count for m in mods[:i])
    n = mods[i].generator_count
    rows = [[1 if r == off + c else 0 for c in range(n)] for r in range(total.generator_count)]
    return Morphism(mods[i], total, IntMatrix.of(rows, n))


def projection(mods: Sequence[FgModule], i: int) -> Morphism:
    total = direct_sum(*mods)
    off = sum(m.generator_count for m in mods[:i])
    n = mods[i].generator_count
    rows = [[1 if c == off + r else 0 for c in range(total.generator_count)] for r in range(n)]
    return Morphism(total, mods[i], IntMatrix.of(rows, total.generator_count))


def copair(*fs: Morphism) -> Morphism:
    """``(f_1, ..., f_k): ⊕ M_i -> N``."""
    target = fs[0].target
    return Morphism(direct_sum(*(f.source for f in fs)), target, IntMatrix.hstack(*(f.matrix for f in fs)))


def pair(*fs: Morphism) -> Morphism:
    """``M -> ⊕ N_i`` with components ``f_i``."""
    source = fs[0].source
    return Morphism(source, direct_sum(*(f.target for f in fs)), IntMatrix.vstack(*(f.matrix for f in fs)))


# -- kernels, cokernels, images -------------------------------------------------

def kernel(f: Morphism) -> tuple[FgModule, Morphism]:
    """Kernel object with its monic inclusion.

    The object comes in pruned presentation, except that a zero map returns its
    source unchanged with the identity.
    """
    m, n = f.source, f.target
    if f.is_zero():
        return m, Morphism.identity(m)
    big = IntMatrix.hstack(f.matrix, -n.relations.T)
    lifts = right_kernel(big).select(rows=range(m.generator_count))
    basis = hermite_basis(lifts.T.rows, m.generator_count)
    k = basis.nrows
    if m.relations.nrows:
        coeffs = solve(basis.T, m.relations.T)
        rel = coeffs.T
    else:
        rel = IntMatrix(0, k, ())
    k0 = FgModule(k, rel)
    incl0 = Morphism(k0, m, basis.T)
    p = k0.pruned
    return p.module, incl0 @ p.from_pruned


def cokernel(f: Morphism) -> tuple[FgModule, Morphism]:
    """The target with the columns of ``f`` appended as relations, and the canonical surjection."""
    n = f.target
    c = FgModule(n.generator_count, IntMatrix.vstack(n.relations, f.matrix.T))
    return c, Morphism(n, c, IntMatrix.identity(n.generator_count))


def image(f: Morphism) -> tuple[FgModule, Morphism, Morphism]:
    """``(Im f, corestriction M -> Im f, inclusion Im f -> N)``."""
    _, proj = cokernel(f)
    im, incl = kernel(proj)
    core = factor_through_mono(f, incl)
    return im, core, incl


def subobject_lattice(mono: Morphism) -> IntMatrix:
    """Canonical basis of the preimage in ``Z^n`` of the subgroup ``im(mono)`` of the target."""
    n = mono.target
    return hermite_basis(mono.matrix.T.rows + n.relations.rows, n.generator_count)


def same_subobject(a: Morphism, b: Morphism) -> bool:
    return a.target == b.target and subobject_lattice(a) == subobject_lattice(b)


def factor_through_mono(h: Morphism, mono: Morphism) -> Morphism | None:
    """The ``g`` with ``mono @ g == h``, or ``None`` when ``im h`` is not inside ``im mono``."""
    n = mono.target
    big = IntMatrix.hstack(mono.matrix, n.relations.T)
    x = solve(big, h.matrix)
    if x is None:
        return None
    return Morphism(h.source, mono.source, x.select(rows=range(mono.source.generator_count)))


def lift_through_epi(h: Morphism, epi: Morphism) -> Morphism | None:
    """Some ``l`` with ``epi @ l == h``; ``None`` if no well-defined lift exists."""
    if h.source.relations.nrows == 0:
        n = epi.target
        x = solve(IntMatrix.hstack(epi.matrix, n.relations.T), h.matrix)
        if x is None:
            return None
        return Morphism(h.source, epi.source, x.select(rows=range(epi.source.generator_count)))
    mat = _solve_hom(h.source, epi.source, epi.matrix, IntMatrix.identity(h.source.generator_count),
                     h.matrix, epi.target.relations)
    return None if mat is None else Morphism(h.source, epi.source, mat)


def _solve_hom(src: FgModule, tgt: FgModule, left: IntMatrix, right: IntMatrix,
               rhs: IntMatrix, rel: IntMatrix) -> IntMatrix | None:
    """Find ``H`` defining a morphism ``src -> tgt`` with ``left @ H @ right - rhs`` in ``rel``'s lattice.

    Linearised with Kronecker products over the unknowns ``vec(H)`` plus slack
    coefficients for both lattice-membership constraints.
    """
    q, p = tgt.generator_count, src.generator_count
    rp, rq = src.relations.nrows, tgt.relations.nrows
    t, s = left.nrows, right.ncols
    rt = rel.nrows
    nh = q * p
    ny1 = rq * rp
    ny2 = rt * s
    ncols = nh + ny1 + ny2
    rows: list[list[int]] = []
    b: list[int] = []
    RP, RQ, L, X, RT = src.relations.rows, tgt.relations.rows, left.rows, right.rows, rel.rows
    # H R_P^T - R_Q^T Y1 = 0
    for k in range(rp):
        for i in range(q):
            row = [0] * ncols
            for j in range(p):
                if RP[k][j]:
                    row[j * q + i] += RP[k][j]
            for l in range(rq):
                if RQ[l][i]:
                    row[nh + k * rq + l] -= RQ[l][i]
            rows.append(row)
            b.append(0)
    # L H X - R_T^T Y2 = C
    for bb in range(s):
        for a in range(t):
            row = [0] * ncols
            for i in range(q):
                if L[a][i]:
                    for j in range(p):
                        if X[j][bb]:
                            row[j * q + i] += L[a][i] * X[j][bb]
            for l in range(rt):
                if RT[l][a]:
                    row[nh + ny1 + bb * rt + l] -= RT[l][a]
            rows.append(row)
            b.append(rhs.rows[a][bb])
    if not rows:
        return IntMatrix.zeros(q, p)
    sol = solve(IntMatrix.of(rows, ncols), IntMatrix.of([[x] for x in b], 1))
    if sol is None:
        return None
    vec = [sol.rows[k][0] for k in range(nh)]
    return IntMatrix.of([[vec[j * q + i] for j in range(p)] for i in range(q)], p)


def _is_selection(a: IntMatrix) -> bool:
    cols = a.T.rows
    return all(sorted(c) == [0] * (len(c) - 1) + [1] for c in cols) and len({c.index(1) for c in cols}) == len(cols)


def find_retraction(f: Morphism) -> Morphism | None:
    """A morphism ``r`` with ``r @ f == id``, searched as an integer lattice solution."""
    m, n = f.source, f.target
    if m.relations.nrows == 0 and n.relations.nrows == 0:
        s = f.matrix.smith
        if s.rank != m.generator_count or any(d != 1 for d in s.d):
            return None
        k = m.generator_count
        sel = IntMatrix.of([[1 if i == j else 0 for j in range(n.generator_count)] for i in range(k)],
                           n.generator_count)
        return Morphism(n, m, s.v @ sel @ s.u)
    if _is_selection(f.matrix):
        # coordinate inclusions usually retract along the transposed selection
        r = Morphism(n, m, f.matrix.T)
        if r.is_well_defined() and (r @ f).equals(Morphism.identity(m)):
            return r
    pm, pn = m.pruned, n.pruned
    fp = pn.to_pruned @ f @ pm.from_pruned
    mat = _solve_hom(pn.module, pm.module, IntMatrix.identity(pm.module.generator_count), fp.matrix,
                     IntMatrix.identity(pm.module.generator_count), pm.module.relations)
    if mat is None:
        return None
    return pm.from_pruned @ Morphism(pn.module, pm.module, mat) @ pn.to_pruned


def find_section(g: Morphism) -> Morphism | None:
    """A morphism ``s`` with ``g @ s == id``."""
    y, z = g.source, g.target
    if z.relations.nrows == 0:
        return lift_through_epi(Morphism.identity(z), g)
    py, pz = y.pruned, z.pruned
    gp = pz.to_pruned @ g @ py.from_pruned
    mat = _solve_hom(pz.module, py.module, gp.matrix, IntMatrix.identity(pz.module.generator_count),
                     IntMatrix.identity(pz.module.generator_count), pz.module.relations)
    if mat is None:
        return None
    return py.from_pruned @ Morphism(pz.module, py.module, mat) @ pz.to_pruned


def tf_reflect(m: FgModule) -> tuple[FgModule, Morphism]:
    """``m`` modulo its torsion subgroup, with the quotient map."""
    s = m.smith
    free_idx = list(range(s.rank, m.generator_count))
    out = FgModule.free(len(free_idx))
    if m.relations.nrows == 0:
        return out, Morphism(m, out, IntMatrix.identity(m.generator_count))
    return out, Morphism(m, out, s.v.T.select(rows=free_idx))


def tf_reflect_map(f: Morphism) -> Morphism:
    """The induced map between torsion-free quotients."""
    src, _ = tf_reflect(f.source)
    tgt, q_t = tf_reflect(f.target)
    s = f.source.smith
    free_idx = list(range(s.rank, f.source.generator_count))
    if f.source.relations.nrows == 0:
        lift = IntMatrix.identity(f.source.generator_count)
    else:
        lift = s.v_inv.select(rows=free_idx).T
    return Morphism(src, tgt, q_t.matrix @ f.matrix @ lift)


# -- exact structures -------------------------------------------------------------

class ExactStructure(enum.Enum):
    ABELIAN = "abelian"
    SPLIT = "split"
    PURE_TF = "puretf"

    @classmethod
    def parse(cls, tag: "str | ExactStructure") -> "ExactStructure":
        if isinstance(tag, ExactStructure):
            return tag
        try:
            return cls(tag.lower())
        except ValueError:
            raise ValueError(f"unknown exact structure {tag!r}") from None


@dataclass(frozen=True)
class ShortSeq:
    """``0 -> A --left--> B --right--> C -> 0``."""

    left: Morphism
    right: Morphism

    def __post_init__(self):
        if self.left.target != self.right.source:
            raise PreconditionError("short sequence maps do not chain")


def _require_tf(q: ExactStructure, *objs: FgModule):
    if q is ExactStructure.PURE_TF:
        for o in objs:
            if not o.is_torsion_free():
                raise StructureMismatch(f"PureTf structure applied to object with torsion ({o})")


def is_admissible_mono(f: Morphism, q: ExactStructure = ExactStructure.ABELIAN) -> bool:
    q = ExactStructure.parse(q)
    _require_tf(q, f.source, f.target)
    if q is ExactStructure.ABELIAN:
        return f.is_injective()
    if q is ExactStructure.SPLIT:
        return find_retraction(f) is not None
    return f.is_injective() and cokernel(f)[0].is_torsion_free()


def is_admissible_epi(g: Morphism, q: ExactStructure = ExactStructure.ABELIAN) -> bool:
    q = ExactStructure.parse(q)
    _require_tf(q, g.source, g.target)
    if q is ExactStructure.SPLIT:
        return find_section(g) is not None
    return g.is_surjective()


def is_exact_pair(s: ShortSeq, q: ExactStructure = ExactStructure.ABELIAN) -> bool:
    q = ExactStructure.parse(q)
    if not (s.right @ s.left).is_zero():
        raise PreconditionError("right ∘ left is not zero")
    _require_tf(q, s.left.source, s.left.target, s.right.target)
    if not (s.left.is_injective() and s.right.is_surjective()):
        return False
    _, k = kernel(s.right)
    if factor_through_mono(k, s.left) is None:
        return False
    if q is ExactStructure.SPLIT:
        return find_section(s.right) is not None
    return True
