"""Deformation functors, their lift to bounded-below complexes, truncation systems
and the staged very-special resolution of a complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .chain import (
    ChainMap,
    Complex,
    _span,
    cone,
    is_quasi_iso,
    shift,
    truncate_left,
    truncate_left_map,
    truncation_inclusion,
)
from .core import (
    FgModule,
    Morphism,
    factor_through_mono,
    find_retraction,
    kernel,
    lift_through_epi,
)
from .errors import PreconditionError, StageOverflow, WindowUnstable
from .linalg import IntMatrix


# -- deformation functors -------------------------------------------------------------

def free_cover(m: FgModule) -> tuple[FgModule, Morphism]:
    """The free module on the generators of ``m`` and the canonical surjection."""
    f = FgModule.free(m.generator_count)
    return f, Morphism(f, m, IntMatrix.identity(m.generator_count))


def shuffled_cover(m: FgModule) -> tuple[FgModule, Morphism]:
    """Another free cover: generators in reverse order, plus one extra generator
    mapping to the sum of all generators when ``m`` carries relations.

    On modules presented without relations it is an isomorphism, so stepwise
    resolutions built from it still terminate.
    """
    n = m.generator_count
    extra = 1 if m.relations.nrows and n else 0
    rows = [[1 if j == n - 1 - i else 0 for j in range(n)] + [1] * extra for i in range(n)]
    f = FgModule.free(n + extra)
    return f, Morphism(f, m, IntMatrix.of(rows, n + extra))


@dataclass(frozen=True)
class DeformationFunctor:
    """A functorial free cover with a natural admissible epimorphism onto its input."""

    name: str
    cover: Callable[[FgModule], tuple[FgModule, Morphism]]
    in_class: Callable[[FgModule], bool] = field(default=lambda m: m.is_free())
    tag: str = "free"

    def cover_map(self, f: Morphism) -> Morphism:
        """A morphism of covers over ``f`` (the square with the two surjections commutes)."""
        src, e_src = self.cover(f.source)
        _, e_tgt = self.cover(f.target)
        return lift_through_epi(f @ e_src, e_tgt)


FREE_COVER = DeformationFunctor("free", free_cover)
SHUFFLED_COVER = DeformationFunctor("shuffled", shuffled_cover)


@dataclass(frozen=True)
class Resolution:
    """``eta: Q -> X`` degree-wise epi quasi-isomorphism with every ``Q_k`` in the adapted class.

    ``steps[k]`` records the kernel inclusion ``W_k -> X_k + Q_{k-1}`` and the
    cover ``Q_k -> W_k`` used at degree ``k``; maps of complexes are lifted
    through them.
    """

    complex: Complex
    eta: ChainMap
    steps: dict = field(compare=False, hash=False, repr=False)


def resolve(x: Complex, q: DeformationFunctor = FREE_COVER, max_steps: int = 64) -> Resolution:
    """Stepwise cover of a bounded-below complex: ``Q_k`` covers the kernel of
    ``X_k + Q_{k-1} -> X_{k-1} + Q_{k-2}``, ``(x, q) -> (d x - eta q, d q)``."""
    if x.is_empty():
        z = Complex.zero()
        return Resolution(z, ChainMap.zero(z, x), {})
    lo = x.lo
    qs: dict[int, FgModule] = {}
    dq: dict[int, Morphism] = {}
    eta: dict[int, Morphism] = {}
    steps = {}
    k = lo
    zero = FgModule.zero()
    while True:
        if k - lo > max_steps:
            raise PreconditionError("stepwise resolution did not terminate")
        xk, xk1 = x.obj(k), x.obj(k - 1)
        qk1, qk2 = qs.get(k - 1, zero), qs.get(k - 2, zero)
        a, b = xk.generator_count, qk1.generator_count
        src = _sum(xk, qk1)
        tgt = _sum(xk1, qk2)
        eta1 = eta.get(k - 1, Morphism.zero(qk1, xk1))
        d1 = dq.get(k - 1, Morphism.zero(qk1, qk2))
        top = IntMatrix.hstack(x.d(k).matrix, (-eta1).matrix)
        bot = IntMatrix.hstack(IntMatrix.zeros(qk2.generator_count, a), d1.matrix)
        phi = Morphism(src, tgt, IntMatrix.vstack(top, bot))
        w, iw = kernel(phi)
        if k > x.hi and w.is_zero():
            break
        cov, eps = q.cover(w)
        both = (iw @ eps).matrix
        qs[k] = cov
        eta[k] = Morphism(cov, xk, both.select(rows=range(a)))
        if k > lo:
            dq[k] = Morphism(cov, qk1, both.select(rows=range(a, a + b)))
        steps[k] = (iw, eps)
        k += 1
    qc = Complex.build(qs, dq, validate=False)
    return Resolution(qc, ChainMap.build(qc, x, eta, validate=False), steps)


def _sum(a: FgModule, b: FgModule) -> FgModule:
    from .core import direct_sum
    return direct_sum(a, b)


def resolve_map(f: ChainMap, rx: Resolution, ry: Resolution) -> ChainMap:
    """Lift ``f: X -> Y`` to ``h: Q(X) -> Q(Y)`` with ``eta_Y h = f eta_X``."""
    qx, qy = rx.complex, ry.complex
    h: dict[int, Morphism] = {}
    for k in qx.degrees:
        if k not in ry.steps:
            h[k] = Morphism.zero(qx.obj(k), qy.obj(k))
            continue
        iw, eps = ry.steps[k]
        top = (f.comp(k) @ rx.eta.comp(k)).matrix
        prev = h.get(k - 1, Morphism.zero(qx.obj(k - 1), qy.obj(k - 1)))
        bot = (prev @ qx.d(k)).matrix
        into = Morphism(qx.obj(k), iw.target, IntMatrix.vstack(top, bot))
        w = factor_through_mono(into, iw)
        if w is None:
            raise PreconditionError(f"lift of the chain map fails at degree {k}")
        h[k] = lift_through_epi(w, eps)
    return ChainMap.build(qx, qy, h, validate=False)


def lift_deformation(q: DeformationFunctor = FREE_COVER) -> Callable[[Complex], Resolution]:
    """The lift ``Q_+`` of a deformation functor to bounded-below complexes."""
    def qplus(x: Complex) -> Resolution:
        return resolve(x, q)
    qplus.functor = q
    return qplus


# -- truncation systems ------------------------------------------------------------

@dataclass(frozen=True)
class TruncationSystem:
    """``apply(x, n)`` is ``T_n x``; ``psi(x, n): T_n x -> x``;
    ``transition(x, n): T_n x -> T_{n+1} x``; ``apply_map(f, n) = T_n f``."""

    name: str
    flavor: str
    apply: Callable[[Complex, int], Complex]
    psi: Callable[[Complex, int], ChainMap]
    transition: Callable[[Complex, int], ChainMap]
    apply_map: Callable[[ChainMap, int], ChainMap]


def _standard_transition(x: Complex, n: int) -> ChainMap:
    a, b = truncation_inclusion(x, -n), truncation_inclusion(x, -n - 1)
    comps = {k: factor_through_mono(a.comp(k), b.comp(k)) for k in a.source.degrees}
    return ChainMap.build(a.source, b.source, comps, validate=False)


def standard_truncation_system() -> TruncationSystem:
    """``T_n = τ^L_{≥-n}`` with the kernel inclusions."""
    return TruncationSystem(
        name="standard",
        flavor="Standard",
        apply=lambda x, n: truncate_left(x, -n),
        psi=lambda x, n: truncation_inclusion(x, -n),
        transition=_standard_transition,
        apply_map=lambda f, n: truncate_left_map(f, -n),
    )


def induced_truncation_system(base: TruncationSystem, q: DeformationFunctor = FREE_COVER) -> TruncationSystem:
    """``Q_+ ∘ T_n`` with comparison ``psi_n ∘ eta``."""
    def res(x, n):
        return resolve(base.apply(x, n), q)

    def transition(x, n):
        return resolve_map(base.transition(x, n), res(x, n), res(x, n + 1))

    def apply_map(f, n):
        return resolve_map(base.apply_map(f, n), res(f.source, n), res(f.target, n))

    return TruncationSystem(
        name=f"induced({base.name},{q.name})",
        flavor="Induced",
        apply=lambda x, n: res(x, n).complex,
        psi=lambda x, n: base.psi(x, n) @ res(x, n).eta,
        transition=transition,
        apply_map=apply_map,
    )


@dataclass(frozen=True)
class ClauseResult:
    clause: str
    stage: int
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class Report:
    items: tuple[ClauseResult, ...]

    @property
    def ok(self) -> bool:
        return all(i.ok for i in self.items)

    def failures(self) -> list[ClauseResult]:
        return [i for i in self.items if not i.ok]

    def lines(self) -> list[str]:
        out = []
        for i in self.items:
            tag = "pass" if i.ok else "FAIL"
            out.append(f"stage {i.stage} {i.clause}: {tag}" + (f" ({i.detail})" if i.detail else ""))
        out.append("overall: " + ("pass" if self.ok else "FAIL"))
        return out


def verify_truncation_system(t: TruncationSystem, x: Complex, n: int,
                             f: ChainMap | None = None) -> Report:
    """Decide the truncation-system clauses for one complex, level ``n`` and optional quasi-iso ``f``."""
    items = []
    tn, tn1 = t.apply(x, n), t.apply(x, n + 1)
    psi_n, psi_n1 = t.psi(x, n), t.psi(x, n + 1)
    tr = t.transition(x, n)
    items.append(ClauseResult("triangle", n, (psi_n1 @ tr).equals(psi_n)))
    items.append(ClauseResult("concentrated", n, tn.is_empty() or tn.lo >= -n))
    inner = t.apply_map(t.psi(x, n + 1), n)
    items.append(ClauseResult("iterate_quasi_iso", n, is_quasi_iso(inner)))
    epi = all(psi_n.comp(k).is_surjective() for k in _span(tn, x) if k > -n)
    items.append(ClauseResult("psi_epi_above", n, epi))
    if x.is_empty() or x.lo >= -n:
        items.append(ClauseResult("bounded_quasi_iso", n, is_quasi_iso(psi_n)))
    if f is not None:
        ok = not is_quasi_iso(f) or is_quasi_iso(t.apply_map(f, n))
        items.append(ClauseResult("preserves_quasi_iso", n, ok))
    natural = True
    if f is not None:
        lhs = f @ t.psi(f.source, n)
        rhs = t.psi(f.target, n) @ t.apply_map(f, n)
        natural = lhs.equals(rhs)
    items.append(ClauseResult("natural", n, natural))
    return Report(tuple(items))


# -- very-special systems ---------------------------------------------------------------

@dataclass(frozen=True)
class VsSystem:
    target: Complex
    stages: tuple[Complex, ...]
    inclusions: tuple[ChainMap, ...]   # inclusions[n]: P^{n-1} -> P^n
    comparisons: tuple[ChainMap, ...]  # comparisons[n]: P^n -> T_n X
    cokernels: tuple[Complex, ...]
    truncation: TruncationSystem = field(compare=False, repr=False)
    deformation: DeformationFunctor = field(compare=False, repr=False)
    resolutions: tuple = field(default=(), compare=False, repr=False)

    @property
    def top(self) -> int:
        return len(self.stages) - 1


def _pad(m: Morphism, src: FgModule, tgt: FgModule) -> Morphism:
    return Morphism(src, tgt, m.matrix)


def build_vs_system(x: Complex, n_stages: int, q: DeformationFunctor = FREE_COVER,
                    t: TruncationSystem | None = None, max_rank: int = 4096) -> VsSystem:
    """Stages ``P^0 .. P^N`` by the inductive cone construction starting from ``P^{-1} = 0``."""
    if n_stages < 0:
        raise PreconditionError("stage count must be non-negative")
    t = t or standard_truncation_system()
    stages, incls, comps, cokers, ress = [], [], [], [], []
    p = Complex.zero()
    f_prev = None
    for n in range(n_stages + 1):
        y = t.apply(x, n)
        if f_prev is None:
            f = ChainMap.zero(p, y)
        else:
            f = t.transition(x, n - 1) @ f_prev
        s = shift(cone(f), 1)
        res = resolve(s, q)
        qc, g = res.complex, res.eta
        span = _span(shift(qc, -1), p)
        objs, diffs, fn, inc = {}, {}, {}, {}
        for k in span:
            objs[k] = _sum(qc.obj(k - 1), p.obj(k))
        for k in span:
            if k - 1 not in span:
                continue
            a, b = qc.obj(k - 1), p.obj(k)
            a1, b1 = qc.obj(k - 2), p.obj(k - 1)
            gp = _split_rows(g.comp(k - 1).matrix, 0, b1.generator_count)
            top = IntMatrix.hstack(-qc.d(k - 1).matrix, IntMatrix.zeros(a1.generator_count, b.generator_count))
            bot = IntMatrix.hstack(gp, p.d(k).matrix)
            diffs[k] = Morphism(objs[k], objs[k - 1], IntMatrix.vstack(top, bot))
        pn = Complex.build(objs, diffs, validate=False)
        if any(m.generator_count > max_rank for m in pn.objects):
            raise StageOverflow(f"stage {n} exceeds rank bound {max_rank}")
        for k in pn.degrees:
            a, b = qc.obj(k - 1), p.obj(k)
            gpp = _split_rows(g.comp(k - 1).matrix, p.obj(k - 1).generator_count,
                              s.obj(k - 1).generator_count)
            fn[k] = Morphism(pn.obj(k), y.obj(k), IntMatrix.hstack(gpp, f.comp(k).matrix))
            inc[k] = Morphism(b, pn.obj(k), IntMatrix.vstack(
                IntMatrix.zeros(a.generator_count, b.generator_count), IntMatrix.identity(b.generator_count)))
        stages.append(pn)
        incls.append(ChainMap.build(p, pn, inc, validate=False))
        comps.append(ChainMap.build(pn, y, fn, validate=False))
        cokers.append(shift(qc, -1))
        ress.append(res)
        p, f_prev = pn, comps[-1]
    return VsSystem(x, tuple(stages), tuple(incls), tuple(comps), tuple(cokers), t, q, tuple(ress))


def _split_rows(m: IntMatrix, start: int, stop: int) -> IntMatrix:
    return m.select(rows=range(start, stop))


def verify_vs_system(v: VsSystem) -> Report:
    """Itemised check of every stage; an empty system passes vacuously."""
    t, q = v.truncation, v.deformation
    items = []
    for n, pn in enumerate(v.stages):
        items.append(ClauseResult("concentrated", n, pn.is_empty() or pn.lo >= -n))
        items.append(ClauseResult("terms_in_class", n, all(q.in_class(m) for m in pn.objects)))
        inc = v.inclusions[n]
        split = all(find_retraction(inc.comp(k)) is not None for k in inc.degrees)
        free_coker = all(q.in_class(m) for m in v.cokernels[n].objects)
        items.append(ClauseResult("split_inclusion", n, split and inc.commutes()))
        items.append(ClauseResult("cokernel_in_class", n, free_coker))
        fn = v.comparisons[n]
        items.append(ClauseResult("comparison_chain_map", n, fn.commutes()))
        items.append(ClauseResult("comparison_quasi_iso", n, is_quasi_iso(fn)))
        items.append(ClauseResult("comparison_epi", n, all(fn.comp(k).is_surjective() for k in fn.degrees)))
        if n < v.top:
            nxt = v.inclusions[n + 1]
            items.append(ClauseResult("stage_stability", n, is_quasi_iso(t.apply_map(nxt, n))))
            lhs = t.transition(v.target, n) @ fn
            rhs = v.comparisons[n + 1] @ nxt
            items.append(ClauseResult("compatible", n, lhs.equals(rhs)))
    return Report(tuple(items))


def vs_colimit_window(v: VsSystem, a: int, b: int) -> tuple[Complex, ChainMap]:
    """Degrees ``a-1 .. b+1`` of the top stage and of its comparison map.

    Homology of the fragment in degrees ``a .. b`` agrees with the target's.
    """
    if a > b:
        z = Complex.zero()
        return z, ChainMap.zero(z, z)
    n = v.top
    if n < 0 or a <= -n + 1:
        raise WindowUnstable(f"window [{a}, {b}] reaches unstabilised degrees (need > {-n + 1})")
    frag = v.stages[n].restrict(a - 1, b + 1)
    tgt = v.comparisons[n].target.restrict(a - 1, b + 1)
    fn = v.comparisons[n]
    comps = {k: Morphism(frag.obj(k), tgt.obj(k), fn.comp(k).matrix)
             for k in _span(frag, tgt) if k in frag.degrees and k in tgt.degrees}
    return frag, ChainMap.build(frag, tgt, comps, validate=False)
