"""Ind- and Pro-objects presented by diagrams over finite filtered posets or ω.

A diagram is a *presentation*: predicates such as "essentially monomorphic"
are decided on the given transitions, without searching for isomorphic
re-indexings.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .core import (
    ExactStructure,
    FgModule,
    Morphism,
    ShortSeq,
    copair,
    direct_sum,
    factor_through_mono,
    find_retraction,
    injection,
    is_admissible_mono,
    is_exact_pair,
    kernel,
    tf_reflect_map,
)
from .errors import NotEvaluable, PreconditionError, ValidationError
from .functors import Functor
from .linalg import IntMatrix, hermite_basis, solve, det

Elem = Hashable


# -- shapes ---------------------------------------------------------------------------

class FinitePoset:
    """A finite poset given by elements and a generating set of relations ``a <= b``.

    The order is the reflexive-transitive closure of the given pairs; it must be
    antisymmetric.  ``require_filtered`` additionally demands upper bounds for
    all pairs (equivalently, a maximum).
    """

    def __init__(self, elements: Sequence[Elem], relations: Iterable[tuple[Elem, Elem]] = (),
                 require_filtered: bool = True):
        self.elements = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise ValidationError("poset elements are not distinct")
        idx = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        le = [[i == j for j in range(n)] for i in range(n)]
        for a, b in relations:
            if a not in idx or b not in idx:
                raise ValidationError(f"relation ({a!r}, {b!r}) names an unknown element")
            le[idx[a]][idx[b]] = True
        for k in range(n):
            for i in range(n):
                if le[i][k]:
                    for j in range(n):
                        if le[k][j]:
                            le[i][j] = True
        for i in range(n):
            for j in range(i + 1, n):
                if le[i][j] and le[j][i]:
                    raise ValidationError(
                        f"order is not antisymmetric on {self.elements[i]!r}, {self.elements[j]!r}")
        self._idx = idx
        self._le = le
        if require_filtered and n and self.maximum() is None:
            raise ValidationError("poset is not filtered (no maximum)")

    def le(self, a: Elem, b: Elem) -> bool:
        return self._le[self._idx[a]][self._idx[b]]

    def lt(self, a: Elem, b: Elem) -> bool:
        return a != b and self.le(a, b)

    def maximum(self, subset: Iterable[Elem] | None = None) -> Elem | None:
        s = list(self.elements if subset is None else subset)
        for m in s:
            if all(self.le(x, m) for x in s):
                return m
        return None

    def is_filtered(self) -> bool:
        return bool(self.elements) and self.maximum() is not None

    def pairs(self) -> list[tuple[Elem, Elem]]:
        return [(a, b) for a in self.elements for b in self.elements if self.le(a, b)]

    def covers(self) -> list[tuple[Elem, Elem]]:
        """Hasse diagram edges."""
        out = []
        for a, b in self.pairs():
            if a != b and not any(self.lt(a, c) and self.lt(c, b) for c in self.elements):
                out.append((a, b))
        return out

    def directed_subsets(self) -> list[tuple[Elem, ...]]:
        """Nonempty subsets with a maximum (the directed ones, for a finite poset)."""
        out = []
        for r in range(1, len(self.elements) + 1):
            for sub in itertools.combinations(self.elements, r):
                if self.maximum(sub) is not None:
                    out.append(sub)
        return out

    def chains(self, length: int, below: Elem | None = None) -> list[tuple[Elem, ...]]:
        """Strict chains ``i_0 < ... < i_length`` (with ``i_length <= below`` if given)."""
        elems = [e for e in self.elements if below is None or self.le(e, below)]
        out = [(e,) for e in elems]
        for _ in range(length):
            out = [c + (e,) for c in out for e in elems if self.lt(c[-1], e)]
        return out

    def restrict(self, subset: Sequence[Elem]) -> "FinitePoset":
        sub = [e for e in self.elements if e in set(subset)]
        return FinitePoset(sub, [(a, b) for a in sub for b in sub if self.le(a, b)])

    def __eq__(self, other):
        return isinstance(other, FinitePoset) and self.elements == other.elements and self._le == other._le

    def __hash__(self):
        return hash((self.elements, tuple(map(tuple, self._le))))

    def __repr__(self):
        return f"FinitePoset({list(self.elements)!r}, {self.covers()!r})"


@dataclass(frozen=True)
class Stationary:
    """Transitions beyond index ``k`` are identities."""
    k: int


@dataclass(frozen=True)
class ConstantMap:
    """One object and one endomorphism repeated forever."""


@dataclass(frozen=True)
class OmegaTower:
    tail: Stationary | ConstantMap


# -- diagrams ----------------------------------------------------------------------------

class _Diagram:
    """Shared machinery; ``variance`` is ``"ind"`` (arrows go up the order) or ``"pro"``."""

    variance = "ind"

    def __init__(self, shape: FinitePoset | OmegaTower, objects: Mapping, arrows: Mapping, validate: bool = True):
        self.shape = shape
        self.objects = dict(objects)
        self.arrows = dict(arrows)
        self._cache: dict = {}
        if isinstance(shape, FinitePoset):
            self._init_finite(validate)
        else:
            self._init_tower(validate)

    # finite posets: arrows keyed by (a, b) with a < b
    def _init_finite(self, validate: bool):
        p = self.shape
        for e in p.elements:
            if e not in self.objects:
                raise ValidationError(f"no object for index {e!r}")
        for (a, b), f in self.arrows.items():
            if not p.lt(a, b):
                raise ValidationError(f"arrow ({a!r}, {b!r}) does not follow the order")
            src, tgt = self._ends(a, b)
            if f.source != src or f.target != tgt:
                raise ValidationError(f"arrow ({a!r}, {b!r}) has the wrong source or target")
            if validate and not f.is_well_defined():
                raise ValidationError(f"arrow ({a!r}, {b!r}) does not respect relations")
        if validate:
            for a, b in p.pairs():
                self.transition(a, b)
            for a, b in p.pairs():
                for c in p.elements:
                    if p.lt(a, b) and p.lt(b, c):
                        lhs = self._compose(self.transition(a, b), self.transition(b, c))
                        if not lhs.equals(self.transition(a, c)):
                            raise ValidationError(f"arrows through {a!r} < {b!r} < {c!r} do not commute")

    def _init_tower(self, validate: bool):
        tail = self.shape.tail
        if isinstance(tail, Stationary):
            for n in range(tail.k + 1):
                if n not in self.objects:
                    raise ValidationError(f"no object for index {n}")
            for n in range(tail.k):
                if n not in self.arrows:
                    raise ValidationError(f"no transition for index {n}")
        else:
            if set(self.objects) != {0} or set(self.arrows) != {0}:
                raise ValidationError("constant-map tower needs exactly one object and one endomorphism")
            f = self.arrows[0]
            if f.source != self.objects[0] or f.target != self.objects[0]:
                raise ValidationError("constant-map tower transition is not an endomorphism of its object")
        for n, f in self.arrows.items():
            src, tgt = self._ends(n, n + 1)
            if f.source != src or f.target != tgt:
                raise ValidationError(f"transition {n} has the wrong source or target")
            if validate and not f.is_well_defined():
                raise ValidationError(f"transition {n} does not respect relations")

    def _ends(self, a, b) -> tuple[FgModule, FgModule]:
        if self.variance == "ind":
            return self.obj(a), self.obj(b)
        return self.obj(b), self.obj(a)

    def _compose(self, ab: Morphism, bc: Morphism) -> Morphism:
        """Transition ``a -> c`` from ``a -> b`` and ``b -> c`` in this variance."""
        return bc @ ab if self.variance == "ind" else ab @ bc

    @property
    def is_tower(self) -> bool:
        return isinstance(self.shape, OmegaTower)

    def obj(self, i) -> FgModule:
        if self.is_tower:
            tail = self.shape.tail
            if isinstance(tail, ConstantMap):
                return self.objects[0]
            return self.objects[min(i, tail.k)]
        return self.objects[i]

    def transition(self, a, b) -> Morphism:
        """The arrow attached to ``a <= b`` (``X_a -> X_b`` for ind, ``X_b -> X_a`` for pro)."""
        key = (a, b)
        if key in self._cache:
            return self._cache[key]
        if a == b:
            out = Morphism.identity(self.obj(a))
        elif self.is_tower:
            if not a < b:
                raise PreconditionError(f"{a} is not below {b}")
            out = self._step(a)
            for n in range(a + 1, b):
                out = self._compose(out, self._step(n))
        elif key in self.arrows:
            out = self.arrows[key]
        else:
            out = self._path(a, b)
        self._cache[key] = out
        return out

    def _step(self, n: int) -> Morphism:
        tail = self.shape.tail
        if isinstance(tail, ConstantMap):
            return self.arrows[0]
        if n >= tail.k:
            return Morphism.identity(self.objects[tail.k])
        return self.arrows[n]

    def _path(self, a, b) -> Morphism:
        p = self.shape
        if not p.lt(a, b):
            raise PreconditionError(f"{a!r} is not below {b!r}")
        prev = {a: None}
        todo = deque([a])
        while todo:
            u = todo.popleft()
            for (s, t) in self.arrows:
                if s == u and t not in prev and p.le(t, b):
                    prev[t] = u
                    todo.append(t)
        if b not in prev:
            raise ValidationError(f"no chain of arrows from {a!r} to {b!r}")
        path = [b]
        while path[-1] != a:
            path.append(prev[path[-1]])
        path.reverse()
        out = self.arrows[(path[0], path[1])]
        for u, v in zip(path[1:], path[2:]):
            out = self._compose(out, self.arrows[(u, v)])
        return out

    def generating_transitions(self) -> list[Morphism]:
        if self.is_tower:
            return list(self.arrows.values())
        return [self.transition(a, b) for a, b in self.shape.pairs() if a != b]

    def top(self):
        """Index of the maximum (finite shapes) or the stationary index."""
        if self.is_tower:
            tail = self.shape.tail
            if isinstance(tail, Stationary):
                return tail.k
            raise NotEvaluable("constant-map tower has no terminal index")
        return self.shape.maximum()

    def restrict(self, subset: Sequence[Elem]):
        if self.is_tower:
            raise PreconditionError("restriction is defined for finite shapes")
        sub = self.shape.restrict(subset)
        arrows = {(a, b): self.transition(a, b) for a, b in sub.pairs() if a != b}
        return type(self)(sub, {e: self.obj(e) for e in sub.elements}, arrows, validate=False)

    def map(self, on_obj: Callable[[FgModule], FgModule], on_mor: Callable[[Morphism], Morphism]):
        objects = {k: on_obj(m) for k, m in self.objects.items()}
        arrows = {k: on_mor(f) for k, f in self.arrows.items()}
        return type(self)(self.shape, objects, arrows, validate=False)

    def __repr__(self):
        return f"{type(self).__name__}({self.shape!r}, {len(self.objects)} objects)"


class IndObject(_Diagram):
    variance = "ind"


class ProObject(_Diagram):
    variance = "pro"


def tower(objects: Sequence[FgModule], transitions: Sequence[Morphism], kind: str = "pro") -> _Diagram:
    """Stationary tower after its last listed object."""
    cls = ProObject if kind == "pro" else IndObject
    return cls(OmegaTower(Stationary(len(objects) - 1)), dict(enumerate(objects)), dict(enumerate(transitions)))


def constant_tower(a: FgModule, f: Morphism, kind: str = "pro") -> _Diagram:
    cls = ProObject if kind == "pro" else IndObject
    return cls(OmegaTower(ConstantMap()), {0: a}, {0: f})


# -- membership predicates ----------------------------------------------------------------

def is_essentially_mono(x: _Diagram) -> bool:
    return all(f.is_injective() for f in x.generating_transitions())


def is_essentially_admissible(x: _Diagram, q: ExactStructure | str = ExactStructure.ABELIAN) -> bool:
    return all(is_admissible_mono(f, q) for f in x.generating_transitions())


def weakly_coflasque_check(x: IndObject, q: ExactStructure | str = ExactStructure.ABELIAN) -> bool:
    """Comparison maps from colimits over directed subdiagrams into the full colimit are admissible monos."""
    if x.is_tower:
        if not isinstance(x.shape.tail, Stationary):
            raise PreconditionError("weak coflasqueness is decided for finite shapes and stationary towers")
        k = x.shape.tail.k
        return all(is_admissible_mono(x.transition(n, k), q) for n in range(k + 1))
    top = x.shape.maximum()
    seen = set()
    for sub in x.shape.directed_subsets():
        m = x.shape.maximum(sub)
        if m in seen:
            continue
        seen.add(m)
        if not is_admissible_mono(x.transition(m, top), q):
            return False
    return True


# -- the functorial Ind resolution --------------------------------------------------------

@dataclass
class IndResolution:
    """``0 -> K -> Xbar -> X∘q -> 0`` over subsets with a maximum, with ``q(S) = max S``."""

    kernel: IndObject
    cover: IndObject
    base: IndObject          # X reindexed along q
    mono: dict               # S -> K(S) -> Xbar(S)
    epi: dict                # S -> Xbar(S) -> X(max S)


def _subset_key(s: Sequence[Elem]) -> tuple:
    return tuple(s)


def ind_resolution(x: IndObject) -> IndResolution:
    if x.is_tower:
        raise PreconditionError("the Ind resolution is built over finite filtered shapes")
    p = x.shape
    subsets = [_subset_key(s) for s in p.directed_subsets()]
    order = [(s, t) for s in subsets for t in subsets if s != t and set(s) <= set(t)]
    shape = FinitePoset(subsets, order)
    xbar_obj, base_obj, k_obj, mono, epi = {}, {}, {}, {}, {}
    for s in subsets:
        mods = [x.obj(i) for i in s]
        m = p.maximum(s)
        xbar_obj[s] = direct_sum(*mods)
        base_obj[s] = x.obj(m)
        e = copair(*(x.transition(i, m) for i in s))
        epi[s] = e
        k_obj[s], mono[s] = kernel(e)
    xbar_arr, base_arr, k_arr = {}, {}, {}
    for s, t in shape.covers():
        tgt_mods = [x.obj(i) for i in t]
        cols = []
        for i in s:
            cols.append(injection(tgt_mods, t.index(i)).matrix)
        mat = IntMatrix.hstack(*cols) if cols else IntMatrix.zeros(xbar_obj[t].generator_count, 0)
        xbar_arr[(s, t)] = Morphism(xbar_obj[s], xbar_obj[t], mat)
        base_arr[(s, t)] = x.transition(p.maximum(s), p.maximum(t))
        k_arr[(s, t)] = factor_through_mono(xbar_arr[(s, t)] @ mono[s], mono[t])
    return IndResolution(
        kernel=IndObject(shape, k_obj, k_arr, validate=False),
        cover=IndObject(shape, xbar_obj, xbar_arr, validate=False),
        base=IndObject(shape, base_obj, base_arr, validate=False),
        mono=mono,
        epi=epi,
    )


def check_ind_resolution(r: IndResolution, q: ExactStructure | str = ExactStructure.ABELIAN) -> dict[str, bool]:
    """Levelwise exactness, naturality, split cover transitions and admissibility of ``K``."""
    shape = r.cover.shape
    levelwise = all(is_exact_pair(ShortSeq(r.mono[s], r.epi[s]), q) for s in shape.elements)
    natural = all(
        (r.cover.transition(s, t) @ r.mono[s]).equals(r.mono[t] @ r.kernel.transition(s, t))
        and (r.base.transition(s, t) @ r.epi[s]).equals(r.epi[t] @ r.cover.transition(s, t))
        for s, t in shape.covers())
    split = all(find_retraction(r.cover.transition(s, t)) is not None for s, t in shape.covers())
    admissible = is_essentially_admissible(r.kernel, q)
    return {"levelwise_exact": levelwise, "natural": natural, "cover_split": split, "kernel_admissible": admissible}


# -- functor extension ------------------------------------------------------------------------

def extend_functor(f: Functor, x: _Diagram) -> _Diagram:
    """Apply ``f`` objectwise and arrowwise."""
    return x.map(f.obj, f.mor)


def stable_image(a: FgModule, f: Morphism, bound: int | None = None) -> tuple[IntMatrix, int] | None:
    """Lattice basis of ``f^r(A)`` (preimage in ``Z^n``) once the images stop shrinking, and ``r``.

    ``None`` if the images still descend after ``bound`` steps.
    """
    for n, lat in enumerate(_image_chain(a, f)):
        if lat[1]:
            return lat[0], n
        if bound is not None and n >= bound:
            return None
    raise AssertionError("unreachable")


def _image_chain(a: FgModule, f: Morphism):
    """Yield ``(L_n, L_{n+1} == L_n)`` for the lattices ``L_n`` of ``f^n(A)``."""
    g = a.generator_count
    rel = list(a.relations.rows)
    cur = hermite_basis([tuple(r) for r in IntMatrix.identity(g).rows] + rel, g)
    while True:
        nxt = hermite_basis(list((cur @ f.matrix.T).rows) + rel, g)
        yield cur, nxt == cur
        cur = nxt


def restrict_to_lattice(a: FgModule, f: Morphism, lat: IntMatrix) -> tuple[FgModule, Morphism, Morphism]:
    """The subgroup ``L/R`` of ``A`` as a module, ``f`` restricted to it, and its inclusion into ``A``.

    ``lat`` must contain the relation lattice and be mapped into itself by ``f``.
    """
    k = lat.nrows
    rel = solve(lat.T, a.relations.T).T if a.relations.nrows else IntMatrix(0, k, ())
    b = FgModule(k, rel)
    image = f.matrix @ lat.T
    coords = solve(lat.T, image)
    if coords is None:
        raise PreconditionError("lattice is not invariant under the map")
    return b, Morphism(b, b, coords), Morphism(b, a, lat.T)


def evaluate_bar(f: Functor, x: IndObject) -> FgModule:
    """``colim F(X_i)`` when it is finitely presented and computable."""
    y = extend_functor(f, x)
    if not y.is_tower or isinstance(y.shape.tail, Stationary):
        return y.obj(y.top())
    a, g = y.objects[0], y.arrows[0]
    bound = a.generator_count + 2 + _torsion_log(a)
    st = stable_image(a, g, bound)
    if st is None:
        raise NotEvaluable("images of the constant map do not stabilise, colimit is not finitely generated")
    b, gb, _ = restrict_to_lattice(a, g, st[0])
    if not gb.is_iso():
        raise NotEvaluable("constant map is not an automorphism on its stable image")
    return b.pruned.module


def _torsion_log(a: FgModule) -> int:
    t = 1
    for d in a.torsion:
        t *= d
    return max(1, math.ceil(math.log2(t))) if t > 1 else 0


# -- Mittag-Leffler ------------------------------------------------------------------------

@dataclass(frozen=True)
class MlVerdict:
    status: str                 # "Holds" | "Fails" | "Undetermined"
    index: int | None = None    # stabilisation index when Holds
    det: int | None = None      # determinant certificate when Fails
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "Holds"

    def __str__(self) -> str:
        if self.status == "Holds":
            return f"Holds (images stabilise at index {self.index})"
        if self.status == "Fails":
            return f"Fails (certificate det={self.det})"
        return f"Undetermined ({self.detail})"


def ml_check(t: ProObject, iteration_bound: int = 10_000) -> MlVerdict:
    """Mittag-Leffler condition for a pro-tower."""
    if not t.is_tower:
        raise PreconditionError("ml_check expects an ω-tower")
    tail = t.shape.tail
    if isinstance(tail, Stationary):
        return MlVerdict("Holds", index=tail.k, detail="stationary tail")
    a, f = t.objects[0], t.arrows[0]
    # rank stabilisation: rational rank of f^n(A) is non-increasing and constant once it repeats
    chain = _image_chain(a, f)
    rel_rank = a.smith.rank
    r = 0
    prev_rank = None
    lats = []
    for n, (lat, _) in enumerate(chain):
        lats.append(lat)
        rk = lat.nrows - rel_rank
        if prev_rank is not None and rk == prev_rank:
            r = n - 1
            break
        prev_rank = rk
    lat_r = lats[r]
    b, fb, _ = restrict_to_lattice(a, f, lat_r)
    free_block = tf_reflect_map(fb)
    dt = abs(det(free_block.matrix))
    if dt != 1:
        return MlVerdict("Fails", det=dt, detail=f"free part of the stable-rank image scales volume by {dt}")
    bound = r + _torsion_log(b) + 2
    for n, (lat, same) in enumerate(_image_chain(a, f)):
        if same:
            return MlVerdict("Holds", index=n, det=1)
        if n > min(bound, iteration_bound):
            break
    return MlVerdict("Undetermined", detail="image chain did not settle within the torsion bound")


def ml_brute_force(a: FgModule, f: Morphism, steps: int) -> int | None:
    """Index where ``f^n(A)`` first repeats, scanning ``steps`` terms; ``None`` if it never does."""
    for n, (_, same) in enumerate(_image_chain(a, f)):
        if same:
            return n
        if n >= steps:
            return None
    return None
