"""Seeded random generators for modules, complexes, chain maps and diagrams.

Used by the property tests, the acceptance suite and the CLI ``suite`` command.
"""

from __future__ import annotations

import itertools
import random

from .chain import ChainMap, Complex, cone, direct_sum_complexes, truncation_inclusion
from .core import FgModule, Morphism
from .indpro import FinitePoset, IndObject, ProObject, tower
from .linalg import IntMatrix, right_kernel


def rand_matrix(rng: random.Random, rows: int, cols: int, lo: int = -5, hi: int = 5) -> IntMatrix:
    return IntMatrix.of([[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)], cols)


def rand_module(rng: random.Random, max_gens: int = 3, max_rels: int = 3, bound: int = 5) -> FgModule:
    n = rng.randint(0, max_gens)
    r = rng.randint(0, max_rels) if n else 0
    return FgModule(n, rand_matrix(rng, r, n, -bound, bound))


def rand_invariant_module(rng: random.Random, max_summands: int = 3, max_order: int = 12) -> FgModule:
    factors = [rng.choice([0] + list(range(2, max_order + 1))) for _ in range(rng.randint(0, max_summands))]
    return FgModule.from_invariants(factors)


def rand_free_complex(rng: random.Random, lo: int, hi: int, max_rank: int = 3, bound: int = 3) -> Complex:
    """Free complex on ``[lo, hi]`` whose differentials take columns from the kernel of the next one down."""
    ranks = {n: rng.randint(0, max_rank) for n in range(lo, hi + 1)}
    objs = {n: FgModule.free(r) for n, r in ranks.items()}
    diffs = {}
    prev = None
    for n in range(lo + 1, hi + 1):
        src, tgt = ranks[n], ranks[n - 1]
        if prev is None:
            mat = rand_matrix(rng, tgt, src, -bound, bound)
        else:
            ker = right_kernel(prev)
            coeff = rand_matrix(rng, ker.ncols, src, -2, 2)
            mat = ker @ coeff if ker.ncols else IntMatrix.zeros(tgt, src)
        diffs[n] = mat
        prev = mat
    return Complex.build(objs, diffs)


def tensor_complex(x: Complex, m: int) -> Complex:
    """``x ⊗ Z/m`` for a complex of free modules (append ``m`` times identity relations)."""
    objs = {}
    for n in x.degrees:
        g = x.obj(n).generator_count
        objs[n] = FgModule(g, IntMatrix.vstack(x.obj(n).relations, IntMatrix.identity(g).scale(m)))
    diffs = {n: x.d(n).matrix for n in x.degrees[1:]}
    return Complex.build(objs, diffs, validate=False)


def quotient_by_elements(rng: random.Random, x: Complex, count: int = 2, bound: int = 3) -> Complex:
    """Kill random elements together with their boundaries, introducing torsion."""
    rels = {n: list(x.obj(n).relations.rows) for n in x.degrees}
    for _ in range(count):
        if x.is_empty():
            break
        n = rng.choice(list(x.degrees))
        g = x.obj(n).generator_count
        if not g:
            continue
        v = [rng.randint(-bound, bound) for _ in range(g)]
        rels[n].append(tuple(v))
        if n - 1 in rels:
            col = x.d(n).matrix @ IntMatrix.of([[c] for c in v], 1)
            rels[n - 1].append(tuple(r[0] for r in col.rows))
    objs = {n: FgModule(x.obj(n).generator_count, IntMatrix.of(rels[n], x.obj(n).generator_count))
            for n in x.degrees}
    return Complex.build(objs, {n: x.d(n).matrix for n in x.degrees[1:]}, validate=False)


def rand_complex(rng: random.Random, lo: int, hi: int, max_rank: int = 3, torsion: bool = True) -> Complex:
    x = rand_free_complex(rng, lo, hi, max_rank)
    if not torsion:
        return x
    k = rng.random()
    if k < 0.3:
        return x
    if k < 0.5:
        return tensor_complex(x, rng.randint(2, 6))
    return quotient_by_elements(rng, x, rng.randint(1, 3))


def rand_homotopy(rng: random.Random, x: Complex, y: Complex) -> dict[int, Morphism]:
    """Random ``h_n: X_n -> Y_{n+1}``; zero where a random matrix would not respect relations."""
    h = {}
    for n in x.degrees:
        s, t = x.obj(n), y.obj(n + 1)
        cand = Morphism(s, t, rand_matrix(rng, t.generator_count, s.generator_count, -2, 2))
        h[n] = cand if cand.is_well_defined() else Morphism.zero(s, t)
    return h


def homotopic_perturbation(f: ChainMap, h: dict[int, Morphism]) -> ChainMap:
    """``f + d h + h d``."""
    x, y = f.source, f.target
    comps = {}
    for n in f.degrees:
        hn = h.get(n, Morphism.zero(x.obj(n), y.obj(n + 1)))
        hn1 = h.get(n - 1, Morphism.zero(x.obj(n - 1), y.obj(n)))
        comps[n] = f.comp(n) + y.d(n + 1) @ hn + hn1 @ x.d(n)
    return ChainMap.build(x, y, comps, validate=False)


def contractible(rng: random.Random, lo: int, hi: int, max_rank: int = 2) -> Complex:
    w = rand_complex(rng, lo, hi, max_rank)
    return cone(ChainMap.identity(w))


def rand_quasi_iso(rng: random.Random, lo: int = -2, hi: int = 2, max_rank: int = 3) -> ChainMap:
    """A chain map that is a quasi-isomorphism by construction."""
    from .resolution import resolve

    x = rand_complex(rng, lo, hi, max_rank)
    kind = rng.randrange(5)
    if kind == 0:
        base = ChainMap.identity(x).scale(rng.choice([1, -1]))
        return homotopic_perturbation(base, rand_homotopy(rng, x, x))
    if kind in (1, 2):
        c = contractible(rng, lo, hi, 2)
        s = direct_sum_complexes(x, c)
        comps = {}
        for n in s.degrees:
            a, b = x.obj(n).generator_count, c.obj(n).generator_count
            block = IntMatrix.vstack(IntMatrix.identity(a), IntMatrix.zeros(b, a))
            if kind == 1:
                comps[n] = Morphism(x.obj(n), s.obj(n), block)
            else:
                comps[n] = Morphism(s.obj(n), x.obj(n), block.T)
        f = ChainMap.build(x, s, comps, validate=False) if kind == 1 else ChainMap.build(s, x, comps, validate=False)
        return homotopic_perturbation(f, rand_homotopy(rng, f.source, f.target))
    if kind == 3:
        return resolve(x).eta
    # inclusion of a truncation that does not change homology
    return truncation_inclusion(x, x.lo)


def rand_chain_map(rng: random.Random, lo: int = -2, hi: int = 3, max_rank: int = 4) -> ChainMap:
    """A mix of quasi-isomorphisms and maps that usually are not."""
    k = rng.randrange(6)
    if k < 3:
        return rand_quasi_iso(rng, lo, hi, max_rank)
    x = rand_complex(rng, lo, hi, max_rank)
    if k == 3:
        base = ChainMap.identity(x).scale(rng.randint(-3, 3))
        return homotopic_perturbation(base, rand_homotopy(rng, x, x))
    if k == 4:
        y = rand_complex(rng, lo, hi, max_rank)
        return ChainMap.zero(x, y)
    return truncation_inclusion(x, rng.randint(lo, hi))



# Elementary pieces: a sphere is ``{n: l}`` (``Z/l`` in degree n, ``l = 0`` for ``Z``), a disk is
# ``Z --k--> Z`` in degrees ``n+1, n``.  Sums of pieces keep every entry at its piece's size.

def _rand_piece(rng: random.Random, lo: int, hi: int, bound: int) -> tuple[dict[int, int], dict[int, int]]:
    if hi > lo and rng.random() < 0.5:
        n = rng.randint(lo, hi - 1)
        return {n + 1: 0, n: 0}, {n + 1: rng.randint(-bound, bound)}
    return {rng.randint(lo, hi): rng.choice([0] + list(range(2, bound + 1)))}, {}


def _rand_pieces(rng: random.Random, lo: int, hi: int, max_rank: int, bound: int) -> list:
    pieces, used = [], {}
    for _ in range(rng.randint(1, 2 * max_rank)):
        mods, d = _rand_piece(rng, lo, hi, bound)
        if all(used.get(m, 0) < max_rank for m in mods):
            pieces.append((mods, d))
            for m in mods:
                used[m] = used.get(m, 0) + 1
    return pieces


def _block_ok(p, q, c: dict[int, int]) -> bool:
    (pm, pd), (qm, qd) = p, q
    for m, v in c.items():
        l_q = qm[m]
        if (v * pm[m]) % l_q if l_q else v * pm[m]:
            return False
    for m in set(pm) | set(qm):
        # d_Q c_m - c_{m-1} d_P must vanish in Q_{m-1}
        if m - 1 not in qm:
            continue
        r = qd.get(m, 0) * c.get(m, 0) - c.get(m - 1, 0) * pd.get(m, 0)
        l_q = qm[m - 1]
        if (r % l_q if l_q else r):
            return False
    return True


def _rand_block(rng: random.Random, p, q, bound: int, tries: int = 8) -> dict[int, int]:
    common = sorted(set(p[0]) & set(q[0]))
    if not common:
        return {}
    for _ in range(tries):
        c = {m: rng.choice([0, 0, 1, -1, rng.randint(-bound, bound)]) for m in common}
        if _block_ok(p, q, c):
            return c
    return {}


def _assemble(pieces: list) -> tuple[Complex, dict[int, list[int]]]:
    """Complex of a piece list and, per degree, the piece index of each generator."""
    degrees = sorted({m for mods, _ in pieces for m in mods})
    if not degrees:
        return Complex.zero(), {}
    index = {m: [i for i, (mods, _) in enumerate(pieces) if m in mods] for m in range(degrees[0], degrees[-1] + 1)}
    objs = {}
    for m, idx in index.items():
        rows = [[pieces[i][0][m] if j == k else 0 for k in range(len(idx))] for j, i in enumerate(idx) if pieces[i][0][m]]
        objs[m] = FgModule.presented(len(idx), rows)
    diffs = {}
    for m in list(index)[1:]:
        diffs[m] = IntMatrix.of([[pieces[i][1].get(m, 0) if i == i2 else 0 for i2 in index[m]]
                                 for i in index[m - 1]], len(index[m]))
    return Complex.build(objs, diffs), index


def rand_bounded_chain_map(rng: random.Random, lo: int = -2, hi: int = 3, max_rank: int = 4,
                           bound: int = 5) -> ChainMap:
    """Chain map of sums of spheres and disks supported in ``[lo, hi]``.

    Ranks stay at most ``max_rank`` and every entry of every presentation, differential and
    component lies in ``[-bound, bound]``.  About half the maps start from a unit on shared
    pieces, so quasi-isomorphisms and non-quasi-isomorphisms both occur often.
    """
    xp = _rand_pieces(rng, lo, hi, max_rank, bound)
    near_id = rng.random() < 0.5
    if near_id:
        yp = list(xp)
        used = {m: sum(m in mods for mods, _ in yp) for m in range(lo, hi + 1)}
        n = rng.randint(lo, hi - 1) if hi > lo else None
        if n is not None and used[n] < max_rank and used[n + 1] < max_rank and rng.random() < 0.5:
            yp.append(({n + 1: 0, n: 0}, {n + 1: rng.choice([1, -1])}))
    else:
        yp = _rand_pieces(rng, lo, hi, max_rank, bound)
    x, xi = _assemble(xp)
    y, yi = _assemble(yp)
    blocks = {}
    for i, p in enumerate(xp):
        for j, q in enumerate(yp):
            if near_id and i == j:
                u = rng.choice([1, -1]) if rng.random() < 0.8 else rng.randint(-bound, bound)
                blocks[i, j] = {m: u for m in p[0]}
            elif not near_id or rng.random() < 0.3:
                blocks[i, j] = _rand_block(rng, p, q, bound)
    comps = {}
    for m in set(xi) & set(yi):
        rows = [[blocks.get((i, j), {}).get(m, 0) for i in xi[m]] for j in yi[m]]
        comps[m] = IntMatrix.of(rows, len(xi[m]))
    return ChainMap.build(x, y, comps)


# -- diagrams --------------------------------------------------------------------------

def rand_morphism(rng: random.Random, src: FgModule, tgt: FgModule, tries: int = 20, bound: int = 3) -> Morphism:
    """A random well-defined morphism, or zero if none turns up within ``tries``."""
    for _ in range(tries):
        f = Morphism(src, tgt, rand_matrix(rng, tgt.generator_count, src.generator_count, -bound, bound))
        if f.is_well_defined():
            return f
    return Morphism.zero(src, tgt)


def rand_free_module(rng: random.Random, max_rank: int = 3) -> FgModule:
    return FgModule.free(rng.randint(0, max_rank))


def rand_torsion_module(rng: random.Random, max_summands: int = 2, max_order: int = 8) -> FgModule:
    return FgModule.from_invariants([rng.randint(2, max_order) for _ in range(rng.randint(0, max_summands))])



def filtered_posets(max_size: int) -> list[FinitePoset]:
    """Every filtered finite poset with at most ``max_size`` elements, up to isomorphism.

    Elements are ``0..n-1`` with ``n-1`` the maximum.
    """
    out = [FinitePoset([0], [])] if max_size >= 1 else []
    for n in range(2, max_size + 1):
        m = n - 1
        seen = set()
        cand = [(a, b) for a in range(m) for b in range(m) if a != b]
        for mask in range(1 << len(cand)):
            rel = {cand[i] for i in range(len(cand)) if mask >> i & 1}
            if any((b, a) in rel for a, b in rel):
                continue
            if any((a, c) not in rel for a, b in rel for b2, c in rel if b == b2 and a != c):
                continue
            key = min(tuple(sorted((p[a], p[b]) for a, b in rel)) for p in itertools.permutations(range(m)))
            if key in seen:
                continue
            seen.add(key)
            pairs = list(key) + [(a, m) for a in range(m)]
            out.append(FinitePoset(list(range(n)), pairs))
    return out


def _sum_coords(mods: list[FgModule]) -> list[int]:
    offs = [0]
    for m in mods:
        offs.append(offs[-1] + m.generator_count)
    return offs


def rand_diagram(rng: random.Random, shape: FinitePoset, variance: str = "ind", max_gens: int = 2,
                 relations: int = 2, torsion_free: bool = False):
    """Functorial diagram ``X(i) = (⊕_{k<=i} A_k) / R(i)`` with transitions induced by summand maps.

    Ind: summand inclusions, ``R(j)`` generated by random elements ``r_k`` pushed up from ``k <= j``.
    Pro: summand projections, ``R(i)`` generated by ``r_j`` projected down from ``j >= i``.
    ``relations=0`` keeps every object a plain sum, so ind transitions are split monos.
    """
    els = list(shape.elements)
    summand = {e: FgModule.free(rng.randint(0 if i else 1, max_gens)) if torsion_free
               else rand_invariant_module(rng, max_gens, 6) for i, e in enumerate(els)}
    below = {e: [k for k in els if shape.le(k, e)] for e in els}
    coords = {}
    for e in els:
        offs = _sum_coords([summand[k] for k in below[e]])
        coords[e] = {k: (offs[i], offs[i + 1]) for i, k in enumerate(below[e])}
    width = {e: sum(summand[k].generator_count for k in below[e]) for e in els}

    def move(v: list[int], a, b) -> list[int]:
        """Carry a vector of X(a) along the summand map to X(b)."""
        out = [0] * width[b]
        for k, (s, t) in coords[b].items():
            if k in coords[a]:
                s0, _ = coords[a][k]
                out[s:t] = v[s0:s0 + t - s]
        return out

    base_rels = {e: [] for e in els}
    for e in els:
        for k in below[e]:
            s, _ = coords[e][k]
            for row in summand[k].relations.rows:
                v = [0] * width[e]
                v[s:s + len(row)] = row
                base_rels[e].append(v)
    extra = {e: [] for e in els}
    if not torsion_free:
        for _ in range(rng.randint(0, relations)):
            k = rng.choice(els)
            if width[k]:
                extra[k].append([rng.randint(-2, 2) for _ in range(width[k])])
    objects = {}
    for e in els:
        rows = list(base_rels[e])
        for k in els:
            ok = shape.le(k, e) if variance == "ind" else shape.le(e, k)
            if ok:
                rows += [move(r, k, e) for r in extra[k]]
        objects[e] = FgModule(width[e], IntMatrix.of(rows, width[e]))
    arrows = {}
    for a, b in shape.covers():
        src, dst = (a, b) if variance == "ind" else (b, a)
        cols = [move([int(i == j) for i in range(width[src])], src, dst) for j in range(width[src])]
        mat = IntMatrix.of([[c[i] for c in cols] for i in range(width[dst])], width[src])
        arrows[(a, b)] = Morphism(objects[src], objects[dst], mat)
    cls = IndObject if variance == "ind" else ProObject
    return cls(shape, objects, arrows)


def rand_chain_diagram(rng: random.Random, length: int, variance: str = "ind", max_gens: int = 2):
    """Totally ordered shape with independent random transitions."""
    shape = FinitePoset(list(range(length)), [(i, i + 1) for i in range(length - 1)])
    objects = {i: rand_invariant_module(rng, max_gens, 6) for i in range(length)}
    arrows = {}
    for i in range(length - 1):
        src, dst = (i, i + 1) if variance == "ind" else (i + 1, i)
        arrows[(i, i + 1)] = rand_morphism(rng, objects[src], objects[dst])
    cls = IndObject if variance == "ind" else ProObject
    return cls(shape, objects, arrows)


def rand_stationary_tower(rng: random.Random, k: int, max_summands: int = 2, max_order: int = 6) -> ProObject:
    """Pro tower of finite groups, stationary from index ``k``."""
    objs = [rand_torsion_module(rng, max_summands, max_order) for _ in range(k + 1)]
    maps = [rand_morphism(rng, objs[n + 1], objs[n]) for n in range(k)]
    return tower(objs, maps, "pro")
