import dataclasses
import random

import pytest
from hypothesis import given, settings

from conftest import seeds
from exactcat.chain import Complex, homology, is_quasi_iso, truncate_left
from exactcat.core import FgModule, Morphism, find_retraction, is_admissible_epi
from exactcat.errors import PreconditionError, WindowUnstable
from exactcat.resolution import (FREE_COVER, SHUFFLED_COVER, VsSystem, build_vs_system, free_cover,
                                 induced_truncation_system, lift_deformation, resolve, resolve_map,
                                 shuffled_cover, standard_truncation_system, verify_truncation_system,
                                 verify_vs_system, vs_colimit_window)
from exactcat.sampling import rand_chain_map, rand_complex, rand_module, rand_morphism, rand_quasi_iso

Z = FgModule.free(1)


def _epi_quasi_iso(eta):
    return is_quasi_iso(eta) and all(eta.comp(k).is_surjective() for k in eta.degrees)


# -- covers -----------------------------------------------------------------------------

def test_free_cover_examples():
    c, e = free_cover(FgModule.cyclic(4))
    assert c == Z and e.matrix.tolist() == [[1]] and e.is_surjective()
    c, e = free_cover(Z)
    assert c == Z and e.is_iso()
    c, e = free_cover(FgModule.from_invariants([2, 0]))
    assert c.invariants == (0, 0) and e.is_surjective()


@given(seeds)
def test_covers_are_admissible_epis(seed):
    m = rand_module(random.Random(seed))
    for cover in (free_cover, shuffled_cover):
        c, e = cover(m)
        assert c.is_free() and e.is_well_defined() and is_admissible_epi(e)


@given(seeds)
def test_cover_functoriality(seed):
    rng = random.Random(seed)
    a, b = rand_module(rng), rand_module(rng)
    f = rand_morphism(rng, a, b)
    for q in (FREE_COVER, SHUFFLED_COVER):
        g = q.cover_map(f)
        _, ea = q.cover(a)
        _, eb = q.cover(b)
        assert (eb @ g).equals(f @ ea)


# -- resolutions ------------------------------------------------------------------------

def test_resolution_examples():
    x = Complex.concentrated(FgModule.cyclic(2))
    r = lift_deformation(FREE_COVER)(x)
    q = r.complex
    assert (q.lo, q.hi) == (0, 1)
    assert q.obj(0) == Z and q.obj(1) == Z
    assert q.d(1).matrix.tolist() in ([[2]], [[-2]])
    assert r.eta.comp(0).matrix.tolist() == [[1]] and r.eta.comp(1).is_zero()
    assert resolve(Complex.zero()).complex.is_empty()
    y = Complex.build({1: Z, 0: Z}, {1: [[3]]})
    assert _epi_quasi_iso(resolve(y).eta)


@given(seeds)
def test_resolve_is_epi_quasi_iso(seed):
    x = rand_complex(random.Random(seed), -1, 2, 3)
    for q in (FREE_COVER, SHUFFLED_COVER):
        r = resolve(x, q)
        r.complex.check()
        r.eta.check()
        assert r.complex.is_free()
        assert _epi_quasi_iso(r.eta)


@given(seeds)
def test_resolve_map_lifts(seed):
    f = rand_chain_map(random.Random(seed), -1, 2, 3)
    rx, ry = resolve(f.source), resolve(f.target)
    g = resolve_map(f, rx, ry)
    g.check()
    assert (ry.eta @ g).equals(f @ rx.eta)
    assert is_quasi_iso(g) == is_quasi_iso(f)


# -- truncation systems ------------------------------------------------------------------

def test_standard_truncation_examples():
    t = standard_truncation_system()
    x = Complex.build({1: Z, 0: Z}, {1: [[5]]})
    assert t.apply(x, 0) == truncate_left(x, 0)
    y = rand_complex(random.Random(1), -3, 2, 3)
    for n in range(0, 4):
        psi = t.psi(y, n)
        assert all(psi.comp(k).is_iso() for k in psi.degrees if k > -n)


def test_truncation_axioms_on_many_complexes():
    t = standard_truncation_system()
    rng = random.Random(7)
    for _ in range(200):
        x = rand_complex(rng, -3, 2, 3)
        n = rng.randint(0, 4)
        f = rand_quasi_iso(rng, -3, 2, 2) if rng.random() < 0.3 else None
        rep = verify_truncation_system(t, x, n, f)
        assert rep.ok, rep.lines()
        if f is not None:
            assert verify_truncation_system(t, f.source, n, f).ok


@settings(max_examples=15)
@given(seeds)
def test_induced_truncation_system_axioms(seed):
    rng = random.Random(seed)
    t = induced_truncation_system(standard_truncation_system(), FREE_COVER)
    x = rand_complex(rng, -2, 1, 2)
    n = rng.randint(0, 3)
    rep = verify_truncation_system(t, x, n)
    assert rep.ok, rep.lines()


# -- very-special systems ----------------------------------------------------------------

def test_vs_examples():
    v = build_vs_system(Complex.zero(), 3)
    assert all(p.is_empty() or all(m.is_zero() for m in p.objects) for p in v.stages)
    assert verify_vs_system(v).ok
    x = Complex.concentrated(FgModule.cyclic(2))
    v = build_vs_system(x, 1)
    assert verify_vs_system(v).ok
    assert v.stages[0].is_free()
    assert homology(v.stages[0]).iso(homology(truncate_left(x, 0)))
    y = Complex.build({0: Z, -1: FgModule.cyclic(2)}, {0: [[1]]})
    v = build_vs_system(y, 2)
    assert verify_vs_system(v).ok
    hp, hy = homology(v.stages[2]), homology(y)
    assert all(hp[m] == hy[m] for m in range(-1, 3))


def test_vs_empty_system_passes_vacuously():
    t = standard_truncation_system()
    v = VsSystem(Complex.zero(), (), (), (), (), t, FREE_COVER)
    assert verify_vs_system(v).ok and verify_vs_system(v).items == ()
    with pytest.raises(PreconditionError):
        build_vs_system(Complex.zero(), -1)


def test_vs_mutated_inclusion_fails_split_clause():
    x = Complex.build({1: Z, 0: Z, -1: FgModule.cyclic(3)}, {1: [[3]], 0: [[1]]})
    v = build_vs_system(x, 2)
    assert verify_vs_system(v).ok
    bad = v.inclusions[1].scale(2)
    w = dataclasses.replace(v, inclusions=(v.inclusions[0], bad) + v.inclusions[2:])
    rep = verify_vs_system(w)
    failed = {(i.stage, i.clause) for i in rep.failures()}
    assert (1, "split_inclusion") in failed
    assert any(find_retraction(bad.comp(k)) is None for k in bad.degrees)


@settings(max_examples=20)
@given(seeds)
def test_vs_systems_verify(seed):
    x = rand_complex(random.Random(seed), -2, 2, 2)
    v = build_vs_system(x, 3)
    rep = verify_vs_system(v)
    assert rep.ok, [line for line in rep.lines() if "FAIL" in line]
    hp, hx = homology(v.stages[3]), homology(x)
    assert all(hp[m] == hx[m] for m in range(-2, 4))


def test_vs_window():
    rng = random.Random(11)
    x = rand_complex(rng, -1, 2, 2)
    v = build_vs_system(x, 3)
    frag, f = vs_colimit_window(v, 0, 2)
    hf, hx = homology(frag), homology(x)
    assert all(hf[m] == hx[m] for m in range(0, 3))
    z, g = vs_colimit_window(v, 3, 1)
    assert z.is_empty() and g.source.is_empty()
    with pytest.raises(WindowUnstable):
        vs_colimit_window(v, -2, 1)


def test_vs_window_detects_mutation():
    x = Complex.build({2: Z, 1: FgModule.free(2), 0: Z}, {2: [[1], [0]], 1: [[0, 4]]})
    v = build_vs_system(x, 3)
    frag, _ = vs_colimit_window(v, 0, 2)
    hx = homology(x)
    assert all(homology(frag)[m] == hx[m] for m in range(0, 3))
    k = 1
    d = frag.d(k)
    mutated = Morphism(d.source, d.target, d.matrix.scale(3))
    diffs = {n: frag.d(n) for n in frag.degrees[1:]}
    diffs[k] = mutated
    bad = Complex.build({n: frag.obj(n) for n in frag.degrees}, diffs, validate=False)
    hb = homology(bad)
    assert any(hb[m] != hx[m] for m in range(0, 3))
