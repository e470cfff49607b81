import random

import pytest
from hypothesis import given

from conftest import seeds
from exactcat.chain import (ChainMap, Complex, cone, cone_inclusion, direct_sum_complexes, homology,
                            is_acyclic, is_degreewise_split_exact, is_quasi_iso, is_quasi_iso_by_homology,
                            shift, shift_map, truncate_left, truncate_left_map, truncate_right,
                            truncate_right_map, truncation_inclusion, truncation_projection)
from exactcat.core import ExactStructure, FgModule, Morphism, injection, projection
from exactcat.errors import ChainComplexError, StructureMismatch
from exactcat.linalg import IntMatrix
from exactcat.sampling import rand_chain_map, rand_complex, rand_free_complex, rand_quasi_iso

Z = FgModule.free(1)
AB, SPLIT, PURE = ExactStructure.ABELIAN, ExactStructure.SPLIT, ExactStructure.PURE_TF


def two_term(k):
    """``[Z --k--> Z]`` in degrees 1, 0."""
    return Complex.build({1: Z, 0: Z}, {1: [[k]]})


def scalar(x, k):
    return ChainMap.identity(x).scale(k)


# -- examples ---------------------------------------------------------------------------

def test_build_rejects_bad_complexes():
    with pytest.raises(ChainComplexError):
        Complex.build({2: Z, 1: Z, 0: Z}, {2: [[1]], 1: [[1]]})
    with pytest.raises(ChainComplexError):
        Complex.build({1: FgModule.cyclic(2), 0: Z}, {1: [[1]]})


def test_cone_examples():
    x = Complex.build({1: Z, 0: Z}, {1: [[3]]})
    assert homology(cone(ChainMap.identity(x))).is_zero()
    y = two_term(5)
    c = cone(ChainMap.zero(Complex.zero(), y))
    assert homology(c).iso(homology(y))
    assert [c.obj(n).invariants for n in c.degrees] == [y.obj(n).invariants for n in y.degrees]
    z0 = Complex.concentrated(Z)
    h = homology(cone(scalar(z0, 2)))
    assert h[0] == (2,) and h[1] == ()


def test_homology_examples():
    h = homology(two_term(6))
    assert h[0] == (6,) and h[1] == ()
    assert homology(two_term(1)).is_zero()
    a, b = two_term(6), rand_complex(random.Random(3), -1, 2, 2)
    s = homology(direct_sum_complexes(a, b))
    ha, hb = homology(a), homology(b)
    for n in s.degrees:
        assert FgModule.from_invariants(s[n]).is_isomorphic(
            FgModule.from_invariants(ha[n] + hb[n]))


def test_quasi_iso_examples():
    x = two_term(4)
    assert is_quasi_iso(ChainMap.identity(x))
    assert is_quasi_iso(ChainMap.zero(Complex.zero(), two_term(1)))
    assert not is_quasi_iso(scalar(Complex.concentrated(Z), 2))


def test_truncation_examples():
    x = Complex.build({1: Z, 0: Z}, {1: [[2]]})
    t = truncate_left(x, 0)
    assert t.lo == 0 and t.hi == 1 and t.d(1).matrix.tolist() == [[2]]
    assert all(truncate_left(x, 1).obj(n).is_zero() for n in truncate_left(x, 1).degrees)
    y = Complex.build({1: Z, 0: Z}, {1: [[0]]})
    ty = truncate_left(y, 1)
    assert ty.lo == ty.hi == 1 and ty.obj(1).invariants == (0,)
    r = truncate_right(x, 0)
    assert r.lo == r.hi == 0 and r.obj(0).invariants == (2,)
    assert truncate_right(x, 1) == x
    exact = Complex.build({1: Z, 0: Z}, {1: [[1]]})
    assert homology(truncate_right(exact, -1)).is_zero()


def test_degreewise_split_examples():
    x = two_term(3)
    w = Complex.concentrated(Z, 1)
    s = direct_sum_complexes(x, w)
    inc = ChainMap.build(x, s, {n: injection([x.obj(n), w.obj(n)], 0) for n in s.degrees})
    pr = ChainMap.build(s, w, {n: projection([x.obj(n), w.obj(n)], 1) for n in s.degrees})
    assert is_degreewise_split_exact(inc, pr)
    a, b, c = (Complex.concentrated(m) for m in (Z, Z, FgModule.cyclic(2)))
    left = ChainMap.build(a, b, {0: Morphism(Z, Z, IntMatrix.of([[2]]))})
    right = ChainMap.build(b, c, {0: Morphism(Z, FgModule.cyclic(2), IntMatrix.of([[1]]))})
    assert not is_degreewise_split_exact(left, right)
    zero = Complex.zero()
    assert is_degreewise_split_exact(ChainMap.identity(zero), ChainMap.identity(zero))


# -- properties -------------------------------------------------------------------------

@given(seeds)
def test_constructors_keep_d_squared_zero(seed):
    rng = random.Random(seed)
    f = rand_chain_map(rng, -1, 2, 3)
    x = f.source
    cone(f).check()
    shift(x, rng.randint(-3, 3)).check()
    direct_sum_complexes(x, f.target).check()
    n = rng.randint(-2, 3)
    truncate_left(x, n).check()
    truncate_right(x, n).check()
    truncation_inclusion(x, n).check()
    truncation_projection(x, n).check()
    cone_inclusion(f).check()


@given(seeds)
def test_cone_quasi_iso_duality(seed):
    f = rand_chain_map(random.Random(seed), -1, 2, 3)
    assert is_quasi_iso(f) == homology(cone(f)).is_zero() == is_quasi_iso_by_homology(f)


@given(seeds)
def test_constructed_quasi_isos(seed):
    f = rand_quasi_iso(random.Random(seed), -1, 2, 3)
    f.check()
    assert is_quasi_iso(f)


@given(seeds)
def test_truncation_preserves_quasi_isos(seed):
    rng = random.Random(seed)
    f = rand_quasi_iso(rng, -2, 2, 3)
    for n in range(-3, 4):
        g = truncate_left_map(f, n)
        g.check()
        assert is_quasi_iso(g)
        assert is_quasi_iso(truncate_right_map(f, n))


@given(seeds)
def test_truncation_homology(seed):
    rng = random.Random(seed)
    x = rand_complex(rng, -2, 2, 3)
    hx = homology(x)
    for n in range(-3, 4):
        hl, hr = homology(truncate_left(x, n)), homology(truncate_right(x, n))
        for m in range(-3, 4):
            assert hl[m] == (hx[m] if m >= n else ())
            assert hr[m] == (hx[m] if m <= n else ())
        assert is_quasi_iso(truncate_left_map(ChainMap.identity(x), n))


@given(seeds)
def test_shift_reindexes_homology(seed):
    rng = random.Random(seed)
    f = rand_chain_map(rng, -1, 2, 3)
    k = rng.randint(-2, 2)
    hx, hs = homology(f.source), homology(shift(f.source, k))
    for n in range(-5, 6):
        assert hs[n] == hx[n + k]
    assert is_quasi_iso(shift_map(f, k)) == is_quasi_iso(f)


@given(seeds)
def test_chain_map_algebra(seed):
    rng = random.Random(seed)
    f = rand_quasi_iso(rng, -1, 1, 2)
    g = ChainMap.identity(f.target)
    assert (g @ f).equals(f)
    assert (f + (-f)).equals(ChainMap.zero(f.source, f.target))
    assert f.commutes()


@given(seeds)
def test_pure_structure_agrees_on_torsion_free(seed):
    rng = random.Random(seed)
    x = rand_free_complex(rng, -1, 2, 3)
    assert is_acyclic(x, PURE) == is_acyclic(x, AB)
    f = rand_chain_map(rng, -1, 2, 3)
    if all(f.source.obj(n).is_torsion_free() and f.target.obj(n).is_torsion_free()
           for n in range(-3, 4)):
        assert is_quasi_iso(f, PURE) == is_quasi_iso(f, AB)


@given(seeds)
def test_split_quasi_iso_on_free_complexes(seed):
    # bounded acyclic complexes of free groups are contractible
    rng = random.Random(seed)
    x = rand_free_complex(rng, -1, 2, 3)
    f = ChainMap.identity(x).scale(rng.choice([1, -1, 2]))
    assert is_quasi_iso(f, SPLIT) == is_quasi_iso(f, AB)


def test_split_quasi_iso_rejects_non_contractible_torsion():
    # [Z --2--> Z --> Z/2] is acyclic but does not split
    x = Complex.build({1: Z, 0: Z, -1: FgModule.cyclic(2)}, {1: [[2]], 0: [[1]]})
    assert is_acyclic(x, AB)
    assert not is_acyclic(x, SPLIT)
    with pytest.raises(StructureMismatch):
        is_acyclic(x, PURE)
