from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form

from exactcat.linalg import (IntMatrix, det, hermite_basis, in_row_lattice, invariant_factors, rank,
                             right_kernel, smith_form, solve)


def matrices(max_rows=4, max_cols=4, lo=-5, hi=5):
    return st.integers(0, max_rows).flatmap(lambda r: st.integers(0, max_cols).flatmap(
        lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r)
        .map(lambda rows, c=c: IntMatrix.of(rows, c))))


def _sympy_invariants(a: IntMatrix) -> list[int]:
    if a.nrows == 0 or a.ncols == 0:
        return []
    from sympy import ZZ
    d = smith_normal_form(Matrix(a.tolist()), domain=ZZ)
    diag = [abs(int(d[i, i])) for i in range(min(d.shape))]
    return sorted(x for x in diag if x not in (0, 1))


def test_smith_small_examples():
    assert invariant_factors(IntMatrix.of([[2, 4], [6, 8]])) == (2, 4)
    assert invariant_factors(IntMatrix.of([[6]])) == (6,)
    assert smith_form(IntMatrix.zeros(2, 3)).rank == 0


@given(matrices())
def test_smith_factorisation(a):
    s = smith_form(a)
    d = IntMatrix.of([[s.d[i] if i == j and i < len(s.d) else 0 for j in range(a.ncols)]
                      for i in range(a.nrows)], a.ncols)
    assert s.u @ a @ s.v == d
    assert abs(det(s.u)) == 1 and abs(det(s.v)) == 1
    assert (s.v @ s.v_inv) == IntMatrix.identity(a.ncols)
    nz = [x for x in s.d if x]
    assert all(x > 0 for x in nz)
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))
    assert len(nz) == s.rank == rank(a)


@given(matrices())
def test_invariants_match_sympy(a):
    assert sorted(x for x in smith_form(a).d if x not in (0, 1)) == _sympy_invariants(a)


@given(matrices(max_rows=3, max_cols=3))
def test_det_matches_sympy(a):
    if a.nrows == a.ncols and a.nrows:
        assert det(a) == int(Matrix(a.tolist()).det())


@given(matrices())
def test_hermite_basis_spans_same_lattice(a):
    h = hermite_basis(a.rows, a.ncols)
    assert h.nrows == rank(a)
    assert in_row_lattice(h, a)
    assert in_row_lattice(a, h) if a.nrows else h.nrows == 0


@given(matrices(), st.data())
def test_solve_finds_planted_solutions(a, data):
    x = IntMatrix.of([[data.draw(st.integers(-3, 3))] for _ in range(a.ncols)], 1)
    b = a @ x
    y = solve(a, b)
    assert y is not None and a @ y == b


def test_solve_reports_no_solution():
    assert solve(IntMatrix.of([[2]]), IntMatrix.of([[1]])) is None
    assert solve(IntMatrix.of([[2, 4]]), IntMatrix.of([[3]])) is None


@given(matrices())
def test_right_kernel(a):
    k = right_kernel(a)
    assert k.nrows == a.ncols
    assert (a @ k).is_zero()
    assert k.ncols == a.ncols - rank(a)
    # saturated: the kernel lattice is primitive
    if k.ncols:
        assert set(smith_form(k).d) <= {1}
