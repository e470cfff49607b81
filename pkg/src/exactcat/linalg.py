"""Exact integer matrix kernels.

Everything here works over Python integers (arbitrary precision).  The two
workhorses are a Smith normal form with unimodular transforms and a reduced
row Hermite normal form; solving, kernels and lattice comparisons are built
on top of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence


def _sub_scaled(a: list[int], q: int, b: list[int]) -> list[int]:
    return [x - q * y for x, y in zip(a, b)]


def _eye(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix with an explicit shape (so 0 x n is representable)."""

    nrows: int
    ncols: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.rows) != self.nrows or any(len(r) != self.ncols for r in self.rows):
            raise ValueError(f"ragged matrix data for shape {self.nrows}x{self.ncols}")

    # -- constructors -------------------------------------------------------
    @classmethod
    def of(cls, rows: Iterable[Iterable[int]], ncols: int | None = None) -> "IntMatrix":
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if ncols is None:
            if not data:
                raise ValueError("ncols required for a matrix without rows")
            ncols = len(data[0])
        return cls(len(data), ncols, data)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        row = (0,) * ncols
        return cls(nrows, ncols, (row,) * nrows)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def diagonal(cls, entries: Sequence[int], ncols: int | None = None) -> "IntMatrix":
        n = len(entries) if ncols is None else ncols
        return cls.of(([d if i == j else 0 for j in range(n)] for i, d in enumerate(entries)), n)

    @classmethod
    def block_diag(cls, *blocks: "IntMatrix") -> "IntMatrix":
        ncols = sum(b.ncols for b in blocks)
        out = []
        off = 0
        for b in blocks:
            for r in b.rows:
                out.append((0,) * off + r + (0,) * (ncols - off - b.ncols))
            off += b.ncols
        return cls(len(out), ncols, tuple(out))

    @classmethod
    def hstack(cls, *blocks: "IntMatrix") -> "IntMatrix":
        nrows = blocks[0].nrows
        if any(b.nrows != nrows for b in blocks):
            raise ValueError("hstack: row counts differ")
        rows = tuple(sum((b.rows[i] for b in blocks), ()) for i in range(nrows))
        return cls(nrows, sum(b.ncols for b in blocks), rows)

    @classmethod
    def vstack(cls, *blocks: "IntMatrix") -> "IntMatrix":
        ncols = blocks[0].ncols
        if any(b.ncols != ncols for b in blocks):
            raise ValueError("vstack: column counts differ")
        return cls(sum(b.nrows for b in blocks), ncols, sum((b.rows for b in blocks), ()))

    # -- arithmetic ---------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @cached_property
    def T(self) -> "IntMatrix":
        return IntMatrix(self.ncols, self.nrows, tuple(zip(*self.rows)) if self.nrows else ((),) * self.ncols)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.T.rows
        out = []
        for r in self.rows:
            nz = [(k, x) for k, x in enumerate(r) if x]
            if not nz:
                out.append((0,) * other.ncols)
                continue
            out.append(tuple(sum(x * c[k] for k, x in nz) for c in cols))
        return IntMatrix(self.nrows, other.ncols, tuple(out))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return IntMatrix(self.nrows, self.ncols,
                         tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.nrows, self.ncols, tuple(tuple(-a for a in r) for r in self.rows))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(self.nrows, self.ncols, tuple(tuple(c * a for a in r) for r in self.rows))

    def select(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "IntMatrix":
        rs = range(self.nrows) if rows is None else rows
        cs = range(self.ncols) if cols is None else cols
        return IntMatrix(len(rs), len(cs), tuple(tuple(self.rows[i][j] for j in cs) for i in rs))

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def __repr__(self) -> str:
        return f"IntMatrix({self.nrows}x{self.ncols}, {self.tolist()})"

    # -- cached decompositions ---------------------------------------------
    @cached_property
    def smith(self) -> "Smith":
        return smith_form(self)


@dataclass(frozen=True)
class Smith:
    """``u @ a @ v == diag(d)`` with ``u``, ``v`` unimodular and ``v_inv`` the inverse of ``v``.

    ``d`` lists the nonzero diagonal entries (positive, in divisibility order);
    its length is the rank.
    """

    d: tuple[int, ...]
    u: IntMatrix
    v: IntMatrix
    v_inv: IntMatrix

    @property
    def rank(self) -> int:
        return len(self.d)


def smith_form(a: IntMatrix) -> Smith:
    m, n = a.nrows, a.ncols
    A = [list(r) for r in a.rows]
    U = _eye(m)
    V = _eye(n)  # stored column-major: V[j] is column j
    Vi = _eye(n)  # row-major
    t = 0
    while t < m and t < n:
        piv = None
        best = 0
        for i in range(t, m):
            Ai = A[i]
            for j in range(t, n):
                x = Ai[j]
                if x:
                    ax = -x if x < 0 else x
                    if piv is None or ax < best:
                        piv, best = (i, j), ax
                        if ax == 1:
                            break
            if best == 1:
                break
        if piv is None:
            break
        i, j = piv
        if i != t:
            A[t], A[i] = A[i], A[t]
            U[t], U[i] = U[i], U[t]
        if j != t:
            for row in A:
                row[t], row[j] = row[j], row[t]
            V[t], V[j] = V[j], V[t]
            Vi[t], Vi[j] = Vi[j], Vi[t]
        while True:
            p = A[t][t]
            dirty = False
            At = A[t]
            for i in range(t + 1, m):
                x = A[i][t]
                if x:
                    q = (2 * x + p) // (2 * p)
                    if q:
                        A[i] = _sub_scaled(A[i], q, At)
                        U[i] = _sub_scaled(U[i], q, U[t])
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                x = At[j]
                if x:
                    q = (2 * x + p) // (2 * p)
                    if q:
                        for r in range(t, m):
                            Ar = A[r]
                            if Ar[t]:
                                Ar[j] -= q * Ar[t]
                        V[j] = _sub_scaled(V[j], q, V[t])
                        Vi[t] = _sub_scaled(Vi[t], -q, Vi[j])
                    if At[j]:
                        dirty = True
            if dirty:
                # a nonzero remainder is smaller than the pivot: bring the smallest in
                best, where = abs(p), None
                for i in range(t + 1, m):
                    x = A[i][t]
                    if x and abs(x) < best:
                        best, where = abs(x), ("r", i)
                for j in range(t + 1, n):
                    x = At[j]
                    if x and abs(x) < best:
                        best, where = abs(x), ("c", j)
                if where is not None:
                    kind, k = where
                    if kind == "r":
                        A[t], A[k] = A[k], A[t]
                        U[t], U[k] = U[k], U[t]
                    else:
                        for row in A:
                            row[t], row[k] = row[k], row[t]
                        V[t], V[k] = V[k], V[t]
                        Vi[t], Vi[k] = Vi[k], Vi[t]
                continue
            bad = None
            if p not in (1, -1):
                for i in range(t + 1, m):
                    Ai = A[i]
                    for j in range(t + 1, n):
                        if Ai[j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
            if bad is None:
                break
            A[t] = _sub_scaled(A[t], -1, A[bad])
            U[t] = _sub_scaled(U[t], -1, U[bad])
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    d = tuple(A[i][i] for i in range(t))
    return Smith(
        d=d,
        u=IntMatrix(m, m, tuple(tuple(r) for r in U)),
        v=IntMatrix(n, n, tuple(zip(*V))) if n else IntMatrix(0, 0, ()),
        v_inv=IntMatrix(n, n, tuple(tuple(r) for r in Vi)),
    )


def invariant_factors(a: IntMatrix) -> tuple[int, ...]:
    """Nonzero Smith diagonal of ``a``, in divisibility order."""
    return a.smith.d


def hermite_basis(vectors: Iterable[Sequence[int]], ncols: int) -> IntMatrix:
    """Reduced row Hermite normal form of the lattice spanned by ``vectors``.

    Pivots are positive and entries above each pivot lie in ``[0, pivot)``, so
    two generating sets span the same lattice iff their results are equal.
    """
    rows = [list(v) for v in vectors if any(v)]
    r = 0
    for c in range(ncols):
        if r >= len(rows):
            break
        while True:
            k, best = None, 0
            for i in range(r, len(rows)):
                x = rows[i][c]
                if x and (k is None or abs(x) < best):
                    k, best = i, abs(x)
            if k is None:
                break
            rows[r], rows[k] = rows[k], rows[r]
            pr = rows[r]
            piv = pr[c]
            clean = True
            for i in range(r + 1, len(rows)):
                x = rows[i][c]
                if x:
                    rows[i] = _sub_scaled(rows[i], x // piv, pr)
                    if rows[i][c]:
                        clean = False
            if clean:
                break
        if rows[r][c] == 0:
            continue
        if rows[r][c] < 0:
            rows[r] = [-x for x in rows[r]]
        piv = rows[r][c]
        for i in range(r):
            q = rows[i][c] // piv
            if q:
                rows[i] = _sub_scaled(rows[i], q, rows[r])
        r += 1
        rows = rows[:r] + [row for row in rows[r:] if any(row)]
    return IntMatrix(r, ncols, tuple(tuple(row) for row in rows[:r]))


def solve(a: IntMatrix, b: IntMatrix) -> IntMatrix | None:
    """An integer ``x`` with ``a @ x == b``, or ``None`` if there is none."""
    if a.nrows != b.nrows:
        raise ValueError(f"solve: {a.shape} vs rhs {b.shape}")
    s = a.smith
    r = s.rank
    ub = s.u @ b
    y = []
    for i in range(r):
        di = s.d[i]
        row = ub.rows[i]
        if any(x % di for x in row):
            return None
        y.append(tuple(x // di for x in row))
    for i in range(r, a.nrows):
        if any(ub.rows[i]):
            return None
    if r == 0:
        return IntMatrix.zeros(a.ncols, b.ncols)
    return s.v.select(cols=range(r)) @ IntMatrix(r, b.ncols, tuple(y))


def right_kernel(a: IntMatrix) -> IntMatrix:
    """Columns form a basis of ``{x : a @ x == 0}``."""
    s = a.smith
    return s.v.select(cols=range(s.rank, a.ncols))


def in_row_lattice(basis: IntMatrix, vectors: IntMatrix) -> bool:
    """Whether every row of ``vectors`` is an integer combination of rows of ``basis``."""
    if vectors.nrows == 0:
        return True
    if basis.nrows == 0:
        return vectors.is_zero()
    return solve(basis.T, vectors.T) is not None


def det(a: IntMatrix) -> int:
    """Determinant by fraction-free (Bareiss) elimination."""
    n = a.nrows
    if n != a.ncols:
        raise ValueError("det of non-square matrix")
    if n == 0:
        return 1
    M = [list(r) for r in a.rows]
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if M[i][k]), None)
            if sw is None:
                return 0
            M[k], M[sw] = M[sw], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def rank(a: IntMatrix) -> int:
    return a.smith.rank
