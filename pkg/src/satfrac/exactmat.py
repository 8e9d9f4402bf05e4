"""Exact integer linear algebra.

Everything here works on Python ints, so results never overflow.  The
numba kernels in :mod:`satfrac._kernels` provide int64 fast paths for the
hot loops and fall back to these routines when a bound is exceeded.
"""
from __future__ import annotations

import hashlib
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np


class IntMatrix:
    """Dense, immutable matrix of arbitrary-precision integers (row-major)."""

    __slots__ = ("rows", "cols", "_data", "_np")

    def __init__(self, data: Iterable[Iterable[int]]):
        rows = tuple(tuple(int(x) for x in r) for r in data)
        if not rows or not rows[0]:
            raise ValueError("matrix dimensions must be >= 1")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged matrix rows")
        self._data = rows
        self.rows = len(rows)
        self.cols = width
        self._np = None

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self._data[i]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self._data)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self._data]

    def to_numpy(self) -> np.ndarray:
        """int64 copy; raises OverflowError if an entry does not fit."""
        if self._np is None:
            arr = np.array(self._data, dtype=object)
            if arr.size and max(abs(int(x)) for x in arr.flat) >= 2**62:
                raise OverflowError("entries exceed the int64 fast path")
            self._np = arr.astype(np.int64)
            self._np.setflags(write=False)
        return self._np

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(zip(*self._data))

    def submatrix(self, rows: Sequence[int] | None = None,
                  cols: Sequence[int] | None = None) -> "IntMatrix":
        rr = range(self.rows) if rows is None else rows
        cc = range(self.cols) if cols is None else cols
        return IntMatrix([[self._data[i][j] for j in cc] for i in rr])

    def matvec(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise ValueError(f"vector length {len(v)} != {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(r, v) if b) for r in self._data)

    def digest(self) -> str:
        """Content hash over dimensions and every entry."""
        h = hashlib.sha256(f"{self.rows} {self.cols}\n".encode())
        for r in self._data:
            h.update((" ".join(map(str, r)) + "\n").encode())
        return h.hexdigest()

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self._data == other._data

    def __hash__(self):
        return hash(self._data)

    def __repr__(self):
        return f"IntMatrix({self.rows}x{self.cols})"


def transpose(M: IntMatrix) -> IntMatrix:
    return M.T


def _as_rows(M) -> list[list[int]]:
    if isinstance(M, IntMatrix):
        return M.tolist()
    return [[int(x) for x in r] for r in M]


def rank(M) -> int:
    """Exact rank by fraction-free (Bareiss) elimination."""
    a = _as_rows(M)
    if not a:
        return 0
    m, n = len(a), len(a[0])
    r = 0
    prev = 1
    for c in range(n):
        piv = next((i for i in range(r, m) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, m):
            ai = a[i]
            f = ai[c]
            ar = a[r]
            for j in range(c + 1, n):
                ai[j] = (p * ai[j] - f * ar[j]) // prev
            ai[c] = 0
        prev = p
        r += 1
        if r == m:
            break
    return r


def determinant(M) -> int:
    """Exact determinant via the Bareiss two-term recurrence."""
    a = _as_rows(M)
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][k]), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        akk = a[k][k]
        ak = a[k]
        for i in range(k + 1, n):
            ai = a[i]
            f = ai[k]
            for j in range(k + 1, n):
                ai[j] = (akk * ai[j] - f * ak[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def rational_determinant(M) -> Fraction:
    """Plain Gaussian elimination over Q; kept as an independent check."""
    a = [[Fraction(x) for x in r] for r in _as_rows(M)]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("determinant of a non-square matrix")
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return det


def solve_unique(B, b: Sequence[int]) -> list[Fraction] | None:
    """Return the unique rational x with Bx = b, or None.

    None covers both inconsistent systems and systems with a nontrivial
    solution space (B without full column rank).
    """
    rows = _as_rows(B)
    m = len(rows)
    if len(b) != m:
        raise ValueError(f"right-hand side has length {len(b)}, expected {m}")
    n = len(rows[0]) if m else 0
    aug = [[Fraction(x) for x in r] + [Fraction(int(bi))] for r, bi in zip(rows, b)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if piv is None:
            return None
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    if any(aug[i][n] != 0 for i in range(r, m)):
        return None
    return [aug[i][n] for i in range(n)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return x0, y0, a


def kernel_lattice_basis(A) -> list[tuple[int, ...]]:
    """Integer basis of {v in Z^K : Av = 0}.

    Column-style Hermite reduction: reduce [A; I] by unimodular column
    operations until A is in column echelon form; the identity part of the
    zero columns then spans the integer kernel as a lattice.
    """
    a = _as_rows(A)
    m = len(a)
    K = len(a[0])
    # work on columns: each column is (A-part, identity-part)
    cols = [[a[i][j] for i in range(m)] + [int(k == j) for k in range(K)]
            for j in range(K)]
    start = 0
    for i in range(m):
        nz = [j for j in range(start, K) if cols[j][i]]
        if not nz:
            continue
        # gcd-reduce all entries of row i into one pivot column
        piv = nz[0]
        for j in nz[1:]:
            x, y = cols[piv][i], cols[j][i]
            s, t, g = _xgcd(x, y)
            u, w = x // g, y // g
            cp, cj = cols[piv], cols[j]
            cols[piv] = [s * p + t * q for p, q in zip(cp, cj)]
            cols[j] = [u * q - w * p for p, q in zip(cp, cj)]
        cols[start], cols[piv] = cols[piv], cols[start]
        start += 1
        if start == K:
            break
    basis = []
    for j in range(start, K):
        v = tuple(cols[j][m:])
        basis.append(v)
    return basis


def primitive_normalize(v: Sequence[int]) -> tuple[int, ...]:
    """Divide by the content and make the first nonzero entry positive."""
    g = 0
    first = 0
    for x in v:
        if x:
            if not first:
                first = x
            g = gcd(g, x)
    if g == 0:
        raise ValueError("cannot normalize the zero vector")
    if first < 0:
        g = -g
    return tuple(x // g for x in v)


def positive_part(v: Sequence[int]) -> tuple[int, ...]:
    return tuple(x if x > 0 else 0 for x in v)


def negative_part(v: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x if x < 0 else 0 for x in v)


def greedy_basis(M) -> list[int]:
    """Lexicographically first maximal set of independent columns."""
    a = _as_rows(M)
    m = len(a)
    chosen: list[int] = []
    # maintain an echelon form of chosen columns
    echelon: list[tuple[int, list[int]]] = []
    for j in range(len(a[0])):
        v = [a[i][j] for i in range(m)]
        for pr, row in echelon:
            if v[pr]:
                f, p = v[pr], row[pr]
                v = [p * x - f * y for x, y in zip(v, row)]
        pr = next((i for i in range(m) if v[i]), None)
        if pr is not None:
            echelon.append((pr, v))
            chosen.append(j)
            if len(chosen) == m:
                break
    return chosen


def read_matrix(path) -> IntMatrix:
    """Parse the '<rows> <cols>' header format; '#' lines are comments."""
    with open(path) as fh:
        return parse_matrix(fh.read())


def parse_matrix(text: str) -> IntMatrix:
    tokens: list[str] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if len(tokens) < 2:
        raise ValueError("missing '<rows> <cols>' header")
    r, c = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != r * c:
        raise ValueError(f"expected {r * c} entries, found {len(body)}")
    vals = [int(t) for t in body]
    return IntMatrix([vals[i * c:(i + 1) * c] for i in range(r)])


def format_matrix(M) -> str:
    rows = _as_rows(M)
    out = [f"{len(rows)} {len(rows[0]) if rows else 0}"]
    out.extend(" ".join(str(x) for x in r) for r in rows)
    return "\n".join(out) + "\n"


def write_matrix(M, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(M))
