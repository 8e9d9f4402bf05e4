"""Unimodularity, total unimodularity and Lawrence liftings.

A full-row-rank A is unimodular when every nonzero maximal minor is +-1.
Circuit entries are ratios of maximal minors, so A is unimodular exactly
when one basis has determinant +-1 and every circuit has entries in
{-1, 0, 1}.  That gives cheap certificates both ways; the full minor sweep
is kept for the cases where no circuit basis is at hand.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from . import _kernels as kern
from .circuits import CircuitBasis, circuits_of, fundamental_circuit
from .exactmat import IntMatrix, determinant, greedy_basis, rank


@dataclass(frozen=True)
class UnimodularityReport:
    """``None`` in a flag means undecided (work limit hit or not tested)."""

    unimodular: bool | None
    totally_unimodular: bool | None = None
    certificate: dict | None = field(default=None, compare=False)
    method: str = ""

    def __post_init__(self):
        if self.totally_unimodular is True and self.unimodular is False:
            raise ValueError("a totally unimodular matrix of full row rank is unimodular")

    def lines(self) -> list[str]:
        fmt = {True: "true", False: "false", None: "unknown"}
        out = [f"unimodular: {fmt[self.unimodular]}"]
        if self.totally_unimodular is not None or self.method.startswith("ghouila"):
            out.append(f"totally_unimodular: {fmt[self.totally_unimodular]}")
        out.append(f"method: {self.method}")
        if self.certificate:
            for k, v in self.certificate.items():
                out.append(f"certificate.{k}: {v}")
        return out


def _minor_certificate(A: IntMatrix, cols) -> dict:
    cols = sorted(int(j) for j in cols)
    return {"rows": list(range(A.rows)), "cols": cols,
            "value": determinant(A.submatrix(cols=cols))}


def _circuit_certificate(A: IntMatrix, v) -> dict:
    """A maximal minor of absolute value >= 2 built from a circuit v with a
    large entry: extend supp(v) to p + 1 columns of rank p; deleting the
    column of the largest |v_j| leaves a basis whose determinant is a
    multiple of v_j."""
    sup = [j for j, x in enumerate(v) if x]
    T = list(sup)
    r = len(sup) - 1
    for j in greedy_basis(A):
        if len(T) == A.rows + 1:
            break
        if j in T:
            continue
        if rank(A.submatrix(cols=T + [j])) > r:
            T.append(j)
            r += 1
    for j in range(A.cols):
        if len(T) == A.rows + 1:
            break
        if j not in T and rank(A.submatrix(cols=T + [j])) > r:
            T.append(j)
            r += 1
    jmax = max(sup, key=lambda j: abs(v[j]))
    cert = _minor_certificate(A, [j for j in T if j != jmax])
    assert abs(cert["value"]) >= 2
    return cert


def is_unimodular(A: IntMatrix, basis: CircuitBasis | None = None,
                  sweep_cap: int = 5_000_000, probes: int = 2000,
                  seed: int = 0) -> UnimodularityReport:
    """Decide whether every nonzero p x p minor of A is +-1.

    Order of attack: one basis determinant, the fundamental circuits of
    that basis, a random walk of ``probes`` pivots through adjacent bases
    looking for a tableau entry outside {-1, 0, 1}, then either the
    supplied circuit basis, a full sweep of the C(K, p) minors (when at
    most ``sweep_cap``), or a freshly enumerated circuit basis.
    """
    p, K = A.shape
    if rank(A) != p:
        raise ValueError("matrix is not of full row rank")
    B = greedy_basis(A)
    dB = determinant(A.submatrix(cols=B))
    if abs(dB) != 1:
        return UnimodularityReport(False, None, _minor_certificate(A, B), "basis-determinant")
    inB = set(B)
    for e in range(K):
        if e in inB:
            continue
        v = fundamental_circuit(A, B, e).vec
        if max(abs(x) for x in v) >= 2:
            return UnimodularityReport(False, None, _circuit_certificate(A, v), "fundamental-circuits")
    cert = _pivot_probe(A, B, probes, seed)
    if cert is not None:
        return UnimodularityReport(False, None, cert, "basis-pivots")
    if basis is None and comb(K, p) <= sweep_cap and K <= kern.MAX_K:
        return _sweep(A)
    if basis is None:
        basis = circuits_of(A)
    for c in basis:
        if c.max_abs >= 2:
            return UnimodularityReport(False, None, _circuit_certificate(A, c.vec), "circuits")
    return UnimodularityReport(True, None, None, "circuits")


def _tableau(A: IntMatrix, B: list[int]) -> np.ndarray:
    """B^-1 A for a basis of determinant +-1 (integral by Cramer's rule)."""
    p, K = A.shape
    rows = [[Fraction(x) for x in A.row(i)] for i in range(p)]
    for i, b in enumerate(B):
        piv = next(r for r in range(i, p) if rows[r][b] != 0)
        rows[i], rows[piv] = rows[piv], rows[i]
        inv = 1 / rows[i][b]
        rows[i] = [x * inv for x in rows[i]]
        for r in range(p):
            if r != i and rows[r][b] != 0:
                f = rows[r][b]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[i])]
    return np.array([[int(x) for x in row] for row in rows], dtype=object)


def _pivot_probe(A: IntMatrix, B: list[int], probes: int, seed: int) -> dict | None:
    """Random walk over bases adjacent by one exchange.

    With det(A_B) = +-1 the tableau T = B^-1 A is integral and T[i, e] is
    +-det(A_{B - B[i] + e}); an entry of size >= 2 exposes a bad minor.
    Pivoting on a +-1 entry keeps the tableau integral.
    """
    rng = np.random.default_rng(seed)
    B = list(B)
    T = _tableau(A, B)
    for _ in range(probes + 1):
        big = np.argwhere(np.abs(T) >= 2)
        if len(big):
            i, e = (int(x) for x in big[0])
            cols = sorted(B[:i] + B[i + 1:] + [e])
            return _minor_certificate(A, cols)
        cand = [(i, e) for i, e in np.argwhere(T != 0) if e not in B]
        if not cand:
            return None
        i, e = cand[rng.integers(len(cand))]
        piv = T[i, e]
        T[i] = T[i] * piv  # piv is +-1, so this divides by it
        for r in range(len(B)):
            if r != i and T[r, e] != 0:
                T[r] = T[r] - T[r, e] * T[i]
        B[i] = int(e)
    return None


def _sweep(A: IntMatrix) -> UnimodularityReport:
    p, K = A.shape
    A_np = A.to_numpy()
    c = np.arange(p, dtype=np.int64)
    total = comb(K, p)
    done = 0
    while done < total:
        status, n, _, val = kern.minor_sweep(A_np, c, total - done, True)
        done += n
        if status == kern.FOUND:
            return UnimodularityReport(False, None, _minor_certificate(A, c.tolist()), "minor-sweep")
        if status == kern.OVERFLOW:
            d = determinant(A.submatrix(cols=c.tolist()))
            if d != 0 and abs(d) != 1:
                return UnimodularityReport(False, None, _minor_certificate(A, c.tolist()), "minor-sweep")
            done += 1
        if done < total:
            kern.next_comb(c, K)
    return UnimodularityReport(True, None, None, "minor-sweep")


def small_minor_violation(M: IntMatrix, max_size: int = 3, max_minors: int = 2_000_000):
    """First square minor of size <= max_size outside {-1, 0, 1}, or None.

    Skips any size whose number of minors exceeds ``max_minors``.
    """
    a = np.array(M.tolist(), dtype=np.int64).reshape(M.rows, M.cols)
    for i, j in zip(*np.nonzero(np.abs(a) > 1)):
        return {"rows": [int(i)], "cols": [int(j)], "value": int(a[i, j])}
    for k in range(2, min(max_size, M.rows, M.cols) + 1):
        if comb(M.rows, k) * comb(M.cols, k) > max_minors:
            continue
        col_sets = np.array(list(combinations(range(M.cols), k)), dtype=np.int64)
        for rows in combinations(range(M.rows), k):
            sub = a[list(rows)][:, col_sets].transpose(1, 0, 2)
            # |det| <= k! for entries in {-1,0,1}, far inside float precision
            dets = np.rint(np.linalg.det(sub.astype(float))).astype(np.int64)
            bad = np.flatnonzero(np.abs(dets) > 1)
            if len(bad):
                cols = col_sets[bad[0]].tolist()
                return {"rows": list(rows), "cols": cols,
                        "value": determinant(M.submatrix(rows=list(rows), cols=cols))}
    return None


def is_totally_unimodular(A: IntMatrix, max_work: int = 200_000_000,
                          quick_size: int = 3) -> UnimodularityReport:
    """Ghouila-Houri test: A is TU iff every subset of rows admits a +-1
    signing whose signed sum lies in {-1, 0, 1}^K.

    The criterion is applied to the rows of A, or of A^t when A has more
    rows than columns (TU is transpose invariant, and 2^min(p, K) subsets
    is the cost).  Small minors are scanned first for a cheap falsifier.
    Returns ``totally_unimodular=None`` when ``max_work`` search nodes do
    not suffice.
    """
    a = A.tolist()
    if any(x not in (-1, 0, 1) for row in a for x in row):
        raise ValueError("entries must lie in {-1, 0, 1}")
    full = rank(A) == A.rows
    cert = small_minor_violation(A, quick_size)
    if cert is not None:
        return UnimodularityReport(False if full else None, False, cert, "small-minors")
    transposed = A.rows > A.cols
    M = A.T if transposed else A
    if M.rows > 40:
        return UnimodularityReport(None, None, None, "ghouila-houri (too many rows)")
    arr = np.array(M.tolist(), dtype=np.int64).reshape(M.rows, M.cols)
    status, mask, _ = kern.ghouila_houri(arr, max_work)
    if status == kern.OK:
        return UnimodularityReport(True if full else None, True, None, "ghouila-houri")
    if status == kern.FULL:
        return UnimodularityReport(None, None, None, "ghouila-houri (work limit)")
    subset = [i for i in range(M.rows) if (mask >> i) & 1]
    key = "cols" if transposed else "rows"
    return UnimodularityReport(None, False, {key: subset, "criterion": "no equitable signing"},
                               "ghouila-houri")


def lawrence_lifting(A: IntMatrix) -> IntMatrix:
    """Block matrix [[A, 0], [I, I]] of shape (p + K) x 2K.

    Its kernel is {(u, -u) : Au = 0}.
    """
    p, K = A.shape
    rows = [list(A.row(i)) + [0] * K for i in range(p)]
    for i in range(K):
        e = [0] * K
        e[i] = 1
        rows.append(e + e)
    return IntMatrix(rows)
