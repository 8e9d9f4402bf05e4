"""Circuits of an integer matrix: enumeration, filtering and symmetry classes.

A circuit is a primitive kernel vector of A whose support is minimal.  Two
enumeration engines are provided:

``bases``
    every (p+1)-column set T of rank p is a basis B plus one extra column
    e; its one-dimensional kernel is the fundamental circuit of e over B.
    Cost grows like C(K, p+1).
``elimination``
    start from the fundamental circuits of a single basis and bring the
    basic coordinates back one at a time, combining pairs of circuits to
    cancel the new coordinate.  Cost grows with the number of circuits
    rather than with C(K, p+1), which is what makes 3x3x4-sized models
    practical.

Both produce the same canonical, sorted set; the tests cross-check them
against a brute-force search for minimal dependent column sets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations, permutations, product
from math import comb, lcm
from typing import Sequence

import numpy as np

from . import _kernels as kern
from .exactmat import (IntMatrix, determinant, greedy_basis, primitive_normalize,
                       rank, solve_unique)
from .model import FactorialDesign

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CircuitVector:
    vec: tuple[int, ...]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.vec) if x)

    @property
    def mask(self) -> int:
        m = 0
        for i, x in enumerate(self.vec):
            if x:
                m |= 1 << i
        return m

    @property
    def max_abs(self) -> int:
        return max(abs(x) for x in self.vec)

    def __len__(self):
        return len(self.vec)


def support(v) -> tuple[int, ...]:
    """Indices of the nonzero entries."""
    vec = v.vec if isinstance(v, CircuitVector) else v
    return tuple(i for i, x in enumerate(vec) if x)


def _sort_rows(rows: np.ndarray) -> np.ndarray:
    """Order by (support size, support as an index tuple, entries)."""
    if len(rows) == 0:
        return rows
    ind = (rows != 0).astype(np.int64)
    keys = [rows[:, k] for k in range(rows.shape[1] - 1, -1, -1)]
    keys += [-ind[:, k] for k in range(rows.shape[1] - 1, -1, -1)]
    keys.append(ind.sum(axis=1))
    return rows[np.lexsort(keys)]


def _canonical_rows(rows: np.ndarray) -> np.ndarray:
    """Flip each row so its first nonzero entry is positive."""
    nz = rows != 0
    first = np.argmax(nz, axis=1)
    sign = np.sign(rows[np.arange(len(rows)), first])
    sign[sign == 0] = 1
    return rows * sign[:, None]


class CircuitBasis:
    """Deduplicated, canonically signed and sorted set of kernel vectors.

    Also used for Graver bases (same file format, same ordering).
    """

    def __init__(self, vectors, K: int, p: int, matrix_hash: str = ""):
        arr = np.asarray(vectors, dtype=np.int64).reshape(-1, K)
        if len(arr):
            arr = np.unique(_canonical_rows(arr), axis=0)
        arr = _sort_rows(arr)
        arr.setflags(write=False)
        self.vectors = arr
        self.K = K
        self.p = p
        self.matrix_hash = matrix_hash
        self._masks = None

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        for r in self.vectors:
            yield CircuitVector(tuple(int(x) for x in r))

    def __getitem__(self, i) -> CircuitVector:
        return CircuitVector(tuple(int(x) for x in self.vectors[i]))

    @property
    def circuits(self) -> tuple[CircuitVector, ...]:
        return tuple(self)

    def vector_set(self) -> set[tuple[int, ...]]:
        return {tuple(int(x) for x in r) for r in self.vectors}

    @property
    def support_sizes(self) -> np.ndarray:
        return (self.vectors != 0).sum(axis=1)

    @property
    def masks(self) -> list[int]:
        """Support bitmasks as Python ints (any K)."""
        if self._masks is None:
            weights = [1 << k for k in range(self.K)]
            self._masks = [sum(w for w, x in zip(weights, r) if x) for r in self.vectors.tolist()]
        return self._masks

    def masks_u64(self) -> np.ndarray:
        if self.K > kern.MAX_K:
            raise ValueError("uint64 support masks need K <= 64")
        bits = (np.uint64(1) << np.arange(self.K, dtype=np.uint64))
        nz = (self.vectors != 0)
        return np.bitwise_or.reduce(np.where(nz, bits, np.uint64(0)), axis=1) \
            if len(self.vectors) else np.zeros(0, dtype=np.uint64)

    def __eq__(self, other):
        return (isinstance(other, CircuitBasis) and self.K == other.K
                and np.array_equal(self.vectors, other.vectors))

    def __repr__(self):
        return f"CircuitBasis({len(self)} vectors, K={self.K}, p={self.p})"


def _full_row_rank(A: IntMatrix) -> IntMatrix:
    r = rank(A)
    if r == A.rows:
        return A
    rows = greedy_basis(A.T)
    return A.submatrix(rows=rows)


def fundamental_circuit(A: IntMatrix, basis_cols: Sequence[int], e: int) -> CircuitVector:
    """Unique circuit supported on basis_cols + {e}, positive at e before normalizing."""
    basis_cols = list(basis_cols)
    if e in basis_cols:
        raise ValueError(f"column {e} is already in the basis")
    if len(basis_cols) != A.rows:
        raise ValueError(f"a basis needs {A.rows} columns, got {len(basis_cols)}")
    AB = A.submatrix(cols=basis_cols)
    if determinant(AB) == 0:
        raise ValueError("basis columns are singular")
    x = solve_unique(AB, A.column(e))
    den = lcm(*(q.denominator for q in x)) if x else 1
    v = [0] * A.cols
    v[e] = den
    for j, q in zip(basis_cols, x):
        v[j] = -int(q * den)
    return CircuitVector(primitive_normalize(v))


def _lattice_rows(A: IntMatrix, B: list[int]):
    """Fundamental circuits over basis B, one per nonbasic column."""
    inB = set(B)
    N = [j for j in range(A.cols) if j not in inB]
    return N, [fundamental_circuit(A, B, j).vec for j in N]


# -- bases engine -------------------------------------------------------------

def _bases_engine(A: IntMatrix, chunk: int = 200_000) -> np.ndarray:
    p, K = A.shape
    q = p + 1
    if K < q:
        return []
    found: set[bytes] = set()
    out_rows: list[np.ndarray] = []
    total = comb(K, q)
    try:
        An = A.to_numpy()
    except OverflowError:
        An = None
    if An is None or K > kern.MAX_K:
        return _bases_engine_py(A)
    c = np.arange(q, dtype=np.int64)
    done = 0
    buf = np.empty((chunk, K), dtype=np.int64)
    while done < total:
        want = min(chunk, total - done)
        status, processed, written = kern.cramer_sweep(An, c, want, buf)
        rows = buf[:written]
        for r in np.unique(rows, axis=0) if written else ():
            key = r.tobytes()
            if key not in found:
                found.add(key)
                out_rows.append(r.copy())
        done += processed
        if status == kern.OVERFLOW:
            v = _cramer_py(A, [int(x) for x in c])
            if v is not None:
                if max(map(abs, v)) >= 2**62:
                    raise OverflowError("circuit entries exceed int64")
                r = np.asarray(v, dtype=np.int64)
                if r.tobytes() not in found:
                    found.add(r.tobytes())
                    out_rows.append(r)
            done += 1
        if done < total:
            kern.next_comb(c, K)
    return np.array(out_rows, dtype=np.int64).reshape(-1, K)


def _cramer_py(A: IntMatrix, T: list[int]):
    v = [0] * A.cols
    nonzero = False
    for pos, j in enumerate(T):
        sub = [t for t in T if t != j]
        d = determinant(A.submatrix(cols=sub))
        v[j] = d if pos % 2 == 0 else -d
        nonzero |= d != 0
    return primitive_normalize(v) if nonzero else None


def _bases_engine_py(A: IntMatrix) -> list:
    out = set()
    for T in combinations(range(A.cols), A.rows + 1):
        v = _cramer_py(A, list(T))
        if v is not None:
            out.add(v)
    return sorted(out)


# -- elimination engine ---------------------------------------------------------

def _elimination_engine(A: IntMatrix) -> np.ndarray:
    p, K = A.shape
    B = greedy_basis(A)
    N, G = _lattice_rows(A, B)
    if not N:
        return []
    if K > kern.MAX_K:
        return _elimination_py(A, B, N, G)
    try:
        Gn = np.array(G, dtype=np.int64)
    except OverflowError:
        return _elimination_py(A, B, N, G)
    V = Gn.copy()
    Nidx = np.array(N, dtype=np.int64)
    E = 0
    for j in N:
        E |= 1 << j
    for nproc, b in enumerate(B):
        cap = max(1024, 2 * len(V))
        while True:
            out = np.empty((cap, K), dtype=np.int64)
            status, written = kern.elimination_step(V, len(V), b, Nidx, Gn,
                                                    np.uint64(E), nproc, out)
            if status != kern.FULL:
                break
            cap *= 4
        if status == kern.OVERFLOW:
            log.info("int64 guard tripped; redoing elimination with Python ints")
            return _elimination_py(A, B, N, G)
        V = np.vstack([V, out[:written]])
        E |= 1 << b
        log.debug("lifted coordinate %d: %d new, %d total", b, written, len(V))
    return V


def _elimination_py(A, B, N, G) -> list:
    """Python-int version of the elimination engine (any size, slow)."""
    V = [list(g) for g in G]
    E = set(N)
    Nrows = dict(zip(N, G))
    for nproc, b in enumerate(B):
        Eb = E | {b}
        seen = {frozenset(k for k in Eb if v[k]) for v in V}
        cand = [v for v in V if v[b]]
        new = []
        for u, w in combinations(cand, 2):
            z = [w[b] * x - u[b] * y for x, y in zip(u, w)]
            D = frozenset(k for k in E if z[k])
            if len(D) > nproc + 2 or D in seen:
                continue
            seen.add(D)
            rows = [j for j in N if j in D]
            cols = [k for k in sorted(Eb) if k not in D]
            sub = [[Nrows[j][k] for k in cols] for j in rows]
            rk = rank(sub) if rows and cols else 0
            if len(rows) - rk == 1:
                new.append(list(primitive_normalize(z)))
        V.extend(new)
        E = Eb
    return [tuple(v) for v in V]


def _pick_engine(p: int, K: int) -> str:
    # the sweep wins when the kernel is much larger than the row space
    work = comb(K, p + 1) * (p + 1) * p ** 3 / 3
    return "bases" if K - p > 2 * p and work < 2e10 else "elimination"


def enumerate_circuits(A: IntMatrix, engine: str = "auto") -> CircuitBasis:
    """All circuits of ker_Z(A), canonically signed and sorted.

    ``engine`` is ``"bases"``, ``"elimination"`` or ``"auto"``.
    """
    if rank(A) != A.rows:
        raise ValueError("matrix must have full row rank; drop redundant rows first")
    p, K = A.shape
    if engine == "auto":
        engine = _pick_engine(p, K)
    if engine == "bases":
        vecs = _bases_engine(A)
    elif engine == "elimination":
        vecs = _elimination_engine(A)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return CircuitBasis(vecs, K, p, A.digest())


def circuits_of(M: IntMatrix, engine: str = "auto") -> CircuitBasis:
    """Like enumerate_circuits but first drops linearly dependent rows."""
    R = _full_row_rank(M)
    basis = enumerate_circuits(R, engine)
    basis.matrix_hash = M.digest()
    return basis


def filter_by_support_size(basis: CircuitBasis, bound: int) -> CircuitBasis:
    if bound < 1:
        raise ValueError("support bound must be >= 1")
    keep = basis.vectors[basis.support_sizes <= bound]
    return CircuitBasis(keep, basis.K, basis.p, basis.matrix_hash)


# -- symmetry -------------------------------------------------------------------

def symmetry_group(design: FactorialDesign) -> np.ndarray:
    """Cell permutations from level relabelings and equal-level factor swaps.

    Row g is an index array with (g.v) = v[g]; the set is closed under
    inverses, so pulling back by every row covers the whole orbit.
    """
    lv = design.levels
    d = design.d
    pts = np.array(design.points(), dtype=np.int64).reshape(design.K, d)
    strides = np.array([int(np.prod(lv[i + 1:])) for i in range(d)], dtype=np.int64)
    fperms = [pi for pi in permutations(range(d)) if all(lv[pi[i]] == lv[i] for i in range(d))]
    lperms = [list(permutations(range(s))) for s in lv]
    out = []
    for pi in fperms:
        moved = pts[:, list(pi)]
        for lp in product(*lperms):
            img = np.empty_like(moved)
            for i in range(d):
                img[:, i] = np.asarray(lp[i])[moved[:, i]]
            out.append(img @ strides)
    return np.unique(np.array(out), axis=0)


def _value_key(r: np.ndarray) -> tuple[int, ...]:
    nz = np.sort(r[r != 0])
    neg = np.sort(-nz)
    return tuple(int(x) for x in min(tuple(nz), tuple(neg)))


def symmetry_classes(basis: CircuitBasis, design: FactorialDesign,
                     group: str = "cells") -> list[tuple[CircuitVector, int]]:
    """Split the basis into classes of equivalent vectors.

    ``group="design"`` gives true orbits under level relabelings and
    permutations of equal-sized factors (sizes divide the group order).
    ``group="cells"`` identifies vectors that agree up to an arbitrary
    permutation of cells and a global sign, i.e. that carry the same multiset
    of nonzero entries; this coarser notion is the one behind the usual
    class tallies (20/40/80 for the 2^4 second-order model).

    Each class is reported as (lexicographically smallest canonical member,
    number of members); classes are listed in order of first appearance.
    """
    if design.K != basis.K:
        raise ValueError("basis and design disagree on the number of cells")
    if group not in ("cells", "design"):
        raise ValueError(f"unknown group {group!r}")
    if len(basis) == 0:
        return []
    V = basis.vectors
    if group == "cells":
        buckets: dict[tuple, list[int]] = {}
        for i, r in enumerate(V):
            buckets.setdefault(_value_key(r), []).append(i)
        classes = []
        for members in buckets.values():
            rep = V[min(members, key=lambda j: tuple(V[j]))]
            classes.append((CircuitVector(tuple(int(x) for x in rep)), len(members)))
        return classes
    G = symmetry_group(design)
    index = {r.tobytes(): i for i, r in enumerate(V)}
    assigned = np.zeros(len(V), dtype=bool)
    classes = []
    for i in range(len(V)):
        if assigned[i]:
            continue
        images = _canonical_rows(V[i][G])
        images = np.unique(images, axis=0)
        members = [index[r.tobytes()] for r in images if r.tobytes() in index]
        assigned[members] = True
        rep = V[min(members, key=lambda j: tuple(V[j]))]
        classes.append((CircuitVector(tuple(int(x) for x in rep)), len(members)))
    return classes


def orbit_of(vec: Sequence[int], design: FactorialDesign) -> set[tuple[int, ...]]:
    """Canonical forms of every image of ``vec`` under the symmetry group."""
    v = np.asarray(vec, dtype=np.int64)
    imgs = _canonical_rows(v[symmetry_group(design)])
    return {tuple(int(x) for x in r) for r in np.unique(imgs, axis=0)}


# -- basis files ----------------------------------------------------------------

def format_basis(basis: CircuitBasis) -> str:
    lines = [f"{len(basis)} {basis.K}"]
    lines.extend(" ".join(str(int(x)) for x in r) for r in basis.vectors)
    return "\n".join(lines) + "\n"


def write_basis(basis: CircuitBasis, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_basis(basis))


def parse_basis(text: str, p: int = 0, matrix_hash: str = "") -> CircuitBasis:
    tokens: list[str] = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if len(tokens) < 2:
        raise ValueError("missing '<count> <K>' header")
    n, K = int(tokens[0]), int(tokens[1])
    body = [int(t) for t in tokens[2:]]
    if len(body) != n * K:
        raise ValueError(f"expected {n * K} entries, found {len(body)}")
    return CircuitBasis(np.array(body, dtype=np.int64).reshape(n, K), K, p, matrix_hash)


def read_basis(path, p: int = 0, matrix_hash: str = "") -> CircuitBasis:
    with open(path) as fh:
        return parse_basis(fh.read(), p, matrix_hash)
