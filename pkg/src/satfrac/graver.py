"""Graver bases by normal-form completion.

The default ``project-and-lift`` method works on the projection of the
kernel lattice onto the nonbasic coordinates N of one basis (injective,
so every vector is stored at full length) and lifts the basic coordinates
back one at a time.  Each lift is a completion in which reduction is
conformal on the coordinates seen so far and the only sums formed are of
pairs that agree in sign on the old coordinates but disagree on the new
one.  ``completion`` is the plain variant: one completion over all
coordinates, seeded with a lattice basis of the kernel.
"""
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from . import _kernels as kern
from .circuits import CircuitBasis, _full_row_rank, _lattice_rows
from .exactmat import IntMatrix, determinant, greedy_basis, kernel_lattice_basis

log = logging.getLogger(__name__)


class ResourceLimitError(RuntimeError):
    """A configured cap on elements or work was exceeded."""


GraverBasis = CircuitBasis


def _masks(E: Sequence[int]) -> int:
    m = 0
    for k in E:
        m |= 1 << k
    return m


def _complete_np(G: np.ndarray, red: int, compat: int, lift: int,
                 max_elements: int, start: int = 0) -> np.ndarray:
    """Run the completion kernel, growing the buffer as needed."""
    m0 = len(G)
    cap = max(1024, 4 * m0)
    while True:
        if cap > 2 * max_elements + 2:
            cap = 2 * max_elements + 2
        buf = np.zeros((cap, G.shape[1]), dtype=np.int64)
        buf[:m0] = G
        status, m = kern.completion(buf, m0, np.uint64(red), np.uint64(compat), lift, start)
        if status == kern.OK:
            return buf[:m]
        if status == kern.OVERFLOW:
            raise OverflowError("int64 guard tripped during completion")
        if cap >= 2 * max_elements + 2:
            raise ResourceLimitError(f"Graver completion exceeded {max_elements} elements")
        cap *= 4


def _minimal_np(G: np.ndarray, E: int) -> np.ndarray:
    keep = kern.conformal_minimal(G, len(G), np.uint64(E))
    return G[keep]


def _project_and_lift(A: IntMatrix, max_elements: int) -> np.ndarray:
    p, K = A.shape
    B = greedy_basis(A)
    inB = set(B)
    N = [j for j in range(K) if j not in inB]
    if not N:
        return np.zeros((0, K), dtype=np.int64)
    E = _masks(N)
    if abs(determinant(A.submatrix(cols=B))) == 1:
        # projection onto N is all of Z^N; its Graver basis is {+-e_j}
        _, rows = _lattice_rows(A, B)
        G0 = np.array(rows, dtype=np.int64)
        G = np.vstack([G0, -G0])
    else:
        L = np.array(kernel_lattice_basis(A), dtype=np.int64)
        G = _complete_np(np.vstack([L, -L]), E, 0, -1, max_elements)
        G = _minimal_np(G, E)
    for b in B:
        Eb = E | (1 << b)
        G = _complete_np(G, Eb, E, b, max_elements)
        G = _minimal_np(G, Eb)
        E = Eb
        log.debug("lifted coordinate %d: %d elements", b, len(G) // 2)
    return G


def _plain_completion(A: IntMatrix, max_elements: int) -> np.ndarray:
    K = A.cols
    L = np.array(kernel_lattice_basis(A), dtype=np.int64).reshape(-1, K)
    if len(L) == 0:
        return L
    full = (1 << K) - 1
    G = _complete_np(np.vstack([L, -L]), full, 0, -1, max_elements)
    return _minimal_np(G, full)


# -- pure Python reference (any K, any entry size) --------------------------------

def _conformal(g, s, E) -> bool:
    for k in E:
        x = g[k]
        if x > 0:
            if x > s[k]:
                return False
        elif x < 0:
            if x < s[k]:
                return False
    return True


def _complete_py(G: list, red: list, compat: list, lift: int, max_elements: int) -> list:
    G = [list(g) for g in G]
    a = 1
    while a < len(G):
        for b in range(a):
            f, g = G[a], G[b]
            if any(f[k] * g[k] < 0 for k in compat):
                continue
            if lift >= 0:
                if f[lift] * g[lift] >= 0:
                    continue
            elif not any(f[k] * g[k] < 0 for k in red):
                continue
            s = [x + y for x, y in zip(f, g)]
            i = 0
            while i < len(G) and any(s[k] for k in red):
                h = G[i]
                if any(h[k] for k in red) and _conformal(h, s, red):
                    s = [x - y for x, y in zip(s, h)]
                    continue
                i += 1
            if not any(s[k] for k in red):
                continue
            G.append(s)
            G.append([-x for x in s])
            if len(G) > 2 * max_elements:
                raise ResourceLimitError(f"Graver completion exceeded {max_elements} elements")
        a += 1
    return G


def _minimal_py(G: list, E: list) -> list:
    out = []
    seen = set()
    for i, g in enumerate(G):
        if not any(g[k] for k in E) or tuple(g) in seen:
            continue
        if any(j != i and any(h[k] for k in E) and tuple(h) != tuple(g) and _conformal(h, g, E)
               for j, h in enumerate(G)):
            continue
        seen.add(tuple(g))
        out.append(g)
    return out


def _project_and_lift_py(A: IntMatrix, max_elements: int) -> list:
    B = greedy_basis(A)
    inB = set(B)
    N = [j for j in range(A.cols) if j not in inB]
    if not N:
        return []
    L = kernel_lattice_basis(A)
    G = _complete_py([list(v) for v in L] + [[-x for x in v] for v in L], N, [], -1, max_elements)
    G = _minimal_py(G, N)
    E = list(N)
    for b in B:
        G = _complete_py(G, E + [b], E, b, max_elements)
        E = E + [b]
        G = _minimal_py(G, E)
    return G


def graver_basis(A: IntMatrix, method: str = "project-and-lift",
                 max_elements: int = 2_000_000) -> GraverBasis:
    """All primitive kernel vectors of A, one per sign pair.

    ``method`` is ``"project-and-lift"``, ``"completion"`` or ``"python"``
    (the pure-Python project-and-lift, for tiny inputs or huge entries).
    """
    R = _full_row_rank(A)
    p, K = R.shape
    use_py = method == "python" or K > kern.MAX_K
    if not use_py:
        try:
            if method == "project-and-lift":
                G = _project_and_lift(R, max_elements)
            elif method == "completion":
                G = _plain_completion(R, max_elements)
            else:
                raise ValueError(f"unknown method {method!r}")
        except OverflowError:
            log.info("falling back to Python ints for the Graver completion")
            use_py = True
    if use_py:
        G = _project_and_lift_py(R, max_elements)
    return CircuitBasis(G, K, p, A.digest())


def conformal_leq(g: Sequence[int], v: Sequence[int]) -> bool:
    """g+ <= v+ and g- <= v- componentwise."""
    return all((x == 0) or (x > 0 and x <= y) or (x < 0 and x >= y) for x, y in zip(g, v))


def conformal_reduce(v: Sequence[int], G) -> tuple[int, ...]:
    """Subtract conformal reducers from G (either sign) until none applies."""
    vecs = G.vectors.tolist() if isinstance(G, CircuitBasis) else [list(g) for g in G]
    reducers = [g for g in vecs if any(g)] + [[-x for x in g] for g in vecs if any(g)]
    s = [int(x) for x in v]
    changed = True
    while changed and any(s):
        changed = False
        for g in reducers:
            if conformal_leq(g, s):
                s = [x - y for x, y in zip(s, g)]
                changed = True
                break
    return tuple(s)


def is_primitive(v: Sequence[int], A: IntMatrix, G: GraverBasis | None = None) -> bool:
    """True iff no kernel vector other than v itself is conformal to v."""
    if len(v) != A.cols:
        raise ValueError(f"vector length {len(v)} != {A.cols}")
    if any(A.matvec(v)):
        raise ValueError("vector is not in the kernel")
    if not any(v):
        raise ValueError("zero vector")
    if G is None:
        G = graver_basis(A)
    v = tuple(int(x) for x in v)
    for g in G.vectors.tolist():
        for h in (tuple(g), tuple(-x for x in g)):
            if h != v and conformal_leq(h, v):
                return False
    return True

