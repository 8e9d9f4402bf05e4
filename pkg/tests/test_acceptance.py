"""Acceptance criteria 1-10, each at its stated time limit.

Every test records a ``criterion N: PASS/FAIL`` line (shown in the terminal
summary).  Two published claims do not survive exact computation; they are
kept verbatim as strict xfails so the suite reports them as FAIL instead of
quietly dropping them.
"""
import time

import numpy as np
import pytest

from satfrac.circuits import circuits_of, symmetry_classes
from satfrac.exactmat import IntMatrix, determinant, primitive_normalize, rank
from satfrac.graver import graver_basis, is_primitive
from satfrac.model import Fraction, build_model_matrix, full_design, model_design_matrix, \
    model_with_interactions
from satfrac.sampler import (ChainConfig, ChainStats, margin_matrix, margins, sample_saturated,
                             step, universal_moves)
from satfrac.saturation import count_saturated, is_saturated_by_circuits, is_saturated_by_determinant
from satfrac.unimodular import is_totally_unimodular, is_unimodular, lawrence_lifting

import reference_values as ref
from oracles import dfs_circuits, graver_bruteforce, q_rank

# the printed Graver element of the 3x3x4 model, with its "1,1-1" read as 1, 1, -1
G334 = (-1, 1, 1, -1, 1, 0, 0, -1, 0, -1, -1, 2, 0, -1, 0, 1, -1, 2, -1, 0, 1, -1, 1, -1,
        1, 0, -1, 0, 0, -2, 1, 1, -1, 2, 0, -1)


def value_class(v):
    nz = sorted(x for x in v if x)
    return min(tuple(nz), tuple(sorted(-x for x in nz)))


def class_sizes(basis, design, group="cells"):
    return sorted(n for _, n in symmetry_classes(basis, design, group))


@pytest.fixture(scope="module")
def m334():
    design = full_design((3, 3, 4))
    A = model_design_matrix((3, 3, 4), 2)
    t0 = time.perf_counter()
    C = circuits_of(A)
    G = graver_basis(A)
    return design, A, C, G, time.perf_counter() - t0


def test_criterion_1_model_matrix(verdict):
    t0 = time.perf_counter()
    d = full_design((2, 2, 2, 2))
    spec = model_with_interactions(d, 2)
    X = build_model_matrix(d, spec)
    ok = X.tolist() == ref.X_2222 and rank(X) == 11 and spec.column_labels() == ref.LABELS_2222
    dt = time.perf_counter() - t0
    verdict(1, ok and dt < 1, f"X is 16x11, rank {rank(X)}, {dt:.2f}s")
    assert ok and dt < 1


def test_criterion_2_circuits_2222(verdict):
    t0 = time.perf_counter()
    d = full_design((2, 2, 2, 2))
    A = model_design_matrix((2, 2, 2, 2), 2)
    C = circuits_of(A)
    classes = symmetry_classes(C, d)
    dt = time.perf_counter() - t0
    ok = len(C) == ref.N_CIRCUITS_2222 and class_sizes(C, d) == list(ref.CLASSES_2222)
    vs = C.vector_set()
    shapes = set()
    for f, size in zip((ref.f1, ref.f2, ref.f3), ref.CLASSES_2222):
        v = primitive_normalize(f)
        ok &= v in vs
        rep, n = next((r, n) for r, n in classes if value_class(r.vec) == value_class(v))
        ok &= n == size
        shapes.add((rep.max_abs, len(rep.support), n))
    ok &= shapes == {(1, 8, 20), (2, 10, 40), (3, 12, 80)}
    verdict(2, ok and dt < 10, f"{len(C)} circuits, classes {class_sizes(C, d)}, {dt:.2f}s")
    assert ok and dt < 10


def test_criterion_3_exhaustive_count(verdict):
    t0 = time.perf_counter()
    A = model_design_matrix((2, 2, 2, 2), 2)
    res = count_saturated(A, circuits_of(A), method="both")  # raises on any disagreement
    dt = time.perf_counter() - t0
    ok = tuple(res) == (ref.N_SUBSETS_2222, ref.N_SATURATED_2222, ref.N_NONSATURATED_2222)
    verdict(3, ok and dt < 30, f"{res.total} / {res.saturated} / {res.non_saturated}, {dt:.2f}s")
    assert ok and dt < 30


def _reference_fractions():
    d = full_design((2, 2, 2, 2))
    A = model_design_matrix((2, 2, 2, 2), 2)
    C = circuits_of(A)
    return A, C, Fraction.from_tuples(d, ref.F1), Fraction.from_tuples(d, ref.F2)


@pytest.mark.xfail(strict=True, reason="the published point lists carry exchanged labels; "
                   "the first list is singular (det 0), the second has det +-1")
def test_criterion_4_as_stated(verdict):
    A, C, F1, F2 = _reference_fractions()
    r1 = is_saturated_by_circuits(F1, C)
    r2 = is_saturated_by_circuits(F2, C)
    ok = r1.saturated and not r2.saturated
    verdict(4, ok, "first list saturated: %s, second list saturated: %s" % (r1.saturated, r2.saturated))
    assert ok


def test_criterion_4_labels_exchanged(verdict):
    t0 = time.perf_counter()
    A, C, F1, F2 = _reference_fractions()
    sat = is_saturated_by_circuits(F2, C)
    non = is_saturated_by_circuits(F1, C)
    ok = sat.saturated and abs(is_saturated_by_determinant(F2, A).determinant) == 1
    ok &= not non.saturated and is_saturated_by_determinant(F1, A).determinant == 0
    ok &= value_class(non.witness.vec) == value_class(ref.f2)
    ok &= set(non.witness.support) <= set(F1.points)
    dt = time.perf_counter() - t0
    verdict("4 (labels exchanged)", ok and dt < 1, f"witness max|v| = {non.witness.max_abs}, {dt:.2f}s")
    assert ok and dt < 1


def test_criterion_5_234(verdict):
    t0 = time.perf_counter()
    A = model_design_matrix((2, 3, 4), 2)
    C = circuits_of(A)
    G = graver_basis(A)
    dt = time.perf_counter() - t0
    sizes = dict(zip(*np.unique(C.support_sizes, return_counts=True)))
    ok = C == G and len(C) == ref.N_CIRCUITS_234
    ok &= {int(k): int(v) for k, v in sizes.items()} == ref.SUPPORT_234
    verdict(5, ok and dt < 30, f"{len(C)} circuits = Graver, supports {ref.SUPPORT_234}, {dt:.2f}s")
    assert ok and dt < 30


@pytest.fixture(scope="module")
def m25():
    d = full_design((2,) * 5)
    t0 = time.perf_counter()
    A1 = model_design_matrix((2,) * 5, 1)
    C1 = circuits_of(A1)
    k1 = len(symmetry_classes(C1, d))
    t1 = time.perf_counter() - t0
    t0 = time.perf_counter()
    A3 = model_design_matrix((2,) * 5, 3)
    C3 = circuits_of(A3)
    G3 = graver_basis(A3)
    k3 = len(symmetry_classes(C3, d))
    t3 = time.perf_counter() - t0
    return (C1, k1, t1), (A3, C3, G3, k3, t3)


@pytest.mark.slow
def test_criterion_6_counts(verdict, m25):
    C, k, dt = m25[0]
    s = C.support_sizes
    ok = (len(C), k) == (ref.N_CIRCUITS_25_1, ref.N_CLASSES_25_1)
    ok &= int(s.min()) >= 4 and int(s.max()) == 7
    verdict("6 (all parts but the support split)", ok and dt < 600,
            f"{len(C)} circuits, {k} classes, supports 4..7, {dt:.1f}s")
    assert ok and dt < 600


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="exact split is 309,056 of support 7 and 44,560 of "
                   "support 4-6 (720 + 2,080 + 41,760); the total agrees")
def test_criterion_6_support_split_as_stated(verdict, m25):
    C, _, _ = m25[0]
    s = C.support_sizes
    n7, n46 = int((s == 7).sum()), int(((s >= 4) & (s <= 6)).sum())
    ok = (n7, n46) == (ref.N_SUPPORT7_25_1, ref.N_SUPPORT4TO6_25_1)
    verdict(6, ok, f"support 7: {n7} (expected {ref.N_SUPPORT7_25_1}), "
                   f"support 4-6: {n46} (expected {ref.N_SUPPORT4TO6_25_1})")
    assert ok


@pytest.mark.slow
def test_criterion_7_counts(verdict, m25):
    A, C, G, k, dt = m25[1]
    ok = C == G and len(C) == ref.N_CIRCUITS_25_3 and k == ref.N_CLASSES_25_3
    # the largest supports are genuine circuits: every proper subset is independent
    v = C.vectors[int(np.argmax(C.support_sizes))]
    S = np.flatnonzero(v).tolist()
    rows = A.tolist()
    ok &= all(q_rank([[r[j] for j in S if j != x] for r in rows]) == len(S) - 1 for x in S)
    verdict("7 (all parts but the support bound)", ok,
            f"{len(C)} circuits = Graver, {k} classes, {dt:.1f}s")
    assert ok


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="2,112 circuits have support 27 = p + 1")
def test_criterion_7_support_bound_as_stated(verdict, m25):
    A, C, G, k, dt = m25[1]
    mx = int(C.support_sizes.max())
    verdict(7, mx <= 26, f"max support {mx}, {int((C.support_sizes == 27).sum())} of size 27")
    assert mx <= 26


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="exact count with support <= 24 is 15,402 in both bases "
                   "(17,994 minus 2,592 of support 25), not 15,302")
def test_criterion_8_support_count_as_stated(verdict, m334):
    design, A, C, G, _ = m334
    n24c = int((C.support_sizes <= 24).sum())
    n24g = int((G.support_sizes <= 24).sum())
    ok = n24c == n24g == ref.N_SUPPORT_LE24_334
    verdict(8, ok, f"support <= 24: {n24c} circuits, {n24g} Graver, expected {ref.N_SUPPORT_LE24_334}")
    assert ok


def test_criterion_9_sampler(verdict):
    t0 = time.perf_counter()
    A, C, F1, F2 = _reference_fractions()
    M = margin_matrix(F1.design)
    MC = circuits_of(M)
    moves = universal_moves(M)
    stats = ChainStats()
    out = list(sample_saturated(F1, C, moves, ChainConfig(seed=7), n=5000, stats=stats))
    m0 = margins(F1)
    ok = len(MC) == ref.N_MARGIN_CIRCUITS_2222 and len(moves) == ref.N_MOVES_2222
    ok &= len(out) == 5000
    for f in set(out):
        ok &= bool((margins(f) == m0).all())
        ok &= determinant(A.submatrix(cols=f.points)) != 0
    dt = time.perf_counter() - t0
    verdict(9, ok and dt < 120, f"{len(MC)} circuits, {len(moves)} moves, {len(out)} fractions "
                                f"({len(set(out))} distinct), {dt:.1f}s")
    assert ok and dt < 120


# -- criterion 10: properties with no published constants ------------------------

def _antichain_and_primitive(A, basis):
    M = np.array(A.tolist(), dtype=object)
    if len(basis) and np.any(M.dot(basis.vectors.T.astype(object))):
        return False
    if any(tuple(v) != primitive_normalize(v) for v in basis.vectors.tolist()):
        return False
    masks = basis.masks
    return all(a & ~b for i, a in enumerate(masks) for j, b in enumerate(masks) if i != j)


def _random_full_rank(rng, K, p, kind):
    if kind == 0:
        rows = rng.integers(0, 2, size=(p, K))
    elif kind == 1:
        rows = rng.integers(-2, 3, size=(p, K))
    else:
        base = rng.integers(-1, 2, size=(p, max(1, K // 2)))
        rows = base[:, rng.integers(0, base.shape[1], size=K)] * rng.integers(1, 3, size=K)
    rows = rows.tolist()
    return rows if q_rank(rows) == p else None


def _box_too_big(rows):
    C = dfs_circuits(rows)
    if not C:
        return False
    K, r = len(rows[0]), q_rank(rows)
    b = (K - r) * max(max(abs(x) for x in c) for c in C)
    return (2 * b + 1) ** (K - r) > 500_000


def _tu_samples(rng):
    """Interval matrices (consecutive ones) and digraph incidence matrices."""
    out = []
    for _ in range(6):
        m, n = int(rng.integers(2, 5)), int(rng.integers(3, 7))
        rows = []
        for _ in range(m):
            a = int(rng.integers(0, n))
            b = int(rng.integers(a + 1, n + 1))
            rows.append([int(a <= j < b) for j in range(n)])
        out.append(rows)
        nodes, arcs = int(rng.integers(2, 5)), int(rng.integers(2, 7))
        inc = [[0] * arcs for _ in range(nodes)]
        for e in range(arcs):
            u, v = rng.choice(nodes, size=2, replace=False)
            inc[u][e], inc[v][e] = 1, -1
        out.append(inc)
    return out


def test_criterion_10_properties(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    parts = {}

    # circuits against the DFS oracle, antichain, kernel and primitivity
    n = 0
    ok = True
    while n < 200:
        K = int(rng.integers(2, 10))
        p = int(rng.integers(1, min(K, 5) + 1))
        rows = _random_full_rank(rng, K, p, n % 3)
        if rows is None:
            continue
        A = IntMatrix(rows)
        C = circuits_of(A)
        ok &= C.vector_set() == dfs_circuits(rows) and _antichain_and_primitive(A, C)
        n += 1
    parts["circuits = DFS oracle (200, K <= 9), antichain, Av = 0, primitive"] = ok

    # Graver against brute force
    n = 0
    ok = True
    while n < 25:
        K = int(rng.integers(3, 8))
        p = int(rng.integers(max(1, K - 4), K))
        rows = rng.integers(-1 if n % 2 else 0, 3, size=(p, K)).tolist()
        if q_rank(rows) != p or _box_too_big(rows):
            continue
        A = IntMatrix(rows)
        G = graver_basis(A)
        ok &= G.vector_set() == graver_bruteforce(rows)
        ok &= all(not any(A.matvec(g)) and tuple(g) == primitive_normalize(g) for g in G.vectors.tolist())
        ok &= circuits_of(A).vector_set() <= G.vector_set()
        n += 1
    parts["Graver = brute force (25, K <= 7)"] = ok

    # TU => unimodular, and Lawrence lifting keeps TU
    ok_u = ok_l = True
    for rows in _tu_samples(rng):
        M = IntMatrix(rows)
        ok_u &= is_totally_unimodular(M).totally_unimodular is True
        keep = []
        for r in rows:
            if q_rank(keep + [r]) > len(keep):
                keep.append(r)
        ok_u &= is_unimodular(IntMatrix(keep)).unimodular is True
        if M.rows + M.cols <= 14:
            ok_l &= is_totally_unimodular(lawrence_lifting(M)).totally_unimodular is True
    parts["TU implies unimodular"] = ok_u
    parts["Lawrence lifting preserves TU (p + K <= 14)"] = ok_l

    # chain: margins conserved at every step; equal seeds give equal runs
    A, C, F1, F2 = _reference_fractions()
    moves = universal_moves(margin_matrix(F1.design))
    Mm = margin_matrix(F1.design).to_numpy()
    t = F1.indicator()
    m0 = Mm @ t
    ok = True
    step_rng = np.random.default_rng(3)
    for _ in range(2000):
        t = step(t, moves, step_rng)
        ok &= bool((Mm @ t == m0).all()) and set(np.unique(t).tolist()) <= {0, 1}
    parts["margin conservation at every step"] = ok
    cfg = ChainConfig(seed=5, burn_in=50, thin=3)
    runs = [list(sample_saturated(F1, C, moves, cfg, n=300)) for _ in range(2)]
    other = list(sample_saturated(F1, C, moves, ChainConfig(seed=6, burn_in=50, thin=3), n=300))
    parts["seed determinism"] = runs[0] == runs[1] and runs[0] != other

    dt = time.perf_counter() - t0
    ok = all(parts.values()) and dt < 300
    failed = [k for k, v in parts.items() if not v]
    verdict(10, ok, f"{len(parts)} property groups, {dt:.1f}s" + (f"; failed: {failed}" if failed else ""))
    assert ok, failed
