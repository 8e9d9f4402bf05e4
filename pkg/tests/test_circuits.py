import numpy as np
import pytest

from satfrac.circuits import (CircuitBasis, CircuitVector, circuits_of, enumerate_circuits,
                              filter_by_support_size, format_basis, fundamental_circuit, orbit_of,
                              parse_basis, read_basis, support, symmetry_classes, symmetry_group,
                              write_basis)
from satfrac.exactmat import IntMatrix, primitive_normalize, rank
from satfrac.model import full_design, model_design_matrix

import reference_values as ref
from oracles import dfs_circuits, q_rank


def check_circuit_basis(A, basis):
    M = np.array(A.tolist(), dtype=object)
    V = basis.vectors
    assert not np.any(M.dot(V.T.astype(object))), "kernel"
    for v in V.tolist():
        assert tuple(v) == primitive_normalize(v)
    masks = basis.masks
    for i, a in enumerate(masks):
        for j, b in enumerate(masks):
            if i != j:
                assert a & ~b, "support of one circuit inside another"


def test_tiny_examples():
    C = enumerate_circuits(IntMatrix([[1, 1, 1]]))
    assert C.vector_set() == {(1, -1, 0), (1, 0, -1), (0, 1, -1)}
    A = IntMatrix([[1, 0, 1], [0, 1, 1]])
    assert fundamental_circuit(A, [0, 1], 2).vec == (1, 1, -1)
    assert enumerate_circuits(IntMatrix.identity(3)).vector_set() == set()


def test_fundamental_circuit_errors(A16):
    with pytest.raises(ValueError):
        fundamental_circuit(IntMatrix([[1, 0, 1], [0, 1, 1]]), [0, 1], 0)
    with pytest.raises(ValueError):
        fundamental_circuit(IntMatrix([[1, 2, 1], [2, 4, 1]]), [0, 1], 2)
    with pytest.raises(ValueError):
        fundamental_circuit(A16, [0, 1], 2)


def test_fundamental_circuit_recovers_f1(A16):
    sup = support(ref.f1)
    e = sup[-1]
    B = [j for j in sup if j != e]
    for j in range(16):
        if len(B) == 11:
            break
        if j not in sup and rank(A16.submatrix(cols=B + [j])) == len(B) + 1:
            B.append(j)
    v = fundamental_circuit(A16, B, e)
    assert v.vec in (primitive_normalize(ref.f1),)
    assert v.support == sup


def test_support():
    assert support(ref.f1) == tuple(range(4, 12))
    assert len(support(ref.f3)) == 12
    assert support((0, 0, 5)) == (2,)
    assert CircuitVector(ref.f2).max_abs == 2


def test_rejects_rank_deficient():
    with pytest.raises(ValueError):
        enumerate_circuits(IntMatrix([[1, 1, 0], [2, 2, 0]]))
    # circuits_of drops dependent rows first
    assert circuits_of(IntMatrix([[1, 1, 0], [2, 2, 0]])).vector_set() == {(0, 0, 1), (1, -1, 0)}


@pytest.mark.parametrize("engine", ["bases", "elimination"])
def test_random_matrices_against_dfs_oracle(engine):
    rng = np.random.default_rng(2024 if engine == "bases" else 7)
    checked = 0
    while checked < 200:
        K = int(rng.integers(2, 10))
        p = int(rng.integers(1, min(K, 5) + 1))
        kind = checked % 3
        if kind == 0:
            rows = rng.integers(0, 2, size=(p, K))
        elif kind == 1:
            rows = rng.integers(-2, 3, size=(p, K))
        else:
            # repeated and proportional columns exercise small circuits
            base = rng.integers(-1, 2, size=(p, max(1, K // 2)))
            rows = base[:, rng.integers(0, base.shape[1], size=K)] * rng.integers(1, 3, size=K)
        rows = rows.tolist()
        if q_rank(rows) != p:
            continue
        A = IntMatrix(rows)
        C = enumerate_circuits(A, engine=engine)
        assert C.vector_set() == dfs_circuits(rows), rows
        check_circuit_basis(A, C)
        checked += 1


def test_2222_circuits(A16, C16):
    assert len(C16) == ref.N_CIRCUITS_2222
    check_circuit_basis(A16, C16)
    for f in (ref.f1, ref.f2, ref.f3):
        assert primitive_normalize(f) in C16.vector_set()
    assert sorted(set(C16.support_sizes.tolist())) == [8, 10, 12]


def test_engines_agree_and_are_deterministic(A16, C16):
    B = enumerate_circuits(A16, engine="bases")
    E = enumerate_circuits(A16, engine="elimination")
    assert format_basis(B) == format_basis(E) == format_basis(C16)
    assert B.matrix_hash == A16.digest()


def test_sort_order(C16):
    keys = [(len(c.support), c.support, c.vec) for c in C16]
    assert keys == sorted(keys)


def test_234_circuits():
    C = circuits_of(model_design_matrix((2, 3, 4), 2))
    assert len(C) == ref.N_CIRCUITS_234
    sizes = C.support_sizes.tolist()
    assert {s: sizes.count(s) for s in set(sizes)} == ref.SUPPORT_234


def test_filter_by_support_size(C16):
    assert len(filter_by_support_size(C16, 11)) == 60
    assert len(filter_by_support_size(C16, 16)) == 140
    assert len(filter_by_support_size(C16, 7)) == 0
    with pytest.raises(ValueError):
        filter_by_support_size(C16, 0)


def test_classes_2222(C16, design16):
    classes = symmetry_classes(C16, design16)
    assert sorted(n for _, n in classes) == sorted(ref.CLASSES_2222)
    by_size = {n: rep for rep, n in classes}
    for n, f in zip(ref.CLASSES_2222, (ref.f1, ref.f2, ref.f3)):
        rep = by_size[n]
        assert rep.max_abs == max(map(abs, f))
        assert len(rep.support) == len(support(f))
    assert sum(n for _, n in classes) == len(C16)


def test_design_orbits_2222(C16, design16):
    G = symmetry_group(design16)
    assert len(G) == 384
    orbits = symmetry_classes(C16, design16, group="design")
    sizes = sorted(n for _, n in orbits)
    assert sum(sizes) == 140
    assert all(384 % n == 0 for n in sizes)
    # each coarse class is a union of true orbits
    for rep, n in orbits:
        assert orbit_of(rep.vec, design16) <= C16.vector_set()
    # the published representatives lie in distinct coarse classes
    for f in (ref.f1, ref.f2, ref.f3):
        assert len(orbit_of(f, design16)) in sizes


def test_single_element_basis_one_class():
    d = full_design((2,))
    C = circuits_of(IntMatrix([[1, 1]]))
    assert symmetry_classes(C, d) == [(CircuitVector((1, -1)), 1)]
    assert symmetry_classes(C, d, group="design") == [(CircuitVector((1, -1)), 1)]


def test_basis_file_roundtrip(tmp_path, C16):
    path = tmp_path / "c.txt"
    write_basis(C16, path)
    assert path.read_text().splitlines()[0] == "140 16"
    assert read_basis(path, 11) == C16
    with pytest.raises(ValueError):
        parse_basis("2 3\n1 -1 0\n")


def test_basis_canonicalizes_input():
    B = CircuitBasis([[-1, 1, 0], [1, -1, 0], [0, -1, 1]], 3, 1)
    assert B.vector_set() == {(1, -1, 0), (0, 1, -1)}
    assert len(B) == 2
