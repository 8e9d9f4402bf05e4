"""Saturation of fractions: the circuit-support test and the determinant test.

A p-point fraction F is saturated iff A_F is nonsingular iff no circuit
support is contained in F.  The circuit test needs only bitmask
containment, which is why a basis computed once serves every fraction.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import NamedTuple

import numpy as np

from . import _kernels as kern
from .circuits import CircuitBasis, CircuitVector, circuits_of
from .exactmat import IntMatrix, determinant
from .model import Fraction

CIRCUIT = "circuits"
DETERMINANT = "determinant"


@dataclass(frozen=True)
class SaturationReport:
    fraction: Fraction
    saturated: bool
    method: str
    witness: CircuitVector | None = None
    determinant: int | None = None

    def __post_init__(self):
        if self.witness is not None:
            if self.saturated:
                raise ValueError("a witness implies a non-saturated fraction")
            fm = self.fraction.mask()
            if self.witness.mask & ~fm:
                raise ValueError("witness support is not inside the fraction")

    def summary(self) -> str:
        return "SATURATED" if self.saturated else "NOT SATURATED"


class SaturationChecker:
    """Circuit test with supports pre-packed as bitmasks.

    Circuits whose support exceeds p points can never fit inside a p-point
    fraction and are dropped up front.
    """

    def __init__(self, basis: CircuitBasis, p: int | None = None):
        self.basis = basis
        self.p = basis.p if p is None else p
        sizes = basis.support_sizes
        self.index = [i for i, s in enumerate(sizes.tolist()) if s <= self.p]
        masks = basis.masks
        self.masks = [masks[i] for i in self.index]

    def __len__(self):
        return len(self.masks)

    def witness_index(self, fmask: int) -> int | None:
        for i, m in zip(self.index, self.masks):
            if not m & ~fmask:
                return i
        return None

    def is_saturated_mask(self, fmask: int) -> bool:
        return all(m & ~fmask for m in self.masks)

    def check(self, f: Fraction) -> SaturationReport:
        if len(f) != self.p:
            raise ValueError(f"fraction has {len(f)} points, the model needs p = {self.p}")
        if f.design.K != self.basis.K:
            raise ValueError("fraction and basis disagree on the number of design points")
        i = self.witness_index(f.mask())
        if i is None:
            return SaturationReport(f, True, CIRCUIT)
        return SaturationReport(f, False, CIRCUIT, witness=self.basis[i])


def is_saturated_by_circuits(f: Fraction, basis: CircuitBasis, p: int | None = None) -> SaturationReport:
    return SaturationChecker(basis, p).check(f)


def is_saturated_by_determinant(f: Fraction, A: IntMatrix) -> SaturationReport:
    if len(f) != A.rows:
        raise ValueError(f"fraction has {len(f)} points, the model needs p = {A.rows}")
    if f.design.K != A.cols:
        raise ValueError("fraction and matrix disagree on the number of design points")
    d = determinant(A.submatrix(cols=f.points))
    return SaturationReport(f, d != 0, DETERMINANT, determinant=d)


class SaturationCount(NamedTuple):
    total: int
    saturated: int
    non_saturated: int


class EnumerationLimitError(RuntimeError):
    pass


def unrank_combination(r: int, n: int, k: int) -> list[int]:
    """The r-th k-subset of range(n) in lexicographic order."""
    out = []
    x = 0
    for i in range(k):
        while True:
            c = comb(n - x - 1, k - i - 1)
            if r < c:
                break
            r -= c
            x += 1
        out.append(x)
        x += 1
    return out


def _sweep_range(A_np: np.ndarray, A_rows: list, masks: np.ndarray, use_det: bool,
                 start: int, count: int) -> tuple[int, int, int]:
    p, K = A_np.shape
    c = np.array(unrank_combination(start, K, p), dtype=np.int64)
    det_sat = circ_sat = mismatch = 0
    done = 0
    while done < count:
        status, n, ds, cs, mm = kern.saturation_sweep(A_np, masks, use_det, c, count - done)
        det_sat += ds
        circ_sat += cs
        mismatch += mm
        done += n
        if status == kern.OVERFLOW:
            cols = [int(x) for x in c]
            fm = np.uint64(sum(1 << j for j in cols))
            sat_c = not any((m & ~fm) == 0 for m in masks)
            d = determinant([[A_rows[i][j] for j in cols] for i in range(p)])
            det_sat += d != 0
            circ_sat += sat_c
            mismatch += (d != 0) != sat_c
            done += 1
        if done < count:
            kern.next_comb(c, K)
    return det_sat, circ_sat, mismatch


def count_saturated(A: IntMatrix, basis: CircuitBasis | None = None, method: str = "both",
                    cap: int = 20_000_000, workers: int = 1) -> SaturationCount:
    """Classify every p-subset of columns.

    ``method`` is ``"det"``, ``"circuits"`` or ``"both"``; with ``both`` the
    two tests must agree on every single subset.
    """
    if method not in ("det", "circuits", "both"):
        raise ValueError(f"unknown method {method!r}")
    p, K = A.shape
    total = comb(K, p)
    if total > cap:
        raise EnumerationLimitError(f"C({K},{p}) = {total} subsets exceeds the cap of {cap}")
    need_circ = method in ("circuits", "both")
    if need_circ and basis is None:
        basis = circuits_of(A)
    if K > kern.MAX_K:
        return _count_py(A, basis, method)
    masks = basis.masks_u64() if need_circ else np.zeros(0, dtype=np.uint64)
    if need_circ:
        masks = masks[basis.support_sizes <= p]
    use_det = method in ("det", "both")
    A_np = A.to_numpy()
    rows = A.tolist()
    workers = max(1, min(workers, total))
    if workers == 1:
        ds, cs, mm = _sweep_range(A_np, rows, masks, use_det, 0, total)
    else:
        step = -(-total // workers)
        jobs = [(s, min(step, total - s)) for s in range(0, total, step)]
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_sweep_range, *zip(*[(A_np, rows, masks, use_det, s, n) for s, n in jobs])))
        ds, cs, mm = (sum(x) for x in zip(*parts))
    if method == "both" and (mm or ds != cs):
        raise AssertionError(f"circuit and determinant tests disagree on {mm} subsets")
    sat = ds if use_det else cs
    return SaturationCount(total, sat, total - sat)


def _count_py(A: IntMatrix, basis, method) -> SaturationCount:
    p, K = A.shape
    checker = SaturationChecker(basis, p) if basis is not None else None
    total = sat = 0
    for F in combinations(range(K), p):
        total += 1
        s_det = s_c = None
        if method in ("det", "both"):
            s_det = determinant(A.submatrix(cols=F)) != 0
        if checker is not None:
            s_c = checker.is_saturated_mask(sum(1 << j for j in F))
        if method == "both" and s_det != s_c:
            raise AssertionError(f"circuit and determinant tests disagree on {F}")
        sat += s_det if s_det is not None else s_c
    return SaturationCount(total, sat, total - sat)


def format_ilp(basis: CircuitBasis, p: int) -> str:
    """LP-format feasibility model whose 0/1 solutions are the saturated fractions.

    One row per circuit: the fraction may use at most |supp| - 1 of its
    points.  Variables y1..yK are 1-based.
    """
    if len(basis) == 0:
        raise ValueError("empty circuit basis")
    K = basis.K
    lines = ["\\ saturated fractions: no circuit support inside the fraction",
             "Minimize", " obj: 0 y1", "Subject To"]
    for i, r in enumerate(basis.vectors, 1):
        sup = np.flatnonzero(r)
        terms = " + ".join(f"y{j + 1}" for j in sup)
        lines.append(f" c{i}: {terms} <= {len(sup) - 1}")
    lines.append(" card: " + " + ".join(f"y{j + 1}" for j in range(K)) + f" = {p}")
    lines.append("Binary")
    lines.append(" " + " ".join(f"y{j + 1}" for j in range(K)))
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_ilp(basis: CircuitBasis, p: int, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_ilp(basis, p))
