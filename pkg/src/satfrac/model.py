"""Factorial designs, model specifications and fractions."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .exactmat import IntMatrix


@dataclass(frozen=True)
class FactorialDesign:
    """Full factorial design s_1 x ... x s_d.

    Points are indexed lexicographically with the last factor varying
    fastest, so point 1 of a 2^4 design is (0, 0, 0, 1).
    """

    levels: tuple[int, ...]

    def __post_init__(self):
        levels = tuple(int(s) for s in self.levels)
        if not levels:
            raise ValueError("a design needs at least one factor")
        if any(s < 2 for s in levels):
            raise ValueError(f"every factor needs >= 2 levels, got {levels}")
        object.__setattr__(self, "levels", levels)

    @property
    def d(self) -> int:
        return len(self.levels)

    @property
    def K(self) -> int:
        return prod(self.levels)

    def point_tuple(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.K:
            raise IndexError(f"point index {index} outside [0, {self.K})")
        out = []
        for s in reversed(self.levels):
            index, r = divmod(index, s)
            out.append(r)
        return tuple(reversed(out))

    def point_index(self, point: Sequence[int]) -> int:
        if len(point) != self.d:
            raise ValueError(f"point {tuple(point)} has wrong length for {self.d} factors")
        idx = 0
        for x, s in zip(point, self.levels):
            if not 0 <= x < s:
                raise ValueError(f"level {x} out of range for a {s}-level factor")
            idx = idx * s + int(x)
        return idx

    def points(self) -> list[tuple[int, ...]]:
        return list(product(*(range(s) for s in self.levels)))

    def __str__(self):
        return "x".join(map(str, self.levels))


def full_design(levels: Sequence[int]) -> FactorialDesign:
    return FactorialDesign(tuple(levels))


@dataclass(frozen=True)
class ModelSpec:
    """Ordered effect terms; each term is a sorted tuple of 0-based factor indices.

    The number of columns ``p`` is always derived from the terms.
    """

    design: FactorialDesign
    terms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        terms = tuple(tuple(sorted(t)) for t in self.terms)
        if len(set(terms)) != len(terms):
            raise ValueError("duplicate model terms")
        for t in terms:
            if len(set(t)) != len(t) or any(not 0 <= i < self.design.d for i in t):
                raise ValueError(f"term {t} is not a subset of the factors")
        object.__setattr__(self, "terms", terms)

    @property
    def p(self) -> int:
        lv = self.design.levels
        return sum(prod(lv[i] - 1 for i in t) for t in self.terms)

    def column_labels(self) -> list[str]:
        """Labels such as '1', 'a0', 'a0b1' (factor letters a, b, c, ...)."""
        labels = []
        for t in self.terms:
            if not t:
                labels.append("1")
                continue
            for lvl in product(*(range(self.design.levels[i] - 1) for i in t)):
                labels.append("".join(f"{_letter(i)}{l}" for i, l in zip(t, lvl)))
        return labels


def _letter(i: int) -> str:
    return chr(ord("a") + i) if i < 26 else f"f{i}_"


def model_with_interactions(design: FactorialDesign, max_order: int) -> ModelSpec:
    """Hierarchical model with every interaction up to ``max_order`` factors."""
    if not 1 <= max_order <= design.d:
        raise ValueError(f"max_order must be in [1, {design.d}], got {max_order}")
    terms: list[tuple[int, ...]] = [()]
    for k in range(1, max_order + 1):
        terms.extend(combinations(range(design.d), k))
    return ModelSpec(design, tuple(terms))


def build_model_matrix(design: FactorialDesign, spec: ModelSpec) -> IntMatrix:
    """K x p 0/1 model matrix X with last-level-dropped indicator coding."""
    if spec.design != design:
        raise ValueError("model spec was built for a different design")
    pts = np.array(design.points(), dtype=np.int64).reshape(design.K, design.d)
    cols = []
    for t in spec.terms:
        if not t:
            cols.append(np.ones(design.K, dtype=np.int64))
            continue
        for lvl in product(*(range(design.levels[i] - 1) for i in t)):
            c = np.ones(design.K, dtype=np.int64)
            for i, l in zip(t, lvl):
                c &= pts[:, i] == l
            cols.append(c)
    X = np.stack(cols, axis=1)
    return IntMatrix(X.tolist())


def design_matrix_A(X: IntMatrix) -> IntMatrix:
    """A = X^t: rows are parameters, columns are design points."""
    return X.T


def model_design_matrix(levels: Sequence[int], max_order: int) -> IntMatrix:
    """Shortcut: A for the hierarchical model of the given order."""
    design = full_design(levels)
    return design_matrix_A(build_model_matrix(design, model_with_interactions(design, max_order)))


@dataclass(frozen=True)
class Fraction:
    """A subset of design points, stored as sorted point indices."""

    design: FactorialDesign
    points: tuple[int, ...] = field(default=())

    def __post_init__(self):
        pts = tuple(sorted(int(i) for i in self.points))
        if len(set(pts)) != len(pts):
            raise ValueError("fraction contains duplicate points")
        if pts and (pts[0] < 0 or pts[-1] >= self.design.K):
            raise ValueError(f"point index outside [0, {self.design.K})")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_tuples(cls, design: FactorialDesign, tuples: Iterable[Sequence[int]]) -> "Fraction":
        return cls(design, tuple(design.point_index(t) for t in tuples))

    def __len__(self):
        return len(self.points)

    def tuples(self) -> list[tuple[int, ...]]:
        return [self.design.point_tuple(i) for i in self.points]

    def indicator(self) -> np.ndarray:
        y = np.zeros(self.design.K, dtype=np.int64)
        y[list(self.points)] = 1
        return y

    def mask(self) -> int:
        m = 0
        for i in self.points:
            m |= 1 << i
        return m


def fraction_to_table(f: Fraction) -> np.ndarray:
    """0/1 tensor N(F) of shape ``levels``."""
    return f.indicator().reshape(f.design.levels)


def table_to_fraction(table, design: FactorialDesign | None = None) -> Fraction:
    t = np.asarray(table)
    if design is None:
        design = FactorialDesign(tuple(t.shape))
    if tuple(t.shape) != design.levels:
        raise ValueError(f"table shape {t.shape} does not match design {design.levels}")
    flat = t.reshape(-1)
    if not np.all((flat == 0) | (flat == 1)):
        raise ValueError("table entries must be 0 or 1")
    return Fraction(design, tuple(int(i) for i in np.flatnonzero(flat)))


def parse_fraction(text: str, design: FactorialDesign) -> Fraction:
    """One point per line as a space-separated level tuple; '#' lines ignored."""
    pts = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        pts.append(tuple(int(x) for x in line.replace(",", " ").split()))
    return Fraction.from_tuples(design, pts)


def read_fraction(path, design: FactorialDesign) -> Fraction:
    with open(path) as fh:
        return parse_fraction(fh.read(), design)


def format_fraction(f: Fraction) -> str:
    return "".join(" ".join(map(str, t)) + "\n" for t in f.tuples())


def write_fraction(f: Fraction, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_fraction(f))
