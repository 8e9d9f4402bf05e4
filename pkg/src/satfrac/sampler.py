"""Random saturated fractions.

Two samplers: uniform p-subsets filtered by the circuit criterion, and a
Markov chain over 0/1 tables with fixed one-way margins whose moves are
the {-1, 0, 1} circuits of the margin matrix.  States are kept as cell
bitmasks, so a proposal costs two mask tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .circuits import CircuitBasis, circuits_of
from .exactmat import IntMatrix
from .model import FactorialDesign, Fraction
from .saturation import SaturationChecker


def margin_matrix(design: FactorialDesign) -> IntMatrix:
    """One indicator row per (factor, level); M @ N(F) lists all one-way margins."""
    pts = np.array(design.points(), dtype=np.int64).reshape(design.K, design.d)
    rows = [(pts[:, i] == l).astype(np.int64) for i, s in enumerate(design.levels) for l in range(s)]
    return IntMatrix(np.array(rows).tolist())


@dataclass(frozen=True)
class MoveSet:
    moves: np.ndarray
    source_hash: str = ""

    def __post_init__(self):
        m = np.asarray(self.moves, dtype=np.int64)
        if m.ndim != 2:
            m = m.reshape(0 if m.size == 0 else -1, m.shape[-1] if m.ndim else 0)
        if m.size and np.abs(m).max() > 1:
            raise ValueError("moves must have entries in {-1, 0, 1}")
        if m.size and not np.all(np.any(m != 0, axis=1)):
            raise ValueError("zero move")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "moves", m)

    def __len__(self):
        return len(self.moves)

    @property
    def K(self) -> int:
        return self.moves.shape[1]

    def masks(self) -> tuple[list[int], list[int]]:
        """Positive and negative supports as Python int bitmasks."""
        pos, neg = [], []
        for r in self.moves:
            pos.append(sum(1 << int(j) for j in np.flatnonzero(r > 0)))
            neg.append(sum(1 << int(j) for j in np.flatnonzero(r < 0)))
        return pos, neg


def universal_moves(M: IntMatrix) -> MoveSet:
    """Circuits of M with every entry in {-1, 0, 1}."""
    C = circuits_of(M)
    V = C.vectors
    keep = V[np.abs(V).max(axis=1) <= 1] if len(V) else V
    return MoveSet(keep.reshape(-1, M.cols), M.digest())


@dataclass(frozen=True)
class ChainConfig:
    seed: int | None = 0
    steps: int | None = None
    burn_in: int = 1000
    thin: int = 10
    require_saturated: bool = True

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.steps is not None and self.steps <= self.burn_in:
            raise ValueError("steps must exceed burn_in")


@dataclass
class ChainStats:
    steps: int = 0
    accepted_moves: int = 0
    recorded: int = 0
    emitted: int = 0
    discarded: int = 0
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "extra"}
        d.update(self.extra)
        return d


def _draw(rng: np.random.Generator, n: int) -> tuple[int, int]:
    """Move index and sign for one proposal (shared by step and the chain)."""
    i = int(rng.integers(n))
    eps = 1 if rng.integers(2) else -1
    return i, eps


def step(table, moves: MoveSet, rng: np.random.Generator) -> np.ndarray:
    """One proposal: table + eps*m if that stays 0/1, else table."""
    t = np.asarray(table, dtype=np.int64).reshape(-1)
    if len(moves) == 0:
        return t.copy()
    i, eps = _draw(rng, len(moves))
    new = t + eps * moves.moves[i]
    if np.all((new == 0) | (new == 1)):
        return new
    return t.copy()


def sample_saturated(start: Fraction, basis: CircuitBasis, moves: MoveSet, cfg: ChainConfig,
                     n: int | None = None, stats: ChainStats | None = None) -> Iterator[Fraction]:
    """Run the chain from N(start) and yield recorded saturated states.

    After ``burn_in`` steps every ``thin``-th state is recorded.  With
    ``require_saturated`` states failing the circuit test are dropped and
    do not count toward ``n``.  The run stops after ``n`` emitted
    fractions or ``cfg.steps`` steps, whichever comes first.
    """
    design = start.design
    p = basis.p
    if len(start) != p:
        raise ValueError(f"start fraction has {len(start)} points, the model needs p = {p}")
    if len(moves) and moves.K != design.K:
        raise ValueError("moves were built for a different number of cells")
    if n is None and cfg.steps is None:
        raise ValueError("give n or cfg.steps")
    stats = stats if stats is not None else ChainStats()
    checker = SaturationChecker(basis, p)
    rng = np.random.default_rng(cfg.seed)
    pos, neg = moves.masks()
    nm = len(moves)
    state = start.mask()
    K = design.K
    while True:
        if cfg.steps is not None and stats.steps >= cfg.steps:
            return
        if nm:
            i, eps = _draw(rng, nm)
            P, Nn = (pos[i], neg[i]) if eps > 0 else (neg[i], pos[i])
            if not P & state and not Nn & ~state:
                state = (state | P) & ~Nn
                stats.accepted_moves += 1
        stats.steps += 1
        if stats.steps <= cfg.burn_in or (stats.steps - cfg.burn_in) % cfg.thin:
            continue
        stats.recorded += 1
        if cfg.require_saturated and not checker.is_saturated_mask(state):
            stats.discarded += 1
            continue
        stats.emitted += 1
        yield Fraction(design, tuple(j for j in range(K) if state >> j & 1))
        if n is not None and stats.emitted >= n:
            return


def random_psubset_sample(A: IntMatrix, basis: CircuitBasis, n: int, rng: np.random.Generator,
                          design: FactorialDesign | None = None, max_attempts: int | None = None,
                          stats: dict | None = None) -> Iterator[Fraction]:
    """Uniform random p-subsets of the columns, kept when no circuit fits inside."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p, K = A.shape
    if design is None:
        design = FactorialDesign((K,))
    if design.K != K:
        raise ValueError("design and matrix disagree on the number of points")
    checker = SaturationChecker(basis, p)
    stats = stats if stats is not None else {}
    stats.update(attempts=0, accepted=0)
    while stats["accepted"] < n:
        if max_attempts is not None and stats["attempts"] >= max_attempts:
            raise RuntimeError(f"only {stats['accepted']} of {n} fractions after {max_attempts} attempts")
        cols = rng.choice(K, size=p, replace=False)
        stats["attempts"] += 1
        if checker.is_saturated_mask(sum(1 << int(j) for j in cols)):
            stats["accepted"] += 1
            yield Fraction(design, tuple(int(j) for j in cols))


def margins(f: Fraction) -> np.ndarray:
    M = margin_matrix(f.design).to_numpy()
    return M @ f.indicator()


def metropolis_hastings_step(table, moves: MoveSet, rng: np.random.Generator,
                             log_target: Callable[[np.ndarray], float]) -> np.ndarray:
    """Placeholder for a non-uniform target; only the uniform chain exists."""
    raise NotImplementedError("only the uniform stationary distribution is implemented")
