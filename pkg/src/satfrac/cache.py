"""On-disk cache of circuit and Graver bases keyed by the matrix digest."""
from __future__ import annotations

import json
import os
from pathlib import Path

from . import __version__
from .circuits import CircuitBasis, circuits_of, format_basis, parse_basis
from .exactmat import IntMatrix, rank
from .graver import graver_basis

ENV_VAR = "SATFRAC_CACHE"

_FILES = {"circuits": "circuits.txt", "graver": "graver.txt"}


def default_cache_dir() -> Path | None:
    d = os.environ.get(ENV_VAR)
    return Path(d) if d else None


class BasisCache:
    """One subdirectory per matrix: circuits.txt, graver.txt, meta.json.

    ``last_hit`` records whether the most recent lookup was served from disk.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.last_hit = False

    def entry(self, A: IntMatrix) -> Path:
        return self.directory / A.digest()

    def _meta_path(self, A: IntMatrix) -> Path:
        return self.entry(A) / "meta.json"

    def meta(self, A: IntMatrix) -> dict:
        path = self._meta_path(A)
        if path.exists():
            return json.loads(path.read_text())
        return {}

    def get(self, A: IntMatrix, kind: str = "circuits", **kwargs) -> CircuitBasis:
        if kind not in _FILES:
            raise ValueError(f"unknown basis kind {kind!r}")
        path = self.entry(A) / _FILES[kind]
        p = rank(A)
        if path.exists():
            self.last_hit = True
            return parse_basis(path.read_text(), p, A.digest())
        self.last_hit = False
        basis = circuits_of(A, **kwargs) if kind == "circuits" else graver_basis(A, **kwargs)
        self.put(A, kind, basis)
        return basis

    def put(self, A: IntMatrix, kind: str, basis: CircuitBasis) -> None:
        d = self.entry(A)
        d.mkdir(parents=True, exist_ok=True)
        tmp = d / (_FILES[kind] + ".tmp")
        tmp.write_text(format_basis(basis))
        tmp.replace(d / _FILES[kind])
        meta = self.meta(A)
        meta.update({"rows": A.rows, "cols": A.cols, "rank": basis.p,
                     "version": __version__, f"{kind}_count": len(basis)})
        self._meta_path(A).write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")


def get_basis(A: IntMatrix, kind: str = "circuits", cache: BasisCache | None = None, **kwargs):
    """Basis plus a hit flag (None when no cache is in use)."""
    if cache is None:
        basis = circuits_of(A, **kwargs) if kind == "circuits" else graver_basis(A, **kwargs)
        return basis, None
    basis = cache.get(A, kind, **kwargs)
    return basis, cache.last_hit
