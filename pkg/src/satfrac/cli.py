"""Command-line front end: ``satfrac <command> ...``.

Exit codes: 0 success, 1 computation error, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cache import BasisCache, default_cache_dir, get_basis
from .circuits import filter_by_support_size, symmetry_classes, write_basis
from .exactmat import IntMatrix, format_matrix, rank, read_matrix, write_matrix
from .model import (FactorialDesign, Fraction, build_model_matrix, design_matrix_A, format_fraction,
                    full_design, model_with_interactions, read_fraction)
from .saturation import (count_saturated, export_ilp, is_saturated_by_circuits,
                         is_saturated_by_determinant)
from .unimodular import is_totally_unimodular, is_unimodular
from .sampler import (ChainConfig, ChainStats, margin_matrix, random_psubset_sample, sample_saturated,
                      universal_moves)


class UsageError(Exception):
    pass


def _levels(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must be a comma list of integers, got {text!r}")


def _design(args) -> FactorialDesign | None:
    return full_design(args.levels) if args.levels else None


def _matrix(args) -> IntMatrix:
    if getattr(args, "matrix", None):
        return read_matrix(args.matrix)
    if not args.levels or not args.order:
        raise UsageError("give -m/--matrix, or both -l/--levels and -o/--order")
    d = full_design(args.levels)
    return design_matrix_A(build_model_matrix(d, model_with_interactions(d, args.order)))


def _cache(args) -> BasisCache | None:
    d = args.cache or default_cache_dir()
    return BasisCache(d) if d else None


def _cache_word(hit) -> str:
    return {None: "off", True: "hit", False: "miss"}[hit]


def _emit(args, lines: list[str], data: dict) -> None:
    if args.json:
        print(json.dumps(data, indent=1, sort_keys=True))
    else:
        print("\n".join(lines))


def _vec(v) -> str:
    return " ".join(str(int(x)) for x in v)


# -- commands -------------------------------------------------------------------

def cmd_matrix(args) -> int:
    if not args.levels or not args.order:
        raise UsageError("matrix needs -l/--levels and -o/--order")
    d = full_design(args.levels)
    X = build_model_matrix(d, model_with_interactions(d, args.order))
    A = design_matrix_A(X)
    r = rank(A)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_matrix(X, out / "X.txt")
        write_matrix(A, out / "A.txt")
    lines = [f"K: {d.K}", f"p: {A.rows}", f"rank: {r}"]
    if not args.out:
        lines.append(format_matrix(X).rstrip("\n"))
    _emit(args, lines, {"K": d.K, "p": A.rows, "rank": r, "X": X.tolist(), "A": A.tolist()})
    return 0


def cmd_circuits(args) -> int:
    A = _matrix(args)
    design = _design(args)
    basis, hit = get_basis(A, "circuits", _cache(args), engine=args.engine)
    data = {"count": len(basis), "K": basis.K, "rank": basis.p, "cache": _cache_word(hit)}
    head = f"{len(basis)} circuits"
    classes = None
    if design is not None and design.K == basis.K:
        classes = symmetry_classes(basis, design, args.group)
        head += "; classes: " + ",".join(str(n) for _, n in sorted(classes, key=lambda c: c[1]))
    lines = [head, f"rank: {basis.p}", f"cache: {data['cache']}"]
    if classes is not None:
        data["classes"] = []
        for i, (rep, n) in enumerate(sorted(classes, key=lambda c: (len(c[0].support), c[1])), 1):
            lines.append(f"class {i}: size {n}, support {len(rep.support)}, max_abs {rep.max_abs}")
            data["classes"].append({"size": n, "support": len(rep.support), "max_abs": rep.max_abs,
                                    "representative": list(rep.vec)})
    listed = basis
    if args.max_support is not None:
        listed = filter_by_support_size(basis, args.max_support)
        lines.append(f"listed: {len(listed)} with support <= {args.max_support}")
        data["listed"] = len(listed)
    if args.out:
        write_basis(listed, args.out)
    if args.print:
        lines.extend(_vec(v) for v in listed.vectors)
    _emit(args, lines, data)
    return 0


def _load_fraction(args, path, design) -> Fraction:
    if design is None:
        raise UsageError("fraction files hold level tuples; give -l/--levels")
    return read_fraction(path, design)


def cmd_check(args) -> int:
    A = _matrix(args)
    design = _design(args)
    f = _load_fraction(args, args.fraction, design)
    p = rank(A)
    if len(f) != p:
        raise UsageError(f"fraction has {len(f)} points, the model needs p = {p}")
    data: dict = {"points": len(f), "p": p}
    lines = []
    rc = rd = None
    if args.method in ("circuits", "both"):
        basis, hit = get_basis(A, "circuits", _cache(args))
        rc = is_saturated_by_circuits(f, basis, p)
        data["cache"] = _cache_word(hit)
    if args.method in ("det", "both"):
        if p != A.rows:
            raise UsageError("the determinant test needs a matrix of full row rank")
        rd = is_saturated_by_determinant(f, A)
        data["determinant"] = rd.determinant
    if rc is not None and rd is not None and rc.saturated != rd.saturated:
        raise AssertionError("circuit and determinant tests disagree")
    sat = (rc or rd).saturated
    data["saturated"] = sat
    if sat:
        lines.append("SATURATED")
    else:
        lines.append("NOT SATURATED" + ("; witness circuit supp ⊆ fraction" if rc else ""))
    if rc is not None and rc.witness is not None:
        data["witness"] = list(rc.witness.vec)
        data["witness_support"] = list(rc.witness.support)
        lines.append("witness: " + _vec(rc.witness.vec))
        lines.append("witness support: " + " ".join(map(str, rc.witness.support)))
    if rd is not None:
        lines.append(f"determinant: {rd.determinant}")
    _emit(args, lines, data)
    return 0


def cmd_count(args) -> int:
    A = _matrix(args)
    if rank(A) != A.rows:
        raise UsageError("count needs a matrix of full row rank")
    basis = None
    hit = None
    if args.method in ("circuits", "both"):
        basis, hit = get_basis(A, "circuits", _cache(args))
    res = count_saturated(A, basis, args.method, workers=args.threads)
    data = {"total": res.total, "saturated": res.saturated, "non_saturated": res.non_saturated,
            "method": args.method, "cache": _cache_word(hit)}
    _emit(args, [f"{res.total} total / {res.saturated} saturated / {res.non_saturated} not"], data)
    return 0


def cmd_graver(args) -> int:
    A = _matrix(args)
    design = _design(args)
    G, hit = get_basis(A, "graver", _cache(args), method=args.graver_method)
    lines = [f"{len(G)} Graver elements", f"cache: {_cache_word(hit)}"]
    data = {"count": len(G), "cache": _cache_word(hit)}
    if design is not None and design.K == G.K:
        cl = symmetry_classes(G, design, args.group)
        lines[0] += "; classes: " + ",".join(str(n) for _, n in sorted(cl, key=lambda c: c[1]))
        data["classes"] = sorted(n for _, n in cl)
    if args.compare:
        C, _ = get_basis(A, "circuits", _cache(args))
        cs, gs = C.vector_set(), G.vector_set()
        extra = len(gs - cs)
        lines.append(f"circuits: {len(C)}; circuits subset of Graver: {cs <= gs}; non-circuit elements: {extra}")
        data.update(circuits=len(C), subset=cs <= gs, non_circuits=extra)
    if args.out:
        write_basis(G, args.out)
    _emit(args, lines, data)
    return 0


def cmd_unimodular(args) -> int:
    A = _matrix(args)
    if rank(A) != A.rows:
        raise UsageError("unimodularity needs a matrix of full row rank")
    rep = is_unimodular(A)
    lines = rep.lines()
    data = {"unimodular": rep.unimodular, "method": rep.method, "certificate": rep.certificate}
    if args.tu:
        t = is_totally_unimodular(A)
        tu = {True: "true", False: "false", None: "unknown"}[t.totally_unimodular]
        lines.append(f"totally_unimodular: {tu}")
        if t.certificate:
            lines.extend(f"tu_certificate.{k}: {v}" for k, v in t.certificate.items())
        data.update(totally_unimodular=t.totally_unimodular, tu_certificate=t.certificate)
    _emit(args, lines, data)
    return 0


def cmd_sample(args) -> int:
    A = _matrix(args)
    design = _design(args)
    if design is None:
        raise UsageError("sample needs -l/--levels")
    if args.n < 1:
        raise UsageError("-n must be >= 1")
    p = rank(A)
    basis, hit = get_basis(A, "circuits", _cache(args))
    header = {"seed": args.seed, "n": args.n, "p": p, "cache": _cache_word(hit)}
    if args.margins_from:
        start = _load_fraction(args, args.margins_from, design)
        if len(start) != p:
            raise UsageError(f"start fraction has {len(start)} points, the model needs p = {p}")
        moves = universal_moves(margin_matrix(design))
        try:
            cfg = ChainConfig(seed=args.seed, steps=args.steps, burn_in=args.burn_in, thin=args.thin)
        except ValueError as e:
            raise UsageError(str(e))
        st = ChainStats()
        out = list(sample_saturated(start, basis, moves, cfg, n=args.n, stats=st))
        header.update(mode="chain", moves=len(moves), burn_in=cfg.burn_in, thin=cfg.thin,
                      steps_cap=cfg.steps, **st.as_dict())
    else:
        stats: dict = {}
        rng = np.random.default_rng(args.seed)
        out = list(random_psubset_sample(A, basis, args.n, rng, design, max_attempts=args.max_attempts,
                                         stats=stats))
        header.update(mode="psubset", **stats)
    header["returned"] = len(out)
    if args.json:
        text = json.dumps({"header": header, "fractions": [f.tuples() for f in out]}, indent=1)
    else:
        parts = ["\n".join(f"{k}: {v}" for k, v in header.items())]
        parts.extend(format_fraction(f).rstrip("\n") for f in out)
        text = "\n---\n".join(parts)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print("\n".join(f"{k}: {v}" for k, v in header.items()))
    else:
        print(text)
    return 0


def cmd_ilp(args) -> int:
    A = _matrix(args)
    basis, hit = get_basis(A, "circuits", _cache(args))
    if not args.out:
        raise UsageError("ilp needs --out")
    export_ilp(basis, basis.p, args.out)
    _emit(args, [f"constraints: {len(basis)} circuit rows + 1 cardinality row",
                 f"binaries: {basis.K}", f"written: {args.out}"],
          {"circuit_rows": len(basis), "binaries": basis.K, "path": str(args.out)})
    return 0


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="satfrac", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-l", "--levels", type=_levels, help="comma list of factor levels, e.g. 2,2,2,2")
    common.add_argument("-o", "--order", type=int, help="highest interaction order in the model")
    common.add_argument("-m", "--matrix", help="design matrix A file (rows = parameters)")
    common.add_argument("--cache", help="basis cache directory (default: $SATFRAC_CACHE)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", help="output file or directory")

    s = sub.add_parser("matrix", parents=[common], help="model matrix X and A = X^t")
    s.set_defaults(func=cmd_matrix)

    s = sub.add_parser("circuits", parents=[common], help="enumerate and classify circuits")
    s.add_argument("--max-support", type=int)
    s.add_argument("--engine", choices=["auto", "bases", "elimination"], default="auto")
    s.add_argument("--group", choices=["cells", "design"], default="cells")
    s.add_argument("--print", action="store_true", help="print the (filtered) vectors")
    s.set_defaults(func=cmd_circuits)

    s = sub.add_parser("check", parents=[common], help="saturation verdict for one fraction")
    s.add_argument("-f", "--fraction", required=True)
    s.add_argument("--method", choices=["circuits", "det", "both"], default="circuits")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("count", parents=[common], help="classify every p-subset")
    s.add_argument("--method", choices=["circuits", "det", "both"], default="both")
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("graver", parents=[common], help="Graver basis")
    s.add_argument("--graver-method", choices=["project-and-lift", "completion", "python"],
                   default="project-and-lift")
    s.add_argument("--group", choices=["cells", "design"], default="cells")
    s.add_argument("--compare", action="store_true", help="compare with the circuits")
    s.set_defaults(func=cmd_graver)

    s = sub.add_parser("unimodular", parents=[common], help="unimodularity test")
    s.add_argument("--tu", action="store_true", help="also test total unimodularity")
    s.set_defaults(func=cmd_unimodular)

    s = sub.add_parser("sample", parents=[common], help="random saturated fractions")
    s.add_argument("-n", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--margins-from", help="start fraction; run the fixed-margin chain")
    s.add_argument("--steps", type=int, help="hard cap on chain steps")
    s.add_argument("--burn-in", type=int, default=1000)
    s.add_argument("--thin", type=int, default=10)
    s.add_argument("--max-attempts", type=int, help="cap for uniform p-subset draws")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("ilp", parents=[common], help="write the LP-format model")
    s.set_defaults(func=cmd_ilp)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError, IsADirectoryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (RuntimeError, ArithmeticError, AssertionError, MemoryError) as e:
        print(f"computation error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
