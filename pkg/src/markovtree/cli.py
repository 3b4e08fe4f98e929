"""Command-line front end.

Matrices are read from CSV (one row per line, no header) or JSON
(``{"n": 3, "rows": [[...]], "mode": "strict"}``).  Entries are decimal
strings or rationals ``p/q``; any rational switches the whole matrix to
exact arithmetic unless ``--float`` is given.  Reports are JSON on stdout
with states numbered from 1.

Exit codes: 0 ok, 1 parse error, 2 validation error, 3 enumeration cap
exceeded, 4 detailed balance violated, 5 internal error or disagreement.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .core import GENERALIZED, MODES, STRICT, StochasticMatrix, validate_stochastic
from .errors import (
    DetailedBalanceViolation,
    EnumerationCapExceeded,
    MarkovTreeError,
    MixedModeError,
    NegativeEntry,
    NonSquareError,
    RowSumViolation,
    TreeEdgeNotInGraph,
    TreeNotSpanning,
    ValidationError,
    VertexOutOfRange,
)
from .graph import build_graph, communicating_classes
from .measure import (
    DB_TOL,
    INVARIANCE_TOL,
    InvariantMeasure,
    UndirectedTree,
    check_invariance,
    detailed_balance_check,
    invariant_cofactor,
    invariant_detailed_balance,
    invariant_tree_sum,
    make_measure,
    positivity_certificate,
    uniqueness_report,
)
from .oracle import null_space_solve, power_iteration
from .trees import count_arborescences, enumerate_arborescences, tree_cap

SCHEMA_VERSION = "1.0"
VERIFY_TOL = 1e-10

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_CAP, EXIT_DB, EXIT_INTERNAL = range(6)


class ParseError(MarkovTreeError):
    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


# input ----------------------------------------------------------------------


def _parse_token(tok, line, col):
    if isinstance(tok, bool) or not isinstance(tok, (str, int, float)):
        raise ParseError(f"entry {tok!r} is not a number", line, col)
    if isinstance(tok, (int, float)):
        return tok
    text = tok.strip()
    try:
        return Fraction(text) if "/" in text else text
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}: {exc}", line, col) from None


def _to_scalars(cells, exact, positions):
    rows = []
    for r, row in enumerate(cells):
        out = []
        for c, x in enumerate(row):
            line, col = positions(r, c)
            try:
                if exact:
                    out.append(Fraction(x) if isinstance(x, (str, int, float)) else x)
                else:
                    out.append(float(x))
            except (ValueError, TypeError, ZeroDivisionError):
                raise ParseError(f"bad number {x!r}", line, col) from None
        rows.append(out)
    return rows


def read_matrix(path, *, mode=None, exact=None) -> StochasticMatrix:
    """Parse and validate a matrix file; ``mode``/``exact`` override the file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    file_mode = None
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        if not isinstance(doc, dict) or not isinstance(doc.get("rows"), list):
            raise ParseError('expected an object with a "rows" array')
        file_mode = doc.get("mode")
        if file_mode is not None and file_mode not in MODES:
            raise ParseError(f"unknown mode {file_mode!r}")
        cells = []
        for r, row in enumerate(doc["rows"]):
            if not isinstance(row, list):
                raise ParseError(f"row {r + 1} is not an array")
            cells.append([_parse_token(x, r + 1, c + 1) for c, x in enumerate(row)])
        if "n" in doc and doc["n"] != len(cells):
            raise ParseError(f'"n" is {doc["n"]} but {len(cells)} rows are given')
        positions = lambda r, c: (r + 1, c + 1)  # noqa: E731
    else:
        cells, lines = [], []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            cells.append([_parse_token(tok, lineno, c + 1) for c, tok in enumerate(raw.split(","))])
            lines.append(lineno)
        positions = lambda r, c: (lines[r], c + 1)  # noqa: E731
    if not cells:
        raise ParseError("empty matrix")
    for r, row in enumerate(cells):
        if len(row) != len(cells):
            line, _ = positions(r, 0)
            raise ParseError(f"row has {len(row)} entries, expected {len(cells)}", line)
    if exact is None:
        exact = any(isinstance(x, Fraction) for row in cells for x in row)
    rows = _to_scalars(cells, exact, positions)
    return validate_stochastic(rows, mode or file_mode or STRICT, exact)


# output ---------------------------------------------------------------------


def scalar(x):
    """Floats as JSON numbers; exact values as decimal and rational strings."""
    if isinstance(x, Fraction):
        return {"decimal": repr(float(x)), "exact": str(x)}
    if isinstance(x, int) and not isinstance(x, bool):
        return x
    return float(x)


def _states(seq):
    return [s + 1 for s in seq]


def measure_json(M: StochasticMatrix, w: InvariantMeasure, tol: float) -> dict:
    res = check_invariance(M, w.weights, tol)
    out = {
        "method": w.method,
        "weights": [scalar(x) for x in w.weights],
        "normalizer": scalar(w.normalizer),
        "normalized": [scalar(x) for x in w.normalized()] if w.normalizer != 0 else None,
        "support": _states(w.support),
        "invariant": res.ok,
        "residual": scalar(res.residual),
    }
    if w.tree is not None:
        out["tree"] = [[i + 1, j + 1] for i, j in w.tree.edges]
    out.update(w.info)
    return out


def input_json(M: StochasticMatrix) -> dict:
    return {"n": M.n, "mode": M.mode, "exact": M.exact}


def classes_json(M: StochasticMatrix) -> list:
    decomp = communicating_classes(build_graph(M))
    return [{"states": _states(c), "kind": k.value} for c, k in zip(decomp.classes, decomp.kinds)]


def db_json(report) -> dict:
    return {
        "weakly_reversible": report.weakly_reversible,
        "cycle_condition_holds": report.cycle_condition_holds,
        "witness": _states(report.witness) if report.witness else None,
        "worst_cycle": _states(report.worst_cycle) if report.worst_cycle else None,
        "forward_product": None if report.forward_product is None else scalar(report.forward_product),
        "backward_product": None if report.backward_product is None else scalar(report.backward_product),
        "max_log_ratio": report.max_log_ratio if math.isfinite(report.max_log_ratio) else None,
        "cycles_checked": report.cycles_checked,
        "tolerance": report.tolerance,
    }


def error_json(exc: Exception) -> dict:
    out = {"type": type(exc).__name__, "message": _describe(exc)}
    if isinstance(exc, RowSumViolation):
        out.update(row=exc.row + 1, actual=scalar(exc.actual))
    elif isinstance(exc, NegativeEntry):
        out.update(row=exc.i + 1, column=exc.j + 1, value=scalar(exc.value))
    elif isinstance(exc, MixedModeError):
        out.update(row=exc.i + 1, column=exc.j + 1)
    elif isinstance(exc, ParseError):
        out.update(line=exc.line, column=exc.column)
    return out


def _describe(exc: Exception) -> str:
    # messages in 1-based state numbering
    if isinstance(exc, RowSumViolation):
        return f"row {exc.row + 1} sums to {exc.actual}, expected {exc.expected}"
    if isinstance(exc, NegativeEntry):
        return f"entry ({exc.i + 1}, {exc.j + 1}) is negative: {exc.value}"
    if isinstance(exc, MixedModeError):
        return f"entry ({exc.i + 1}, {exc.j + 1}) mixes float and exact arithmetic"
    if isinstance(exc, VertexOutOfRange):
        return f"state {exc.vertex + 1} out of range 1..{exc.n}"
    if isinstance(exc, TreeEdgeNotInGraph):
        return f"tree edge {exc.i + 1}-{exc.j + 1} needs positive transitions both ways"
    if isinstance(exc, DetailedBalanceViolation):
        r = exc.report
        if r.witness:
            i, j = (v + 1 for v in r.witness)
            return f"not weakly reversible: m[{i},{j}] > 0 but m[{j},{i}] is not"
        cyc = "-".join(str(v + 1) for v in r.worst_cycle)
        return f"cycle {cyc} has |log ratio| {r.max_log_ratio:.3g} above tolerance {r.tolerance:g}"
    return str(exc)


def emit(doc: dict, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps(doc, indent=2) + "\n")


def _report(command: str, M: StochasticMatrix | None = None, **sections) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, "command": command}
    if M is not None:
        doc["input"] = input_json(M)
    doc.update(sections)
    return doc


# commands -------------------------------------------------------------------


def _load(args) -> StochasticMatrix:
    exact = True if args.exact else (False if args.float else None)
    return read_matrix(args.file, mode=getattr(args, "mode", None), exact=exact)


def cmd_validate(args) -> int:
    exact = True if args.exact else (False if args.float else None)
    try:
        M = read_matrix(args.file, mode=args.mode, exact=exact)
    except (NonSquareError, ValidationError) as exc:
        if isinstance(exc, ParseError):
            raise
        emit(_report("validate", validation={"valid": False, "error": error_json(exc)}))
        print(f"invalid: {_describe(exc)}", file=sys.stderr)
        return EXIT_VALIDATION
    emit(_report("validate", M, validation={"valid": True, "error": None}))
    return EXIT_OK


def _solve_measure(M: StochasticMatrix) -> InvariantMeasure:
    basis = null_space_solve(M)
    info = {"fixed_space_dimension": basis.dimension}
    if basis.dimension > 1:
        info["basis"] = [[scalar(x) for x in v] for v in basis.vectors]
    return make_measure(basis.vectors[0], "solve", M.exact, info=info)


def _power_measure(M: StochasticMatrix, max_iters: int) -> InvariantMeasure:
    res = power_iteration(M, max_iters=max_iters)
    info = {"converged": res.converged, "iterations": res.iterations}
    return make_measure(res.vector.tolist(), "power", False, info=info)


def cmd_invariant(args) -> int:
    M = _load(args)
    method = args.method
    if method == "tree":
        w = invariant_tree_sum(M, cap=args.cap)
    elif method == "cofactor":
        w = invariant_cofactor(M)
    elif method == "solve":
        w = _solve_measure(M)
    elif method == "power":
        w = _power_measure(M, args.max_iters)
    else:
        tree = UndirectedTree.parse(args.tree, M.n) if args.tree else None
        w = invariant_detailed_balance(M, tree, tol=args.db_tol)
    emit(_report("invariant", M, measures={w.method: measure_json(M, w, args.tol)}))
    return EXIT_OK


def cmd_classes(args) -> int:
    M = _load(args)
    emit(_report("classes", M, classes=classes_json(M)))
    return EXIT_OK


def cmd_trees(args) -> int:
    M = _load(args)
    g = build_graph(M)
    root = args.root - 1
    count = count_arborescences(g, root) if 0 <= root < M.n else None
    if count is None:
        raise VertexOutOfRange(root, M.n)
    section = {
        "root": args.root,
        "count": count,
        "complete_support": len(g.weights) == M.n * (M.n - 1),
        "complete_graph_count": 1 if M.n == 1 else M.n ** (M.n - 2),
    }
    if args.list:
        listed = []
        for t in enumerate_arborescences(g, root, cap=args.cap):
            w = M.one
            for e in t.edges:
                w *= g.weights[e]
            listed.append({"edges": [[i + 1, j + 1] for i, j in t.edges], "weight": scalar(w)})
        section["arborescences"] = listed
    emit(_report("trees", M, trees=section))
    return EXIT_OK


def cmd_db_check(args) -> int:
    M = _load(args)
    report = detailed_balance_check(M, args.tol)
    emit(_report("db-check", M, detailed_balance=db_json(report)))
    return EXIT_OK if report.cycle_condition_holds else EXIT_DB


def _discrepancy(a, b) -> float:
    return max((abs(float(x) - float(y)) for x, y in zip(a, b)), default=0.0)


def verify_matrix(M: StochasticMatrix, tol: float = VERIFY_TOL, cap: int | None = None) -> dict:
    """Cross-check tree sums, cofactors and elimination on one matrix."""
    tree = invariant_tree_sum(M, cap=cap)
    cof = invariant_cofactor(M)
    basis = null_space_solve(M)
    exact = M.exact
    unnorm = _discrepancy(tree.weights, cof.weights)
    agree = (tree.weights == cof.weights) if exact else unnorm <= tol * max(1.0, max(abs(float(x)) for x in tree.weights))
    pairs = {}
    if tree.normalizer != 0 and cof.normalizer != 0:
        pt, pc = tree.normalized(), cof.normalized()
        pairs["tree_cofactor"] = _discrepancy(pt, pc)
        if basis.dimension == 1:
            ps = basis.vectors[0]
            pairs["tree_solve"] = _discrepancy(pt, ps)
            pairs["cofactor_solve"] = _discrepancy(pc, ps)
            if exact:
                agree = agree and tuple(pt) == tuple(ps)
            else:
                agree = agree and max(pairs.values()) <= tol
        else:
            agree = False
    else:
        # all tree sums vanish exactly when the fixed space is degenerate
        agree = agree and basis.dimension >= 2
    return {
        "agree": agree,
        "tolerance": 0 if exact else tol,
        "unnormalized_tree_cofactor": unnorm,
        "pairwise_normalized": pairs,
        "max_discrepancy": max(pairs.values(), default=unnorm),
        "fixed_space_dimension": basis.dimension,
    }


def cmd_verify(args) -> int:
    M = _load(args)
    section = verify_matrix(M, args.tol, args.cap)
    emit(_report("verify", M, verify=section))
    return EXIT_OK if section["agree"] else EXIT_INTERNAL


def cmd_analyze(args) -> int:
    M = _load(args)
    tree = invariant_tree_sum(M, cap=args.cap)
    measures = {
        "tree_sum": measure_json(M, tree, args.tol),
        "cofactor": measure_json(M, invariant_cofactor(M), args.tol),
        "solve": measure_json(M, _solve_measure(M), args.tol),
    }
    doc = _report("analyze", M, validation={"valid": True, "error": None}, classes=classes_json(M))
    doc["measures"] = measures
    g = build_graph(M)
    doc["tree_counts"] = [{"root": k + 1, "count": count_arborescences(g, k)} for k in range(M.n)]
    if M.mode == STRICT:
        cert = positivity_certificate(M, cap=args.cap)
        doc["positivity"] = {
            "consistent": cert.consistent,
            "states": [
                {"state": s.state + 1, "reaches_all": s.reaches_all, "positive": s.positive} for s in cert.states
            ],
        }
        uniq = uniqueness_report(M, cap=args.cap)
        doc["uniqueness"] = {
            "unique": uniq.unique,
            "w_zero": uniq.w_zero,
            "basis": [measure_json(M, b, args.tol) for b in uniq.basis],
        }
        doc["detailed_balance"] = db_json(detailed_balance_check(M, args.db_tol))
    return emit(doc) or EXIT_OK


# argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markovtree",
        description="Invariant measures of stochastic matrices from rooted spanning trees.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="matrix file (.csv or .json)")
    num = common.add_mutually_exclusive_group()
    num.add_argument("--exact", action="store_true", help="parse every entry as an exact rational")
    num.add_argument("--float", action="store_true", help="parse every entry as a binary64 float")
    common.add_argument("--mode", choices=MODES, default=None, help="override the matrix mode")
    common.add_argument("--cap", type=int, default=None, help=f"tree enumeration cap (default {tree_cap()})")

    p = sub.add_parser("validate", parents=[common], help="check that the file holds a stochastic matrix")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("invariant", parents=[common], help="compute an invariant measure")
    p.add_argument("--method", choices=["tree", "cofactor", "solve", "power", "db"], default="tree")
    p.add_argument("--tree", default=None, help='spanning tree for --method db, e.g. "1-2,2-3"')
    p.add_argument("--tol", type=float, default=INVARIANCE_TOL, help="invariance residual tolerance")
    p.add_argument("--db-tol", type=float, default=DB_TOL, help="cycle-condition tolerance on |log ratio|")
    p.add_argument("--max-iters", type=int, default=100_000, help="power iteration limit")
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("classes", parents=[common], help="communicating classes and their kinds")
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("trees", parents=[common], help="count or list rooted spanning trees")
    p.add_argument("--root", type=int, default=1, help="root state (1-based)")
    what = p.add_mutually_exclusive_group()
    what.add_argument("--count", action="store_true", help="only count the trees (default)")
    what.add_argument("--list", action="store_true", help="list every tree with its weight")
    p.set_defaults(func=cmd_trees)

    p = sub.add_parser("db-check", parents=[common], help="detailed balance / cycle condition")
    p.add_argument("--tol", type=float, default=DB_TOL)
    p.set_defaults(func=cmd_db_check)

    p = sub.add_parser("verify", parents=[common], help="cross-check tree sum, cofactor and elimination")
    p.add_argument("--tol", type=float, default=VERIFY_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", parents=[common], help="full analysis report")
    p.add_argument("--tol", type=float, default=INVARIANCE_TOL)
    p.add_argument("--db-tol", type=float, default=DB_TOL)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, VertexOutOfRange, TreeNotSpanning, TreeEdgeNotInGraph) as exc:
        print(f"invalid input: {_describe(exc)}", file=sys.stderr)
        return EXIT_VALIDATION
    except EnumerationCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except DetailedBalanceViolation as exc:
        emit(_report("invariant", detailed_balance=db_json(exc.report)))
        print(f"detailed balance violated: {_describe(exc)}", file=sys.stderr)
        return EXIT_DB
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
