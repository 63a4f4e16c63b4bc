"""``safejoin`` command line: JSON in, JSON out.

Exit status: 0 for success or a safe verdict, 1 for an unsafe verdict or a cyclic join,
2 for unusable input. Diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from pathlib import Path
from typing import Any

from . import engine
from .jointree import (
    CyclicJoinError,
    ParseTree,
    TreeStructureError,
    build_parse_tree,
    maximal_subtrees,
    validate_parse_tree,
)
from .optimal import minimization_trace
from .safety import decide_safe
from .schema import JoinSchema, SchemaError, SubjoinSpec, complement, parse_schema, parse_subjoin

SEED_ENV = "SAFEJOIN_TREE_SEED"

log = logging.getLogger("safejoin")


class InputError(Exception):
    pass


def _read_json(path: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _load_schema(path: str) -> JoinSchema:
    try:
        return parse_schema(_read_json(path))
    except SchemaError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_database(join: JoinSchema, path: str) -> engine.Database:
    try:
        return engine.database_from_json(join, _read_json(path))
    except SchemaError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _subjoin(join: JoinSchema, args: argparse.Namespace) -> SubjoinSpec:
    try:
        if args.subjoin_file:
            return parse_subjoin(join, _read_json(args.subjoin_file))
        names = [n.strip() for n in args.subjoin.split(",") if n.strip()]
        return join.subjoin(names)
    except SchemaError as exc:
        raise InputError(f"--subjoin: {exc}") from exc


def _tree(join: JoinSchema) -> ParseTree:
    seed = os.environ.get(SEED_ENV)
    if seed is None:
        return build_parse_tree(join)
    try:
        rng = random.Random(int(seed))
    except ValueError as exc:
        raise InputError(f"{SEED_ENV} must be an integer, got {seed!r}") from exc
    log.warning("%s set: parse trees are randomized", SEED_ENV)
    return build_parse_tree(join, rng)


def dumps(doc: Any, indent: str = "") -> str:
    """JSON with objects indented and lists kept on one line when they hold no objects."""
    if isinstance(doc, dict) and doc:
        inner = indent + "  "
        items = [f"{inner}{json.dumps(k)}: {dumps(v, inner)}" for k, v in doc.items()]
        return "{\n" + ",\n".join(items) + "\n" + indent + "}"
    if isinstance(doc, list) and any(isinstance(x, dict) for x in doc):
        inner = indent + "  "
        return "[\n" + ",\n".join(inner + dumps(x, inner) for x in doc) + "\n" + indent + "]"
    return json.dumps(doc)


def _emit(doc: Any) -> None:
    sys.stdout.write(dumps(doc) + "\n")


def _cyclic(exc: CyclicJoinError) -> int:
    _emit({"acyclic": False, "residual": {n: sorted(a) for n, a in sorted(exc.residual.items())}})
    print(f"cyclic join: {exc}", file=sys.stderr)
    return 1


def cmd_check_acyclic(args: argparse.Namespace) -> int:
    join = _load_schema(args.schema)
    try:
        tree = _tree(join)
    except CyclicJoinError as exc:
        return _cyclic(exc)
    _emit({"acyclic": True, "tree": tree.to_json()})
    return 0


def cmd_tree(args: argparse.Namespace) -> int:
    join = _load_schema(args.schema)
    try:
        tree = _tree(join)
    except CyclicJoinError as exc:
        return _cyclic(exc)
    if args.render:
        sys.stdout.write(tree.render(join) + "\n")
    else:
        _emit(tree.to_json())
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    join = _load_schema(args.schema)
    try:
        tree = ParseTree.from_json(_read_json(args.tree))
        ok = validate_parse_tree(join, tree)
    except (TreeStructureError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.tree}: {exc}") from exc
    _emit({"valid": ok})
    return 0 if ok else 1


def cmd_decide(args: argparse.Namespace) -> int:
    join = _load_schema(args.schema)
    sub = _subjoin(join, args)
    try:
        verdict = decide_safe(join, sub, _tree(join))
    except CyclicJoinError as exc:
        return _cyclic(exc)
    doc = verdict.to_json(join)
    if args.witness and verdict.witness is not None:
        Path(args.witness).write_text(dumps(doc["witness"]) + "\n")
    _emit(doc)
    return 0 if verdict.safe else 1


def cmd_eval(args: argparse.Namespace) -> int:
    join = _load_schema(args.schema)
    db = _load_database(join, args.db)
    if not (args.subjoin or args.subjoin_file):
        _emit(engine.join_output(join, db).to_json())
        return 0
    sub = _subjoin(join, args)
    inner, dangling = engine.subjoin_dangling(join, sub, db)
    doc: dict[str, Any] = {"subjoin": inner.to_json()}
    if not sub.is_full(join):
        doc["complement"] = engine.subjoin_output(join, complement(join, sub), db).to_json()
    doc["dangling"] = [list(r) for r in engine.Relation(inner.columns, dangling).sorted_rows()]
    doc["fully_reduced"] = engine.is_fully_reduced(join, db)
    _emit(doc)
    return 0


def cmd_reduce(args: argparse.Namespace) -> int:
    join = _load_schema(args.schema)
    db = _load_database(join, args.db)
    try:
        tree = _tree(join)
    except CyclicJoinError as exc:
        return _cyclic(exc)
    _emit(engine.database_to_json(join, engine.full_reduce(tree, db)))
    return 0


def cmd_min_tree(args: argparse.Namespace) -> int:
    join = _load_schema(args.schema)
    sub = _subjoin(join, args)
    try:
        start = _tree(join)
    except CyclicJoinError as exc:
        return _cyclic(exc)
    tree, steps = minimization_trace(join, sub, start)
    _emit({
        "tree": tree.to_json(),
        "maximal_subtrees": len(maximal_subtrees(tree, sub)),
        "trace": [s.to_json() for s in steps],
    })
    return 0


def cmd_gen_db(args: argparse.Namespace) -> int:
    join = _load_schema(args.schema)
    if args.tuples < 1 or args.domain < 1:
        raise InputError("--tuples and --domain must be positive")
    make = engine.random_database if args.unreduced else engine.random_reduced_database
    _emit(engine.database_to_json(join, make(join, args.seed, args.tuples, args.domain)))
    return 0


def _add_subjoin(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--subjoin", help="comma-separated relation names")
    group.add_argument("--subjoin-file", help='subjoin document {"subjoin": [...]}')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="safejoin", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    cmds = parser.add_subparsers(dest="command", required=True)

    p = cmds.add_parser("check-acyclic", help="report whether the join has a parse tree")
    p.add_argument("schema")
    p.set_defaults(func=cmd_check_acyclic)

    p = cmds.add_parser("tree", help="print a parse tree built by GYO reduction")
    p.add_argument("schema")
    p.add_argument("--render", action="store_true", help="indented plain text instead of JSON")
    p.set_defaults(func=cmd_tree)

    p = cmds.add_parser("validate", help="check a parse tree document against a schema")
    p.add_argument("schema")
    p.add_argument("tree")
    p.set_defaults(func=cmd_validate)

    p = cmds.add_parser("decide", help="decide whether a subjoin is safe")
    p.add_argument("schema")
    _add_subjoin(p)
    p.add_argument("--witness", help="also write the counterexample database here")
    p.set_defaults(func=cmd_decide)

    p = cmds.add_parser("eval", help="evaluate the join, or a subjoin against its complement")
    p.add_argument("schema")
    p.add_argument("db")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--subjoin")
    group.add_argument("--subjoin-file")
    p.set_defaults(func=cmd_eval)

    p = cmds.add_parser("reduce", help="fully reduce a database with the semijoin program")
    p.add_argument("schema")
    p.add_argument("db")
    p.set_defaults(func=cmd_reduce)

    p = cmds.add_parser("min-tree", help="parse tree with the fewest maximal subtrees")
    p.add_argument("schema")
    _add_subjoin(p)
    p.set_defaults(func=cmd_min_tree)

    p = cmds.add_parser("gen-db", help="random fully reduced database")
    p.add_argument("schema")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tuples", type=int, default=3)
    p.add_argument("--domain", type=int, default=3)
    p.add_argument("--unreduced", action="store_true", help="independent rows per relation instead")
    p.set_defaults(func=cmd_gen_db)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
