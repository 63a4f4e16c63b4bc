"""Set-semantics relational evaluation: natural join, semijoin, full reduction, dangling tuples."""
from __future__ import annotations

import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any, Union

from .jointree import ParseTree, build_parse_tree
from .schema import (
    JoinSchema,
    SchemaError,
    SubjoinSpec,
    complement,
    subjoin_output_attributes,
)

Value = Union[str, int]


def _row_key(row: Sequence[Value]) -> tuple:
    return tuple((isinstance(v, str), v) for v in row)


@dataclass(frozen=True)
class Relation:
    """A set of rows over an ordered list of columns. Also used for join results."""

    columns: tuple[str, ...]
    rows: frozenset[tuple[Value, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        if len(set(self.columns)) != len(self.columns):
            raise SchemaError(f"repeated column in {self.columns}")
        rows = frozenset(tuple(r) for r in self.rows)
        for r in rows:
            if len(r) != len(self.columns):
                raise SchemaError(f"row {r} does not match columns {self.columns}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def of(cls, columns: Iterable[str] | str, rows: Iterable[Iterable[Value]] = ()) -> Relation:
        return cls(tuple(columns), frozenset(tuple(r) for r in rows))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.sorted_rows())

    def sorted_rows(self) -> list[tuple[Value, ...]]:
        return sorted(self.rows, key=_row_key)

    def project(self, columns: Iterable[str]) -> Relation:
        columns = tuple(columns)
        idx = [self.columns.index(c) for c in columns]
        return Relation(columns, frozenset(tuple(r[i] for i in idx) for r in self.rows))

    def reorder(self, columns: Sequence[str]) -> Relation:
        if set(columns) != set(self.columns):
            raise SchemaError(f"cannot reorder {self.columns} as {tuple(columns)}")
        return self.project(columns)

    def dicts(self) -> list[dict[str, Value]]:
        return [dict(zip(self.columns, r)) for r in self.sorted_rows()]

    def to_json(self) -> dict[str, Any]:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.sorted_rows()]}


Database = dict[str, Relation]


def empty_database(join: JoinSchema) -> Database:
    return {r.name: Relation(r.attributes, frozenset()) for r in join.relations}


def database_to_json(join: JoinSchema, db: Mapping[str, Relation]) -> dict[str, Any]:
    return {
        "relations": {r.name: db[r.name].reorder(r.attributes).to_json() for r in join.relations}
    }


def database_from_json(join: JoinSchema, doc: Mapping[str, Any]) -> Database:
    rels = doc.get("relations") if isinstance(doc, Mapping) else None
    if not isinstance(rels, Mapping):
        raise SchemaError("database document must be an object with a 'relations' object")
    db: Database = {}
    for rel in join.relations:
        if rel.name not in rels:
            raise SchemaError(f"database lacks relation {rel.name!r}")
        entry = rels[rel.name]
        columns = tuple(entry.get("columns", rel.attributes))
        if set(columns) != rel.attrset:
            raise SchemaError(f"relation {rel.name!r}: columns {list(columns)} do not match schema")
        rows = entry.get("rows", [])
        try:
            db[rel.name] = Relation.of(columns, rows).reorder(rel.attributes)
        except TypeError as exc:
            raise SchemaError(f"relation {rel.name!r}: unhashable row value") from exc
    extra = sorted(set(rels) - set(join.names))
    if extra:
        raise SchemaError(f"database has relations not in the schema: {extra}")
    return db


# -- operators ---------------------------------------------------------------------------


def natural_join(left: Relation, right: Relation) -> Relation:
    shared = [c for c in left.columns if c in right.columns]
    extra = [c for c in right.columns if c not in left.columns]
    li = [left.columns.index(c) for c in shared]
    ri = [right.columns.index(c) for c in shared]
    ei = [right.columns.index(c) for c in extra]
    index: dict[tuple, list[tuple]] = {}
    for r in right.rows:
        index.setdefault(tuple(r[i] for i in ri), []).append(tuple(r[i] for i in ei))
    rows = set()
    for l in left.rows:
        for tail in index.get(tuple(l[i] for i in li), ()):
            rows.add(l + tail)
    return Relation(left.columns + tuple(extra), frozenset(rows))


UNIT = Relation((), frozenset({()}))


def _join_order(relations: Sequence[Relation]) -> list[Relation]:
    # declaration order, but pull forward a relation that shares a column when one exists
    pending = list(relations)
    order: list[Relation] = []
    seen: set[str] = set()
    while pending:
        pick = next((r for r in pending if seen & set(r.columns)), pending[0])
        pending.remove(pick)
        order.append(pick)
        seen.update(pick.columns)
    return order


def eval_join(relations: Iterable[Relation], out: Iterable[str]) -> Relation:
    """Natural join of ``relations`` projected on ``out`` (kept in first-seen column order)."""
    relations = list(relations)
    out = set(out)
    available = set().union(*(r.columns for r in relations)) if relations else set()
    if not out <= available:
        raise SchemaError(f"output attributes {sorted(out - available)} are not joined")
    acc = UNIT
    for rel in _join_order(relations):
        acc = natural_join(acc, rel)
        if not acc.rows:
            break
    columns = []
    for rel in relations:
        columns.extend(c for c in rel.columns if c in out and c not in columns)
    if not acc.rows:
        return Relation(tuple(columns), frozenset())
    return acc.project(columns)


def semijoin(r: Relation, s: Relation) -> Relation:
    """Rows of ``r`` matching some row of ``s`` on their common columns."""
    shared = [c for c in r.columns if c in s.columns]
    keys = s.project(shared).rows
    ri = [r.columns.index(c) for c in shared]
    return Relation(r.columns, frozenset(row for row in r.rows if tuple(row[i] for i in ri) in keys))


def dangling_tuples(r: Relation, s: Relation) -> frozenset[tuple[Value, ...]]:
    """Rows of ``r`` that join with no row of ``s``."""
    return r.rows - semijoin(r, s).rows


def full_reduce(tree: ParseTree, db: Mapping[str, Relation]) -> Database:
    """The classic 2n-2 semijoin program: leaves upward into their parents, then back down."""
    out = dict(db)
    order = tree.preorder()
    for node in reversed(order):
        if node != tree.root:
            par = tree.parent[node]
            out[par] = semijoin(out[par], out[node])
    for node in order:
        if node != tree.root:
            out[node] = semijoin(out[node], out[tree.parent[node]])
    return out


def is_fully_reduced(join: JoinSchema, db: Mapping[str, Relation], tree: ParseTree | None = None) -> bool:
    tree = tree or build_parse_tree(join)
    reduced = full_reduce(tree, db)
    return all(reduced[n].rows == db[n].rows for n in join.names)


def join_output(join: JoinSchema, db: Mapping[str, Relation]) -> Relation:
    return eval_join((db[n] for n in join.names), join.output)


def subjoin_output(join: JoinSchema, sub: SubjoinSpec, db: Mapping[str, Relation]) -> Relation:
    return eval_join((db[n] for n in join.names if n in sub), subjoin_output_attributes(join, sub))


def subjoin_dangling(join: JoinSchema, sub: SubjoinSpec, db: Mapping[str, Relation]) -> tuple[Relation, frozenset]:
    """The subjoin's output and those of its rows dangling against the complement's output."""
    inner = subjoin_output(join, sub, db)
    if sub.is_full(join):
        return inner, frozenset()
    outer = subjoin_output(join, complement(join, sub), db)
    return inner, dangling_tuples(inner, outer)


def verify_witness(join: JoinSchema, sub: SubjoinSpec, db: Mapping[str, Relation]) -> bool:
    """True iff ``db`` is fully reduced and the subjoin produces a dangling tuple on it."""
    if sub.is_full(join):
        return False
    if not is_fully_reduced(join, db):
        return False
    _, dangling = subjoin_dangling(join, sub, db)
    return bool(dangling)


def random_database(join: JoinSchema, seed: int, tuples: int, domain: int = 3) -> Database:
    """Independent random rows per relation; generally not reduced."""
    rng = random.Random(seed)
    return {
        r.name: Relation.of(
            r.attributes,
            (tuple(rng.randrange(domain) for _ in r.attributes) for _ in range(rng.randint(0, tuples))),
        )
        for r in join.relations
    }


def random_reduced_database(join: JoinSchema, seed: int, tuples: int, domain: int = 3) -> Database:
    """Project ``tuples`` random rows over all attributes onto every relation.

    Every relation row extends to a full join row, so the result is consistent.
    """
    if tuples < 1:
        raise ValueError("tuples must be at least 1")
    rng = random.Random(seed)
    attrs = sorted(join.all_attributes)
    full = [dict(zip(attrs, (rng.randrange(domain) for _ in attrs))) for _ in range(tuples)]
    return {
        r.name: Relation.of(r.attributes, (tuple(t[a] for a in r.attributes) for t in full))
        for r in join.relations
    }
