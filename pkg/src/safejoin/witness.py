"""Counterexample databases for unsafe subjoins.

Two constructions live here. ``chase_witness`` seeds the subjoin with one tuple and closes
it under the parent/child tgds of a parse tree; it applies when some external relation
has no associated subjoin relation. ``nset_witness`` projects a two-row 0/1 relation over
all attributes onto every relation; it applies when an n-set exists.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .engine import Database, Relation
from .jointree import ParseTree
from .schema import JoinSchema, SubjoinSpec


@dataclass(frozen=True)
class Tgd:
    """``lhs(...) -> exists z. rhs(...)`` over a parent/child pair of the parse tree."""

    lhs: str
    rhs: str
    frontier: frozenset[str]
    existential: frozenset[str]

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs} on {''.join(sorted(self.frontier)) or '()'}"


def build_tgds(join: JoinSchema, tree: ParseTree) -> list[Tgd]:
    """Child-to-parent and parent-to-child tgds for every arc, child names sorted."""
    out = []
    for child in sorted(tree.parent):
        par = tree.parent[child]
        shared = join.attrs(child) & join.attrs(par)
        out.append(Tgd(child, par, shared, join.attrs(par) - shared))
        out.append(Tgd(par, child, shared, join.attrs(child) - shared))
    return out


def tgd_violations(join: JoinSchema, tgds: Iterable[Tgd], db: Mapping[str, Relation]) -> list[tuple[Tgd, tuple]]:
    """Pairs (tgd, lhs row) for which no rhs row agrees on the frontier."""
    bad = []
    for tgd in tgds:
        cols = sorted(tgd.frontier)
        have = db[tgd.rhs].project(cols).rows
        lhs = db[tgd.lhs]
        idx = [lhs.columns.index(c) for c in cols]
        for row in lhs.sorted_rows():
            if tuple(row[i] for i in idx) not in have:
                bad.append((tgd, row))
    return bad


class _Chase:
    """Mutable chase state: rows per relation and a fresh-value counter per attribute."""

    def __init__(self, join: JoinSchema):
        self.join = join
        self.rows: dict[str, list[dict[str, str]]] = {n: [] for n in join.names}
        self.counters: dict[str, int] = {}
        self.used: dict[str, set[str]] = {}
        self.steps = 0

    def add(self, rel: str, row: dict[str, str]) -> None:
        self.rows[rel].append(row)
        for a, v in row.items():
            self.used.setdefault(a, set()).add(v)

    def fresh(self, attr: str) -> str:
        base = attr.lower()
        while True:
            n = self.counters.get(attr, 0) + 1
            self.counters[attr] = n
            value = f"{base}{n}"
            if value not in self.used.get(attr, ()):
                return value

    def step(self, tgd: Tgd) -> None:
        """Apply ``tgd`` to every lhs row currently present, in insertion order."""
        frontier = sorted(tgd.frontier)
        have = {tuple(r[a] for a in frontier) for r in self.rows[tgd.rhs]}
        for row in list(self.rows[tgd.lhs]):
            key = tuple(row[a] for a in frontier)
            if key in have:
                continue
            new = dict(zip(frontier, key))
            for a in self.join.relation(tgd.rhs).attributes:
                if a not in new:
                    new[a] = self.fresh(a)
            self.add(tgd.rhs, new)
            have.add(key)
            self.steps += 1

    def database(self) -> Database:
        return {
            r.name: Relation.of(r.attributes, (tuple(row[a] for a in r.attributes) for row in self.rows[r.name]))
            for r in self.join.relations
        }


def seed_tuple(join: JoinSchema, sub: SubjoinSpec) -> dict[str, str]:
    """One seed value per subjoin attribute: the attribute name in lower case."""
    return {a: a.lower() for a in sorted(sub.attributes(join))}


def _levels(tree: ParseTree) -> list[list[str]]:
    levels: dict[int, list[str]] = {}
    for node in tree.nodes:
        levels.setdefault(tree.depth(node), []).append(node)
    return [sorted(levels[d]) for d in sorted(levels)]


def chase_witness(
    join: JoinSchema,
    tree: ParseTree,
    sub: SubjoinSpec,
    seed: Mapping[str, str] | None = None,
) -> Database:
    """Seed every subjoin relation with a projection of one tuple, then chase upward and downward.

    The upward pass applies child-to-parent tgds level by level from the deepest level;
    the downward pass applies parent-to-child tgds from the root's children down. Within a
    level nodes go in name order.
    """
    seed = dict(seed) if seed is not None else seed_tuple(join, sub)
    state = _Chase(join)
    for name in join.names:
        if name in sub:
            state.add(name, {a: seed[a] for a in join.relation(name).attributes})

    levels = _levels(tree)
    for level in reversed(levels[1:]):
        for node in level:
            par = tree.parent[node]
            shared = join.attrs(node) & join.attrs(par)
            state.step(Tgd(node, par, shared, join.attrs(par) - shared))
    for level in levels[1:]:
        for node in level:
            par = tree.parent[node]
            shared = join.attrs(node) & join.attrs(par)
            state.step(Tgd(par, node, shared, join.attrs(node) - shared))
    return state.database()


def chase_fresh_values(db: Mapping[str, Relation], seed: Mapping[str, str]) -> set[tuple[str, str]]:
    """(attribute, value) pairs in ``db`` that are not seed values."""
    out = set()
    for rel in db.values():
        for row in rel.rows:
            for a, v in zip(rel.columns, row):
                if seed.get(a) != v:
                    out.add((a, v))
    return out


def nset_witness(join: JoinSchema, attributes: Iterable[str]) -> Database:
    """Project the all-zero row and the row with 1 exactly on ``attributes`` onto every relation."""
    ones = frozenset(attributes)
    if not ones:
        raise ValueError("an n-set must be nonempty")
    unknown = ones - join.all_attributes
    if unknown:
        raise ValueError(f"n-set names unknown attributes {sorted(unknown)}")
    return {
        r.name: Relation.of(
            r.attributes,
            [tuple(0 for _ in r.attributes), tuple(int(a in ones) for a in r.attributes)],
        )
        for r in join.relations
    }


def relation_types(join: JoinSchema, attributes: Iterable[str]) -> dict[str, int]:
    """Classify relations against an n-set: 1 = no n-set attribute, 2 = mixed, 3 = only n-set attributes."""
    ones = frozenset(attributes)
    out = {}
    for r in join.relations:
        inside = r.attrset & ones
        out[r.name] = 1 if not inside else (3 if inside == r.attrset else 2)
    return out
