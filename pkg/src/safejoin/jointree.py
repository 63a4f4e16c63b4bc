"""Parse trees (join trees) of acyclic joins and the rewrites performed on them.

A parse tree is stored as a root plus a child -> parent map over relation names. All
operations return new trees; nothing here mutates its input.
"""
from __future__ import annotations

import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from .schema import JoinSchema, SubjoinSpec


class CyclicJoinError(Exception):
    """The join has no parse tree. ``residual`` holds the hypergraph GYO could not reduce."""

    def __init__(self, residual: Mapping[str, frozenset[str]]):
        self.residual = dict(residual)
        super().__init__(f"join is cyclic; irreducible residual: {sorted(self.residual)}")


class TreeStructureError(ValueError):
    """The tree is not a tree over the join's relations (as opposed to merely invalid)."""


class InvalidTreeError(ValueError):
    """A proposed rewrite produced a tree that violates attribute connectivity."""


class TransformError(ValueError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class ParseTree:
    root: str
    parent: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "parent", dict(self.parent))
        if self.root in self.parent:
            raise TreeStructureError(f"root {self.root!r} has a parent")
        # every node must reach the root without revisiting
        for node in self.parent:
            seen = {node}
            cur = node
            while cur != self.root:
                cur = self.parent.get(cur)  # type: ignore[assignment]
                if cur is None:
                    raise TreeStructureError(f"node {node!r} does not reach the root")
                if cur in seen:
                    raise TreeStructureError(f"cycle through {cur!r}")
                seen.add(cur)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ParseTree) and (self.root, self.parent) == (other.root, other.parent)

    def __hash__(self) -> int:
        return hash((self.root, frozenset(self.parent.items())))

    def __repr__(self) -> str:
        return f"ParseTree(root={self.root!r}, edges={self.edges()})"

    @cached_property
    def nodes(self) -> frozenset[str]:
        return frozenset(self.parent) | {self.root}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {n: [] for n in self.nodes}
        for child, par in self.parent.items():
            kids[par].append(child)
        return {n: tuple(sorted(c)) for n, c in kids.items()}

    @cached_property
    def _depth(self) -> dict[str, int]:
        depth = {self.root: 0}
        for node in self.preorder():
            for child in self._children[node]:
                depth[child] = depth[node] + 1
        return depth

    def children(self, node: str) -> tuple[str, ...]:
        return self._children[node]

    def depth(self, node: str) -> int:
        return self._depth[node]

    def preorder(self) -> list[str]:
        order, stack = [], [self.root]
        while stack:
            node = stack.pop()
            order.append(node)
            stack.extend(reversed(self._children[node]))
        return order

    def ancestors(self, node: str) -> list[str]:
        """``node`` followed by its ancestors up to the root."""
        chain = [node]
        while chain[-1] != self.root:
            chain.append(self.parent[chain[-1]])
        return chain

    def descendants(self, node: str) -> frozenset[str]:
        """All nodes of the subtree rooted at ``node``, including itself."""
        out, stack = set(), [node]
        while stack:
            cur = stack.pop()
            out.add(cur)
            stack.extend(self._children[cur])
        return frozenset(out)

    def path(self, u: str, v: str) -> list[str]:
        """The tree path from ``u`` to ``v``, both included."""
        up_u, up_v = self.ancestors(u), self.ancestors(v)
        on_v = set(up_v)
        lca = next(n for n in up_u if n in on_v)
        head = up_u[: up_u.index(lca) + 1]
        tail = up_v[: up_v.index(lca)]
        return head + tail[::-1]

    def arcs(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(e) for e in self.parent.items())

    def edges(self) -> list[list[str]]:
        """(parent, child) pairs sorted by child name."""
        return [[self.parent[c], c] for c in sorted(self.parent)]

    def to_json(self) -> dict[str, Any]:
        return {"root": self.root, "edges": self.edges()}

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> ParseTree:
        parent = {}
        for par, child in doc.get("edges", []):
            if child in parent:
                raise TreeStructureError(f"node {child!r} has two parents")
            parent[child] = par
        return cls(doc["root"], parent)

    @classmethod
    def from_arcs(cls, root: str, nodes: Iterable[str], arcs: Iterable[Iterable[str]]) -> ParseTree:
        """Orient an undirected spanning tree away from ``root``."""
        nodes = set(nodes)
        adj: dict[str, set[str]] = {n: set() for n in nodes}
        count = 0
        for arc in arcs:
            a, b = tuple(arc)
            if a not in adj or b not in adj:
                raise TreeStructureError(f"arc {a!r}-{b!r} leaves the node set")
            adj[a].add(b)
            adj[b].add(a)
            count += 1
        if count != len(nodes) - 1:
            raise TreeStructureError("arc set is not a spanning tree")
        parent, stack, seen = {}, [root], {root}
        while stack:
            cur = stack.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    parent[nxt] = cur
                    stack.append(nxt)
        if seen != nodes:
            raise TreeStructureError("arc set is not connected")
        return cls(root, parent)

    def render(self, join: JoinSchema | None = None) -> str:
        """Plain-text indented rendering."""
        lines = []

        def walk(node: str, indent: str) -> None:
            label = node if join is None else f"{node} ({''.join(join.relation(node).attributes)})"
            lines.append(indent + label)
            for child in self._children[node]:
                walk(child, indent + "  ")

        walk(self.root, "")
        return "\n".join(lines)


# -- construction and validation ---------------------------------------------------------


def build_parse_tree(join: JoinSchema, rng: random.Random | None = None) -> ParseTree:
    """GYO ear removal.

    Deterministic by default: the smallest-named ear goes first and hangs under the
    smallest-named witness, except that ears lying wholly inside some witness are removed
    before the others. That keeps a relation covering its neighbours at the root. With
    ``rng`` the ear and witness are randomized instead.
    """
    remaining = {r.name: r.attrset for r in join.relations}
    parent: dict[str, str] = {}

    while len(remaining) > 1:
        ears: dict[str, list[str]] = {}
        for name in sorted(remaining):
            attrs = remaining[name]
            others = [o for o in sorted(remaining) if o != name]
            elsewhere = frozenset().union(*(remaining[o] for o in others))
            needed = attrs & elsewhere
            witnesses = [o for o in others if needed <= remaining[o]]
            if witnesses:
                ears[name] = witnesses
        if not ears:
            raise CyclicJoinError(remaining)
        if rng is not None:
            ear = rng.choice(sorted(ears))
            parent[ear] = rng.choice(ears[ear])
        else:
            ear = min(ears, key=lambda e: (not any(remaining[e] <= remaining[w] for w in ears[e]), e))
            parent[ear] = ears[ear][0]
        del remaining[ear]

    (root,) = remaining
    return ParseTree(root, parent)


def is_acyclic(join: JoinSchema) -> bool:
    try:
        build_parse_tree(join)
    except CyclicJoinError:
        return False
    return True


def _check_nodes(join: JoinSchema, tree: ParseTree) -> None:
    if tree.nodes != frozenset(join.names):
        missing = sorted(frozenset(join.names) - tree.nodes)
        extra = sorted(tree.nodes - frozenset(join.names))
        raise TreeStructureError(f"tree does not span the join (missing {missing}, extra {extra})")


def violated_attributes(join: JoinSchema, tree: ParseTree) -> list[str]:
    """Attributes whose nodes do not induce a connected subtree."""
    _check_nodes(join, tree)
    bad = []
    for a in sorted(join.all_attributes):
        holders = {n for n in tree.nodes if a in join.attrs(n)}
        inner = sum(1 for c, p in tree.parent.items() if c in holders and p in holders)
        if inner != len(holders) - 1:
            bad.append(a)
    return bad


def validate_parse_tree(join: JoinSchema, tree: ParseTree) -> bool:
    """True iff every attribute's nodes are connected in ``tree``.

    Raises TreeStructureError when the tree's nodes are not exactly the join's relations.
    """
    return not violated_attributes(join, tree)


def reroot(tree: ParseTree, new_root: str) -> ParseTree:
    if new_root not in tree.nodes:
        raise TreeStructureError(f"unknown node {new_root!r}")
    parent = dict(tree.parent)
    chain = tree.ancestors(new_root)
    for child, par in zip(chain, chain[1:]):
        parent[par] = child
    parent.pop(new_root, None)
    return ParseTree(new_root, parent)


# -- maximal subtrees and stems ----------------------------------------------------------


@dataclass(frozen=True)
class Subtree:
    root: str
    nodes: frozenset[str]


@dataclass(frozen=True)
class MaximalSubtreeSet:
    subtrees: tuple[Subtree, ...]

    def __len__(self) -> int:
        return len(self.subtrees)

    def __iter__(self):
        return iter(self.subtrees)

    def owner(self, node: str) -> Subtree | None:
        for sub in self.subtrees:
            if node in sub.nodes:
                return sub
        return None

    def by_root(self, root: str) -> Subtree:
        for sub in self.subtrees:
            if sub.root == root:
                return sub
        raise KeyError(root)


def maximal_subtrees(tree: ParseTree, sub: SubjoinSpec) -> MaximalSubtreeSet:
    """Split the subjoin's nodes into the maximal connected pieces of ``tree``.

    Each piece is rooted at its shallowest node. Pieces are ordered by (root depth, root name).
    """
    members = sub.members
    found = []
    for node in tree.preorder():
        if node in members and (node == tree.root or tree.parent[node] not in members):
            nodes, stack = set(), [node]
            while stack:
                cur = stack.pop()
                nodes.add(cur)
                stack.extend(c for c in tree.children(cur) if c in members)
            found.append(Subtree(node, frozenset(nodes)))
    found.sort(key=lambda s: (tree.depth(s.root), s.root))
    return MaximalSubtreeSet(tuple(found))


def is_lowest(tree: ParseTree, forest: MaximalSubtreeSet, chosen: Subtree) -> bool:
    """No node of ``chosen`` has a descendant that roots another maximal subtree."""
    below = tree.descendants(chosen.root)
    return not any(s.root in below for s in forest if s != chosen)


def lowest_subtrees(tree: ParseTree, forest: MaximalSubtreeSet) -> list[Subtree]:
    """Lowest maximal subtrees, deepest root first, then by root name."""
    found = [s for s in forest if is_lowest(tree, forest, s)]
    return sorted(found, key=lambda s: (-tree.depth(s.root), s.root))


@dataclass(frozen=True)
class Stem:
    nodes: tuple[str, ...]
    dependant: bool
    tip_subtree: Subtree | None

    @property
    def tip(self) -> str:
        return self.nodes[-1]


def stem_of(tree: ParseTree, forest: MaximalSubtreeSet, chosen: Subtree) -> Stem:
    """The path from ``chosen``'s root up to the lowest ancestor that reaches another maximal subtree."""
    if not is_lowest(tree, forest, chosen):
        raise ValueError(f"maximal subtree rooted at {chosen.root!r} is not lowest")
    others = frozenset().union(*(s.nodes for s in forest if s != chosen))
    if not others:
        raise ValueError("a stem needs at least two maximal subtrees")
    path = [chosen.root]
    while True:
        node = tree.parent[path[-1]]
        path.append(node)
        if node in others or tree.descendants(node) & others:
            break
    tip_owner = forest.owner(path[-1])
    return Stem(tuple(path), tip_owner is not None, tip_owner)


# -- breaks and rewrites -----------------------------------------------------------------


@dataclass(frozen=True)
class BreakPoint:
    upper: str
    lower: str
    shared: frozenset[str]


def path_shared(join: JoinSchema, path: Sequence[str]) -> frozenset[str]:
    """Attributes present in every node of ``path``."""
    return frozenset.intersection(*(join.attrs(n) for n in path))


def detect_break(join: JoinSchema, tree: ParseTree, path: Sequence[str]) -> BreakPoint | None:
    """First consecutive pair of ``path`` sharing nothing once the path-wide attributes are removed.

    ``path`` is read from its first node, so the reported pair is the one closest to it.
    """
    if len(path) < 2:
        return None
    shared = path_shared(join, path)
    for a, b in zip(path, path[1:]):
        if not (join.attrs(a) - shared) & (join.attrs(b) - shared):
            if tree.parent.get(a) == b:
                return BreakPoint(upper=b, lower=a, shared=shared)
            if tree.parent.get(b) == a:
                return BreakPoint(upper=a, lower=b, shared=shared)
            raise TreeStructureError(f"{a!r} and {b!r} are not adjacent in the tree")
    return None


def reverse_path_transform(join: JoinSchema, tree: ParseTree, path: Sequence[str]) -> ParseTree:
    """Reverse a downward path ``a1..an`` so that ``an`` hangs from ``a1``'s old parent.

    Every other child keeps its parent, so the subtrees hanging off the path move with
    their path node.
    """
    path = list(path)
    if not path:
        raise TransformError("empty path")
    if path[0] == tree.root:
        raise TransformError("the first path node must have a parent", 0)
    for i, (a, b) in enumerate(zip(path, path[1:])):
        if tree.parent.get(b) != a:
            raise TransformError(f"{a!r} is not the parent of {b!r}", i + 1)
    top = tree.parent[path[0]]
    expected = join.attrs(top) & join.attrs(path[0])
    for i, node in enumerate(path):
        if join.attrs(top) & join.attrs(node) != expected:
            raise TransformError(f"shared-attributes condition fails at {node!r}", i)
    parent = dict(tree.parent)
    parent[path[-1]] = top
    for lower, upper in zip(path, path[1:]):
        parent[lower] = upper
    return ParseTree(tree.root, parent)


@dataclass(frozen=True)
class Change:
    delete: tuple[str, str]
    add: tuple[str, str]

    def to_json(self) -> dict[str, list[str]]:
        return {"delete": list(self.delete), "add": list(self.add)}


def apply_change(join: JoinSchema, tree: ParseTree, change: Change) -> ParseTree:
    """Swap one tree arc for another; the result keeps ``tree``'s root and must be valid."""
    arcs = set(tree.arcs())
    gone, new = frozenset(change.delete), frozenset(change.add)
    if gone not in arcs:
        raise InvalidTreeError(f"arc {change.delete} is not in the tree")
    if len(new) != 2 or not new <= tree.nodes:
        raise InvalidTreeError(f"arc {change.add} does not join two tree nodes")
    arcs.discard(gone)
    arcs.add(new)
    try:
        result = ParseTree.from_arcs(tree.root, tree.nodes, arcs)
    except TreeStructureError as exc:
        raise InvalidTreeError(f"change {change} does not yield a spanning tree") from exc
    bad = violated_attributes(join, result)
    if bad:
        raise InvalidTreeError(f"change {change} disconnects attribute(s) {bad}")
    return result


def rehang(join: JoinSchema, tree: ParseTree, node: str, new_parent: str) -> ParseTree:
    """Move the subtree rooted at ``node`` under ``new_parent``."""
    if node == tree.root:
        raise InvalidTreeError("cannot move the root")
    old = tree.parent[node]
    if old == new_parent:
        return tree
    return apply_change(join, tree, Change((old, node), (new_parent, node)))
