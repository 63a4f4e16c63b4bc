"""Parse trees with the fewest maximal subtrees for a subjoin, plus an exhaustive oracle."""
from __future__ import annotations

import itertools
from collections.abc import Iterator
from dataclasses import dataclass

from .jointree import (
    BreakPoint,
    Change,
    MaximalSubtreeSet,
    ParseTree,
    Subtree,
    apply_change,
    detect_break,
    maximal_subtrees,
    path_shared,
    validate_parse_tree,
)
from .schema import JoinSchema, SubjoinSpec

MAX_ENUMERATION = 6


@dataclass(frozen=True)
class GeneralBreak:
    first: Subtree
    second: Subtree
    path: tuple[str, ...]
    point: BreakPoint

    def change(self, join: JoinSchema, tree: ParseTree) -> Change:
        """Cut the break arc and hang the first subtree's path end under the second subtree.

        The new parent is the node of the second subtree that holds the path-wide attributes
        and sits closest to that subtree's root (ties by name).
        """
        shared = self.point.shared
        targets = [n for n in self.second.nodes if shared <= join.attrs(n)]
        target = min(targets, key=lambda n: (tree.depth(n), n))
        return Change((self.point.upper, self.point.lower), (target, self.path[0]))


def connecting_path(tree: ParseTree, first: Subtree, second: Subtree) -> list[str]:
    """Shortest tree path from a node of ``first`` to a node of ``second``."""
    full = tree.path(first.root, second.root)
    start = max(i for i, n in enumerate(full) if n in first.nodes)
    end = min(i for i, n in enumerate(full) if n in second.nodes)
    return full[start : end + 1]


def _pair_order(tree: ParseTree, forest: MaximalSubtreeSet) -> list[tuple[Subtree, Subtree]]:
    ranked = sorted(forest, key=lambda s: (-tree.depth(s.root), s.root))
    return list(itertools.combinations(ranked, 2))


def find_general_break(join: JoinSchema, tree: ParseTree, sub: SubjoinSpec) -> GeneralBreak | None:
    """A break on a path joining two maximal subtrees through external nodes only."""
    forest = maximal_subtrees(tree, sub)
    for first, second in _pair_order(tree, forest):
        path = connecting_path(tree, first, second)
        if any(n in sub for n in path[1:-1]):
            continue
        point = detect_break(join, tree, path)
        if point is None:
            continue
        shared = path_shared(join, path)
        if any(shared <= join.attrs(n) for n in second.nodes):
            return GeneralBreak(first, second, tuple(path), point)
    return None


@dataclass(frozen=True)
class MinimizationStep:
    change: Change
    subtrees_before: int
    subtrees_after: int

    def to_json(self) -> dict:
        return {
            "change": self.change.to_json(),
            "subtrees_before": self.subtrees_before,
            "subtrees_after": self.subtrees_after,
        }


def minimization_trace(
    join: JoinSchema, sub: SubjoinSpec, start: ParseTree
) -> tuple[ParseTree, list[MinimizationStep]]:
    tree, steps = start, []
    count = len(maximal_subtrees(tree, sub))
    while count > 1:
        found = find_general_break(join, tree, sub)
        if found is None:
            break
        change = found.change(join, tree)
        tree = apply_change(join, tree, change)
        after = len(maximal_subtrees(tree, sub))
        if after >= count:
            raise AssertionError(f"change {change} did not reduce the maximal subtrees ({count} -> {after})")
        steps.append(MinimizationStep(change, count, after))
        count = after
    return tree, steps


def minimize_maximal_subtrees(join: JoinSchema, sub: SubjoinSpec, start: ParseTree) -> ParseTree:
    """Apply general-break changes until none is left; each one merges two maximal subtrees."""
    return minimization_trace(join, sub, start)[0]


def _prufer_trees(names: list[str]) -> Iterator[list[tuple[str, str]]]:
    n = len(names)
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(names[0], names[1])]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for i in seq:
            degree[i] += 1
        arcs = []
        for i in seq:
            leaf = degree.index(1)
            arcs.append((names[leaf], names[i]))
            degree[leaf] -= 1
            degree[i] -= 1
        u, v = (k for k in range(n) if degree[k] == 1)
        arcs.append((names[u], names[v]))
        yield arcs


def enumerate_parse_trees(join: JoinSchema, limit: int = MAX_ENUMERATION) -> Iterator[ParseTree]:
    """Every parse tree of ``join`` once, rooted at the smallest relation name."""
    names = sorted(join.names)
    if len(names) > limit:
        raise ValueError(f"refusing to enumerate trees over {len(names)} relations (limit {limit})")
    for arcs in _prufer_trees(names):
        tree = ParseTree.from_arcs(names[0], names, arcs)
        if validate_parse_tree(join, tree):
            yield tree


def minimum_subtree_count(join: JoinSchema, sub: SubjoinSpec, limit: int = MAX_ENUMERATION) -> int:
    return min(len(maximal_subtrees(t, sub)) for t in enumerate_parse_trees(join, limit))
