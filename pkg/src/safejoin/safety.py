"""Deciding whether a subjoin is safe, with a certificate either way.

A subjoin is safe exactly when some parse tree holds it as one connected piece. Unsafe
subjoins come with a fully reduced database on which the subjoin emits a dangling tuple.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Union

from . import engine
from .engine import Database, Relation
from .jointree import (
    MaximalSubtreeSet,
    ParseTree,
    Stem,
    Subtree,
    apply_change,
    build_parse_tree,
    detect_break,
    lowest_subtrees,
    maximal_subtrees,
    path_shared,
    rehang,
    reverse_path_transform,
    stem_of,
)
from .optimal import find_general_break
from .schema import JoinSchema, SubjoinSpec, connected_components, partial_edges
from .witness import chase_witness, nset_witness

log = logging.getLogger(__name__)


class ReductionStuck(RuntimeError):
    """Neither a tree with fewer maximal subtrees nor a verified n-set was found."""


class WitnessError(RuntimeError):
    """A constructed counterexample failed verification."""


def associated_nodes(join: JoinSchema, sub: SubjoinSpec, external: str) -> frozenset[str]:
    """Subjoin relations containing every subjoin attribute of ``external``."""
    if external in sub:
        raise ValueError(f"{external!r} is a subjoin relation")
    needed = join.attrs(external) & sub.attributes(join)
    return frozenset(m for m in sub.members if needed <= join.attrs(m))


def unassociated_relation(join: JoinSchema, sub: SubjoinSpec) -> str | None:
    """The first external relation (declaration order) with no associated subjoin relation."""
    for name in join.names:
        if name not in sub and not associated_nodes(join, sub, name):
            return name
    return None


# -- n-sets ------------------------------------------------------------------------------


@dataclass(frozen=True)
class NSet:
    attributes: frozenset[str]
    subtree: Subtree


def is_n_set(join: JoinSchema, forest: MaximalSubtreeSet, isolated: Subtree, attributes: frozenset[str]) -> bool:
    """Whether cutting every relation down to ``attributes`` keeps the join connected
    while separating ``isolated`` from the rest of the subjoin."""
    if not attributes:
        return False
    graph = partial_edges(join, attributes)
    if len(connected_components(graph)) != 1:
        return False
    members = frozenset().union(*(s.nodes for s in forest))
    inner = graph.only(members)
    if not any(a for n, a in inner.edges if n in isolated.nodes):
        return False
    if not any(a for n, a in inner.edges if n not in isolated.nodes):
        return False
    for comp in connected_components(inner):
        if comp & isolated.nodes and comp - isolated.nodes:
            return False
    return True


def _attrs_of(join: JoinSchema, nodes) -> frozenset[str]:
    return frozenset().union(*(join.attrs(n) for n in nodes))


def _shared_across(join: JoinSchema, forest: MaximalSubtreeSet, chosen: Subtree) -> frozenset[str]:
    rest = [s for s in forest if s != chosen]
    return _attrs_of(join, chosen.nodes) & _attrs_of(join, (n for s in rest for n in s.nodes))


def _shared_attributes(join: JoinSchema, forest: MaximalSubtreeSet) -> frozenset[str]:
    """Attributes appearing in at least two maximal subtrees."""
    seen: set[str] = set()
    twice: set[str] = set()
    for sub in forest:
        attrs = _attrs_of(join, sub.nodes)
        twice |= seen & attrs
        seen |= attrs
    return frozenset(twice)


def n_set_candidates(
    join: JoinSchema, tree: ParseTree, forest: MaximalSubtreeSet, chosen: Subtree
) -> list[frozenset[str]]:
    """Attribute sets read off the stem(s) of ``chosen``, smallest first.

    A dependant subtree contributes its stem. A non-dependant one is paired with each
    sibling (a lowest non-dependant subtree under the same tip) and contributes the path
    through both stems, as well as the two roots alone.
    """
    stem = stem_of(tree, forest, chosen)
    shared = _shared_attributes(join, forest)
    across = _shared_across(join, forest, chosen)
    paths: list[tuple[list[str], list[str]]] = []
    if stem.dependant:
        paths.append((list(stem.nodes), [chosen.root, stem.tip]))
    else:
        for other in lowest_subtrees(tree, forest):
            if other == chosen:
                continue
            other_stem = stem_of(tree, forest, other)
            if other_stem.dependant or other_stem.tip != stem.tip:
                continue
            through = list(stem.nodes) + list(reversed(other_stem.nodes[:-1]))
            paths.append((through, [chosen.root, other.root]))
        if not paths:
            paths.append((list(stem.nodes), [chosen.root]))
    found: list[frozenset[str]] = []
    for path, ends in paths:
        on_path = _attrs_of(join, path)
        for cand in (
            on_path - path_shared(join, path),
            on_path - across,
            on_path - shared,
            _attrs_of(join, ends) - shared,
            _attrs_of(join, ends) - across,
        ):
            if cand and cand not in found:
                found.append(cand)
    return sorted(found, key=lambda c: (len(c), sorted(c)))


def find_n_set(
    join: JoinSchema, tree: ParseTree, forest: MaximalSubtreeSet, chosen: Subtree
) -> NSet | None:
    """The smallest stem-derived candidate that satisfies the n-set conditions, if any."""
    if len(forest) < 2:
        return None
    for cand in n_set_candidates(join, tree, forest, chosen):
        if is_n_set(join, forest, chosen, cand):
            return NSet(cand, chosen)
    return None


# -- one reduction step ------------------------------------------------------------------


@dataclass(frozen=True)
class FewerTree:
    tree: ParseTree
    via: str


@dataclass(frozen=True)
class NSetFound:
    nset: NSet
    witness: Database


ReduceResult = Union[FewerTree, NSetFound]


def _stem_rewrite(
    join: JoinSchema, tree: ParseTree, sub: SubjoinSpec, forest: MaximalSubtreeSet, chosen: Subtree, stem: Stem
) -> ParseTree | None:
    point = detect_break(join, tree, stem.nodes)
    if point is None:
        return None
    candidates = [
        n for n in sub.members if n not in chosen.nodes and point.shared <= join.attrs(n)
    ]
    if not candidates:
        return None
    if point.upper in candidates:
        target = point.upper
    else:
        preferred = set(associated_nodes(join, sub, point.upper)) if point.upper not in sub else set()
        target = min(candidates, key=lambda n: (n not in preferred, tree.depth(n), n))
    # reverse the stem segment below the break so the subtree root hangs from the break's upper node
    below = list(stem.nodes[: stem.nodes.index(point.lower) + 1])
    flipped = reverse_path_transform(join, tree, below[::-1])
    return rehang(join, flipped, chosen.root, target)


def reduce_step(join: JoinSchema, tree: ParseTree, sub: SubjoinSpec) -> ReduceResult:
    """Either merge two maximal subtrees or exhibit an n-set with a verified witness.

    Lowest subtrees are tried deepest first. A break on some stem is preferred over any n-set.
    """
    forest = maximal_subtrees(tree, sub)
    if len(forest) < 2:
        raise ValueError("the subjoin already forms a single maximal subtree")
    lowest = lowest_subtrees(tree, forest)

    for chosen in lowest:
        stem = stem_of(tree, forest, chosen)
        rewritten = _stem_rewrite(join, tree, sub, forest, chosen, stem)
        if rewritten is not None:
            return FewerTree(rewritten, "stem-break")

    for chosen in lowest:
        for cand in n_set_candidates(join, tree, forest, chosen):
            if not is_n_set(join, forest, chosen, cand):
                continue
            witness = nset_witness(join, cand)
            if engine.verify_witness(join, sub, witness):
                return NSetFound(NSet(cand, chosen), witness)
            log.debug("n-set %s passed the structural check but its witness did not verify", sorted(cand))

    general = find_general_break(join, tree, sub)
    if general is not None:
        return FewerTree(apply_change(join, tree, general.change(join, tree)), "general-break")

    raise ReductionStuck(f"no progress for subjoin {sorted(sub.members)} on {tree!r}")


# -- verdicts ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SafetyVerdict:
    safe: bool
    cause: str
    certificate: ParseTree | None = None
    witness: Database | None = None
    dangling: dict[str, Any] | None = None
    nset: NSet | None = None
    unassociated: str | None = None
    iterations: int = 0

    def to_json(self, join: JoinSchema) -> dict[str, Any]:
        return {
            "safe": self.safe,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "witness": engine.database_to_json(join, self.witness) if self.witness else None,
            "cause": self.cause,
            "dangling": self.dangling,
        }


def _unsafe(join: JoinSchema, sub: SubjoinSpec, witness: Database, cause: str, **extra) -> SafetyVerdict:
    if not engine.verify_witness(join, sub, witness):
        raise WitnessError(f"witness for {cause} does not verify")
    inner, dangling = engine.subjoin_dangling(join, sub, witness)
    row = Relation(inner.columns, dangling).sorted_rows()[0]
    return SafetyVerdict(False, cause, witness=witness, dangling=dict(zip(inner.columns, row)), **extra)


def decide_safe(join: JoinSchema, sub: SubjoinSpec, tree: ParseTree | None = None) -> SafetyVerdict:
    """Safe with a one-piece parse tree, or unsafe with a verified counterexample database.

    Raises CyclicJoinError for cyclic joins.
    """
    tree = tree or build_parse_tree(join)
    if sub.is_full(join):
        return SafetyVerdict(True, "whole-join", certificate=tree)

    lonely = unassociated_relation(join, sub)
    if lonely is not None:
        witness = chase_witness(join, tree, sub)
        return _unsafe(join, sub, witness, f"no-associated-node:{lonely}", unassociated=lonely)

    for iteration in range(len(join)):
        if len(maximal_subtrees(tree, sub)) == 1:
            return SafetyVerdict(True, "single-subtree", certificate=tree, iterations=iteration)
        step = reduce_step(join, tree, sub)
        if isinstance(step, NSetFound):
            cause = "n-set:" + ",".join(sorted(step.nset.attributes))
            return _unsafe(join, sub, step.witness, cause, nset=step.nset, iterations=iteration)
        tree = step.tree
    raise ReductionStuck("maximal-subtree count failed to reach one within n-1 steps")
