"""Random acyclic joins and subjoins for property checks."""
from __future__ import annotations

import random
from collections.abc import Iterator

from .schema import JoinSchema, RelationSchema, SubjoinSpec

ATTRIBUTE_NAMES = "ABCDEFGH"


def random_acyclic_join(rng: random.Random, max_relations: int = 6, max_attributes: int = 8) -> JoinSchema:
    """Grow a random tree, then give each attribute a random connected set of its nodes.

    The generating tree is a parse tree of the result, so the join is acyclic.
    """
    n = rng.randint(1, max_relations)
    parent = {i: rng.randrange(i) for i in range(1, n)}
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    for c, p in parent.items():
        adj[c].add(p)
        adj[p].add(c)

    attrs: dict[int, list[str]] = {i: [] for i in range(n)}
    for name in ATTRIBUTE_NAMES[: rng.randint(1, max_attributes)]:
        start = rng.randrange(n)
        region = {start}
        frontier = set(adj[start])
        # small regions give long chains of partial overlaps, the interesting case
        target = rng.choice((1, 2, 2, 2, 3, 3, rng.randint(1, n)))
        while frontier and len(region) < target:
            nxt = rng.choice(sorted(frontier))
            region.add(nxt)
            frontier |= adj[nxt]
            frontier -= region
        for node in region:
            attrs[node].append(name)
    # an empty relation borrows an attribute from a nonempty neighbour; regions stay connected
    while any(not a for a in attrs.values()):
        for i in range(n):
            donors = [j for j in sorted(adj[i]) if attrs[j]]
            if not attrs[i] and donors:
                attrs[i].append(rng.choice(attrs[rng.choice(donors)]))

    order = list(range(n))
    rng.shuffle(order)
    relations = tuple(RelationSchema(f"r{i}", tuple(sorted(attrs[node]))) for i, node in enumerate(order))
    everything = sorted({a for r in relations for a in r.attributes})
    output = None
    if rng.random() < 0.3:
        output = frozenset(a for a in everything if rng.random() < 0.5)
    return JoinSchema(relations, output)


def random_subjoin(rng: random.Random, join: JoinSchema, proper: bool = True) -> SubjoinSpec:
    names = list(join.names)
    if proper and len(names) == 1:
        return SubjoinSpec(frozenset(names))
    upper = len(names) - 1 if proper else len(names)
    size = rng.randint(1, upper)
    return SubjoinSpec(frozenset(rng.sample(names, size)))


def corpus(seed: int, count: int, max_relations: int = 6, max_attributes: int = 8) -> Iterator[tuple[JoinSchema, SubjoinSpec]]:
    """``count`` (join, proper subjoin) pairs; joins with a single relation are skipped."""
    rng = random.Random(seed)
    made = 0
    while made < count:
        join = random_acyclic_join(rng, max_relations, max_attributes)
        if len(join) < 2:
            continue
        yield join, random_subjoin(rng, join)
        made += 1
