"""Joins as hypergraphs: relation schemas, subjoins, boundary attributes and partial edges."""
from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any


class SchemaError(ValueError):
    """Raised for malformed schema or subjoin documents."""


@dataclass(frozen=True)
class RelationSchema:
    name: str
    attributes: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("relation name must be nonempty")
        if not self.attributes:
            raise SchemaError(f"relation {self.name!r} has no attributes")
        if any(not a for a in self.attributes):
            raise SchemaError(f"relation {self.name!r} has an empty attribute name")
        if len(set(self.attributes)) != len(self.attributes):
            raise SchemaError(f"relation {self.name!r} repeats an attribute")

    @property
    def attrset(self) -> frozenset[str]:
        return frozenset(self.attributes)


@dataclass(frozen=True)
class JoinSchema:
    """A natural join over named relations, plus the attributes projected in its output.

    Relation order is the declaration order and is preserved everywhere it is observable
    (serialization, join evaluation). Two relations may carry identical attribute sets.
    """

    relations: tuple[RelationSchema, ...]
    output: frozenset[str] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not self.relations:
            raise SchemaError("a join needs at least one relation")
        seen: set[str] = set()
        for rel in self.relations:
            if rel.name in seen:
                raise SchemaError(f"duplicate relation name {rel.name!r}")
            seen.add(rel.name)
        everything = frozenset().union(*(r.attrset for r in self.relations))
        if self.output is None:
            object.__setattr__(self, "output", everything)
        else:
            out = frozenset(self.output)
            unknown = out - everything
            if unknown:
                raise SchemaError(f"unknown attribute(s) in output list: {sorted(unknown)}")
            object.__setattr__(self, "output", out)
        object.__setattr__(self, "_by_name", {r.name: r for r in self.relations})

    @classmethod
    def from_mapping(
        cls, relations: Mapping[str, Iterable[str]], output: Iterable[str] | None = None
    ) -> JoinSchema:
        """Build a join from ``{name: attributes}``; a string of attributes is split per character."""
        rels = tuple(RelationSchema(name, tuple(attrs)) for name, attrs in relations.items())
        return cls(rels, None if output is None else frozenset(output))

    @classmethod
    def from_names(cls, *names: str, output: Iterable[str] | None = None) -> JoinSchema:
        """Relations named after their single-letter attributes, e.g. ``from_names("ABC", "AB")``."""
        return cls.from_mapping({n: n for n in names}, output)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    @property
    def all_attributes(self) -> frozenset[str]:
        return frozenset().union(*(r.attrset for r in self.relations))

    def relation(self, name: str) -> RelationSchema:
        try:
            return self._by_name[name]  # type: ignore[attr-defined]
        except KeyError:
            raise SchemaError(f"unknown relation {name!r}") from None

    def attrs(self, name: str) -> frozenset[str]:
        return self.relation(name).attrset

    def __contains__(self, name: object) -> bool:
        return name in self._by_name  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.relations)

    def subjoin(self, members: Iterable[str]) -> SubjoinSpec:
        members = frozenset(members)
        if not members:
            raise SchemaError("a subjoin needs at least one relation")
        unknown = sorted(m for m in members if m not in self)
        if unknown:
            raise SchemaError(f"subjoin names unknown relation(s): {unknown}")
        return SubjoinSpec(members)

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "relations": [{"name": r.name, "attributes": list(r.attributes)} for r in self.relations]
        }
        if self.output != self.all_attributes:
            doc["output"] = [a for a in _attribute_order(self) if a in self.output]
        return doc


def _attribute_order(join: JoinSchema) -> list[str]:
    order: dict[str, None] = {}
    for rel in join.relations:
        order.update(dict.fromkeys(rel.attributes))
    return list(order)


@dataclass(frozen=True)
class SubjoinSpec:
    members: frozenset[str]

    def attributes(self, join: JoinSchema) -> frozenset[str]:
        """The attributes appearing in some member relation."""
        return frozenset().union(*(join.attrs(m) for m in self.members))

    def is_full(self, join: JoinSchema) -> bool:
        return self.members == frozenset(join.names)

    def __contains__(self, name: object) -> bool:
        return name in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Hypergraph:
    """Edges labelled by the relation they were cut from; empty edges are kept."""

    edges: tuple[tuple[str, frozenset[str]], ...]

    def nonempty(self) -> tuple[tuple[str, frozenset[str]], ...]:
        return tuple(e for e in self.edges if e[1])

    def edge(self, origin: str) -> frozenset[str]:
        for name, attrs in self.edges:
            if name == origin:
                return attrs
        raise KeyError(origin)

    def restrict(self, keep: Iterable[str]) -> Hypergraph:
        keep = frozenset(keep)
        return Hypergraph(tuple((n, a & keep) for n, a in self.edges))

    def only(self, origins: Iterable[str]) -> Hypergraph:
        origins = frozenset(origins)
        return Hypergraph(tuple(e for e in self.edges if e[0] in origins))


def _decode(text: str | Mapping[str, Any]) -> Any:
    if not isinstance(text, str):
        return text
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc


def parse_schema(text: str | Mapping[str, Any]) -> JoinSchema:
    """Parse a schema document (JSON text or an already-decoded mapping)."""
    doc = _decode(text)
    if not isinstance(doc, Mapping) or "relations" not in doc:
        raise SchemaError("schema document must be an object with a 'relations' list")
    raw = doc["relations"]
    if not isinstance(raw, list):
        raise SchemaError("'relations' must be a list")
    rels = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, Mapping) or "name" not in entry or "attributes" not in entry:
            raise SchemaError(f"relations[{i}] needs 'name' and 'attributes'")
        attrs = entry["attributes"]
        if not isinstance(attrs, list) or not all(isinstance(a, str) for a in attrs):
            raise SchemaError(f"relations[{i}].attributes must be a list of strings")
        rels.append(RelationSchema(str(entry["name"]), tuple(attrs)))
    output = doc.get("output")
    if output is not None and (
        not isinstance(output, list) or not all(isinstance(a, str) for a in output)
    ):
        raise SchemaError("'output' must be a list of strings")
    return JoinSchema(tuple(rels), None if output is None else frozenset(output))


def parse_subjoin(join: JoinSchema, text: str | Mapping[str, Any]) -> SubjoinSpec:
    doc = _decode(text)
    if not isinstance(doc, Mapping) or not isinstance(doc.get("subjoin"), list):
        raise SchemaError("subjoin document must be an object with a 'subjoin' list")
    return join.subjoin(doc["subjoin"])


def boundary_attributes(join: JoinSchema, sub: SubjoinSpec) -> frozenset[str]:
    """Attributes occurring both in a member relation and in a non-member relation.

    Empty when the subjoin is the whole join.
    """
    inside = sub.attributes(join)
    outside = frozenset().union(*(join.attrs(n) for n in join.names if n not in sub))
    return inside & outside


def subjoin_output_attributes(join: JoinSchema, sub: SubjoinSpec) -> frozenset[str]:
    return (join.output & sub.attributes(join)) | boundary_attributes(join, sub)


def complement(join: JoinSchema, sub: SubjoinSpec) -> SubjoinSpec:
    rest = frozenset(join.names) - sub.members
    if not rest:
        raise SchemaError("the complement of the whole join is empty")
    return SubjoinSpec(rest)


def partial_edges(join: JoinSchema, keep: Iterable[str]) -> Hypergraph:
    keep = frozenset(keep)
    return Hypergraph(tuple((r.name, r.attrset & keep) for r in join.relations))


def hypergraph(join: JoinSchema) -> Hypergraph:
    return Hypergraph(tuple((r.name, r.attrset) for r in join.relations))


def connected_components(graph: Hypergraph) -> list[frozenset[str]]:
    """Partition the nonempty edges into maximal connected sets, by edge origin.

    Components come out in order of their first edge.
    """
    edges = graph.nonempty()
    parent = list(range(len(edges)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[str, int] = {}
    for i, (_, attrs) in enumerate(edges):
        for a in attrs:
            if a in owner:
                parent[find(i)] = find(owner[a])
            else:
                owner[a] = i

    groups: dict[int, list[str]] = {}
    for i, (name, _) in enumerate(edges):
        groups.setdefault(find(i), []).append(name)
    return [frozenset(g) for g in groups.values()]
