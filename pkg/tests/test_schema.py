import pytest
from hypothesis import given, strategies as st

from safejoin.schema import (
    JoinSchema,
    SchemaError,
    SubjoinSpec,
    boundary_attributes,
    complement,
    connected_components,
    parse_schema,
    parse_subjoin,
    partial_edges,
    subjoin_output_attributes,
)


def test_parse_schema_defaults_output_to_all_attributes(ex1):
    assert ex1.names == ("r0", "r1", "r2", "r3")
    assert ex1.output == frozenset("ABC")
    assert ex1.attrs("r3") == frozenset("BC")


def test_parse_schema_round_trip(fig3):
    again = parse_schema(fig3.to_json())
    assert again == fig3


@pytest.mark.parametrize("doc, message", [
    ({"relations": []}, "at least one"),
    ({"relations": [{"name": "R", "attributes": []}]}, "no attributes"),
    ({"relations": [{"name": "R", "attributes": ["A", "A"]}]}, "repeats"),
    ({"relations": [{"name": "R", "attributes": ["A"]}, {"name": "R", "attributes": ["B"]}]}, "duplicate"),
    ({"relations": [{"name": "R", "attributes": ["A"]}], "output": ["Z"]}, "output"),
])
def test_parse_schema_rejects(doc, message):
    with pytest.raises(SchemaError, match=message):
        parse_schema(doc)


def test_parse_schema_rejects_bad_json():
    with pytest.raises(SchemaError):
        parse_schema("{not json")


def test_subjoin_validation(ex1):
    assert parse_subjoin(ex1, {"subjoin": ["r1", "r2"]}).members == {"r1", "r2"}
    with pytest.raises(SchemaError):
        ex1.subjoin([])
    with pytest.raises(SchemaError):
        ex1.subjoin(["r9"])


def test_boundary_and_output_ex1(ex1):
    sub = ex1.subjoin(["r1", "r2", "r3"])
    assert boundary_attributes(ex1, sub) == frozenset("ABC")
    assert subjoin_output_attributes(ex1, sub) == frozenset("ABC")
    assert complement(ex1, sub).members == {"r0"}


def test_output_is_projection_plus_boundary(projection):
    join = projection
    sub = join.subjoin(["BCF", "FG"])
    assert boundary_attributes(join, sub) == frozenset("BC")
    assert subjoin_output_attributes(join, sub) == frozenset("BC")
    sub = join.subjoin(["ACE"])
    assert subjoin_output_attributes(join, sub) == frozenset("ACE")


def test_complement_of_full_join_raises(ex1):
    with pytest.raises(SchemaError):
        complement(ex1, ex1.subjoin(ex1.names))


def test_partial_edges_components():
    join = JoinSchema.from_names("AB", "BE", "CE", "CD")
    graph = partial_edges(join, "AD")
    assert graph.edge("BE") == frozenset()
    assert sorted(map(sorted, connected_components(graph))) == [["AB"], ["CD"]]
    assert len(connected_components(partial_edges(join, "ABCDE"))) == 1


def test_connected_components_ignores_empty_edges():
    join = JoinSchema.from_names("AB", "CD", "EF")
    assert connected_components(partial_edges(join, "G")) == []


names = st.lists(st.sampled_from("ABCDEF"), min_size=1, max_size=4, unique=True).map("".join)


@given(st.lists(names, min_size=1, max_size=6, unique=True), st.data())
def test_boundary_symmetric_with_complement(rels, data):
    join = JoinSchema.from_names(*rels)
    if len(join) < 2:
        return
    members = data.draw(st.sets(st.sampled_from(join.names), min_size=1, max_size=len(join) - 1))
    sub = SubjoinSpec(frozenset(members))
    other = complement(join, sub)
    assert boundary_attributes(join, sub) == boundary_attributes(join, other)
    assert boundary_attributes(join, sub) <= sub.attributes(join) & other.attributes(join)


@given(st.lists(names, min_size=1, max_size=6, unique=True), st.sets(st.sampled_from("ABCDEF")))
def test_components_partition_nonempty_edges(rels, keep):
    join = JoinSchema.from_names(*rels)
    graph = partial_edges(join, keep)
    comps = connected_components(graph)
    covered = [n for c in comps for n in c]
    assert sorted(covered) == sorted(n for n, a in graph.edges if a)
