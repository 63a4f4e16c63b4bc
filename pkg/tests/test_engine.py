import pytest
from hypothesis import given, settings, strategies as st

from safejoin import engine
from safejoin.engine import Relation
from safejoin.jointree import build_parse_tree
from safejoin.schema import JoinSchema, SchemaError


def test_ex1_counts(ex1, ex1_db):
    assert len(engine.join_output(ex1, ex1_db)) == 3
    sub = ex1.subjoin(["r1", "r2", "r3"])
    inner, dangling = engine.subjoin_dangling(ex1, sub, ex1_db)
    assert len(inner) == 4
    assert dangling == {("a", "b", "c")}
    assert engine.is_fully_reduced(ex1, ex1_db)
    assert engine.verify_witness(ex1, sub, ex1_db)


def test_natural_join_and_projection():
    r = Relation.of("AB", [(1, 2), (1, 3), (2, 2)])
    s = Relation.of("BC", [(2, "x"), (4, "y")])
    joined = engine.natural_join(r, s)
    assert joined.columns == ("A", "B", "C")
    assert joined.sorted_rows() == [(1, 2, "x"), (2, 2, "x")]
    assert engine.eval_join([r, s], "AC").sorted_rows() == [(1, "x"), (2, "x")]


def test_eval_join_cartesian_when_disconnected():
    r = Relation.of("A", [(1,), (2,)])
    s = Relation.of("B", [(3,)])
    assert len(engine.eval_join([r, s], "AB")) == 2


def test_eval_join_empty_relation():
    r = Relation.of("AB", [(1, 2)])
    empty = Relation.of("BC")
    out = engine.eval_join([r, empty], "ABC")
    assert out.columns == ("A", "B", "C") and len(out) == 0


def test_eval_join_rejects_unknown_output():
    with pytest.raises(SchemaError):
        engine.eval_join([Relation.of("AB")], "Z")


def test_semijoin_and_dangling():
    r = Relation.of("AB", [(1, 2), (1, 3)])
    s = Relation.of("BC", [(2, 0)])
    assert engine.semijoin(r, s).rows == {(1, 2)}
    assert engine.dangling_tuples(r, s) == {(1, 3)}


def test_full_reduce_removes_injected_dangling(ex1, ex1_db):
    db = dict(ex1_db)
    db["r1"] = Relation(db["r1"].columns, db["r1"].rows | {("z", "z")})
    assert not engine.is_fully_reduced(ex1, db)
    reduced = engine.full_reduce(build_parse_tree(ex1), db)
    assert reduced == ex1_db


def test_verify_witness_rejects_full_subjoin_and_unreduced(ex1, ex1_db):
    assert not engine.verify_witness(ex1, ex1.subjoin(ex1.names), ex1_db)
    db = dict(ex1_db)
    db["r1"] = Relation(db["r1"].columns, db["r1"].rows | {("z", "z")})
    assert not engine.verify_witness(ex1, ex1.subjoin(["r1", "r2", "r3"]), db)


def test_database_json_round_trip(ex1, ex1_db):
    doc = engine.database_to_json(ex1, ex1_db)
    assert doc["relations"]["r0"]["rows"][0] == ["a", "b", "c1"]
    assert engine.database_from_json(ex1, doc) == ex1_db


@pytest.mark.parametrize("doc", [
    {"relations": {"r0": {"columns": ["A", "B", "C"], "rows": []}}},
    {"relations": {"r0": {"columns": ["A", "B"], "rows": []}, "r1": {}, "r2": {}, "r3": {}}},
    {"rows": []},
])
def test_database_from_json_rejects(ex1, doc):
    with pytest.raises(SchemaError):
        engine.database_from_json(ex1, doc)


def test_generators_are_deterministic(fig3):
    assert engine.random_reduced_database(fig3, 4, 3) == engine.random_reduced_database(fig3, 4, 3)
    assert engine.random_database(fig3, 4, 3) == engine.random_database(fig3, 4, 3)
    with pytest.raises(ValueError):
        engine.random_reduced_database(fig3, 0, 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5))
def test_random_reduced_is_fully_reduced(seed, k):
    join = JoinSchema.from_names("ABCDE", "ACBE", "ADE", "AB", "AE")
    db = engine.random_reduced_database(join, seed, k)
    assert engine.is_fully_reduced(join, db)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_full_reduce_preserves_output(seed):
    join = JoinSchema.from_names("AB", "BC", "CD", "BE")
    db = engine.random_database(join, seed, 6, 2)
    tree = build_parse_tree(join)
    reduced = engine.full_reduce(tree, db)
    assert engine.join_output(join, reduced) == engine.join_output(join, db)
    assert engine.full_reduce(tree, reduced) == reduced
