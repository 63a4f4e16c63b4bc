import pytest

from safejoin import engine
from safejoin.jointree import ParseTree, maximal_subtrees, validate_parse_tree
from safejoin.safety import (
    FewerTree,
    NSetFound,
    associated_nodes,
    decide_safe,
    find_n_set,
    is_n_set,
    reduce_step,
    unassociated_relation,
)
from safejoin.schema import JoinSchema

FIG4 = [
    (("AE", "ADE"), True),
    (("ACBE", "AB"), True),
    (("ACBE", "AE"), True),
    (("AB", "ADE"), False),
    (("ACBE", "ADE"), False),
    (("AB", "AE"), False),
]


def check_verdict(join, sub, verdict):
    if verdict.safe:
        assert validate_parse_tree(join, verdict.certificate)
        assert len(maximal_subtrees(verdict.certificate, sub)) == 1
    else:
        assert engine.verify_witness(join, sub, verdict.witness)
        assert verdict.dangling


@pytest.mark.parametrize("pair, safe", FIG4)
def test_fig4_table(fig3, pair, safe):
    sub = fig3.subjoin(pair)
    verdict = decide_safe(fig3, sub)
    assert verdict.safe is safe
    check_verdict(fig3, sub, verdict)


@pytest.mark.parametrize("pair, safe", FIG4)
def test_fig4_table_from_drawn_tree(fig3, fig3_tree, pair, safe):
    sub = fig3.subjoin(pair)
    verdict = decide_safe(fig3, sub, fig3_tree)
    assert verdict.safe is safe
    check_verdict(fig3, sub, verdict)


def test_acyclic_subjoin_can_be_unsafe(example2):
    sub = example2.subjoin(example2.names[:5])
    assert associated_nodes(example2, sub, "ABCDEF") == frozenset()
    verdict = decide_safe(example2, sub)
    assert not verdict.safe
    assert verdict.cause == "no-associated-node:ABCDEF"
    assert engine.verify_witness(example2, sub, verdict.witness)


def test_ex1_unsafe_by_chase(ex1, ex1_db):
    sub = ex1.subjoin(["r1", "r2", "r3"])
    assert associated_nodes(ex1, sub, "r0") == frozenset()
    verdict = decide_safe(ex1, sub)
    assert not verdict.safe and verdict.unassociated == "r0"
    assert verdict.witness == ex1_db
    assert verdict.dangling == {"A": "a", "B": "b", "C": "c"}


def test_associated_nodes():
    join = JoinSchema.from_names("AB", "BC", "CD", "DE")
    sub = join.subjoin(["AB", "BC"])
    assert associated_nodes(join, sub, "DE") == {"AB", "BC"}
    assert associated_nodes(join, sub, "CD") == {"BC"}
    with pytest.raises(ValueError):
        associated_nodes(join, sub, "AB")
    assert unassociated_relation(join, sub) is None


def test_whole_join_is_safe(fig3):
    verdict = decide_safe(fig3, fig3.subjoin(fig3.names))
    assert verdict.safe and verdict.cause == "whole-join"


@pytest.mark.parametrize("pair, expected", [(("AB", "AE"), "BE"), (("AB", "ADE"), "BDE")])
def test_find_n_set_fig3(fig3, fig3_tree, pair, expected):
    sub = fig3.subjoin(pair)
    forest = maximal_subtrees(fig3_tree, sub)
    found = find_n_set(fig3, fig3_tree, forest, forest.by_root("AB"))
    assert found.attributes == frozenset(expected)
    assert is_n_set(fig3, forest, found.subtree, found.attributes)


def test_find_n_set_single_subtree(fig3, fig3_tree):
    sub = fig3.subjoin(["ACBE", "AB"])
    forest = maximal_subtrees(fig3_tree, sub)
    assert find_n_set(fig3, fig3_tree, forest, next(iter(forest))) is None


def test_is_n_set_conditions(fig3, fig3_tree):
    forest = maximal_subtrees(fig3_tree, fig3.subjoin(["AB", "AE"]))
    chosen = forest.by_root("AB")
    assert not is_n_set(fig3, forest, chosen, frozenset())
    # A alone keeps AB and AE connected
    assert not is_n_set(fig3, forest, chosen, frozenset("A"))
    # B alone leaves AE with no edge
    assert not is_n_set(fig3, forest, chosen, frozenset("B"))


def test_reduce_step_moves_ae_under_ade(fig3, fig3_tree):
    sub = fig3.subjoin(["AE", "ADE"])
    step = reduce_step(fig3, fig3_tree, sub)
    assert isinstance(step, FewerTree)
    assert step.tree.parent["AE"] == "ADE"
    assert len(maximal_subtrees(step.tree, sub)) == 1


def test_reduce_step_finds_nset(fig3, fig3_tree):
    sub = fig3.subjoin(["AB", "AE"])
    step = reduce_step(fig3, fig3_tree, sub)
    assert isinstance(step, NSetFound)
    assert step.nset.attributes == frozenset("BE")
    assert engine.verify_witness(fig3, sub, step.witness)


def test_reduce_step_nested_chain_break():
    join = JoinSchema.from_names("ABCD", "ABE", "ABEF")
    tree = ParseTree.from_arcs("ABCD", join.names, [("ABCD", "ABE"), ("ABE", "ABEF")])
    sub = join.subjoin(["ABCD", "ABEF"])
    step = reduce_step(join, tree, sub)
    assert isinstance(step, FewerTree)
    assert step.tree.parent == {"ABEF": "ABCD", "ABE": "ABEF"}
    assert len(maximal_subtrees(step.tree, sub)) == 1


def test_reduce_step_requires_two_subtrees(fig3, fig3_tree):
    with pytest.raises(ValueError):
        reduce_step(fig3, fig3_tree, fig3.subjoin(["ACBE", "AB"]))


def test_star_subjoin_is_safe():
    join = JoinSchema.from_mapping({f"n{k:02d}": ["A", f"B{k}"] for k in range(1, 9)})
    tree = ParseTree.from_arcs(
        "n01", join.names,
        [("n01", "n02"), ("n02", "n03"), ("n03", "n04"), ("n01", "n05"), ("n05", "n06"), ("n06", "n07"), ("n07", "n08")],
    )
    sub = join.subjoin(["n02", "n04", "n06", "n08"])
    verdict = decide_safe(join, sub, tree)
    assert verdict.safe and verdict.iterations == 3
    check_verdict(join, sub, verdict)


def test_chain_unsafe_by_nset():
    join = JoinSchema.from_names("AB", "BE", "CE", "CD")
    sub = join.subjoin(["AB", "CD"])
    verdict = decide_safe(join, sub)
    assert not verdict.safe and verdict.cause.startswith("n-set:")
    check_verdict(join, sub, verdict)


def test_verdict_json(fig3):
    doc = decide_safe(fig3, fig3.subjoin(["AE", "ADE"])).to_json(fig3)
    assert set(doc) == {"safe", "certificate", "witness", "cause", "dangling"}
    assert doc["safe"] and doc["witness"] is None
