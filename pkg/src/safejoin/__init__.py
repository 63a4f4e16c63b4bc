"""Safety of subjoins of acyclic joins, with certificates."""
from .engine import (
    Database,
    Relation,
    dangling_tuples,
    eval_join,
    full_reduce,
    random_reduced_database,
    semijoin,
    verify_witness,
)
from .jointree import (
    CyclicJoinError,
    ParseTree,
    build_parse_tree,
    maximal_subtrees,
    validate_parse_tree,
)
from .optimal import enumerate_parse_trees, minimize_maximal_subtrees
from .safety import SafetyVerdict, decide_safe
from .schema import JoinSchema, RelationSchema, SubjoinSpec, parse_schema

__all__ = [
    "CyclicJoinError",
    "Database",
    "JoinSchema",
    "ParseTree",
    "Relation",
    "RelationSchema",
    "SafetyVerdict",
    "SubjoinSpec",
    "build_parse_tree",
    "dangling_tuples",
    "decide_safe",
    "enumerate_parse_trees",
    "eval_join",
    "full_reduce",
    "maximal_subtrees",
    "minimize_maximal_subtrees",
    "parse_schema",
    "random_reduced_database",
    "semijoin",
    "validate_parse_tree",
    "verify_witness",
]
