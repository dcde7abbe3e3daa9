"""Normalisation and comparison of digital-rights policies.

Rules over attribute constraints are decomposed into pairwise-disjoint simple
rules ("cells") so that overlap, containment, equivalence and
prohibition-elimination reduce to set operations on canonical cells.
"""

from .comparison import (
    ComparisonReport, NormalisedRuleSet, compare_policies, compare_rules, ns,
    rewrite_drop_permissions, rewrite_drop_prohibitions,
)
from .errors import (
    DomainTooLarge, InvalidInput, ObligationsUnsupported, ParseError, PolicyError,
    SchemaError, TypeMismatch, UnsupportedFeature,
)
from .ingestion import (
    import_odrl_subset, parse_event, parse_policy, parse_value_set, parse_world,
    serialize_policy,
)
from .intervals import (
    IntervalForm, ValueIndex, build_value_index, decompose, is_empty, simplify, split,
)
from .model import (
    ACTION, BOTTOM, FALSE, TRUE, And, Condition, Event, Kind, Not, Op, Or, Policy, Rule,
    SimpleRule, ValidityReport, World, Xor, cond, evaluate_condition, evaluate_expr, match,
    match_simple, validate_world,
)
from .normalizer import (
    Decomposition, canonicalize, merge_constraints, normalize, reformulate, to_dnf,
)
from .oracle import (
    DomainSpec, domain_from_values, enumerate_events, oracle_policy_relation, oracle_relation,
)

__version__ = "0.1.0"
