"""Overlap, containment and equivalence of rules and policies via cell sets.

Every comparison decomposes both sides over one shared :class:`ValueIndex`;
after that, all decisions are plain set operations on canonical simple rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

from .errors import ObligationsUnsupported
from .intervals import ValueIndex, build_value_index, decompose
from .model import Policy, Rule, SimpleRule

DEFAULT_WITNESS_CAP = 20


@dataclass(frozen=True)
class NormalisedRuleSet:
    """Union of the decompositions of a set of rules over one value index."""

    cells: frozenset
    value_index: ValueIndex
    #: attributes/values added to the caller's index so it covers the rules
    extension: ValueIndex = field(default_factory=ValueIndex)

    def sorted_cells(self) -> List[SimpleRule]:
        return sorted(self.cells, key=SimpleRule.sort_key)

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.sorted_cells())


def _extension(v: ValueIndex, needed: ValueIndex) -> ValueIndex:
    missing = {}
    for attr, vals in needed.values.items():
        have = set(v.get(attr))
        extra = [x for x in vals if x not in have]
        if extra:
            missing[attr] = extra
    return ValueIndex(missing)


def ns(rules: Sequence[Rule], v: Optional[ValueIndex] = None) -> NormalisedRuleSet:
    """Normalised cell set of a list of rules."""
    v = v if v is not None else ValueIndex()
    ext = _extension(v, build_value_index(rules))
    index = v.union(ext)
    cells = set()
    for r in rules:
        cells.update(decompose(r, index))
    return NormalisedRuleSet(frozenset(cells), index, ext)


@dataclass(frozen=True)
class CellList:
    """Possibly truncated witness list with the full count."""

    cells: tuple
    total: int

    @classmethod
    def of(cls, cells: Iterable[SimpleRule], cap: Optional[int]) -> "CellList":
        ordered = sorted(cells, key=SimpleRule.sort_key)
        shown = ordered if cap is None else ordered[:cap]
        return cls(tuple(shown), len(ordered))

    @property
    def truncated(self) -> bool:
        return len(self.cells) < self.total


@dataclass(frozen=True)
class ComparisonReport:
    overlap: bool
    left_in_right: bool
    right_in_left: bool
    shared: CellList
    left_only: CellList
    right_only: CellList
    value_index: ValueIndex
    #: None when obligations were not considered; otherwise syntactic equality
    obligations_equal: Optional[bool] = None

    @property
    def equivalent(self) -> bool:
        return self.left_in_right and self.right_in_left

    @property
    def modulo_obligations(self) -> bool:
        return self.obligations_equal is not None

    def to_dict(self) -> dict:
        # local import: serialisation lives in the ingestion module
        from .ingestion import simple_rule_to_json

        def cells(cl: CellList):
            return {"cells": [simple_rule_to_json(t) for t in cl.cells],
                    "total": cl.total, "truncated": cl.truncated}

        out = {
            "overlap": self.overlap,
            "left_in_right": self.left_in_right,
            "right_in_left": self.right_in_left,
            "equivalent": self.equivalent,
            "shared": cells(self.shared),
            "left_only": cells(self.left_only),
            "right_only": cells(self.right_only),
            "values": self.value_index.to_dict(),
        }
        if self.obligations_equal is not None:
            out["obligations_equal"] = self.obligations_equal
            out["modulo_obligations"] = True
        return out


def compare_cells(left: Iterable[SimpleRule], right: Iterable[SimpleRule], v: ValueIndex,
                  cap: Optional[int] = DEFAULT_WITNESS_CAP, obligations_equal=None
                  ) -> ComparisonReport:
    a, b = frozenset(left), frozenset(right)
    return ComparisonReport(
        overlap=bool(a & b),
        left_in_right=a <= b,
        right_in_left=b <= a,
        shared=CellList.of(a & b, cap),
        left_only=CellList.of(a - b, cap),
        right_only=CellList.of(b - a, cap),
        value_index=v,
        obligations_equal=obligations_equal,
    )


def compare_rules(a: Rule, b: Rule, cap: Optional[int] = DEFAULT_WITNESS_CAP) -> ComparisonReport:
    v = build_value_index([a, b])
    return compare_cells(decompose(a, v), decompose(b, v), v, cap)


def policy_value_index(*policies: Policy, include_obligations=False) -> ValueIndex:
    rules = []
    for p in policies:
        rules.extend(p.permissions)
        rules.extend(p.prohibitions)
        if include_obligations:
            rules.extend(p.obligations)
    return build_value_index(rules)


def _cells_to_rules(cells: Iterable[SimpleRule]) -> tuple:
    return tuple(t.to_rule() for t in sorted(cells, key=SimpleRule.sort_key))


def rewrite_drop_prohibitions(p: Policy, v: Optional[ValueIndex] = None) -> Policy:
    """Equivalent permissions-only policy (prohibition-by-default reading)."""
    v = policy_value_index(p) if v is None else v.union(policy_value_index(p))
    perms = ns(p.permissions, v).cells - ns(p.prohibitions, v).cells
    return Policy(p.schema, _cells_to_rules(perms), (), p.obligations)


def rewrite_drop_permissions(p: Policy, v: Optional[ValueIndex] = None) -> Policy:
    """Equivalent prohibitions-only policy (permission-by-default reading)."""
    v = policy_value_index(p) if v is None else v.union(policy_value_index(p))
    prohibs = ns(p.prohibitions, v).cells - ns(p.permissions, v).cells
    return Policy(p.schema, (), _cells_to_rules(prohibs), p.obligations)


def compare_policies(p1: Policy, p2: Policy, strict: bool = False,
                     cap: Optional[int] = DEFAULT_WITNESS_CAP) -> ComparisonReport:
    """Compare the event sets two policies permit, over one shared index.

    Obligations are never decomposed.  With ``strict`` any obligation raises
    :class:`ObligationsUnsupported`; otherwise they are compared syntactically
    and the report is flagged as holding modulo obligations.
    """
    obligations_equal = None
    if p1.obligations or p2.obligations:
        if strict:
            raise ObligationsUnsupported("policy equivalence with obligations is not decided")
        obligations_equal = set(p1.obligations) == set(p2.obligations)
    v = policy_value_index(p1, p2)
    left = ns(p1.permissions, v).cells - ns(p1.prohibitions, v).cells
    right = ns(p2.permissions, v).cells - ns(p2.prohibitions, v).cells
    return compare_cells(left, right, v, cap, obligations_equal)
