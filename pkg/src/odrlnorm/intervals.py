"""Interval simplification and splitting of simple rules against value sets.

A numeric attribute in a simplified rule is either pinned to a point
``(x = v)`` or bounded by an open interval ``(lo, hi)`` whose missing ends
are infinite.  Splitting cuts every such interval at the values of a
:class:`ValueIndex` lying strictly inside it, and extends rules with the
full ordered partition of every attribute they leave unconstrained, so that
all cells produced over one index are either identical or disjoint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .errors import InvalidInput, SchemaError
from .model import (
    BOTTOM, Condition, Kind, Op, Rule, SimpleRule, iter_conditions, kind_of,
)
from .normalizer import Decomposition, canonicalize, normalize


@dataclass(frozen=True)
class IntervalForm:
    """Numeric constraint on one attribute: a point, or an open interval.

    ``None`` bounds stand for -inf / +inf.
    """

    lower: Optional[Decimal] = None
    upper: Optional[Decimal] = None
    point: Optional[Decimal] = None

    def contains(self, v: Decimal) -> bool:
        if self.point is not None:
            return v == self.point
        return (self.lower is None or v > self.lower) and (self.upper is None or v < self.upper)

    def conditions(self, attr: str) -> List[Condition]:
        if self.point is not None:
            return [Condition(attr, Op.EQ, self.point)]
        out = []
        if self.lower is not None:
            out.append(Condition(attr, Op.GT, self.lower))
        if self.upper is not None:
            out.append(Condition(attr, Op.LT, self.upper))
        return out


@dataclass(frozen=True)
class ValueIndex:
    """Per-attribute sorted, duplicate-free right operands (the cut values)."""

    values: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for attr, vals in self.values.items():
            vals = set(vals)
            kinds = {kind_of(v) for v in vals}
            if len(kinds) > 1:
                raise SchemaError(f"attribute {attr!r} mixes numeric and entity values")
            clean[attr] = tuple(sorted(vals))
        object.__setattr__(self, "values", dict(sorted(clean.items())))

    def attributes(self) -> List[str]:
        return list(self.values)

    def kind(self, attr: str) -> Optional[Kind]:
        vals = self.values.get(attr)
        return kind_of(vals[0]) if vals else None

    def get(self, attr: str) -> tuple:
        return self.values.get(attr, ())

    def union(self, other: "ValueIndex") -> "ValueIndex":
        merged = {a: set(v) for a, v in self.values.items()}
        for a, v in other.values.items():
            merged.setdefault(a, set()).update(v)
        return ValueIndex(merged)

    def covers(self, other: "ValueIndex") -> bool:
        return all(set(v) <= set(self.get(a)) for a, v in other.values.items())

    def __len__(self):
        return sum(len(v) for v in self.values.values())

    def to_dict(self) -> dict:
        return {a: list(v) for a, v in self.values.items()}


def _conditions_of(item) -> Iterable[Condition]:
    if isinstance(item, SimpleRule):
        return item.conditions
    if isinstance(item, Rule):
        return item.conditions()
    return iter_conditions(item)


def build_value_index(rules: Iterable) -> ValueIndex:
    """Collect the right operands of every condition, per attribute."""
    values: Dict[str, set] = {}
    for r in rules:
        for c in _conditions_of(r):
            values.setdefault(c.left, set()).add(c.right)
    return ValueIndex(values)


def _group(t: SimpleRule) -> Dict[str, List[Condition]]:
    groups: Dict[str, List[Condition]] = {}
    for c in t.conditions:
        groups.setdefault(c.left, []).append(c)
    return groups


def _numeric_form(conds: Sequence[Condition]) -> Optional[IntervalForm]:
    """Collapse numeric conditions on one attribute; ``None`` if unsatisfiable."""
    lows = [c.right for c in conds if c.op is Op.GT]
    highs = [c.right for c in conds if c.op is Op.LT]
    points = {c.right for c in conds if c.op is Op.EQ}
    if any(c.op not in (Op.EQ, Op.LT, Op.GT) for c in conds):
        raise InvalidInput(f"non-canonical numeric operator in {[str(c) for c in conds]}")
    lo = max(lows) if lows else None
    hi = min(highs) if highs else None
    if len(points) > 1:
        return None
    if points:
        (p,) = points
        if (lo is not None and p <= lo) or (hi is not None and p >= hi):
            return None
        return IntervalForm(point=p)
    if lo is not None and hi is not None and lo >= hi:
        return None
    return IntervalForm(lo, hi)


def _entity_conditions(conds: Sequence[Condition]) -> Optional[List[Condition]]:
    eqs = {c.right for c in conds if c.op is Op.EQ}
    neqs = {c.right for c in conds if c.op is Op.NEQ}
    if len(eqs) > 1:
        return None
    if eqs:
        (v,) = eqs
        if v in neqs:
            return None
        return [Condition(conds[0].left, Op.EQ, v)]
    return list(conds)


def simplify(t: SimpleRule) -> SimpleRule:
    """Reduce each attribute to its tightest interval, a point, or BOTTOM."""
    if t.bottom:
        return t
    out: List[Condition] = []
    for attr, conds in _group(t).items():
        if conds[0].kind is Kind.NUMERIC:
            form = _numeric_form(conds)
            if form is None:
                return BOTTOM
            out.extend(form.conditions(attr))
        else:
            kept = _entity_conditions(conds)
            if kept is None:
                return BOTTOM
            out.extend(kept)
    return canonicalize(out)


def is_empty(t: SimpleRule) -> bool:
    return t.bottom or simplify(t).bottom


def interval_of(t: SimpleRule, attr: str) -> Optional[IntervalForm]:
    """Interval form of a numeric attribute in ``t`` (None if unconstrained)."""
    conds = [c for c in t.conditions if c.left == attr]
    if not conds:
        return None
    form = _numeric_form(conds)
    if form is None:
        raise InvalidInput(f"{t} has an empty interval on {attr!r}")
    return form


# -- splitting ------------------------------------------------------------------


def _numeric_cells(attr: str, lo, hi, cuts: Sequence[Decimal]) -> List[List[Condition]]:
    """Ordered partition of the open interval (lo, hi) at ``cuts``."""
    bounds = [lo, *cuts, hi]
    cells = []
    for i in range(len(bounds) - 1):
        a, b = bounds[i], bounds[i + 1]
        cell = []
        if a is not None:
            cell.append(Condition(attr, Op.GT, a))
        if b is not None:
            cell.append(Condition(attr, Op.LT, b))
        cells.append(cell)
        if i < len(cuts):
            cells.append([Condition(attr, Op.EQ, cuts[i])])
    return cells


def _attribute_cells(attr: str, conds: List[Condition], values: tuple) -> List[List[Condition]]:
    if not values:
        return [conds]
    if kind_of(values[0]) is Kind.NUMERIC:
        if not conds:
            return _numeric_cells(attr, None, None, values)
        form = _numeric_form(conds)
        if form.point is not None:
            return [conds]
        inside = [v for v in values if form.contains(v)]
        if not inside:
            return [conds]
        return _numeric_cells(attr, form.lower, form.upper, inside)
    # entity attribute
    if not conds:
        rest = [Condition(attr, Op.NEQ, v) for v in values]
        return [[Condition(attr, Op.EQ, v)] for v in values] + [rest]
    if any(c.op is Op.EQ for c in conds):
        return [conds]
    excluded = {c.right for c in conds}
    extra = [v for v in values if v not in excluded]
    if not extra:
        return [conds]
    rest = conds + [Condition(attr, Op.NEQ, v) for v in extra]
    return [[Condition(attr, Op.EQ, v)] for v in extra] + [rest]


def split(t: SimpleRule, v: ValueIndex) -> Decomposition:
    """Split a simplified rule against every attribute of ``v``."""
    if t.bottom or simplify(t) != t:
        raise InvalidInput(f"split expects a simplified, non-bottom rule, got {t}")
    groups = _group(t)
    for attr, conds in groups.items():
        k = v.kind(attr)
        if k is not None and k is not conds[0].kind:
            raise SchemaError(f"value index kind for {attr!r} disagrees with {t}")
    fixed: List[Condition] = []
    choices: List[List[List[Condition]]] = []
    for attr in sorted(set(groups) | set(v.attributes())):
        conds = groups.get(attr, [])
        options = _attribute_cells(attr, conds, v.get(attr))
        if len(options) == 1:
            fixed.extend(options[0])
        else:
            choices.append(options)
    cells = set()
    for combo in itertools.product(*choices):
        cell = simplify(canonicalize(fixed + [c for part in combo for c in part]))
        if not cell.bottom:
            cells.add(cell)
    return Decomposition.from_rules(cells)


def decompose(r: Rule, v: Optional[ValueIndex] = None) -> Decomposition:
    """Normalise, simplify and split ``r``; empty members are dropped.

    ``v`` is extended with the rule's own operands so the result is always
    split over a superset of them.
    """
    index = build_value_index([r])
    if v is not None:
        index = v.union(index)
    cells = set()
    seen = set()
    for t in normalize(r):
        s = simplify(t)
        if s.bottom or s in seen:
            continue
        seen.add(s)
        cells.update(split(s, index))
    return Decomposition.from_rules(cells, r.label)
