"""Brute-force semantics over finite domains.

Everything here evaluates rules directly with :func:`model.match`, never
through the normaliser, so it can serve as ground truth for the decision
procedures in :mod:`odrlnorm.comparison`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal, Inexact, localcontext
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .errors import DomainTooLarge, SchemaError
from .intervals import ValueIndex
from .model import ACTION, Event, Kind, Policy, Rule, SimpleRule, kind_of, match, match_simple

DEFAULT_CAP = 10 ** 6
PLACEHOLDER_ACTION = "~action"


@dataclass(frozen=True)
class DomainSpec:
    """Finite value lists per attribute; ``allow_null`` attributes also take null."""

    values: Mapping[str, tuple]
    allow_null: frozenset = frozenset()
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        object.__setattr__(self, "values",
                           {a: tuple(v) for a, v in sorted(self.values.items())})
        object.__setattr__(self, "allow_null", frozenset(self.allow_null))
        if ACTION in self.allow_null:
            raise SchemaError("Action can never be null")
        if ACTION not in self.values:
            raise SchemaError("domain must include the Action attribute")

    @property
    def size(self) -> int:
        return math.prod(len(v) + (a in self.allow_null) for a, v in self.values.items())

    def check_cap(self):
        if self.size > self.cap:
            raise DomainTooLarge(f"domain has {self.size} events, cap is {self.cap}")


def enumerate_events(d: DomainSpec) -> Iterator[Event]:
    d.check_cap()
    names = list(d.values)
    axes = [list(d.values[a]) + ([None] if a in d.allow_null else []) for a in names]
    for combo in itertools.product(*axes):
        yield Event(dict(zip(names, combo)))


def _midpoint(a: Decimal, b: Decimal) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = max(len(a.as_tuple().digits), len(b.as_tuple().digits)) + 40
        ctx.traps[Inexact] = True
        return (a + b) / 2


def _fresh_symbols(taken, n: int) -> List[str]:
    out, i = [], 0
    while len(out) < n:
        s = f"~other{i}"
        if s not in taken:
            out.append(s)
        i += 1
    return out


def domain_from_values(v: ValueIndex, padding: int = 1, integer_only: bool = False,
                       allow_null: Iterable[str] = (), cap: int = DEFAULT_CAP) -> DomainSpec:
    """Domain in which every cell split over ``v`` contains at least one event.

    Numeric cuts ``v1 < ... < vk`` contribute the cuts themselves, the midpoint
    of each adjacent pair and ``padding`` points below ``v1`` and above ``vk``.
    Entity attributes contribute their values plus ``padding`` fresh symbols.
    With ``integer_only`` midpoints are replaced by an integer strictly between
    the cuts when one exists (consecutive integers then leave an empty cell).
    """
    values: Dict[str, tuple] = {}
    for attr, cuts in v.values.items():
        if not cuts:
            continue
        if kind_of(cuts[0]) is Kind.ENTITY:
            values[attr] = tuple(cuts) + tuple(_fresh_symbols(set(cuts), padding))
            continue
        pts = [cuts[0] - i for i in range(padding, 0, -1)]
        for i, c in enumerate(cuts):
            pts.append(c)
            if i + 1 < len(cuts):
                nxt = cuts[i + 1]
                if integer_only:
                    mid = Decimal(math.floor(c) + 1)
                    if mid < nxt:
                        pts.append(mid)
                else:
                    pts.append(_midpoint(c, nxt))
        pts.extend(cuts[-1] + i for i in range(1, padding + 1))
        values[attr] = tuple(pts)
    if ACTION not in values:
        values[ACTION] = (PLACEHOLDER_ACTION,)
    return DomainSpec(values, frozenset(allow_null), cap)


@dataclass(frozen=True)
class OracleRelation:
    overlap: bool
    a_in_b: bool
    b_in_a: bool
    events: int

    @property
    def equivalent(self) -> bool:
        return self.a_in_b and self.b_in_a

    def to_dict(self) -> dict:
        return {"overlap": self.overlap, "a_in_b": self.a_in_b, "b_in_a": self.b_in_a,
                "equivalent": self.equivalent, "events": self.events}


def _relation(pairs: Iterable) -> OracleRelation:
    overlap, a_in_b, b_in_a, n = False, True, True, 0
    for x, y in pairs:
        n += 1
        overlap |= x and y
        a_in_b &= (not x) or y
        b_in_a &= (not y) or x
    return OracleRelation(overlap, a_in_b, b_in_a, n)


def oracle_relation(a: Rule, b: Rule, d: DomainSpec) -> OracleRelation:
    """Overlap/containment of two rules by exhaustive evaluation."""
    return _relation((match(a, e), match(b, e)) for e in enumerate_events(d))


def permitted(p: Policy, e: Event, default: str = "prohibit") -> bool:
    """Whether the single-event world ``{e}`` satisfies P and F of ``p``."""
    allowed = any(match(r, e) for r in p.permissions)
    if default == "permit":
        return allowed or not any(match(f, e) for f in p.prohibitions)
    return allowed and not any(match(f, e) for f in p.prohibitions)


def oracle_policy_relation(p1: Policy, p2: Policy, d: DomainSpec) -> OracleRelation:
    """Relation between the event sets two policies permit."""
    return _relation((permitted(p1, e), permitted(p2, e)) for e in enumerate_events(d))


# -- batch helpers (encoded tables, see kernels) --------------------------------------


def event_table(d: DomainSpec, extra: Optional[Mapping[str, Iterable]] = None
                ) -> kernels.EventTable:
    return kernels.EventTable(list(enumerate_events(d)), extra)


@dataclass
class CellCheck:
    """Result of checking a cell set against a rule over a domain."""

    events: int
    #: events where the rule and the cell set disagree on matching
    mismatches: List[Event] = field(default_factory=list)
    #: events matched by two or more cells
    overlaps: List[Event] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.overlaps


def check_cells(r: Rule, cells: Sequence[SimpleRule], d: DomainSpec,
                batch: bool = True, limit: int = 10) -> CellCheck:
    """Check ``match(r, e) == any cell matches e`` and cell disjointness on every event."""
    cells = list(cells)
    if batch:
        extra = kernels.operand_values([r, *cells])
        table = event_table(d, extra)
        expected = kernels.match_batch(r, table)
        counts, _ = kernels.match_counts(table, cells)
        bad = np.flatnonzero(expected != (counts > 0))[:limit]
        multi = np.flatnonzero(counts > 1)[:limit]
        return CellCheck(len(table), [table.events[i] for i in bad],
                         [table.events[i] for i in multi])
    res = CellCheck(0)
    for e in enumerate_events(d):
        res.events += 1
        hits = sum(match_simple(t, e) for t in cells)
        if match(r, e) != (hits > 0) and len(res.mismatches) < limit:
            res.mismatches.append(e)
        if hits > 1 and len(res.overlaps) < limit:
            res.overlaps.append(e)
    return res


def batch_relation(a: Rule, b: Rule, d: DomainSpec) -> OracleRelation:
    """Vectorised :func:`oracle_relation`."""
    table = event_table(d, kernels.operand_values([a, b]))
    x, y = kernels.match_batch(a, table), kernels.match_batch(b, table)
    return OracleRelation(bool((x & y).any()), bool((~x | y).all()), bool((~y | x).all()),
                          len(table))
