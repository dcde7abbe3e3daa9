"""Rule regularisation: merge, reformulate, expand to DNF, canonicalise.

The pipeline for a rule is::

    merge_constraints -> reformulate -> to_dnf -> canonicalize (per conjunction)

``reformulate`` expands exclusive-or first, then pushes negations inward
while rewriting every operator into the canonical set (``=``, ``<``, ``>``
for numeric attributes, ``=`` and ``!=`` for entities).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Set, Tuple

from .model import (
    BOTTOM, Condition, Expr, Kind, And, Not, Op, Or, Rule, SimpleRule, Xor,
    condition_key,
)

Conjunction = Tuple[Condition, ...]


@dataclass(frozen=True)
class Decomposition:
    """Canonically deduplicated set of simple rules, in deterministic order."""

    rules: tuple = ()
    origin: Optional[str] = None

    @classmethod
    def from_rules(cls, rules: Iterable[SimpleRule], origin=None) -> "Decomposition":
        return cls(tuple(sorted(set(rules), key=SimpleRule.sort_key)), origin)

    def __iter__(self) -> Iterator[SimpleRule]:
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __contains__(self, t):
        return t in self.as_set()

    def as_set(self) -> frozenset:
        return frozenset(self.rules)


def merge_constraints(r: Rule) -> Expr:
    if len(r.constraints) == 1:
        return r.constraints[0]
    return And(*r.constraints)


def _leaf(c: Condition, negated: bool) -> Expr:
    left, op, right = c.left, c.op, c.right
    if c.kind is Kind.ENTITY:
        if negated:
            op = Op.NEQ if op is Op.EQ else Op.EQ
        return Condition(left, op, right)
    lt, gt, eq = (Condition(left, o, right) for o in (Op.LT, Op.GT, Op.EQ))
    if negated:
        if op is Op.EQ:
            return Or(lt, gt)
        if op is Op.NEQ:
            return eq
        if op is Op.LT:
            return Or(gt, eq)
        if op is Op.GT:
            return Or(lt, eq)
        if op is Op.LEQ:
            return gt
        return lt  # not GEQ
    if op is Op.NEQ:
        return Or(lt, gt)
    if op is Op.LEQ:
        return Or(lt, eq)
    if op is Op.GEQ:
        return Or(gt, eq)
    return c


def _flatten(cls, parts):
    out = []
    for p in parts:
        if isinstance(p, cls):
            out.extend(p.children)
        else:
            out.append(p)
    if len(out) == 1:
        return out[0]
    return cls(*out)


def _push(x: Expr, negated: bool) -> Expr:
    if isinstance(x, Condition):
        return _leaf(x, negated)
    if isinstance(x, Not):
        return _push(x.child, not negated)
    if isinstance(x, Xor):
        expanded = Or(And(x.left, Not(x.right)), And(x.right, Not(x.left)))
        return _push(expanded, negated)
    if isinstance(x, (And, Or)):
        dual = isinstance(x, And) == negated  # De Morgan flips And <-> Or
        cls = Or if dual else And
        return _flatten(cls, [_push(c, negated) for c in x.children])
    raise TypeError(f"not a constraint expression: {x!r}")


def reformulate(x: Expr) -> Expr:
    """Rewrite ``x`` into And/Or over canonical conditions only."""
    return _push(x, False)


def to_dnf(x: Expr) -> List[Conjunction]:
    """Naive distribution of And over Or; ``x`` must already be reformulated."""
    if isinstance(x, Condition):
        return [(x,)]
    if isinstance(x, Or):
        out = []
        for c in x.children:
            out.extend(to_dnf(c))
        return out
    if isinstance(x, And):
        parts = [to_dnf(c) for c in x.children]
        return [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*parts)]
    raise TypeError(f"to_dnf expects a reformulated expression, got {type(x).__name__}")


def canonicalize(conds: Iterable[Condition]) -> SimpleRule:
    """Sort and dedup; distinct entity equalities on one attribute give BOTTOM."""
    t = SimpleRule.of(conds)
    seen = {}
    for c in t.conditions:
        if c.op is Op.EQ and c.kind is Kind.ENTITY:
            if seen.setdefault(c.left, c.right) != c.right:
                return BOTTOM
    return t


def _entity_clash(conj: frozenset) -> bool:
    seen = {}
    for c in conj:
        if c.op is Op.EQ and c.kind is Kind.ENTITY:
            if seen.setdefault(c.left, c.right) != c.right:
                return True
    return False


def _dnf_sets(x: Expr) -> Set[frozenset]:
    # same conjunctions as to_dnf, deduplicated after every distribution step
    # and with clashing entity equalities pruned early
    if isinstance(x, Condition):
        return {frozenset((x,))}
    if isinstance(x, Or):
        out = set()
        for c in x.children:
            out |= _dnf_sets(c)
        return out
    if isinstance(x, And):
        acc = {frozenset()}
        for c in x.children:
            part = _dnf_sets(c)
            acc = {a | b for a in acc for b in part}
            acc = {conj for conj in acc if not _entity_clash(conj)}
        return acc
    raise TypeError(f"expected a reformulated expression, got {type(x).__name__}")


def normalize(r: Rule) -> Decomposition:
    """Decompose ``r`` into the simple rules of its disjunctive normal form.

    Members that canonicalise to BOTTOM are dropped since they match nothing.
    """
    conjunctions = _dnf_sets(reformulate(merge_constraints(r)))
    rules = {canonicalize(conj) for conj in conjunctions}
    rules.discard(BOTTOM)
    return Decomposition.from_rules(rules, r.label)


__all__ = [
    "Decomposition", "merge_constraints", "reformulate", "to_dnf",
    "canonicalize", "normalize", "condition_key",
]
