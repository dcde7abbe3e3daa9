"""Core policy types and the match semantics of rules against events.

Values are either exact decimals (``decimal.Decimal``) for numeric attributes
or plain strings for entity attributes; the kind of a condition is carried by
the type of its right operand.  Conditions over an attribute that is null or
absent in the event evaluate to false.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import SchemaError, TypeMismatch

Value = Union[Decimal, str]

ACTION = "Action"


class Kind(str, enum.Enum):
    NUMERIC = "numeric"
    ENTITY = "entity"


class Op(enum.Enum):
    # value: (symbol, json name, canonical sort rank)
    EQ = ("=", "eq", 0)
    LT = ("<", "lt", 1)
    GT = (">", "gt", 2)
    NEQ = ("!=", "neq", 3)
    LEQ = ("<=", "leq", 4)
    GEQ = (">=", "geq", 5)

    def __init__(self, symbol, json_name, rank):
        self.symbol = symbol
        self.json_name = json_name
        self.rank = rank

    # members are singletons; identity hashing is much cheaper than Enum's
    __hash__ = object.__hash__

    @classmethod
    def parse(cls, text: str) -> "Op":
        for op in cls:
            if text in (op.symbol, op.json_name, op.name):
                return op
        if text == "==":
            return cls.EQ
        raise SchemaError(f"unknown operator {text!r}")


ENTITY_OPS = frozenset({Op.EQ, Op.NEQ})
CANONICAL_NUMERIC_OPS = frozenset({Op.EQ, Op.LT, Op.GT})


def to_value(x) -> Value:
    """Coerce a Python scalar to a policy value (Decimal or str)."""
    if isinstance(x, bool):
        raise TypeMismatch(f"booleans are not policy values: {x!r}")
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise TypeMismatch(f"non-finite numeric value {x}")
        return x
    if isinstance(x, int):
        return Decimal(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise TypeMismatch(f"non-finite numeric value {x}")
        return Decimal(repr(x))
    if isinstance(x, str):
        return x
    raise TypeMismatch(f"unsupported value type {type(x).__name__}")


def kind_of(v: Value) -> Kind:
    return Kind.NUMERIC if isinstance(v, Decimal) else Kind.ENTITY


# -- constraint expressions -------------------------------------------------


@dataclass(frozen=True)
class Condition:
    """Atomic comparison ``(left op right)``."""

    left: str
    op: Op
    right: Value
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "right", to_value(self.right))
        if not isinstance(self.op, Op):
            object.__setattr__(self, "op", Op.parse(self.op))
        if self.kind is Kind.ENTITY and self.op not in ENTITY_OPS:
            raise SchemaError(
                f"operator {self.op.symbol} is not allowed on entity attribute {self.left!r}"
            )
        object.__setattr__(self, "_hash", hash((self.left, self.op, self.right)))

    def __hash__(self):
        return self._hash

    @property
    def kind(self) -> Kind:
        return kind_of(self.right)

    def __str__(self):
        return f"({self.left} {self.op.symbol} {self.right})"


def cond(left: str, op: Union[str, Op], right) -> Condition:
    """Shorthand: ``cond("Age", ">=", 18)``."""
    return Condition(left, op if isinstance(op, Op) else Op.parse(op), right)


@dataclass(frozen=True, init=False)
class And:
    children: tuple

    def __init__(self, *children):
        object.__setattr__(self, "children", tuple(children))

    def __str__(self):
        if not self.children:
            return "TRUE"
        return "(" + " & ".join(map(str, self.children)) + ")"


@dataclass(frozen=True, init=False)
class Or:
    children: tuple

    def __init__(self, *children):
        object.__setattr__(self, "children", tuple(children))

    def __str__(self):
        if not self.children:
            return "FALSE"
        return "(" + " | ".join(map(str, self.children)) + ")"


@dataclass(frozen=True)
class Not:
    child: "Expr"

    def __str__(self):
        return f"~{self.child}"


@dataclass(frozen=True)
class Xor:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({self.left} ^ {self.right})"


Expr = Union[Condition, And, Or, Not, Xor]

#: Always-true expression (the empty conjunction).
TRUE = And()
#: Always-false expression (the empty disjunction).
FALSE = Or()


def iter_conditions(x: Expr) -> Iterator[Condition]:
    if isinstance(x, Condition):
        yield x
    elif isinstance(x, (And, Or)):
        for c in x.children:
            yield from iter_conditions(c)
    elif isinstance(x, Not):
        yield from iter_conditions(x.child)
    elif isinstance(x, Xor):
        yield from iter_conditions(x.left)
        yield from iter_conditions(x.right)
    else:
        raise TypeError(f"not a constraint expression: {x!r}")


# -- rules ------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    """A set of constraint expressions evaluated conjunctively."""

    constraints: tuple = ()
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))

    def conditions(self) -> Iterator[Condition]:
        for x in self.constraints:
            yield from iter_conditions(x)


def condition_key(c: Condition):
    return (c.left, c.op.rank, c.right)


@dataclass(frozen=True)
class SimpleRule:
    """Canonical conjunction of conditions; ``bottom`` marks the false rule.

    Build instances with :meth:`of` (or the normalizer's ``canonicalize``) so
    that two logically identical conjunctions compare equal.
    """

    conditions: tuple = ()
    bottom: bool = False

    @classmethod
    def of(cls, conditions: Iterable[Condition]) -> "SimpleRule":
        return cls(tuple(sorted(set(conditions), key=condition_key)))

    def to_rule(self, label: Optional[str] = None) -> Rule:
        if self.bottom:
            return Rule((FALSE,), label)
        return Rule(self.conditions, label)

    def attributes(self) -> list:
        return sorted({c.left for c in self.conditions})

    def sort_key(self):
        # bottom sorts first; otherwise lexicographic on condition keys
        return (not self.bottom, tuple(condition_key(c) for c in self.conditions))

    def __str__(self):
        if self.bottom:
            return "BOTTOM"
        if not self.conditions:
            return "{}"
        return "{" + ", ".join(map(str, self.conditions)) + "}"


BOTTOM = SimpleRule((), bottom=True)


# -- policies, events, worlds -----------------------------------------------


def infer_schema(rules: Iterable[Rule], base: Optional[Mapping[str, Kind]] = None) -> dict:
    schema = {k: Kind(v) for k, v in (base or {}).items()}
    for r in rules:
        for c in r.conditions():
            known = schema.setdefault(c.left, c.kind)
            if known is not c.kind:
                raise SchemaError(
                    f"attribute {c.left!r} used as both {known.value} and {c.kind.value}"
                )
    return schema


@dataclass(frozen=True)
class Policy:
    """Triple of permissions, prohibitions and obligations over a schema."""

    schema: Mapping[str, Kind] = field(default_factory=dict)
    permissions: tuple = ()
    prohibitions: tuple = ()
    obligations: tuple = ()

    def __post_init__(self):
        for name in ("permissions", "prohibitions", "obligations"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        schema = {k: Kind(v) for k, v in self.schema.items()}
        object.__setattr__(self, "schema", schema)
        for r in self.rules():
            for c in r.conditions():
                if c.left not in schema:
                    raise SchemaError(f"attribute {c.left!r} is not declared in the schema")
                if schema[c.left] is not c.kind:
                    raise SchemaError(
                        f"attribute {c.left!r} is {schema[c.left].value} but "
                        f"{c} has a {c.kind.value} operand"
                    )

    @classmethod
    def build(cls, permissions=(), prohibitions=(), obligations=(), schema=None) -> "Policy":
        """Construct a policy, inferring undeclared attribute kinds from operands."""
        permissions, prohibitions, obligations = (
            tuple(permissions), tuple(prohibitions), tuple(obligations))
        inferred = infer_schema(permissions + prohibitions + obligations, schema)
        return cls(inferred, permissions, prohibitions, obligations)

    def rules(self) -> Iterator[Rule]:
        yield from self.permissions
        yield from self.prohibitions
        yield from self.obligations


@dataclass(frozen=True, init=False)
class Event:
    """Attribute valuation; every attribute except Action may be null."""

    assignments: Mapping[str, Optional[Value]]

    def __init__(self, assignments: Mapping[str, object] = None, **kwargs):
        values = dict(assignments or {}, **kwargs)
        if values.get(ACTION) is None:
            raise SchemaError("events require a non-null Action")
        object.__setattr__(
            self, "assignments",
            {k: (None if v is None else to_value(v)) for k, v in values.items()})

    def get(self, name: str) -> Optional[Value]:
        return self.assignments.get(name)

    def __getitem__(self, name):
        return self.assignments[name]

    def __hash__(self):
        return hash(tuple(sorted(self.assignments.items(), key=lambda kv: kv[0])))

    def __repr__(self):
        return f"Event({self.assignments!r})"


@dataclass(frozen=True)
class World:
    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)


# -- semantics ----------------------------------------------------------------


def evaluate_condition(c: Condition, e: Event) -> bool:
    v = e.get(c.left)
    if v is None:
        return False
    if isinstance(v, Decimal) != isinstance(c.right, Decimal):
        raise TypeMismatch(f"event value {v!r} for {c.left!r} does not match operand of {c}")
    op = c.op
    if op is Op.EQ:
        return v == c.right
    if op is Op.NEQ:
        return v != c.right
    if op is Op.LT:
        return v < c.right
    if op is Op.GT:
        return v > c.right
    if op is Op.LEQ:
        return v <= c.right
    return v >= c.right


def evaluate_expr(x: Expr, e: Event) -> bool:
    if isinstance(x, Condition):
        return evaluate_condition(x, e)
    if isinstance(x, And):
        return all(evaluate_expr(c, e) for c in x.children)
    if isinstance(x, Or):
        return any(evaluate_expr(c, e) for c in x.children)
    if isinstance(x, Not):
        return not evaluate_expr(x.child, e)
    if isinstance(x, Xor):
        return evaluate_expr(x.left, e) != evaluate_expr(x.right, e)
    raise TypeError(f"not a constraint expression: {x!r}")


def match(r: Rule, e: Event) -> bool:
    return all(evaluate_expr(x, e) for x in r.constraints)


def match_simple(t: SimpleRule, e: Event) -> bool:
    if t.bottom:
        return False
    return all(evaluate_condition(c, e) for c in t.conditions)


def matches_any(rules: Sequence[Rule], e: Event) -> bool:
    return any(match(r, e) for r in rules)


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of checking a world against a policy.

    Witness fields hold the index of the first offending event / rule in the
    world or policy lists, or ``None`` when the condition holds.
    """

    permitted: bool
    not_prohibited: bool
    obligations_met: bool
    default: str = "prohibit"
    unmatched_event: Optional[int] = None
    prohibited_event: Optional[int] = None
    violated_prohibition: Optional[int] = None
    unsatisfied_obligation: Optional[int] = None

    @property
    def valid(self) -> bool:
        return self.permitted and self.not_prohibited and self.obligations_met

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "default": self.default,
            "permitted": self.permitted,
            "not_prohibited": self.not_prohibited,
            "obligations_met": self.obligations_met,
            "unmatched_event": self.unmatched_event,
            "prohibited_event": self.prohibited_event,
            "violated_prohibition": self.violated_prohibition,
            "unsatisfied_obligation": self.unsatisfied_obligation,
        }


def validate_world(p: Policy, w: World, default: str = "prohibit") -> ValidityReport:
    """Check the three validity conditions of ``w`` against ``p``.

    ``default="prohibit"`` requires every event to be matched by a permission;
    ``default="permit"`` drops that requirement so events only need to avoid
    the prohibitions.  Under ``permit`` a permission acts as an exception: an
    event matched by both a prohibition and a permission is allowed, which is
    the mirror image of how prohibitions carve exceptions out of permissions
    under ``prohibit`` and what makes dropping permissions meaning-preserving.
    """
    if default not in ("prohibit", "permit"):
        raise ValueError(f"default must be 'prohibit' or 'permit', not {default!r}")
    events = list(w)

    unmatched = None
    if default == "prohibit":
        for i, e in enumerate(events):
            if not matches_any(p.permissions, e):
                unmatched = i
                break

    prohibited = violated = None
    for i, e in enumerate(events):
        if default == "permit" and matches_any(p.permissions, e):
            continue
        for j, f in enumerate(p.prohibitions):
            if match(f, e):
                prohibited, violated = i, j
                break
        if prohibited is not None:
            break

    unsatisfied = None
    for j, o in enumerate(p.obligations):
        if not any(match(o, e) for e in events):
            unsatisfied = j
            break

    return ValidityReport(
        permitted=unmatched is None,
        not_prohibited=prohibited is None,
        obligations_met=unsatisfied is None,
        default=default,
        unmatched_event=unmatched,
        prohibited_event=prohibited,
        violated_prohibition=violated,
        unsatisfied_obligation=unsatisfied,
    )
