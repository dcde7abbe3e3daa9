"""JSON reading and writing of policies, events, worlds and value sets.

Native policy document::

    {
      "attributes": {"Age": "numeric", "Action": "entity"},
      "permissions": [{"label": "adult", "constraints": [
          {"left": "Action", "op": "eq", "right": "Play"},
          {"or": [{"left": "Age", "op": "geq", "right": 18},
                  {"not": {"left": "Age", "op": "lt", "right": 5}}]}]}],
      "prohibitions": [],
      "obligations": []
    }

Numbers are read as exact decimals.  A restricted ODRL JSON-LD subset can be
imported with :func:`import_odrl_subset`.
"""

from __future__ import annotations

from decimal import Decimal
from typing import Mapping, Optional

import simplejson

from .errors import ParseError, SchemaError, TypeMismatch, UnsupportedFeature
from .intervals import ValueIndex
from .model import (
    ACTION, And, Condition, Event, Expr, Kind, Not, Op, Or, Policy, Rule,
    SimpleRule, World, Xor, to_value,
)

SET_OPERATORS = {"in", "notin", "eqset", "subset", "superset", "isA", "isAnyOf",
                 "isAllOf", "isNoneOf", "isPartOf", "hasPart", "=_type", "type"}
RULE_KEYS = ("permissions", "prohibitions", "obligations")


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} is not allowed")


def loads(text) -> object:
    if not isinstance(text, (str, bytes)):
        return text
    try:
        return simplejson.loads(text, use_decimal=True, parse_constant=_reject_constant)
    except simplejson.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def dumps(obj, indent=2) -> str:
    return simplejson.dumps(obj, use_decimal=True, sort_keys=True, indent=indent,
                            ensure_ascii=False)


def _value(raw, where: str):
    if isinstance(raw, bool) or raw is None or not isinstance(raw, (int, Decimal, str)):
        raise SchemaError(f"{where}: expected a number or string, got {raw!r}")
    try:
        return to_value(raw)
    except TypeMismatch as exc:
        raise SchemaError(f"{where}: {exc}") from None


# -- policies ---------------------------------------------------------------------


def _parse_expr(obj, schema: Mapping[str, Kind], where: str) -> Expr:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: constraint must be an object, got {obj!r}")
    if "left" in obj:
        missing = {"left", "op", "right"} - set(obj)
        if missing:
            raise SchemaError(f"{where}: leaf is missing {sorted(missing)}")
        left, op_text = obj["left"], obj["op"]
        if left not in schema:
            raise SchemaError(f"{where}: unknown attribute {left!r}")
        if op_text in SET_OPERATORS:
            raise SchemaError(
                f"{where}: operator {op_text!r} is a set or class-membership operator; "
                "set constraints and =_type are excluded")
        op = Op.parse(op_text)
        right = _value(obj["right"], where)
        kind = Kind.NUMERIC if isinstance(right, Decimal) else Kind.ENTITY
        if kind is not schema[left]:
            raise SchemaError(
                f"{where}: {left!r} is {schema[left].value} but operand {obj['right']!r} is {kind.value}")
        return Condition(left, op, right)
    if len(obj) != 1:
        raise SchemaError(f"{where}: expected exactly one of and/or/not/xor, got {sorted(obj)}")
    (key, body), = obj.items()
    if key in ("and", "or"):
        if not isinstance(body, list):
            raise SchemaError(f"{where}: {key!r} takes a list")
        children = [_parse_expr(c, schema, f"{where}.{key}[{i}]") for i, c in enumerate(body)]
        if len(children) == 1:
            return children[0]
        return (And if key == "and" else Or)(*children)
    if key == "not":
        return Not(_parse_expr(body, schema, f"{where}.not"))
    if key == "xor":
        if not isinstance(body, list) or len(body) != 2:
            raise SchemaError(f"{where}: 'xor' takes exactly two operands")
        return Xor(*(_parse_expr(c, schema, f"{where}.xor[{i}]") for i, c in enumerate(body)))
    raise SchemaError(f"{where}: unknown constraint key {key!r}")


def _parse_rule(obj, schema, where) -> Rule:
    if not isinstance(obj, dict) or not isinstance(obj.get("constraints", []), list):
        raise SchemaError(f"{where}: rule must be an object with a 'constraints' list")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise SchemaError(f"{where}: label must be a string")
    constraints = [_parse_expr(c, schema, f"{where}.constraints[{i}]")
                   for i, c in enumerate(obj.get("constraints", []))]
    return Rule(tuple(constraints), label)


def policy_from_json(doc) -> Policy:
    if not isinstance(doc, dict):
        raise SchemaError("policy document must be a JSON object")
    unknown = set(doc) - {"attributes", *RULE_KEYS}
    if unknown:
        raise SchemaError(f"unknown top-level keys {sorted(unknown)}")
    attrs = doc.get("attributes", {})
    if not isinstance(attrs, dict):
        raise SchemaError("'attributes' must map names to 'numeric' or 'entity'")
    try:
        schema = {name: Kind(k) for name, k in attrs.items()}
    except ValueError as exc:
        raise SchemaError(f"bad attribute kind: {exc}") from None
    groups = {}
    for key in RULE_KEYS:
        rules = doc.get(key, [])
        if not isinstance(rules, list):
            raise SchemaError(f"{key!r} must be a list")
        groups[key] = tuple(_parse_rule(r, schema, f"{key}[{i}]") for i, r in enumerate(rules))
    return Policy(schema, groups["permissions"], groups["prohibitions"], groups["obligations"])


def parse_policy(text) -> Policy:
    """Parse a native JSON policy document (string, bytes or decoded object)."""
    return policy_from_json(loads(text))


def expr_to_json(x: Expr):
    if isinstance(x, Condition):
        return {"left": x.left, "op": x.op.json_name, "right": x.right}
    if isinstance(x, And):
        return {"and": [expr_to_json(c) for c in x.children]}
    if isinstance(x, Or):
        return {"or": [expr_to_json(c) for c in x.children]}
    if isinstance(x, Not):
        return {"not": expr_to_json(x.child)}
    if isinstance(x, Xor):
        return {"xor": [expr_to_json(x.left), expr_to_json(x.right)]}
    raise TypeError(f"not a constraint expression: {x!r}")


def rule_to_json(r: Rule) -> dict:
    out = {"constraints": [expr_to_json(x) for x in r.constraints]}
    if r.label is not None:
        out["label"] = r.label
    return out


def simple_rule_to_json(t: SimpleRule):
    if t.bottom:
        return {"bottom": True}
    return [expr_to_json(c) for c in t.conditions]


def policy_to_json(p: Policy) -> dict:
    return {
        "attributes": {name: kind.value for name, kind in sorted(p.schema.items())},
        "permissions": [rule_to_json(r) for r in p.permissions],
        "prohibitions": [rule_to_json(r) for r in p.prohibitions],
        "obligations": [rule_to_json(r) for r in p.obligations],
    }


def serialize_policy(p: Policy) -> str:
    return dumps(policy_to_json(p))


# -- events, worlds, value sets ------------------------------------------------------


def event_from_json(obj, schema: Optional[Mapping[str, Kind]] = None, where="event") -> Event:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: event must be a JSON object")
    values = {}
    for name, raw in obj.items():
        if raw is None:
            values[name] = None
            continue
        v = _value(raw, f"{where}.{name}")
        if schema is not None:
            if name not in schema:
                raise SchemaError(f"{where}: unknown attribute {name!r}")
            kind = Kind.NUMERIC if isinstance(v, Decimal) else Kind.ENTITY
            if kind is not schema[name]:
                raise SchemaError(f"{where}: {name!r} is {schema[name].value}, got {raw!r}")
        values[name] = v
    return Event(values)


def parse_event(text, schema=None) -> Event:
    return event_from_json(loads(text), schema)


def parse_world(text, schema=None) -> World:
    """A world is a JSON array of events, or ``{"events": [...]}``."""
    doc = loads(text)
    if isinstance(doc, dict) and set(doc) == {"events"}:
        doc = doc["events"]
    if not isinstance(doc, list):
        raise SchemaError("world must be a list of events")
    return World(tuple(event_from_json(e, schema, f"events[{i}]") for i, e in enumerate(doc)))


def world_to_json(w: World) -> list:
    return [dict(sorted(e.assignments.items())) for e in w]


def parse_value_set(text, schema=None) -> ValueIndex:
    doc = loads(text)
    if not isinstance(doc, dict):
        raise SchemaError("value set must map attribute names to lists of values")
    values = {}
    for name, raw in doc.items():
        if not isinstance(raw, list):
            raise SchemaError(f"values for {name!r} must be a list")
        vals = [_value(x, f"values.{name}") for x in raw]
        if schema is not None:
            if name not in schema:
                raise SchemaError(f"unknown attribute {name!r} in value set")
            for x in vals:
                if (Kind.NUMERIC if isinstance(x, Decimal) else Kind.ENTITY) is not schema[name]:
                    raise SchemaError(f"value {x!r} does not fit {schema[name].value} attribute {name!r}")
        values[name] = vals
    return ValueIndex(values)


# -- ODRL JSON-LD subset -------------------------------------------------------------

_ODRL_OPERATORS = {"eq": Op.EQ, "neq": Op.NEQ, "lt": Op.LT, "gt": Op.GT,
                   "lteq": Op.LEQ, "gteq": Op.GEQ}
_RESERVED = {"target": "Asset", "assignee": "Assignee", "assigner": "Assigner", "action": ACTION}
_RULE_TYPES = {"permission": "permissions", "prohibition": "prohibitions",
               "obligation": "obligations"}
_IGNORED = {"@context", "@type", "@id", "uid", "profile", "inheritFrom", "conflict",
            "type", "description", "title"}
_UNSUPPORTED = {"duty", "remedy", "consequence", "refinement", "andSequence",
                "inheritAllowed", "permission", "prohibition", "obligation"}
_CONSTRAINT_KEYS = {"leftOperand", "operator", "rightOperand", "uid", "@id", "@type",
                    "dataType"}
_NUMERIC_TYPES = {"xsd:integer", "xsd:decimal", "xsd:double", "xsd:float", "xsd:int",
                  "xsd:long", "xsd:nonNegativeInteger", "xsd:positiveInteger"}


def _term(key: str) -> str:
    for prefix in ("odrl:", "http://www.w3.org/ns/odrl/2/"):
        if key.startswith(prefix):
            return key[len(prefix):]
    return key


def _strip(d: dict) -> dict:
    return {_term(k): v for k, v in d.items()}


def _identifier(raw, term):
    if isinstance(raw, list):
        if len(raw) != 1:
            raise UnsupportedFeature(term, "multiple values denote a set")
        raw = raw[0]
    if isinstance(raw, dict):
        raw = _strip(raw)
        extra = set(raw) - {"@id", "uid", "@type", "rdf:value", "value", "source"}
        if extra:
            raise UnsupportedFeature(sorted(extra)[0], f"inside {term}")
        if "refinement" in raw:
            raise UnsupportedFeature("refinement")
        for key in ("@id", "uid", "rdf:value", "value", "source"):
            if key in raw:
                return _identifier(raw[key], term)
        raise UnsupportedFeature(term, "no identifier found")
    if not isinstance(raw, str):
        raise UnsupportedFeature(term, f"expected an identifier, got {raw!r}")
    return _term(raw)


def _operand(raw):
    if isinstance(raw, list):
        if len(raw) != 1:
            raise UnsupportedFeature("rightOperand", "list operands are set constraints")
        raw = raw[0]
    if isinstance(raw, dict):
        raw = dict(raw)
        if "@id" in raw:
            return _term(raw["@id"])
        value, typ = raw.get("@value"), raw.get("@type")
        if value is None:
            raise UnsupportedFeature("rightOperand", f"cannot read operand {raw!r}")
        if typ in _NUMERIC_TYPES:
            try:
                return to_value(Decimal(str(value)))
            except Exception:
                raise SchemaError(f"bad numeric literal {value!r}") from None
        if typ is not None and typ not in ("xsd:string",):
            raise UnsupportedFeature(typ, "encode dates and other typed literals as numbers")
        raw = value
    if isinstance(raw, bool) or not isinstance(raw, (int, Decimal, str)):
        raise UnsupportedFeature("rightOperand", f"cannot read operand {raw!r}")
    return to_value(raw)


def _odrl_constraint(obj) -> Expr:
    if not isinstance(obj, dict):
        raise UnsupportedFeature("constraint", f"expected an object, got {obj!r}")
    obj = _strip(obj)
    for key, cls in (("and", And), ("or", Or), ("xone", None)):
        if key in obj:
            items = obj[key]
            if isinstance(items, dict) and "@list" in items:
                items = items["@list"]
            if not isinstance(items, list) or not items:
                raise UnsupportedFeature(key, "operand must be a non-empty list")
            parts = [_odrl_constraint(c) for c in items]
            if len(parts) == 1:
                return parts[0]
            if cls is not None:
                return cls(*parts)
            return _exactly_one(parts)
    for key in obj:
        if key not in _CONSTRAINT_KEYS:
            raise UnsupportedFeature(key)
    if "leftOperand" not in obj or "operator" not in obj or "rightOperand" not in obj:
        raise UnsupportedFeature("constraint", "needs leftOperand, operator and rightOperand")
    op_name = _identifier(obj["operator"], "operator")
    if op_name not in _ODRL_OPERATORS:
        raise UnsupportedFeature(op_name, "only eq, neq, lt, gt, lteq and gteq are supported")
    left = _identifier(obj["leftOperand"], "leftOperand")
    right = _operand(obj["rightOperand"])
    return Condition(left, _ODRL_OPERATORS[op_name], right)


def _exactly_one(parts):
    if len(parts) == 2:
        return Xor(parts[0], parts[1])
    terms = []
    for i, p in enumerate(parts):
        others = [Not(q) for j, q in enumerate(parts) if j != i]
        terms.append(And(p, *others))
    return Or(*terms)


def _odrl_rule(obj, inherited: dict, where: str) -> Rule:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: rule must be an object")
    obj = _strip(obj)
    for key in obj:
        if key in _UNSUPPORTED:
            raise UnsupportedFeature(key)
    fields = dict(inherited)
    fields.update({k: obj[k] for k in _RESERVED if k in obj})
    if "action" not in fields:
        raise SchemaError(f"{where}: rule has no action")
    constraints = []
    for key in ("action", "target", "assignee", "assigner"):
        if key in fields:
            constraints.append(Condition(_RESERVED[key], Op.EQ, _identifier(fields[key], key)))
    raw = obj.get("constraint", [])
    if isinstance(raw, dict):
        raw = [raw]
    constraints.extend(_odrl_constraint(c) for c in raw)
    label = obj.get("uid") or obj.get("@id")
    return Rule(tuple(constraints), label if isinstance(label, str) else None)


def import_odrl_subset(text) -> Policy:
    """Import an ODRL JSON-LD policy restricted to the supported fragment.

    ``target``/``assignee``/``assigner``/``action`` become equalities on the
    reserved attributes Asset/Assignee/Assigner/Action (policy-level values
    are inherited by every rule).  Constraints map to conditions; logical
    ``and``/``or``/``xone`` map to And/Or/exactly-one.  Anything else raises
    :class:`UnsupportedFeature` naming the offending term.
    """
    doc = loads(text)
    if not isinstance(doc, dict):
        raise SchemaError("ODRL policy must be a JSON object")
    doc = _strip(doc)
    inherited = {k: doc[k] for k in _RESERVED if k in doc}
    groups = {v: [] for v in _RULE_TYPES.values()}
    for key, body in doc.items():
        if key in _RULE_TYPES:
            items = body if isinstance(body, list) else [body]
            groups[_RULE_TYPES[key]].extend(
                _odrl_rule(r, inherited, f"{key}[{i}]") for i, r in enumerate(items))
        elif key in _IGNORED or key in _RESERVED:
            continue
        else:
            raise UnsupportedFeature(key)
    return Policy.build(groups["permissions"], groups["prohibitions"], groups["obligations"])
