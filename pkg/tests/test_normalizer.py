import itertools

from hypothesis import given, settings, strategies as st

from odrlnorm import (
    BOTTOM, And, Event, Not, Or, Rule, SimpleRule, Xor, canonicalize, cond, evaluate_expr,
    match, match_simple, merge_constraints, normalize, reformulate, to_dnf,
)
from odrlnorm.model import Op, iter_conditions


def test_merge_eq1_gives_three_children(eq1):
    x = merge_constraints(eq1.permissions[0])
    assert isinstance(x, And) and len(x.children) == 3
    assert isinstance(x.children[2], Or)


def test_merge_single_leaf_and_empty():
    c = cond("Age", ">", 3)
    assert merge_constraints(Rule((c,))) == c
    assert merge_constraints(Rule(())) == And()


def test_empty_rule_normalises_to_everything():
    (t,) = normalize(Rule(()))
    assert t.conditions == () and not t.bottom
    assert to_dnf(And()) == [()]
    assert match_simple(t, Event(Action="x", Age=1))


def test_geq_rewrites_to_gt_or_eq():
    assert reformulate(cond("Age", ">=", 18)) == Or(cond("Age", ">", 18), cond("Age", "=", 18))


def test_negated_lt_rewrites_to_gt_or_eq():
    assert reformulate(Not(cond("Age", "<", 18))) == Or(cond("Age", ">", 18), cond("Age", "=", 18))


def test_double_negation():
    c = cond("Age", "<=", 4)
    assert reformulate(Not(Not(c))) == reformulate(c)


def test_numeric_neq_and_entity_neq():
    assert reformulate(cond("Age", "!=", 18)) == Or(cond("Age", "<", 18), cond("Age", ">", 18))
    assert reformulate(Not(cond("A", "=", "x"))) == cond("A", "!=", "x")


def test_reformulated_ops_are_canonical():
    x = Xor(Not(cond("Age", ">=", 3)), And(cond("Age", "<=", 9), Not(cond("B", "!=", "q"))))
    y = reformulate(x)
    assert all(c.op in (Op.EQ, Op.LT, Op.GT, Op.NEQ) for c in iter_conditions(y))
    ops = [c.op for c in iter_conditions(y) if c.left == "Age"]
    assert Op.NEQ not in ops


def test_eq1_normalises_to_three_members(eq1):
    d = normalize(eq1.permissions[0])
    assert len(d) == 3
    ages = sorted(str(c) for t in d for c in t.conditions if c.left == "Age")
    assert ages == ["(Age < 18)", "(Age = 18)", "(Age > 18)"]
    minor = [t for t in d if cond("Age", "<", 18) in t.conditions][0]
    assert cond("Payment", "=", 5) in minor.conditions


def test_single_conjunction_is_itself():
    conj = And(cond("A", "=", "x"), cond("Age", "<", 3))
    assert to_dnf(conj) == [(cond("A", "=", "x"), cond("Age", "<", 3))]


def test_cnf_four_by_two_gives_sixteen_conjunctions():
    clauses = [Or(cond(f"x{i}", "<", 1), cond(f"y{i}", "<", 1)) for i in range(4)]
    dnf = to_dnf(And(*clauses))
    assert len(dnf) == 16
    names = [f"{p}{i}" for i in range(4) for p in "xy"]
    for bits in itertools.product((0, 1), repeat=8):
        e = Event({"Action": "a", **dict(zip(names, bits))})
        cnf_true = evaluate_expr(And(*clauses), e)
        assert cnf_true == any(all(evaluate_expr(c, e) for c in conj) for conj in dnf)


def test_canonicalize_sorts_and_dedups():
    t = canonicalize([cond("Asset", "=", "Movie"), cond("Action", "=", "Play"),
                      cond("Action", "=", "Play")])
    assert t.conditions == (cond("Action", "=", "Play"), cond("Asset", "=", "Movie"))
    t = canonicalize([cond("Age", ">", 18), cond("Age", "<", 65), cond("Age", ">", 18)])
    assert len(t.conditions) == 2


def test_clashing_entities_are_bottom():
    t = canonicalize([cond("Party", "=", "Alice"), cond("Party", "=", "Bob")])
    assert t is BOTTOM or t.bottom
    for who in ("Alice", "Bob", "Carol"):
        assert not match_simple(t, Event(Action="a", Party=who))


_ATTRS = {"Age": [17, 18, 19], "Payment": [5, 10]}


@st.composite
def _exprs(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        a = draw(st.sampled_from(sorted(_ATTRS)))
        op = draw(st.sampled_from(["=", "!=", "<", ">", "<=", ">="]))
        return cond(a, op, draw(st.sampled_from([17, 18, 5, 10])))
    kind = draw(st.sampled_from(["and", "or", "not", "xor"]))
    if kind == "not":
        return Not(draw(_exprs(depth - 1)))
    if kind == "xor":
        return Xor(draw(_exprs(depth - 1)), draw(_exprs(depth - 1)))
    kids = draw(st.lists(_exprs(depth - 1), min_size=2, max_size=3))
    return (And if kind == "and" else Or)(*kids)


@settings(max_examples=150, deadline=None)
@given(st.lists(_exprs(), max_size=3))
def test_normalize_preserves_matching(constraints):
    r = Rule(tuple(constraints))
    d = normalize(r)
    for age, pay in itertools.product(*_ATTRS.values()):
        e = Event(Action="a", Age=age, Payment=pay)
        assert match(r, e) == any(match_simple(t, e) for t in d)


def test_normalize_never_returns_bottom():
    r = Rule((cond("P", "=", "a"), cond("P", "=", "b")))
    assert len(normalize(r)) == 0
    assert all(isinstance(t, SimpleRule) for t in normalize(Rule((cond("P", "=", "a"),))))
