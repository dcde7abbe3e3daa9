"""Command-line front end.

Reports go to stdout as JSON (or text with ``--format text``); diagnostics go
to stderr.  Verdicts never change the exit status:

    0 success, 1 parse/schema error, 2 unsupported feature,
    3 domain too large, 4 internal invariant violation
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__
from .comparison import (
    DEFAULT_WITNESS_CAP, compare_policies, compare_rules,
    policy_value_index, rewrite_drop_permissions, rewrite_drop_prohibitions,
)
from .errors import (
    DomainTooLarge, InvalidInput, ObligationsUnsupported, ParseError, SchemaError,
    TypeMismatch, UnsupportedFeature,
)
from .ingestion import (
    dumps, import_odrl_subset, parse_policy, parse_value_set, parse_world, policy_to_json,
    simple_rule_to_json,
)
from .intervals import ValueIndex, decompose, simplify
from .model import Policy, Rule, validate_world
from .normalizer import Decomposition, normalize
from .oracle import DEFAULT_CAP, domain_from_values, oracle_policy_relation, oracle_relation

log = logging.getLogger("odrlnorm")

EXIT_OK, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_DOMAIN, EXIT_INTERNAL = range(5)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _load_policy(path: str) -> Policy:
    return parse_policy(_read(path))


def _rules_by_kind(p: Policy):
    yield "permission", p.permissions
    yield "prohibition", p.prohibitions


def _decomposition_report(p: Policy, v: Optional[ValueIndex]) -> dict:
    entries = []
    for kind, rules in _rules_by_kind(p):
        for i, r in enumerate(rules):
            if v is None:
                cells = {simplify(t) for t in normalize(r)}
                d = Decomposition.from_rules(t for t in cells if not t.bottom)
            else:
                d = decompose(r, v)
            entries.append({
                "type": kind, "index": i, "label": r.label,
                "cells": [simple_rule_to_json(t) for t in d],
            })
    out = {"rules": entries}
    if v is not None:
        out["values"] = v.to_dict()
    return out


def _find_rule(p: Policy, label: str) -> Rule:
    for r in p.rules():
        if r.label == label:
            return r
    raise SchemaError(f"no rule labelled {label!r}")


def cmd_normalize(args) -> dict:
    p = _load_policy(args.policy)
    v = None
    if args.values:
        v = parse_value_set(_read(args.values), p.schema).union(policy_value_index(p))
    return _decomposition_report(p, v)


def cmd_split(args) -> dict:
    p, other = _load_policy(args.policy), _load_policy(args.against)
    return _decomposition_report(p, policy_value_index(p, other))


def cmd_compare(args) -> dict:
    a, b = _load_policy(args.a), _load_policy(args.b)
    if args.rules:
        report = compare_rules(_find_rule(a, args.rules[0]), _find_rule(b, args.rules[1]),
                               cap=args.witness_cap)
    else:
        report = compare_policies(a, b, strict=args.strict, cap=args.witness_cap)
    return report.to_dict()


def cmd_rewrite(args) -> dict:
    p = _load_policy(args.policy)
    out = rewrite_drop_prohibitions(p) if args.drop == "prohibitions" else rewrite_drop_permissions(p)
    return policy_to_json(out)


def cmd_validate(args) -> dict:
    p = _load_policy(args.policy)
    w = parse_world(_read(args.world), p.schema)
    split_attrs = set(policy_value_index(p).attributes())
    for i, e in enumerate(w):
        nulls = sorted(a for a in split_attrs if e.get(a) is None)
        if nulls:
            log.warning("event %d is null on split attribute(s) %s; normalised forms "
                        "are only equivalent on valued attributes", i, ", ".join(nulls))
    return validate_world(p, w, default=args.default).to_dict()


def cmd_check(args) -> dict:
    a, b = _load_policy(args.a), _load_policy(args.b)
    if args.rules:
        ra, rb = _find_rule(a, args.rules[0]), _find_rule(b, args.rules[1])
        report = compare_rules(ra, rb)
        domain = domain_from_values(report.value_index, cap=args.cap)
        oracle = oracle_relation(ra, rb, domain)
    else:
        report = compare_policies(a, b)
        domain = domain_from_values(report.value_index, cap=args.cap)
        oracle = oracle_policy_relation(a, b, domain)
    library = {"overlap": report.overlap, "a_in_b": report.left_in_right,
               "b_in_a": report.right_in_left, "equivalent": report.equivalent}
    agree = all(library[k] == oracle.to_dict()[k] for k in library)
    return {"agree": agree, "events": oracle.events, "library": library,
            "oracle": oracle.to_dict()}


def cmd_import_odrl(args) -> dict:
    return policy_to_json(import_odrl_subset(_read(args.source)))


def _text(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(f"{pad}- {dumps(x, indent=None)}" for x in obj)
    return f"{pad}{obj}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odrlnorm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--format", choices=("json", "text"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="print the decomposition of every rule")
    p.add_argument("policy")
    p.add_argument("--values", help="value-set JSON to split against")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("split", help="split a policy against another policy's values")
    p.add_argument("policy")
    p.add_argument("--against", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("compare", help="compare two policies or two labelled rules")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--rules", nargs=2, metavar=("LABEL_A", "LABEL_B"))
    p.add_argument("--strict", action="store_true", help="refuse policies with obligations")
    p.add_argument("--witness-cap", type=int, default=DEFAULT_WITNESS_CAP)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("rewrite", help="drop prohibitions or permissions")
    p.add_argument("policy")
    p.add_argument("--drop", choices=("prohibitions", "permissions"), required=True)
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("validate", help="check a world against a policy")
    p.add_argument("policy")
    p.add_argument("world")
    p.add_argument("--default", choices=("prohibit", "permit"), default="prohibit")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="cross-check compare against brute-force enumeration")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--rules", nargs=2, metavar=("LABEL_A", "LABEL_B"))
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("import-odrl", help="convert an ODRL JSON-LD policy to native JSON")
    p.add_argument("source")
    p.set_defaults(func=cmd_import_odrl)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(levelname)s: %(message)s")
    try:
        result = args.func(args)
    except (ParseError, SchemaError, TypeMismatch, InvalidInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UnsupportedFeature, ObligationsUnsupported) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except DomainTooLarge as exc:
        print(f"domain too large: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except Exception as exc:  # anything else is a bug in the library
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.format == "text":
        sys.stdout.write(_text(result) + "\n")
    else:
        sys.stdout.write(dumps(result) + "\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
