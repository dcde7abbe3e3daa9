"""Batch evaluation of rules and cells over encoded event tables.

Events are encoded as an int64 matrix: column ``j`` holds, for attribute
``j``, the position of the event's value in that attribute's sorted ladder of
known values (``-1`` for null).  Positions preserve numeric order, so every
canonical comparison becomes an integer comparison.

The cell-matching kernel is compiled with numba when available.  Set
``ODRLNORM_KERNEL=numpy`` to force the pure-numpy path, ``numba`` to require
numba, or leave it unset (``auto``) to use numba when it imports.
"""

from __future__ import annotations

import os
from decimal import Decimal
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .model import (
    And, Condition, Event, Expr, Not, Op, Or, Rule, SimpleRule, Xor, iter_conditions,
)

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

NULL = -1
_IMPOSSIBLE = -2
_OP_CODES = {Op.EQ: 0, Op.LT: 1, Op.GT: 2, Op.NEQ: 3, Op.LEQ: 4, Op.GEQ: 5}


def backend() -> str:
    """Kernel backend selected by ``ODRLNORM_KERNEL`` (re-read on each call)."""
    flag = os.environ.get("ODRLNORM_KERNEL", "auto").lower()
    if flag not in ("auto", "numba", "numpy"):
        raise ValueError(f"ODRLNORM_KERNEL must be auto, numba or numpy, not {flag!r}")
    if flag == "numpy":
        return "numpy"
    if numba is None:
        if flag == "numba":
            raise RuntimeError("ODRLNORM_KERNEL=numba but numba is not installed")
        return "numpy"
    return "numba"


class EventTable:
    """Integer encoding of a list of events.

    ``extra`` supplies operand values (per attribute) that conditions may
    refer to; they join the ladders so every condition can be encoded.
    """

    def __init__(self, events: Sequence[Event], extra: Mapping[str, Iterable] = None):
        self.events = list(events)
        values: Dict[str, set] = {}
        for e in self.events:
            for k, v in e.assignments.items():
                s = values.setdefault(k, set())
                if v is not None:
                    s.add(v)
        for k, vs in (extra or {}).items():
            values.setdefault(k, set()).update(vs)
        self.attributes = sorted(values)
        self.column = {a: j for j, a in enumerate(self.attributes)}
        self.ladders = {a: sorted(values[a], key=_ladder_key) for a in self.attributes}
        self._pos = {a: {v: i for i, v in enumerate(lad)} for a, lad in self.ladders.items()}
        codes = np.full((len(self.events), max(1, len(self.attributes))), NULL, dtype=np.int64)
        for i, e in enumerate(self.events):
            for k, v in e.assignments.items():
                if v is not None:
                    codes[i, self.column[k]] = self._pos[k][v]
        self.codes = codes

    def __len__(self):
        return len(self.events)

    def encode(self, c: Condition) -> Tuple[int, int, int]:
        """(column, op code, position) for a condition; unknown values raise KeyError."""
        if c.left not in self.column:
            return 0, _OP_CODES[Op.EQ], _IMPOSSIBLE
        pos = self._pos[c.left].get(c.right)
        if pos is None:
            raise KeyError(f"operand {c.right!r} of {c} is not in the table ladder")
        return self.column[c.left], _OP_CODES[c.op], pos

    def encode_cells(self, cells: Sequence[SimpleRule]):
        attr: List[int] = []
        op: List[int] = []
        pos: List[int] = []
        ptr = [0]
        for t in cells:
            conds = [(0, 0, _IMPOSSIBLE)] if t.bottom else [self.encode(c) for c in t.conditions]
            for a, o, p in conds:
                attr.append(a)
                op.append(o)
                pos.append(p)
            ptr.append(len(attr))
        as_arr = lambda xs: np.asarray(xs, dtype=np.int64)
        return as_arr(attr), as_arr(op), as_arr(pos), as_arr(ptr)


def _ladder_key(v):
    # numeric values sort by magnitude; a ladder never mixes kinds
    return v if isinstance(v, Decimal) else (v,)


def _compare(x: np.ndarray, o: int, p: int) -> np.ndarray:
    valid = x >= 0
    if o == 0:
        r = x == p
    elif o == 1:
        r = x < p
    elif o == 2:
        r = x > p
    elif o == 3:
        r = x != p
    elif o == 4:
        r = x <= p
    else:
        r = x >= p
    return r & valid


def match_counts_numpy(codes, attr, op, pos, ptr):
    n_events = codes.shape[0]
    counts = np.zeros(n_events, dtype=np.int64)
    first = np.full(n_events, -1, dtype=np.int64)
    for k in range(len(ptr) - 1):
        mask = np.ones(n_events, dtype=bool)
        for j in range(ptr[k], ptr[k + 1]):
            mask &= _compare(codes[:, attr[j]], op[j], pos[j])
        first[(first < 0) & mask] = k
        counts += mask
    return counts, first


def _match_counts_py(codes, attr, op, pos, ptr):
    n_events = codes.shape[0]
    n_cells = ptr.shape[0] - 1
    counts = np.zeros(n_events, dtype=np.int64)
    first = np.full(n_events, -1, dtype=np.int64)
    for e in range(n_events):
        for k in range(n_cells):
            ok = True
            for j in range(ptr[k], ptr[k + 1]):
                x = codes[e, attr[j]]
                p = pos[j]
                o = op[j]
                if x < 0:
                    ok = False
                elif o == 0:
                    ok = x == p
                elif o == 1:
                    ok = x < p
                elif o == 2:
                    ok = x > p
                elif o == 3:
                    ok = x != p
                elif o == 4:
                    ok = x <= p
                else:
                    ok = x >= p
                if not ok:
                    break
            if ok:
                if counts[e] == 0:
                    first[e] = k
                counts[e] += 1
    return counts, first


if numba is not None:
    match_counts_numba = numba.njit(cache=True)(_match_counts_py)
else:  # pragma: no cover
    match_counts_numba = None


def match_counts(table: EventTable, cells: Sequence[SimpleRule]):
    """For each event: number of matching cells, and index of the first match."""
    args = (table.codes, *table.encode_cells(cells))
    if backend() == "numba":
        return match_counts_numba(*args)
    return match_counts_numpy(*args)


def evaluate_batch(x: Expr, table: EventTable) -> np.ndarray:
    """Vectorised ``evaluate_expr`` over every event of the table."""
    n = len(table)
    if isinstance(x, Condition):
        a, o, p = table.encode(x)
        if p == _IMPOSSIBLE:
            return np.zeros(n, dtype=bool)
        return _compare(table.codes[:, a], o, p)
    if isinstance(x, And):
        out = np.ones(n, dtype=bool)
        for c in x.children:
            out &= evaluate_batch(c, table)
        return out
    if isinstance(x, Or):
        out = np.zeros(n, dtype=bool)
        for c in x.children:
            out |= evaluate_batch(c, table)
        return out
    if isinstance(x, Not):
        return ~evaluate_batch(x.child, table)
    if isinstance(x, Xor):
        return evaluate_batch(x.left, table) ^ evaluate_batch(x.right, table)
    raise TypeError(f"not a constraint expression: {x!r}")


def match_batch(r: Rule, table: EventTable) -> np.ndarray:
    return evaluate_batch(And(*r.constraints), table)


def operand_values(items: Iterable) -> Dict[str, set]:
    """Per-attribute operand values of rules, simple rules or expressions."""
    out: Dict[str, set] = {}
    for item in items:
        if isinstance(item, SimpleRule):
            conds = item.conditions
        elif isinstance(item, Rule):
            conds = item.conditions()
        else:
            conds = iter_conditions(item)
        for c in conds:
            out.setdefault(c.left, set()).add(c.right)
    return out
