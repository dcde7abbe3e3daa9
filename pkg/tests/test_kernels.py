import numpy as np
import pytest

from odrlnorm import build_value_index, decompose, domain_from_values, evaluate_expr, match_simple
from odrlnorm import kernels
from odrlnorm.model import And
from odrlnorm.oracle import event_table
from gen import RuleGen


def _corpus(seed, n):
    g = RuleGen(seed)
    out = []
    for _ in range(n):
        r = g.rule()
        cells = list(decompose(r))
        d = domain_from_values(build_value_index([r]), allow_null=[a for a in
                               build_value_index([r]).attributes() if a != "Action"][:1])
        out.append((r, cells, event_table(d, kernels.operand_values([r, *cells]))))
    return out


def test_backend_flag(monkeypatch):
    monkeypatch.setenv("ODRLNORM_KERNEL", "numpy")
    assert kernels.backend() == "numpy"
    monkeypatch.setenv("ODRLNORM_KERNEL", "bogus")
    with pytest.raises(ValueError):
        kernels.backend()
    monkeypatch.delenv("ODRLNORM_KERNEL")
    assert kernels.backend() == ("numba" if kernels.numba is not None else "numpy")


def test_evaluate_batch_matches_scalar_evaluation():
    for r, _, table in _corpus(3, 40):
        got = kernels.match_batch(r, table)
        want = [evaluate_expr(And(*r.constraints), e) for e in table.events]
        assert got.tolist() == want


def test_match_counts_matches_scalar_counting():
    for _, cells, table in _corpus(5, 40):
        counts, first = kernels.match_counts_numpy(table.codes, *table.encode_cells(cells))
        for i, e in enumerate(table.events):
            hits = [k for k, t in enumerate(cells) if match_simple(t, e)]
            assert counts[i] == len(hits)
            assert first[i] == (hits[0] if hits else -1)


@pytest.mark.skipif(kernels.numba is None, reason="numba not installed")
def test_numba_and_numpy_agree():
    for _, cells, table in _corpus(9, 40):
        args = (table.codes, *table.encode_cells(cells))
        a, b = kernels.match_counts_numba(*args), kernels.match_counts_numpy(*args)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_dispatch_respects_flag(monkeypatch):
    (_, cells, table), = _corpus(1, 1)
    monkeypatch.setenv("ODRLNORM_KERNEL", "numpy")
    a = kernels.match_counts(table, cells)
    monkeypatch.setenv("ODRLNORM_KERNEL", "auto")
    b = kernels.match_counts(table, cells)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_unknown_attribute_never_matches():
    from odrlnorm import cond, Event
    table = kernels.EventTable([Event(Action="a")])
    assert not kernels.evaluate_batch(cond("Age", "<", 3), table).any()
    with pytest.raises(KeyError):
        table.encode(cond("Action", "=", "zz"))
