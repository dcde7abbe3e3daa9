"""Time the numba and numpy cell-matching kernels on the same encoded workload.

    python benchmarks/bench_kernels.py [--repeat N] [--rules N]

Both backends run on identical inputs; results are checked for equality
before timings are printed.  The numba kernel is compiled before timing.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from gen import RuleGen  # noqa: E402
from odrlnorm import ValueIndex, build_value_index, decompose, domain_from_values  # noqa: E402
from odrlnorm import kernels  # noqa: E402
from odrlnorm.oracle import event_table  # noqa: E402


def workload(n_rules, seed=1):
    g = RuleGen(seed, max_attrs=4, max_cuts=3, max_depth=4)
    jobs = []
    for _ in range(n_rules):
        pools = g.schema()
        r = g.rule(pools)
        v = ValueIndex(pools).union(build_value_index([r]))
        cells = list(decompose(r, v))
        if not cells:
            continue
        table = event_table(domain_from_values(v, padding=2),
                            kernels.operand_values([r, *cells]))
        jobs.append((table.codes, *table.encode_cells(cells)))
    return jobs


def best_of(fn, jobs, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        for args in jobs:
            fn(*args)
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rules", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    jobs = workload(args.rules)
    events = sum(a[0].shape[0] for a in jobs)
    cells = sum(len(a[4]) - 1 for a in jobs)
    print(f"{len(jobs)} rules, {events} events, {cells} cells")

    t_numpy = best_of(kernels.match_counts_numpy, jobs, args.repeat)
    print(f"numpy  {t_numpy * 1e3:9.2f} ms")
    if kernels.match_counts_numba is None:
        print("numba  not installed")
        return
    for a in jobs:
        got, want = kernels.match_counts_numba(*a), kernels.match_counts_numpy(*a)
        assert all(np.array_equal(x, y) for x, y in zip(got, want))
    t_numba = best_of(kernels.match_counts_numba, jobs, args.repeat)
    print(f"numba  {t_numba * 1e3:9.2f} ms   ({t_numpy / t_numba:.1f}x)")


if __name__ == "__main__":
    main()
