"""Benchmark: compiled search kernel vs the pure-Python fallback.

Solves full 20-entry trick tables for a batch of generated deals with each
kernel and reports per-table latency and speedup. Run from the repo root:

    python3 benchmarks/bench_solver.py --deals 20 --ranks 5
"""

import argparse
import statistics
import time

from bridgebid.deals import GameVariant, generate_deal
from bridgebid.dds import _search_py

try:
    from bridgebid.dds import _search_cy
except ImportError:
    _search_cy = None


def hand_masks(deal):
    masks = [0, 0, 0, 0]
    for card, seat in enumerate(deal.holder):
        masks[seat] |= 1 << card
    return masks


def table_with(kernel, n, masks):
    return [
        kernel.solve(n, list(masks), -1 if strain == 4 else strain,
                     (declarer + 1) % 4, declarer & 1, True)
        for declarer in range(4)
        for strain in range(5)
    ]


def bench(kernel, deals, n):
    times = []
    tables = []
    for deal in deals:
        masks = hand_masks(deal)
        start = time.perf_counter()
        tables.append(table_with(kernel, n, masks))
        times.append(time.perf_counter() - start)
    return times, tables


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--deals", type=int, default=20)
    parser.add_argument("--ranks", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    variant = GameVariant.of(args.ranks)
    deals = [
        generate_deal(args.seed, variant, board) for board in range(1, args.deals + 1)
    ]

    py_times, py_tables = bench(_search_py, deals, args.ranks)
    print(f"pure python : {statistics.mean(py_times) * 1e3:8.2f} ms/table "
          f"(median {statistics.median(py_times) * 1e3:.2f})")

    if _search_cy is None:
        print("compiled    : extension not built")
        return

    cy_times, cy_tables = bench(_search_cy, deals, args.ranks)
    print(f"compiled    : {statistics.mean(cy_times) * 1e3:8.2f} ms/table "
          f"(median {statistics.median(cy_times) * 1e3:.2f})")
    print(f"speedup     : {statistics.mean(py_times) / statistics.mean(cy_times):8.1f}x")

    if py_tables != cy_tables:
        raise SystemExit("kernels disagree; benchmark numbers are meaningless")
    print("results     : identical tables from both kernels")


if __name__ == "__main__":
    main()
