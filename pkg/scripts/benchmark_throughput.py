#!/usr/bin/env python3
"""Measure Hausdorff batch-kernel throughput.

Evaluates one query set against a stream of random candidate sets (3 to 8
points each) on a configurable number of threads and reports evaluations
per second. The tracked target is one million evaluations in at most ten
seconds on four threads.
"""

import argparse
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from scenesift import hausdorff_many


def make_batches(rng, n_batches, batch_size):
    batches = []
    for i in range(n_batches):
        n = 3 + (i % 6)
        batches.append(np.stack([
            np.column_stack([
                rng.uniform(-200, 200, n), rng.uniform(-40, 40, n),
                rng.uniform(-50, 50, n), rng.uniform(-10, 10, n)])
            for _ in range(batch_size)]))
    return batches


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--evaluations", type=int, default=1_000_000)
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--batch-size", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    query = np.column_stack([
        rng.uniform(-200, 200, 4), rng.uniform(-40, 40, 4),
        rng.uniform(-50, 50, 4), rng.uniform(-10, 10, 4)])
    distinct = make_batches(rng, 10, args.batch_size)
    n_calls = (args.evaluations + args.batch_size - 1) // args.batch_size

    start = time.perf_counter()
    if args.threads <= 1:
        total = sum(len(hausdorff_many(query, distinct[i % 10])) for i in range(n_calls))
    else:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            total = sum(pool.map(
                lambda i: len(hausdorff_many(query, distinct[i % 10])),
                range(n_calls)))
    elapsed = time.perf_counter() - start

    print(f"{total} evaluations in {elapsed:.2f} s on {args.threads} thread(s)")
    print(f"{total / elapsed / 1e6:.2f} million evaluations per second")
    print(f"target: >= 1,000,000 evaluations in <= 10 s on 4 threads -> "
          f"{'met' if total >= 1_000_000 and elapsed <= 10.0 else 'NOT met'}")


if __name__ == "__main__":
    main()
