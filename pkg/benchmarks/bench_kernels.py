"""Benchmark the compiled labor/tax kernels against the numpy fallback.

Both backends are loaded side by side (ignoring TAXLAB_KERNEL) and timed
on the two hot paths: piecewise tax over a large income vector, and the
golden-section best response for a whole population. Outputs are checked
to agree before any timing is reported.

Usage: python3 benchmarks/bench_kernels.py [--workers N] [--repeats R]
"""

import argparse
import time

import numpy as np

from taxlab._kernels import load_backend
from taxlab.fiscal import US_FEDERAL_2024


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workers", type=int, default=10_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    skills = np.exp(rng.normal(3.0, 0.9, args.workers))
    incomes = skills * rng.uniform(10.0, 80.0, args.workers)
    thresholds = US_FEDERAL_2024.thresholds
    rates = US_FEDERAL_2024.rates

    try:
        compiled = load_backend("compiled")
    except ImportError:
        print("compiled backend unavailable; nothing to compare")
        return 1
    pure = load_backend("pure")

    tax_gap = np.max(np.abs(compiled.tax_due_many(thresholds, rates, incomes)
                            - pure.tax_due_many(thresholds, rates, incomes)))
    labor_args = (skills, thresholds, rates, 25.0, 0.5, 0.01, 2.0, 0.0, 100.0)
    labor_gap = np.max(np.abs(compiled.best_response_many(*labor_args)
                              - pure.best_response_many(*labor_args)))
    print("parity: tax max|diff| %.3e, labor max|diff| %.3e hours"
          % (tax_gap, labor_gap))
    if tax_gap > 1e-9 or labor_gap > 1e-5:
        print("backends disagree; refusing to time")
        return 1

    rows = [
        ("tax_due_many (%d incomes, %d brackets)"
         % (args.workers, len(rates)),
         lambda b: b.tax_due_many(thresholds, rates, incomes)),
        ("best_response_many (%d workers)" % args.workers,
         lambda b: b.best_response_many(*labor_args)),
    ]
    print("%-45s %12s %12s %8s" % ("kernel", "compiled", "pure", "speedup"))
    for label, call in rows:
        t_compiled = best_of(lambda: call(compiled), args.repeats)
        t_pure = best_of(lambda: call(pure), args.repeats)
        print("%-45s %10.3f ms %10.3f ms %7.1fx"
              % (label, 1e3 * t_compiled, 1e3 * t_pure,
                 t_pure / t_compiled))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
