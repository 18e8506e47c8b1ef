"""Benchmark the numba kernel against the pure-numpy fallback.

Both backends evaluate the same compiled ground formula over blocks of truth
assignments; this compares their throughput on the counting workloads that
dominate the test suite, and cross-checks that they produce identical words.

Run: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from wfomc import _kernels as K
from wfomc.counting import compile_program, wmc_bruteforce
from wfomc.frontends import parse_theory
from wfomc.grounding import ground
from wfomc.logic import Domain

CASES = [
    ("smokers n=3 (12 atoms)", "forall x forall y (S(x) & F(x,y) -> S(y))", 3),
    ("smokers n=4 (20 atoms)", "forall x forall y (S(x) & F(x,y) -> S(y))", 4),
    ("employment n=4 (20 atoms)", "forall x exists y (WorksFor(x,y) | Boss(x))", 4),
    ("3-sentence mix n=3 (21 atoms)",
     "forall x forall y (P(x) | ~Q(x,y))\n"
     "forall x exists y (Q(x,y) & R(y))\n"
     "forall x (R(x) -> P(x))", 3),
]

REPEAT = 5


def bench(name, text, n):
    t, _ = parse_theory(text)
    g = ground(t, Domain.of_size(n))
    prog = compile_program(g.formula, g.base)
    m = len(prog.atoms)
    total = 1 << m

    results = {}
    for label, force_numpy in (("numba", False), ("numpy", True)):
        if label == "numba" and not K.HAVE_NUMBA:
            continue
        # warm up (JIT compile on first call)
        K.satisfying_words(prog.ops, prog.args, prog.stack_need, 0, min(total, 64),
                           force_numpy=force_numpy)
        best = float("inf")
        for _ in range(REPEAT):
            t0 = time.perf_counter()
            words = K.satisfying_words(prog.ops, prog.args, prog.stack_need, 0, total,
                                       force_numpy=force_numpy)
            best = min(best, time.perf_counter() - t0)
        results[label] = (best, words)

    print(f"{name}: {m} atoms, {len(prog.ops)} instructions, {total} assignments")
    reference = None
    for label, (best, words) in results.items():
        rate = total / best / 1e6
        print(f"  {label:6s} {best * 1e3:8.2f} ms   {rate:9.1f} M assignments/s")
        if reference is None:
            reference = words
        else:
            assert np.array_equal(reference, words), "backends disagree!"
    if len(results) == 2:
        speedup = results["numpy"][0] / results["numba"][0]
        print(f"  numba speedup over numpy: {speedup:.2f}x")

    t0 = time.perf_counter()
    value = wmc_bruteforce(g)
    dt = time.perf_counter() - t0
    print(f"  end-to-end count: {value} in {dt * 1e3:.1f} ms\n")


def main():
    print(f"default backend: {K.backend()}  (numba available: {K.HAVE_NUMBA})\n")
    for name, text, n in CASES:
        bench(name, text, n)


if __name__ == "__main__":
    main()
