"""
Interval checks for the partition series
========================================

Verifies the inequalities on the block sums for a few values of xi and
compares the closed forms with a brute-force sum on a small scheme.
"""
from fractions import Fraction

from zerotemp.appendix import (PartitionScheme, block_sums, brute_force_block,
                               series_totals, verify_appendix_lemmas)

for xi in (Fraction(1, 2), 1, 2):
    sc = PartitionScheme.standard(xi)
    rep = verify_appendix_lemmas(sc)
    worst = min(rep["checks"], key=lambda c: c["log2_margin"])
    print(f"xi = {xi}: q = {sc.q}, {len(rep['checks'])} checks, all passed = {rep['all_passed']}, "
          f"tightest {worst['name']} margin {worst['log2_margin']:.3f}")

# tiny scheme where every term can be summed one at a time
sc = PartitionScheme.oracle(2, 0.4)
closed = block_sums(sc, 1, 1, Fraction(1, 2)).intervals
brute = brute_force_block(sc, 1, 1, Fraction(1, 2))
for name in sorted(brute):
    print(f"{name:>8}: closed {float(closed[name].mid):.15e}   brute {float(brute[name].mid):.15e}")

tot = series_totals(sc, 4, 8)
print("totals at tau = 4, lambda = 8:", tot)
