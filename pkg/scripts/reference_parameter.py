"""
A renormalizable-like real parameter and its first-return branches
==================================================================

Locate the real parameter whose critical orbit follows the all-zero prefix of
length 6 after n = 8 steps, then enumerate the first-return branches to the
central piece V and compute pressure quantities on them.
"""
import numpy as np

from zerotemp.pressure import (bowen_pressure, enumerate_landing_branches,
                               enumerate_return_branches, gibbs_mass_report, peierls_margin)
from zerotemp.puzzle import cantor_data, find_parameter

n = 8
c = find_parameter(n, [0] * 6)
print(f"c = {c!r}")

cd = cantor_data(c)
print("p+ =", cd.p_plus, " p- =", cd.p_minus, " chi_crit =", cd.chi_crit)

# returns to V up to time 20
inv = enumerate_return_branches(c, n, 20)
print("branches by return time:", inv.counts_by_time())
print("diameter decay rate:", inv.decay_rate())

for t in (1, 2, 4, 8):
    b = bowen_pressure(inv, t)
    print(f"t = {t}:  P_hat = {b.mid:.10f}  (width {b.width:.1e})")

# where does the equilibrium mass sit as t grows
for t in (2, 8):
    p = bowen_pressure(inv, t).mid
    rep = gibbs_mass_report(inv, t, p)
    print(f"t = {t}: mass near O+ u O- = {rep['mass_O_plus_or_minus']:.4f}, "
          f"near O(p) = {rep['mass_O_p']:.4f}")

# the landing inventory is large (about half a million branches)
land = enumerate_landing_branches(c, n, 18)
print("landing branches:", len(land), " Peierls margin:", peierls_margin(land, cd.chi_crit))
print("shortest landing time:", int(np.min(land.times)))
