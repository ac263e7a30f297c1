"""
Sign schedules and the dominant block
=====================================

Builds a sign sequence from an inverse-temperature list, then reads the
predicted dominant sign at each temperature. The predictions alternate, so
the zero-temperature limit does not exist along this family.
"""
from zerotemp.appendix import partition_endpoints
from zerotemp.scheduler import (build_hat_sequence, dominant_block_prediction, project_itinerary,
                                schedule_from_temperatures, scheduler_scheme, temperature_window)

sc = scheduler_scheme(1)
print("scheme: q =", sc.q, " Xi =", sc.Xi)

betas = [4 * 4 ** l for l in range(6)]
S = schedule_from_temperatures(betas, 4, 2)
print("first signs:", "".join(S.signs[:24]), f"... ({len(S.signs)} in all)",
      " growth holds:", S.growth_holds)

for b in betas:
    print(f"beta = {b:>6}: dominant sign {dominant_block_prediction(b, 2.0, sc, S.signs)}")

w = temperature_window(2.0, 4, 15, S.signs)
print(f"window [{w.t_low}, {w.t_high}] predicts {w.predicted_sign}")

hat = build_hat_sequence(S.signs, sc)
_, b1, _, _ = partition_endpoints(sc, 1)
# around the start of J_1 the itinerary switches from zeros to alternation
print("symbols near J_1:", "".join(map(str, project_itinerary(hat, (b1 - 10, b1 + 20)))))
