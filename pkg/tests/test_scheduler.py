import math

import pytest
from hypothesis import given, settings, strategies as st

from zerotemp.appendix import PartitionScheme, partition_endpoints
from zerotemp.errors import AmbiguousPrediction, DomainError
from zerotemp.scheduler import (MINUS, PLUS, ZERO, build_hat_sequence, check_compatibility,
                                check_hat_invariants, dominant_block_prediction,
                                dominant_block_report, pressure_band, project_itinerary,
                                scale_A, schedule_from_temperatures, scheduler_scheme,
                                temperature_window)

SC = scheduler_scheme(1)
signs = st.lists(st.sampled_from("+-"), min_size=8, max_size=8)


def test_scheme_parity():
    assert (SC.q, SC.Xi) == (201, 3)
    assert (SC.q + SC.Xi) % 2 == 0
    with pytest.raises(DomainError):
        build_hat_sequence("+" * 4, PartitionScheme.standard(1))


def test_leading_symbols():
    hat = build_hat_sequence("+" * 4, SC)
    _, b0, _, _ = partition_endpoints(SC, 0)
    assert set(hat.window(0, b0 - 1)) == {ZERO}
    assert hat[b0 - 1] == PLUS
    a1 = partition_endpoints(SC, 1)[0]
    assert hat[a1 - 2] == PLUS and hat[a1 - 1] == ZERO


def test_all_plus_has_no_minus():
    hat = build_hat_sequence("+" * 8, SC)
    for s in range(1, 8):
        _, b, _, _ = partition_endpoints(SC, s)
        assert hat[b - 1] == PLUS


def test_all_minus_blocks_even():
    hat = build_hat_sequence("-" * 8, SC)
    for s in range(1, 8):
        _, b, _, nJ = partition_endpoints(SC, s)
        assert hat[b - 1] == MINUS and hat[b + nJ - 2] == MINUS
        assert nJ % 2 == 0
        assert check_hat_invariants(hat, b - 3, b + 3)["even_minus_blocks"]


def test_short_prefix_is_an_error():
    hat = build_hat_sequence("+", SC)
    _, b, _, _ = partition_endpoints(SC, 5)
    with pytest.raises(DomainError):
        hat[b]


def test_projection_rules():
    hat = build_hat_sequence("-" * 4, SC)
    _, b, _, _ = partition_endpoints(SC, 1)
    j0 = b - 1                      # first index of J_1; b_1 is even so j0 is odd
    assert j0 % 2 == 1
    assert project_itinerary(hat, (j0, j0 + 6)) == [1, 0, 1, 0, 1, 0]
    assert project_itinerary(hat, (j0 + 1, j0 + 7)) == [0, 1, 0, 1, 0, 1]
    assert project_itinerary(hat, range(0, 5)) == [0] * 5
    assert project_itinerary(hat, (j0, j0 + 6)) == project_itinerary(hat, (j0, j0 + 6))


def test_compatibility_clauses():
    hat = build_hat_sequence("-" * 4, SC)
    x = project_itinerary(hat, (0, 50))
    assert check_compatibility(x, hat)
    x[3] = 1
    assert not check_compatibility(x, hat)
    _, b, _, _ = partition_endpoints(SC, 1)
    y = project_itinerary(hat, (b - 1, b + 9))
    assert check_compatibility(y, hat, b - 1)
    y[4] = y[5]
    assert not check_compatibility(y, hat, b - 1)


def window_starts(rng_data):
    s = rng_data.draw(st.integers(0, 4))
    a, b, nI, nJ = partition_endpoints(SC, s)
    anchor = rng_data.draw(st.sampled_from([a - 1, b - 1, b + nJ - 1, a + rng_data.draw(st.integers(0, nI))]))
    j0 = max(0, anchor - rng_data.draw(st.integers(0, 60)))
    return j0, j0 + rng_data.draw(st.integers(1, 120))


@settings(max_examples=300, deadline=None)
@given(signs, st.data())
def test_hat_invariants_on_random_windows(prefix, data):
    hat = build_hat_sequence(prefix, SC)
    j0, j1 = window_starts(data)
    inv = check_hat_invariants(hat, j0, j1)
    assert all(inv.values()), inv
    x = project_itinerary(hat, (j0, j1))
    assert check_compatibility(x, hat, j0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 5000))
def test_symbol_at_astronomical_index(j):
    hat = build_hat_sequence("+-" * 8, SC)
    assert hat[j] in (ZERO, PLUS, MINUS)


def test_temperature_window():
    assert scale_A(2) == 4
    assert scale_A(4) == 2
    w = temperature_window(2, 3, 5, "++-+-")
    assert w.tau(w.A * 3) == pytest.approx(12)
    assert w.t_low == 12 and w.t_high == 20
    assert w.predicted_sign is None
    assert temperature_window(2, 3, 3, "++-").predicted_sign == "-"


def test_pressure_band_asymptote():
    band = pressure_band(1e4, 0.9, 2.0, SC)
    assert band.asymptote
    assert band.P_plus == pytest.approx(-1e4 * 0.45)
    assert band.P_minus <= band.P_plus


@settings(max_examples=30, deadline=None)
@given(st.floats(8, 400), st.floats(0.1, 2))
def test_pressure_band_ordered(t, chi):
    band = pressure_band(t, chi, 2.0, SC)
    assert band.P_minus <= band.P_plus
    if band.P_plus < 0:
        assert band.negative


def test_pressure_band_toy_scheme():
    toy = PartitionScheme(1, 3, 200)
    band = pressure_band(3, 0.7, 2.0, toy)     # A = 4, so tau = t
    assert band.tau == pytest.approx(3)
    assert math.isfinite(band.P_minus) and math.isfinite(band.P_plus)
    assert band.P_minus < 0 and band.P_plus < 0
    assert band.log2_lambda_minus < band.log2_lambda_plus


def test_pressure_band_rejects_small_tau():
    with pytest.raises(DomainError):
        pressure_band(1, 0.7, 2.0, SC)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12))
def test_all_plus_predicts_plus(m):
    assert dominant_block_prediction(4.0 * m, 2.0, SC, "+" * 16) == "+"


@settings(max_examples=40, deadline=None)
@given(signs, st.integers(1, 8))
def test_block_to_sign_assignment(prefix, m):
    # tau = 4m exactly: blocks 4m-3 .. 4m all carry sign(m)
    r = dominant_block_report(4.0 * m, 2.0, SC, prefix, evaluate_series=False)
    assert r.blocks == [s for s in range(4 * m - 3, 4 * m + 1)]
    assert r.sign == prefix[m - 1]


def test_ambiguous_prediction():
    with pytest.raises(AmbiguousPrediction):
        dominant_block_prediction(4.0 * 1.5, 2.0, SC, "+-++")


def test_schedule_examples():
    S = schedule_from_temperatures([4 * 4 ** l for l in range(5)], 4, 2)
    assert S.growth_holds
    assert S.m == [4 ** l for l in range(5)]
    bad = schedule_from_temperatures([4, 16, 20], 4, 2)
    assert bad.violations == [1]


def test_schedule_predictions_alternate():
    betas = [4 * 4 ** l for l in range(7)]
    S = schedule_from_temperatures(betas, 4, 2)
    preds = [dominant_block_prediction(b, 2.0, SC, S.signs) for b in betas]
    assert all(a != b for a, b in zip(preds, preds[1:]))


def test_window_consistency():
    S = schedule_from_temperatures([4 * 4 ** l for l in range(4)], 4, 2)
    w = temperature_window(2.0, 4, 15, S.signs)
    ts = [w.t_low + k * (w.t_high - w.t_low) / 10 for k in range(11)]
    preds = {dominant_block_prediction(t, 2.0, SC, S.signs) for t in ts}
    assert preds == {w.predicted_sign}


def test_report_evaluates_series():
    S = schedule_from_temperatures([4 * 4 ** l for l in range(4)], 4, 2)
    r = dominant_block_report(16.0, 2.0, SC, S.signs)
    assert r.m0 == 4 and not r.certified
    assert all(v is not None for v in r.hatJ_minus.values())
