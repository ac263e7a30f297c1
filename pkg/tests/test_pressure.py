import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq
from scipy.special import logsumexp

from zerotemp.deformation import build_deformation
from zerotemp.dynamics import QuadraticMap
from zerotemp.errors import DomainError, NoConvergence
from zerotemp.pressure import (UPSILON, bowen_pressure, central_piece_halfwidth,
                               enumerate_return_branches, gibbs_mass_report, log_partition,
                               onto_residual, partition_function, peierls_margin,
                               postcritical_bracket, postcritical_series, preimage_pressure,
                               v_trace)
from zerotemp.puzzle import cantor_data

from conftest import REF_C, REF_N, scalar_pullback

RETURN_COUNTS = {11: 2, 13: 4, 14: 6, 15: 12, 16: 24, 17: 50, 18: 96, 19: 196, 20: 386}
PEIERLS = 0.02007635586795886
BOWEN = {1: -0.2628887058235705, 2: -0.8556386246345937, 4: -1.9212654338916764,
         8: -3.924184746632818}
GIBBS = {
    2: {"mass_O_p": 0.19369911833258316, "mass_O_plus": 0.020248836407135457,
        "mass_O_minus": 0.1143831026562417, "mass_O_plus_or_minus": 0.1152541613904814,
        "remainder": 0.7930867700327429},
    8: {"mass_O_p": 0.44117038984959367, "mass_O_plus": 0.0001003969130222817,
        "mass_O_minus": 0.2458754548538258, "mass_O_plus_or_minus": 0.24587546524750195,
        "remainder": 0.5587820643297245},
}


@pytest.fixture(scope="module")
def oracle():
    v = v_trace(REF_C, REF_N).right
    return scalar_pullback(REF_C, v, 20)


def test_v_is_level_zero_piece():
    V = v_trace(REF_C, REF_N)
    assert V.left == pytest.approx(-V.right)
    assert V.right == pytest.approx(0.004214301676592573, rel=1e-9)
    assert central_piece_halfwidth(REF_C, REF_N, 0) == pytest.approx(V.right, rel=1e-12)


def test_central_pieces_nest():
    w = [central_piece_halfwidth(REF_C, REF_N, k) for k in range(5)]
    assert all(a > b for a, b in zip(w, w[1:]))


def test_return_counts(returns, oracle):
    assert returns.counts_by_time() == RETURN_COUNTS
    ret, _ = oracle
    assert Counter(r[0] for r in ret) == Counter(RETURN_COUNTS)
    assert returns.complete_up_to == 20


def test_returns_match_oracle_endpoints(returns, oracle):
    ret, _ = oracle
    mine = sorted(zip(returns.left, returns.right))
    theirs = sorted((r[1], r[2]) for r in ret)
    for (a, b), (c, d) in zip(mine, theirs):
        assert a == pytest.approx(c, abs=1e-15) and b == pytest.approx(d, abs=1e-15)


def test_branches_disjoint_and_inside(returns):
    order = np.argsort(returns.left)
    lo, hi = returns.left[order], returns.right[order]
    assert np.all(hi[:-1] <= lo[1:] + 1e-15)
    v = returns.V_trace.right
    assert np.all(lo >= -v - 1e-12) and np.all(hi <= v + 1e-12)


def test_onto_v(returns):
    assert onto_residual(returns) < 1e-9


def test_level_bound(returns):
    slack = returns.times - (REF_N + 3 * returns.levels + 1)
    assert slack.min() >= 0


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_short_return_at_each_level(returns, k):
    m = REF_N + 3 * k + 3
    assert np.any((returns.times == m) & (returns.levels == k))


def test_exponential_shrinking(returns):
    assert returns.decay_rate() > 0
    d = returns.diameters_by_time()
    assert d[20] < d[11]


def test_peierls_fixture(landings):
    chi = cantor_data(REF_C).chi_crit
    assert len(landings) == 511546
    assert peierls_margin(landings, chi) == pytest.approx(PEIERLS, abs=1e-6)


def test_peierls_matches_scalar_oracle(landings):
    chi = cantor_data(REF_C).chi_crit
    v = v_trace(REF_C, REF_N).right
    _, land = scalar_pullback(REF_C, v, 18)
    want = min(d - (chi / 2 + UPSILON) * m for m, _, _, d, _ in land)
    assert peierls_margin(landings, chi) == pytest.approx(want, abs=1e-12)


def test_peierls_needs_landings(returns):
    with pytest.raises(DomainError):
        peierls_margin(returns, 0.7)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 6), st.floats(-4, 1))
def test_partition_enclosure_ordering(returns, t, p):
    zs = {u: log_partition(returns, t, p, u) for u in ("sup", "mid", "inf")}
    assert zs["sup"] <= zs["mid"] <= zs["inf"]
    for u in zs:
        assert log_partition(returns, t, p + 0.1, u) < zs[u]


def test_partition_log2_form(returns):
    z = partition_function(returns, 1.0, 0.0, "mid")
    assert float(z) * math.log(2) == pytest.approx(log_partition(returns, 1.0, 0.0, "mid"))


@pytest.mark.parametrize("t", [1, 2, 4, 8])
def test_bowen_fixture(returns, t):
    b = bowen_pressure(returns, t)
    assert b.width < 1e-6
    lo, hi = b.enclosure_at_mid
    assert lo <= 0 <= hi
    assert b.root_sup <= b.mid <= b.root_inf
    assert b.mid == pytest.approx(BOWEN[t], abs=1e-6)


@pytest.mark.parametrize("t", [1, 2, 4])
def test_bowen_against_scalar_oracle(oracle, t):
    ret, _ = oracle
    m = np.array([r[0] for r in ret], float)
    dz = np.array([r[4] for r in ret])
    root = brentq(lambda p: logsumexp(-p * m - t * dz), -20, 5, xtol=1e-13)
    assert root == pytest.approx(BOWEN[t], abs=1e-8)


def test_bowen_nonincreasing(returns):
    ps = [bowen_pressure(returns, t).mid for t in (0, 0.5, 1, 2, 4, 8)]
    assert all(a >= b - 1e-9 for a, b in zip(ps, ps[1:]))


def test_bowen_truncation_at_zero(returns):
    # the truncated sum underestimates log 2 at t = 0
    b = bowen_pressure(returns, 0)
    assert 0.3 < b.mid < math.log(2)


@pytest.mark.parametrize("t", [0, 0.5, 1, 2])
def test_circle_map_pressure(t):
    assert preimage_pressure(QuadraticMap.standard(0), t, 20) == pytest.approx((1 - t) * math.log(2), abs=5e-3)


@pytest.mark.parametrize("c", [0, -1, -2, -1.5, REF_C, complex(0.25, 0.3)])
def test_pressure_zero_temperature_is_log2(c):
    assert preimage_pressure(QuadraticMap.standard(c), 0, 12) == pytest.approx(math.log(2), abs=1e-6)


def test_preimage_pressure_deformed():
    F = build_deformation(-2.0)
    assert preimage_pressure(F, 0, 10) == pytest.approx(math.log(2), abs=1e-6)


def test_preimage_pressure_deformed_newton_failure():
    with pytest.raises(NoConvergence):
        preimage_pressure(build_deformation(-1.9995), 1, 10)


def test_chebyshev_pressure():
    # for z^2 - 2 the pressure is (1 - t) log 2 when t >= -1; the preimage
    # estimate at depth 16 is within a few hundredths of it
    for t in (0.5, 1, 2):
        got = preimage_pressure(QuadraticMap.standard(-2), t, 16)
        assert got == pytest.approx((1 - t) * math.log(2), abs=0.05)


def test_postcritical_zero_temperature():
    s = postcritical_series(REF_C, REF_N, 0, 0, 10)
    assert s.terms_used == 11
    assert not s.certified
    assert s.log_terms == [0.0] * 11


def test_postcritical_converges_with_positive_p():
    s = postcritical_series(REF_C, REF_N, 1, 0.3, 12)
    assert s.certified
    assert math.isfinite(float(s.tail_bound.log2_value))


def test_postcritical_bracket_recorded():
    r = postcritical_bracket(REF_C, REF_N, 1.0, 0.1, 6)
    assert r["all_within"]
    assert len(r["rows"]) == 7


@pytest.mark.parametrize("t", [2, 8])
def test_gibbs_fixture(returns, t):
    rep = gibbs_mass_report(returns, t, BOWEN[t])
    for k, v in GIBBS[t].items():
        assert rep[k] == pytest.approx(v, abs=1e-6)
    assert rep["total_weight"] == pytest.approx(1.0)


def test_gibbs_concentrates(returns):
    lo = gibbs_mass_report(returns, 2, BOWEN[2])["mass_O_plus_or_minus"]
    hi = gibbs_mass_report(returns, 8, BOWEN[8])["mass_O_plus_or_minus"]
    assert hi > lo


@pytest.mark.parametrize("t", [2, 8])
def test_gibbs_against_loop_oracle(oracle, t):
    ret, _ = oracle
    cd = cantor_data(REF_C)

    def orbit(x, n):
        out = [x]
        for _ in range(n - 1):
            out.append(out[-1] ** 2 + REF_C)
        return out

    pm = orbit(cd.p_plus, 3) + orbit(cd.p_minus, 6)
    logw = [-BOWEN[t] * m - t * dz for m, _, _, _, dz in ret]
    top = max(logw)
    w = [math.exp(x - top) for x in logw]
    total = sum(w)
    mass = 0.0
    for (m, lo, hi, _, _), wi in zip(ret, w):
        x = 0.5 * (lo + hi)
        for _ in range(m):
            if min(abs(x - y) for y in pm) < 0.05:
                mass += wi / total / m
            x = x * x + REF_C
    assert mass == pytest.approx(GIBBS[t]["mass_O_plus_or_minus"], abs=1e-9)


def test_enumeration_requires_membership():
    with pytest.raises(DomainError):
        enumerate_return_branches(-2.0, REF_N, 12)
    with pytest.raises(DomainError):
        enumerate_return_branches(build_deformation(-2.0), REF_N, 12)
