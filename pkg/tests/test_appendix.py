from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr
from hypothesis import assume, given, settings, strategies as st

from zerotemp.appendix import (PartitionScheme, block_counters, block_sums, brute_force_block,
                               brute_force_oracle, lambda_of_s, partition_endpoints,
                               series_totals, verify_appendix_lemmas)
from zerotemp.errors import DomainError, PrecisionExhausted

S200 = PartitionScheme(Fraction(1), 3, 200)
ORACLE = PartitionScheme.oracle(2, 0.4)


def test_scheme_invariants():
    for xi in (Fraction(1, 2), 1, 2):
        sc = PartitionScheme.standard(xi)
        assert sc.Xi - 2 * sc.xi >= 1
        assert sc.q == 50 * (sc.Xi + 1)
    with pytest.raises(DomainError):
        PartitionScheme(Fraction(1), 3, 100)
    with pytest.raises(DomainError):
        PartitionScheme(Fraction(1), 4, 250)
    assert ORACLE.xi == Fraction(2, 5)


def test_endpoints_examples():
    a, b, nI, _ = partition_endpoints(PartitionScheme(Fraction(1, 2), 2, 150, "oracle"), 0)
    assert (a, b, nI) == (1, 1 + 152, 152)
    a, b, nI, nJ = partition_endpoints(PartitionScheme(Fraction(1, 2), 2, 100, "oracle"), 0)
    assert (a, b, nI) == (1, 103, 102)
    a, b, _, _ = partition_endpoints(S200, 1)
    assert a == 2 ** 200 and b == 2 ** 200 + 603
    for s in range(4):
        a, b, nI, nJ = partition_endpoints(S200, s)
        assert nJ == 2 ** (200 * (s + 1) ** 3) - 2 ** (200 * s ** 3) - 200 * (2 * s + 1) - 3


def counters_by_walk(scheme, k_max):
    # N and B by walking the blocks in order; independent of the closed forms
    N, out, k, s = 0, [(0, 0)], 1, 0
    while k <= k_max:
        a, b, _, _ = partition_endpoints(scheme, s)
        a1 = partition_endpoints(scheme, s + 1)[0]
        while k < b and k <= k_max:
            N += 1
            out.append((N, 2 * s + 1))
            k += 1
        while k < a1 and k <= k_max:
            out.append((N, 2 * s + 2))
            k += 1
        s += 1
    return out


def test_counters_match_walk():
    sc = PartitionScheme(Fraction(1, 2), 2, 3, "oracle")
    walk = counters_by_walk(sc, 600)
    for k in range(601):
        assert block_counters(sc, k) == walk[k]


def test_counter_examples():
    _, b, _, _ = partition_endpoints(S200, 0)
    assert block_counters(S200, b) == (203, 2)
    assert block_counters(S200, 2 ** 199) == (203, 2)
    assert block_counters(S200, 1) == (1, 1)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 2 ** 1700))
def test_counter_properties(k):
    N, B = block_counters(S200, k)
    N1, _ = block_counters(S200, k + 1)
    assert N1 - N in (0, 1)
    assert B <= 2 * N + 1


@pytest.mark.parametrize("s", [1, 2, 3])
def test_N_small_at_block_ends(s):
    a1 = partition_endpoints(S200, s + 1)[0]
    N, _ = block_counters(S200, a1)
    # N(a)/a < 2^(-q/2), exact integer form
    assert N * 2 ** (S200.q // 2) < a1


def test_lambda_examples():
    lam0 = lambda_of_s(S200, 0).to_interval()
    with gmpy2.context(precision=600):
        exact = 1 / (mpfr(2) ** 200 - 204)
    assert lam0.lo <= exact <= lam0.hi
    lo, hi = lambda_of_s(S200, 1).as_floats()
    assert abs(lo + 1600) < 1e-6 and abs(hi + 1600) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.fractions(0, 8), st.fractions(0, 8))
def test_lambda_decreasing(s1, s2):
    assume(s1 < s2)
    assert lambda_of_s(S200, s2).hi.log2_value < lambda_of_s(S200, s1).lo.log2_value


def test_lambda_zero_gives_block_length():
    s, tau = 1, Fraction(1)
    bs = block_sums(S200, s, tau, 0)
    _, _, _, nJ = partition_endpoints(S200, s)
    # undo the constant prefactor of J+
    e = -(200 * tau * (s + 1) ** 2) - (S200.Xi - 2 * S200.xi) * tau * (s + 1)
    lo, hi = bs.J_plus.as_floats()
    assert lo - e <= 1600 + 1e-9 and hi - e >= 1600 - 1e-9
    assert bs.intervals["J_plus"].lo <= mpfr(nJ) * gmpy2.exp2(mpfr(e)) <= bs.intervals["J_plus"].hi


def direct_block(scheme, s, tau, lam, prec=320):
    """I and J block sums term by term straight from the definition."""
    q, Xi, xi = scheme.q, scheme.Xi, scheme.xi
    a, b, nI, nJ = partition_endpoints(scheme, s)
    with gmpy2.context(precision=prec):
        T, L, X = mpfr(Fraction(tau)), mpfr(Fraction(lam)), mpfr(xi)
        out = dict.fromkeys(("I_plus", "I_minus", "J_plus", "J_minus"), mpfr(0))
        for k in range(a, b):
            N = k - (a - 1) + q * s * s + Xi * s
            for sg, name in ((1, "I_plus"), (-1, "I_minus")):
                out[name] += gmpy2.exp2(-L * k - T * N + sg * T * X * (2 * s + 1))
        N = q * (s + 1) ** 2 + Xi * (s + 1)
        for k in range(b, b + max(nJ, 0)):
            for sg, name in ((1, "J_plus"), (-1, "J_minus")):
                out[name] += gmpy2.exp2(-L * k - T * N + sg * T * X * (2 * s + 2))
    return out


@pytest.mark.parametrize("tau", [Fraction(1, 2), 1, 2])
@pytest.mark.parametrize("lam", [0, Fraction(1, 2), 1])
def test_closed_form_matches_direct_sum(tau, lam):
    for s in (0, 1):
        bs = block_sums(ORACLE, s, tau, lam)
        want = direct_block(ORACLE, s, tau, lam)
        for name, w in want.items():
            iv = bs.intervals[name]
            if w == 0:
                assert iv.hi == 0
                continue
            assert abs(float((iv.mid - w) / w)) < 1e-20


def test_library_brute_force_agrees_with_closed_form():
    for s in (0, 1):
        bs = block_sums(ORACLE, s, 1, Fraction(1, 2))
        bf = brute_force_block(ORACLE, s, 1, Fraction(1, 2))
        for name, iv in bf.items():
            ref = bs.intervals[name]
            if iv.hi == 0:
                continue
            assert abs(float((iv.mid - ref.mid) / ref.mid)) < 1e-20


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 6), st.fractions(Fraction(1, 10), 60), st.fractions(0, 4))
def test_sign_monotonicity(s, tau, lam):
    a = partition_endpoints(S200, s)[0]
    if lam * a >= 2 ** 240:
        # log2 of the sum is about -lam a_s; 256 bits cannot resolve it to 2^-8
        with pytest.raises(PrecisionExhausted):
            block_sums(S200, s, tau, lam)
        return
    bs = block_sums(S200, s, tau, lam)
    iv = bs.intervals
    assert iv["I_minus"].hi <= iv["I_plus"].hi
    assert iv["J_minus"].hi <= iv["J_plus"].hi
    assert iv["hatJ_minus"].hi <= iv["hatJ_plus"].hi
    for name in iv:
        assert iv[name].lo >= 0


def test_oracle_degenerate_limit():
    r = brute_force_oracle(ORACLE, 0, 0, 50)
    assert r.interval.contains(51)


def test_oracle_precision_doubling():
    a = brute_force_oracle(ORACLE, 1, Fraction(1, 2), 200, precision_bits=128).interval.mid
    b = brute_force_oracle(ORACLE, 1, Fraction(1, 2), 200, precision_bits=256).interval.mid
    assert abs(float((a - b) / b)) < 2.0 ** -(128 - 16)


def test_oracle_partial_flag():
    assert brute_force_oracle(ORACLE, 1, 1, 2).partial
    assert not brute_force_oracle(ORACLE, 1, 1, 3).partial  # k_max + 1 = a_1 = 4


def test_series_totals_examples():
    tot = series_totals(S200, 4, 8)
    assert tot.certified
    enc = tot.enclosures()
    lo, hi = enc["pi_plus"].as_floats()
    assert hi - lo < 2.0 ** -40
    assert tot.pi_minus.hi <= tot.pi_plus.hi
    assert tot.pi_minus.lo >= 1 and tot.pi_plus.lo >= 1


@settings(max_examples=20, deadline=None)
@given(st.fractions(1, 30), st.fractions(Fraction(1, 100), 4))
def test_series_totals_ordering(tau, lam):
    tot = series_totals(S200, tau, lam)
    assert tot.pi_minus.lo <= tot.pi_plus.hi
    assert tot.pi_minus.lo >= 1


def test_series_totals_short_cutoff_rejected():
    with pytest.raises(DomainError):
        series_totals(S200, 10, 1, s_max=3)


def test_itinerary_lemma_example():
    rep = verify_appendix_lemmas(S200 if S200.q >= 200 else S200, tau_grid=())
    first = [c for c in rep["checks"] if c["name"] == "itinerary(a)" and c["s"] == 0][0]
    assert first["passed"]
    assert 203 <= 2 ** 199


def test_first_floor_at_fifty():
    rep = verify_appendix_lemmas(PartitionScheme.standard(1), tau_grid=(50,), s_grid=())
    ff = {c["name"]: c for c in rep["checks"] if c["name"].startswith("first_floor")}
    assert ff["first_floor.1"]["passed"] and ff["first_floor.1"]["log2_margin"] > 0
    # Pi-(50, lam(50)) >= 2^2500
    assert ff["first_floor.2"]["passed"] and ff["first_floor.2"]["log2_margin"] > 0


def test_lemma_mode_required():
    with pytest.raises(DomainError):
        verify_appendix_lemmas(ORACLE)
