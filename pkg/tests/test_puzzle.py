import math

import gmpy2
import pytest
from hypothesis import given, settings, strategies as st

from zerotemp.errors import DomainError
from zerotemp.puzzle import (cantor_data, cantor_traces, central_trace, critical_itinerary,
                             critical_orbit_mp, find_parameter_bracket, kn_membership,
                             ordering_holds, pullback, real_preimages)

from conftest import REF_C, REF_N


def test_central_trace_chebyshev():
    tr = central_trace(-2)
    assert tr.left == pytest.approx(-1, abs=1e-15)
    assert tr.right == pytest.approx(1, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2.0, -0.76))
def test_central_trace_is_alpha_pair(c):
    alpha = (1 - math.sqrt(1 - 4 * c)) / 2
    tr = central_trace(c)
    assert tr.left == pytest.approx(alpha, abs=1e-12)
    assert tr.right == pytest.approx(-alpha, abs=1e-12)


def test_central_trace_outside_slice():
    with pytest.raises(DomainError):
        central_trace(0.0)


def test_real_preimages_count_and_images():
    parts = real_preimages((-1.0, 1.0), -2.0)
    assert len(parts) == 2
    for a, b in parts:
        assert sorted([a * a - 2, b * b - 2]) == pytest.approx([-1, 1])


def test_pullback_doubles_at_chebyshev():
    for d in range(1, 5):
        assert len(pullback((-1.0, 1.0), -2.0, d)) == 2 ** d


def test_cantor_data_chebyshev():
    cd = cantor_data(-2.0)
    assert cd.theta == pytest.approx(1.0, abs=1e-12)
    # g = f^3 at c = -2 is conjugate to the tripling map; multipliers are 8 and 64
    assert cd.mult_p_plus == pytest.approx(8, rel=1e-10)
    assert cd.mult_p_minus_sq == pytest.approx(64, rel=1e-10)
    assert cd.Y.disjoint(cd.Y_tilde)


def test_cantor_data_reference():
    cd = cantor_data(REF_C)
    assert cd.Y.left <= cd.p <= cd.Y.right
    assert cd.Y_tilde.left <= cd.p_plus <= cd.Y_tilde.right
    assert cd.chi_crit == pytest.approx(math.log(cd.mult_p_plus) / 3)
    assert cd.chi_crit == pytest.approx(0.6930734036067898, abs=1e-12)


def test_itinerary_rejects_chebyshev():
    with pytest.raises(DomainError):
        critical_itinerary(-2.0, REF_N, 6)


@pytest.mark.parametrize("c", [-2.0, 0.0])
def test_membership_fails(c):
    assert not kn_membership(c, REF_N)["passed"]


def test_membership_reference():
    rep = kn_membership(REF_C, REF_N)
    assert rep["passed"] and rep["ordering"] and rep["confinement"]


def test_reference_itinerary_all_zero():
    it = critical_itinerary(REF_C, REF_N, 6)
    assert it.symbols == [0] * 6
    assert it.certified_steps == 6


def mp_orbit(c, length, prec=400):
    with gmpy2.context(precision=prec):
        x, out = gmpy2.mpfr(0), []
        cc = gmpy2.mpfr(c)
        for _ in range(length + 1):
            out.append(float(x))
            x = x * x + cc
    return out


def test_critical_orbit_mp_matches_independent_iteration():
    a = critical_orbit_mp(REF_C, 26)
    b = mp_orbit(REF_C, 26)
    # the two may index from 0 or from c; align on the critical value
    off = 0 if abs(a[0]) < 1e-300 else 1
    for x, y in zip(a, b[off:]):
        assert x == pytest.approx(y, abs=1e-12)


def test_ordering_on_reference():
    assert ordering_holds(critical_orbit_mp(REF_C, 30), REF_N)


def test_reference_orbit_in_Y():
    # independent check of the found parameter: f^{n+3k}(c) lands in Y for six steps
    Y, _ = cantor_traces(REF_C)
    orbit = mp_orbit(REF_C, REF_N + 20)
    for k in range(6):
        x = orbit[REF_N + 3 * k + 1]
        assert Y.left < x < Y.right


@settings(max_examples=4, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=2, max_size=3))
def test_find_parameter_realizes_prefix(prefix):
    b = find_parameter_bracket(REF_N, prefix)
    assert b.width < 1e-13
    assert critical_itinerary(b.mid, REF_N, len(prefix)).symbols == prefix
    assert kn_membership(b.mid, REF_N, k_max=len(prefix))["passed"]
