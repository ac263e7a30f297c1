import cmath
import math
from fractions import Fraction

import gmpy2
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zerotemp.dynamics import (QuadraticMap, boettcher, fixed_points, green_potential,
                               iterate_orbit, lyapunov_exponent, refine_periodic_orbit,
                               trace_external_ray)
from zerotemp.errors import DomainError, OrbitOverflow


def green_oracle(c, z):
    # plain 2^-n log|z_n| at 300 bits, stopped once |z_n| > 1e30 where the
    # remaining correction is below |c| / |z_n|^2
    with gmpy2.context(precision=300):
        x, y = gmpy2.mpfr(z.real), gmpy2.mpfr(z.imag)
        cr, ci = gmpy2.mpfr(c.real), gmpy2.mpfr(c.imag)
        n = 0
        while x * x + y * y < gmpy2.mpfr(10) ** 60:
            x, y = x * x - y * y + cr, 2 * x * y + ci
            n += 1
        return float(gmpy2.log(x * x + y * y) / 2 / gmpy2.mpfr(2) ** n)


def test_orbit_example():
    tr = iterate_orbit(QuadraticMap.standard(0), 2, 3, escape_radius=3)
    assert [p.real for p in tr.points] == [2, 4, 16, 256]
    assert tr.escaped_at == 1
    assert tr.log_abs_derivative_prefix[1] == pytest.approx(math.log(4))


def test_orbit_stops_on_escape():
    tr = iterate_orbit(QuadraticMap.standard(0), 2, 10, escape_radius=3, stop_on_escape=True)
    assert len(tr.points) == 2


def test_orbit_overflow():
    with pytest.raises(OrbitOverflow):
        iterate_orbit(QuadraticMap.standard(0), 10, 40)


def test_orbit_critical_prefix_is_minus_inf():
    tr = iterate_orbit(QuadraticMap.standard(-1), 0, 4)
    assert tr.log_abs_derivative_prefix[1] == -math.inf


def test_green_examples():
    assert green_potential(QuadraticMap.standard(0), 2).value == pytest.approx(math.log(2), abs=1e-12)
    g = green_potential(QuadraticMap.standard(-2), 3)
    assert g.value == pytest.approx(math.log((3 + math.sqrt(5)) / 2), abs=1e-12)
    assert g.error_bound <= 1e-12


def test_green_zero_inside():
    assert green_potential(QuadraticMap.standard(-1), 0.1).value == 0.0


@pytest.mark.parametrize("c", [0, -1, -2, -1.95, complex(-0.12, 0.75)])
def test_green_matches_mp_oracle(c):
    f = QuadraticMap.standard(c)
    rng = np.random.default_rng(7)
    for _ in range(20):
        z = complex(*rng.uniform(-2.5, 2.5, 2))
        g = green_potential(f, z)
        if g.value == 0:
            continue
        assert g.value == pytest.approx(green_oracle(complex(c), z), abs=1e-10)


escaping = st.tuples(st.floats(0.3, 3.0), st.floats(0, 2 * math.pi))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([0, -1, -2, -1.95]), escaping)
def test_green_functional_equation(c, polar):
    f = QuadraticMap.standard(c)
    r, a = polar
    z = cmath.rect(2.1 + r, a)
    g = green_potential(f, z).value
    assert green_potential(f, f(z)).value == pytest.approx(2 * g, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([0, -1, -2, -1.95]), escaping)
def test_boettcher_modulus(c, polar):
    f = QuadraticMap.standard(c)
    r, a = polar
    z = cmath.rect(2.1 + r, a)
    phi = boettcher(f, z)
    assert abs(phi) == pytest.approx(math.exp(green_potential(f, z).value), rel=1e-9)
    # conjugacy phi(f(z)) = phi(z)^2
    assert abs(boettcher(f, f(z)) - phi * phi) <= 1e-8 * abs(phi) ** 2


def test_boettcher_identity_at_zero():
    assert boettcher(QuadraticMap.standard(0), 1.5) == pytest.approx(1.5, abs=1e-14)


def test_boettcher_rejects_filled_julia():
    with pytest.raises(DomainError):
        boettcher(QuadraticMap.standard(-1), 0.0)


@pytest.mark.parametrize("c,angle,land", [
    (-2, Fraction(0), 2.0),
    (-2, Fraction(1, 2), -2.0),
    (0, Fraction(1, 3), cmath.exp(2j * math.pi / 3)),
])
def test_ray_landing(c, angle, land):
    ray = trace_external_ray(QuadraticMap.standard(c), angle)
    assert abs(ray.landing_point - land) < 1e-3


def test_ray_potentials_decrease_and_match():
    f = QuadraticMap.standard(-1)
    ray = trace_external_ray(f, Fraction(1, 3), v_min=1e-4)
    lv = ray.potential_levels
    assert all(a > b for a, b in zip(lv, lv[1:]))
    for z, v in list(zip(ray.vertices, lv))[::10]:
        assert green_potential(f, z).value == pytest.approx(v, rel=1e-6)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 30), st.integers(31, 61))
def test_ray_conjugation_symmetry(p, q):
    f = QuadraticMap.standard(-1.3)
    a = Fraction(p, q)
    r1 = trace_external_ray(f, a, v_min=1e-3)
    r2 = trace_external_ray(f, 1 - a, v_min=1e-3)
    n = min(len(r1.vertices), len(r2.vertices))
    for u, w in zip(r1.vertices[:n], r2.vertices[:n]):
        assert abs(u - w.conjugate()) < 1e-8


@pytest.mark.parametrize("c", [0, -0.75, -2])
def test_fixed_points_closed_form(c):
    fp = fixed_points(QuadraticMap.standard(c))
    s = math.sqrt(1 - 4 * c)
    assert abs(fp.beta - (1 + s) / 2) < 1e-12
    assert abs(fp.alpha - (1 - s) / 2) < 1e-12
    assert abs(fp.beta_multiplier - (1 + s)) < 1e-12


def test_beta_multiplier_at_minus_two():
    assert fixed_points(QuadraticMap.standard(-2)).beta_multiplier.real == pytest.approx(4, abs=1e-12)


def test_fixed_points_degenerate():
    with pytest.raises(DomainError):
        fixed_points(QuadraticMap.standard(0.25))


def test_lyapunov_beta_and_period3():
    f = QuadraticMap.standard(-2)
    assert lyapunov_exponent(f, [2.0]) == pytest.approx(math.log(4), abs=1e-12)
    # at c = -2 every periodic orbit off beta has exponent log 2
    seed = 2 * math.cos(2 * math.pi / 7)
    orbit = refine_periodic_orbit(f, seed, 3)
    assert len(orbit) == 3
    assert lyapunov_exponent(f, orbit) == pytest.approx(math.log(2), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 126))
def test_chebyshev_orbits_have_log2(k):
    # x = 2 cos(2 pi k / 127) has period dividing 7 under z^2 - 2
    f = QuadraticMap.standard(-2)
    orbit = refine_periodic_orbit(f, 2 * math.cos(2 * math.pi * k / 127), 7)
    assert lyapunov_exponent(f, orbit) == pytest.approx(math.log(2), abs=1e-8)


def test_lyapunov_rejects_non_periodic():
    with pytest.raises(DomainError):
        lyapunov_exponent(QuadraticMap.standard(-2), [0.3, 0.5])
