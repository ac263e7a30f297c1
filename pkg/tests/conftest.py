import math

import pytest

from zerotemp.pressure import enumerate_landing_branches, enumerate_return_branches

# n = 8, critical itinerary starts with six 0s; found by find_parameter(8, [0]*6)
REF_C = -1.9999262330250573
REF_N = 8


@pytest.fixture(scope="session")
def ref_c():
    return REF_C


@pytest.fixture(scope="session")
def returns():
    return enumerate_return_branches(REF_C, REF_N, 20)


@pytest.fixture(scope="session")
def landings():
    return enumerate_landing_branches(REF_C, REF_N, 18)


def scalar_pullback(c, v, time_cap, delta3=1.5):
    """Depth-first pullback of [-v, v] with plain floats.

    Independent of the vectorized tree: returns two lists of
    (m, lo, hi, min log|Df^m| over the ends and the preimage of 0 less
    log delta3, log|Df^m| at the preimage of 0).
    """
    ret, land = [], []
    tol = 1e-12

    def go(lo, hi, z0, dlo, dhi, dz, m):
        if lo < c or m >= time_cap:
            return
        for sgn in (1, -1):
            a, b = math.sqrt(lo - c), math.sqrt(hi - c)
            w = math.sqrt(z0 - c)
            nlo, nhi = (a, b) if sgn > 0 else (-b, -a)
            ndlo = (dlo + math.log(2 * a)) if sgn > 0 else (dhi + math.log(2 * b))
            ndhi = (dhi + math.log(2 * b)) if sgn > 0 else (dlo + math.log(2 * a))
            ndz = dz + math.log(2 * w)
            rec = (m + 1, nlo, nhi, min(ndlo, ndhi, ndz) - math.log(delta3), ndz)
            if nlo >= -v - tol and nhi <= v + tol:
                ret.append(rec)
            elif nhi <= -v + tol or nlo >= v - tol:
                land.append(rec)
                go(nlo, nhi, sgn * w, ndlo, ndhi, ndz, m + 1)

    go(-v, v, 0.0, 0.0, 0.0, 0.0, 0)
    return ret, land


# acceptance lines, printed again in the terminal summary
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
