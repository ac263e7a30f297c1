"""
Real traces of puzzle pieces, the Cantor set data of ``g = f**3`` in the
central piece, critical itineraries and the parameter search by itinerary.

Everything here lives on the real line.  Traces are open intervals whose
endpoints are real preimages of ``alpha`` (or ``-alpha``); they are obtained
by explicit square roots, which is exact up to rounding for ``z**2 + c``.

Critical orbits are iterated in MPFR (128 bits by default) because the
parameter sets of interest are thinner than ``1e-10`` while the orbit
expands by a factor up to 4 per step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import gmpy2
import numpy as np
from scipy.optimize import brentq

from .dynamics import QuadraticMap, fixed_points, refine_periodic_orbit, trace_external_ray
from .errors import BracketExhausted, DomainError

MEMBERSHIP_TOL = 1e-9
ORBIT_PRECISION = 128
GAMMA_ANGLE = Fraction(7, 24)
SCAN_POINTS = 4096


@dataclass(frozen=True)
class RealTrace:
    left: float
    right: float

    def __post_init__(self):
        if not self.left < self.right:
            raise DomainError(f"empty trace ({self.left}, {self.right})")

    @property
    def width(self) -> float:
        return self.right - self.left

    @property
    def mid(self) -> float:
        return 0.5 * (self.left + self.right)

    def __contains__(self, x) -> bool:
        return self.left < x < self.right

    def contains_trace(self, other: "RealTrace", slack: float = 0.0) -> bool:
        return self.left - slack <= other.left and other.right <= self.right + slack

    def disjoint(self, other: "RealTrace") -> bool:
        return self.right <= other.left or other.right <= self.left

    def distance(self, x) -> float:
        """Distance from ``x`` to the closed interval."""
        if x < self.left:
            return self.left - x
        if x > self.right:
            return x - self.right
        return 0.0

    def boundary_distance(self, x) -> float:
        return min(abs(x - self.left), abs(x - self.right))


@dataclass
class CantorData:
    c: float
    Y: RealTrace
    Y_tilde: RealTrace
    p: float
    p_plus: float
    p_minus: float
    mult_p: float
    mult_p_plus: float
    mult_p_minus_sq: float
    theta: float
    xi: float
    delta2: float = 2.0
    gamma: Optional[float] = None
    used_fallback: bool = False
    notes: List[str] = field(default_factory=list)

    @property
    def chi_crit(self) -> float:
        """``(1/3) log|Dg(p+)|``, the critical Lyapunov exponent for compatible itineraries."""
        return math.log(self.mult_p_plus) / 3


@dataclass
class ItineraryPrefix:
    symbols: List[int]
    n: int
    certified_steps: int
    points: List[float] = field(default_factory=list)


@dataclass
class ParameterBracket:
    n: int
    lo: float
    hi: float
    target_prefix: List[int]
    padded_prefix: List[int] = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def _alpha(c: float) -> float:
    s = math.sqrt(1 - 4 * c)
    return c / ((1 + s) / 2)


def central_trace(c: float) -> RealTrace:
    """Real trace ``(alpha, -alpha)`` of the central piece of depth 1."""
    if not -2.0 <= c < -0.75:
        raise DomainError(f"c={c} outside the real slice (-2, -3/4)")
    a = _alpha(c)
    return RealTrace(a, -a)


def real_preimages(interval, c: float) -> list:
    """Real components of ``f_c^{-1}((a, b))`` as ``(lo, hi)`` tuples.

    A single component is returned when the interval contains ``c``; it then
    contains the critical point.
    """
    a, b = interval
    if b <= c:
        return []
    hi = math.sqrt(b - c)
    if a <= c:
        return [(-hi, hi)]
    lo = math.sqrt(a - c)
    return [(-hi, -lo), (lo, hi)]


def pullback(interval, c: float, depth: int) -> list:
    comps = [tuple(interval)]
    for _ in range(depth):
        comps = [q for iv in comps for q in real_preimages(iv, c)]
    return comps


def cantor_traces(c: float):
    """The two components of ``f^-3(P_1(0))`` inside ``P_1(0)``, left one first."""
    ct = central_trace(c)
    inside = [iv for iv in pullback((ct.left, ct.right), c, 3)
              if ct.left < iv[0] and iv[1] < ct.right]
    if len(inside) != 2:
        raise DomainError(f"expected 2 components of f^-3(P_1(0)) in P_1(0), got {len(inside)}")
    inside.sort()
    return RealTrace(*inside[0]), RealTrace(*inside[1])


def _g(c):
    return lambda x: ((x * x + c) ** 2 + c) ** 2 + c


def _fixed_in(h, tr: RealTrace) -> float:
    return brentq(lambda x: h(x) - x, tr.left, tr.right, xtol=1e-15)


def cantor_data(c: float, delta2: float = 2.0, use_ray: bool = True) -> CantorData:
    """Cantor-set data ``Y, Y~, p, p+, p-`` and the multiplier ratio ``theta``.

    ``Y`` is the component adjacent to the landing point of the ray of angle
    7/24.  Without a certified landing the component whose ``g``-fixed point
    has the larger multiplier is taken and the result is flagged.
    """
    if delta2 <= 1:
        raise DomainError("delta2 must exceed 1")
    c = float(c)
    A, B = cantor_traces(c)
    f = QuadraticMap.standard(c)
    g = _g(c)
    notes = []

    def fixed_and_mult(tr):
        x0 = _fixed_in(g, tr)
        orb = refine_periodic_orbit(f, x0, 3)
        x = orb[0].real if isinstance(orb[0], complex) else orb[0]
        return x, abs(8 * orb[0] * orb[1] * orb[2])

    pA, mA = fixed_and_mult(A)
    pB, mB = fixed_and_mult(B)
    gamma, used_fallback = None, False
    first_is_Y = None
    if use_ray:
        ray = trace_external_ray(f, GAMMA_ANGLE)
        if ray.landing_certified:
            gamma = ray.landing_point.real
            dA, dB = A.distance(gamma), B.distance(gamma)
            if min(dA, dB) < 1e-6:
                first_is_Y = dA < dB
            else:
                notes.append(f"ray 7/24 lands at {gamma:.6g}, away from both components")
        else:
            notes.append("ray 7/24 landing not certified: " + ray.diagnostic)
    if first_is_Y is None:
        used_fallback = True
        first_is_Y = mA >= mB
    Y, Yt = (A, B) if first_is_Y else (B, A)
    p, mp, pp, mpp = (pA, mA, pB, mB) if first_is_Y else (pB, mB, pA, mA)

    # p-: period 2 for g, in Y~ with g(p-) in Y
    lo = brentq(lambda x: g(x) - Y.left, Yt.left, Yt.right, xtol=1e-16)
    hi = brentq(lambda x: g(x) - Y.right, Yt.left, Yt.right, xtol=1e-16)
    sub = RealTrace(min(lo, hi), max(lo, hi))
    x0 = brentq(lambda x: g(g(x)) - x, sub.left, sub.right, xtol=1e-16)
    orb = refine_periodic_orbit(f, x0, 6)
    pm = orb[0]
    m2 = abs(math.prod(2 * z for z in orb))
    theta = math.sqrt(mp / mpp)
    xi = math.log(delta2) / (2 * math.log(theta)) if theta > 1 else math.inf
    return CantorData(c, Y, Yt, p, pp, pm, mp, mpp, m2, theta, xi, delta2, gamma, used_fallback, notes)


# -- critical orbit -----------------------------------------------------------

def critical_orbit_mp(c, length: int, precision: int = ORBIT_PRECISION) -> list:
    """``[c, f(c), ..., f^length(c)]`` computed in MPFR, returned as floats."""
    with gmpy2.context(gmpy2.get_context(), precision=precision):
        cc = gmpy2.mpfr(c)
        x = cc
        out = [float(x)]
        for _ in range(length):
            x = x * x + cc
            out.append(float(x))
    return out


def ordering_holds(orbit: Sequence[float], n: int) -> bool:
    """``f(c) > f^2(c) > ... > f^{n-1}(c) > 0`` on a precomputed orbit."""
    chain = orbit[1:n]
    return all(chain[i] > chain[i + 1] for i in range(len(chain) - 1)) and chain[-1] > 0


def _classify(x, Y: RealTrace, Yt: RealTrace, tol: float):
    """Return (symbol, certified)."""
    if x in Y:
        return 0, Y.boundary_distance(x) >= tol
    if x in Yt:
        return 1, Yt.boundary_distance(x) >= tol
    return (0 if abs(x - Y.mid) < abs(x - Yt.mid) else 1), False


def _traces_for(c, cd: Optional[CantorData]):
    if cd is not None:
        return cd.Y, cd.Y_tilde
    # left component is Y near c = -2 (ray 7/24 lands on the negative side)
    return cantor_traces(c)


def critical_itinerary(c: float, n: int, k_max: int, cd: Optional[CantorData] = None,
                       tol: float = MEMBERSHIP_TOL) -> ItineraryPrefix:
    """Symbols of ``f^{n+3k}(c)`` in ``Y`` (0) or ``Y~`` (1) for ``k < k_max``.

    Raises ``DomainError`` if the ordering clause of ``K_n`` fails.
    """
    orbit = critical_orbit_mp(c, n + 3 * max(k_max - 1, 0))
    if not ordering_holds(orbit, n):
        raise DomainError(f"K_n ordering fails at c={c!r}, n={n}")
    Y, Yt = _traces_for(c, cd)
    symbols, pts = [], []
    certified = 0
    broken = False
    for k in range(k_max):
        x = orbit[n + 3 * k]
        s, ok = _classify(x, Y, Yt, tol)
        symbols.append(s)
        pts.append(x)
        if ok and not broken:
            certified += 1
        else:
            broken = True
    return ItineraryPrefix(symbols, n, certified, pts)


def kn_membership(c: float, n: int, k_max: int = 6, tol: float = MEMBERSHIP_TOL) -> dict:
    """Clause-by-clause report for membership of ``c`` in ``K_n``.

    Confinement of ``f^{n+3k}(c)`` in ``Y`` or ``Y~`` for ``k < k_max``
    stands in for membership in the Cantor set.
    """
    if n < 3:
        raise DomainError("n must be at least 3")
    report = {"c": c, "n": n, "k_max": k_max, "tolerance": tol}
    try:
        ct = central_trace(c)
    except DomainError as e:
        report.update(ordering=False, confinement=False, passed=False, reason=str(e))
        return report
    orbit = critical_orbit_mp(c, n + 3 * max(k_max - 1, 0))
    report["ordering"] = ordering_holds(orbit, n)
    try:
        Y, Yt = cantor_traces(c)
    except DomainError as e:
        report.update(confinement=False, passed=False, reason=str(e))
        return report
    confined = []
    for k in range(k_max):
        x = orbit[n + 3 * k]
        _, ok = _classify(x, Y, Yt, tol)
        confined.append(bool(ok))
    report["confinement"] = all(confined)
    report["confined_steps"] = confined
    report["central_trace"] = (ct.left, ct.right)
    report["passed"] = report["ordering"] and report["confinement"]
    return report


# -- parameter search -----------------------------------------------------------

def _match_length(c: float, n: int, target: Sequence[int], tol: float) -> int:
    """Leading certified symbols of the itinerary that agree with ``target``.

    -1 when the ordering clause fails or the traces are undefined.
    """
    try:
        Y, Yt = cantor_traces(c)
    except DomainError:
        return -1
    orbit = critical_orbit_mp(c, n + 3 * max(len(target) - 1, 0))
    if not ordering_holds(orbit, n):
        return -1
    m = 0
    for k, want in enumerate(target):
        s, ok = _classify(orbit[n + 3 * k], Y, Yt, tol)
        if not ok or s != want:
            break
        m += 1
    return m


def _runs(mask):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    splits = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[splits + 1]))
    ends = np.concatenate((idx[splits], [idx[-1]]))
    return list(zip(starts.tolist(), ends.tolist()))


def _edge(n, target, tol, good, bad):
    """Bisect between a matching ``good`` and a non-matching ``bad`` parameter."""
    L = len(target)
    while True:
        mid = 0.5 * (good + bad)
        if mid == good or mid == bad:
            return good
        if _match_length(mid, n, target, tol) >= L:
            good = mid
        else:
            bad = mid


def find_parameter_bracket(n: int, target_prefix: Sequence[int], depth: Optional[int] = None,
                           width_goal: float = 1e-13, tol: float = MEMBERSHIP_TOL,
                           max_depth: int = 40) -> ParameterBracket:
    """Locate the parameter cylinder of ``K_n`` with the given itinerary prefix.

    Scan-then-bisect: a log-spaced scan of ``c + 2`` finds where the first
    symbol matches, then each further symbol is located by a uniform grid of
    4096 points over the current bracket.  Once the whole prefix matches,
    the cylinder edges are bisected.  If the cylinder is still wider than
    ``width_goal`` the prefix is extended by zeros.
    """
    target = [int(s) for s in target_prefix]
    depth = len(target) if depth is None else depth
    if n < 6:
        raise DomainError("n must be at least 6")
    if depth != len(target) or not 1 <= depth <= max_depth:
        raise DomainError("depth must equal len(target_prefix) and lie in [1, 40]")
    scanned = []
    deltas = np.geomspace(1e-15, 0.25, 20000)
    grid = -2.0 + deltas
    hits = np.array([_match_length(c, n, target[:1], tol) >= 1 for c in grid])
    runs = _runs(hits)
    scanned.append((float(grid[0]), float(grid[-1])))
    if not runs:
        raise BracketExhausted("no parameter with the first symbol found", scanned)
    i0, i1 = runs[0]            # closest to -2
    lo, hi = float(grid[max(i0 - 1, 0)]), float(grid[min(i1 + 1, grid.size - 1)])
    work = list(target)
    level = 1
    while True:
        while level < len(work):
            cs = np.linspace(lo, hi, SCAN_POINTS)
            ok = np.array([_match_length(c, n, work[: level + 1], tol) >= level + 1 for c in cs])
            runs = _runs(ok)
            scanned.append((lo, hi))
            if not runs:
                raise BracketExhausted(f"symbol {level} not found in [{lo!r}, {hi!r}]", scanned)
            i0, i1 = runs[0]
            lo, hi = float(cs[max(i0 - 1, 0)]), float(cs[min(i1 + 1, SCAN_POINTS - 1)])
            good_lo, good_hi = float(cs[i0]), float(cs[i1])
            level += 1
        if len(work) == 1:
            cs = np.linspace(lo, hi, SCAN_POINTS)
            ok = np.array([_match_length(c, n, work, tol) >= 1 for c in cs])
            i0, i1 = _runs(ok)[0]
            good_lo, good_hi = float(cs[i0]), float(cs[i1])
        left = _edge(n, work, tol, good_lo, lo)
        right = _edge(n, work, tol, good_hi, hi)
        if right - left < width_goal or len(work) >= max_depth:
            return ParameterBracket(n, left, right, target, work)
        lo, hi = lo, hi
        work = work + [0]


def find_parameter(n: int, target_prefix: Sequence[int], depth: Optional[int] = None, **kw) -> float:
    """Midpoint of :func:`find_parameter_bracket`."""
    return find_parameter_bracket(n, target_prefix, depth, **kw).mid
