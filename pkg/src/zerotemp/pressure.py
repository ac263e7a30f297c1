"""
First-return and first-landing branches of ``z**2 + c`` to the central
piece ``V = P_{n+1}(0)`` on the real line, with the thermodynamic
quantities built on them.

The pullback tree is grown breadth first with numpy.  Each node is a
component of ``f^{-m}(V)`` reached through pieces disjoint from ``V``;
a node inside ``V`` is a first-return branch and is not expanded further,
a node outside ``V`` is a first-landing branch and is.  Along the way we
carry ``log|Df^m|`` at both endpoints and at the point sent to ``0``.

Only the standard family is supported here; the real preimages of
``z**2 + c`` are explicit square roots, so no Newton step is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .dynamics import QuadraticMap, fixed_points
from .errors import DomainError, NoConvergence, PrecisionExhausted
from .logscalar import LogScalar
from .puzzle import RealTrace, cantor_data, critical_orbit_mp, kn_membership

DELTA3 = 1.5            # distortion margin on a branch
DELTA1 = 2.0
UPSILON = 0.25 * math.log(2)
PULLBACK_TOL = 1e-12
MAX_NODES = 1 << 22     # frontier size at which the tree is truncated
_LN2 = math.log(2)


def _ln_to_log2(x: float) -> LogScalar:
    return LogScalar(float(x) / _LN2)


def _log2_to_ln(s: LogScalar) -> float:
    return float(s.log2_value) * _LN2


def _parameter(map_or_c) -> float:
    if isinstance(map_or_c, QuadraticMap):
        if map_or_c.kind != "standard" or not map_or_c.is_real:
            raise DomainError("branch enumeration is implemented for real z**2 + c only")
        return float(map_or_c.c.real)
    return float(map_or_c)


# -- traces of central pieces -------------------------------------------------

def _pull_along_orbit(t: float, orbit: Sequence[float], steps: int) -> float:
    """Pull the point ``t`` back along ``orbit[steps-1], ..., orbit[0]``."""
    c = orbit[0]
    for i in range(steps - 1, -1, -1):
        if t < c:
            raise DomainError("pullback left the real slice")
        t = math.copysign(math.sqrt(t - c), orbit[i])
    return t


def central_piece_halfwidth(c: float, n: int, k: int) -> float:
    """Half-width ``w`` of the real trace ``(-w, w)`` of ``P_{n+3k+2}(0)``.

    ``f^{n+3k}(c)`` lies in the central piece of depth 1, so this piece is
    ``(alpha, -alpha)`` pulled back along the critical orbit and then by ``f``.
    """
    if k < 0:
        raise DomainError("level must be nonnegative")
    alpha = fixed_points(QuadraticMap.standard(c)).alpha.real
    steps = n + 3 * k
    orbit = critical_orbit_mp(c, steps)
    r = max(_pull_along_orbit(a, orbit, steps) for a in (alpha, -alpha))
    if r <= c:
        raise DomainError(f"central piece at level {k} degenerates")
    return math.sqrt(r - c)


def v_trace(c: float, n: int) -> RealTrace:
    """Trace of ``V = P_{n+1}(0)``: the central piece ``(alpha, -alpha)`` pulled back ``n+1`` times."""
    alpha = fixed_points(QuadraticMap.standard(c)).alpha.real
    orbit = critical_orbit_mp(c, n)
    e = _pull_along_orbit(alpha, orbit, n)
    if e <= c:
        raise DomainError("V trace degenerates; is c in K_n?")
    v = math.sqrt(e - c)
    return RealTrace(-v, v)


# -- data types ---------------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    word: List[str]         # word[j] is the side of f^j(W)
    return_time: int
    trace: RealTrace
    level: int
    log_deriv_min: float
    log_deriv_max: float
    flagged: bool = False


@dataclass
class BranchInventory:
    """Branches stored column-wise; ``branches`` materializes them on demand."""

    kind: str
    n: int
    c: float
    V_trace: RealTrace
    time_cap: int
    complete_up_to: int
    left: np.ndarray
    right: np.ndarray
    center: np.ndarray       # point of the branch sent to 0
    times: np.ndarray
    levels: np.ndarray
    log_deriv_min: np.ndarray
    log_deriv_max: np.ndarray
    log_deriv_mid: np.ndarray
    words: np.ndarray
    flagged_count: int = 0
    notes: List[str] = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def branch(self, i: int) -> Branch:
        m = int(self.times[i])
        w = int(self.words[i])
        word = ["-" if (w >> j) & 1 else "+" for j in range(m)]
        return Branch(word, m, RealTrace(float(self.left[i]), float(self.right[i])),
                      int(self.levels[i]), float(self.log_deriv_min[i]), float(self.log_deriv_max[i]))

    @property
    def branches(self) -> List[Branch]:
        return [self.branch(i) for i in range(len(self))]

    def restrict(self, time_cap: int) -> "BranchInventory":
        keep = self.times <= time_cap
        cols = {k: getattr(self, k)[keep] for k in
                ("left", "right", "center", "times", "levels", "log_deriv_min",
                 "log_deriv_max", "log_deriv_mid", "words")}
        return BranchInventory(self.kind, self.n, self.c, self.V_trace, time_cap,
                               min(self.complete_up_to, time_cap), flagged_count=self.flagged_count,
                               notes=list(self.notes), **cols)

    def counts_by_time(self) -> Dict[int, int]:
        t, k = np.unique(self.times, return_counts=True)
        return {int(a): int(b) for a, b in zip(t, k)}

    def diameters_by_time(self) -> Dict[int, float]:
        """Largest branch diameter at each return time."""
        out = {}
        width = self.right - self.left
        for m in np.unique(self.times):
            out[int(m)] = float(width[self.times == m].max())
        return out

    def decay_rate(self) -> float:
        """Slope of ``-log(max diameter)`` against return time (least squares)."""
        d = self.diameters_by_time()
        if len(d) < 2:
            raise DomainError("need at least two return times to fit a rate")
        m = np.array(sorted(d))
        y = np.log([d[k] for k in m])
        return float(-np.polyfit(m, y, 1)[0])


# -- the pullback tree --------------------------------------------------------

def _classify(lo, hi, v, tol):
    inside = (lo >= -v - tol) & (hi <= v + tol)
    outside = (hi <= -v + tol) | (lo >= v - tol)
    return inside, outside & ~inside


@lru_cache(maxsize=8)
def _pullback_tree(c: float, n: int, time_cap: int):
    V = v_trace(c, n)
    v = V.right
    # frontier: lo, hi, center, log-derivative at lo, hi, center, word bits
    lo = np.array([-v]); hi = np.array([v]); ce = np.array([0.0])
    dlo = np.zeros(1); dhi = np.zeros(1); dce = np.zeros(1)
    word = np.zeros(1, dtype=np.int64)
    ret: list = []
    land: list = []
    complete = time_cap
    flagged = 0
    notes = []
    for m in range(1, time_cap + 1):
        crit = (lo < c) & (hi > c)
        if crit.any():
            flagged += int(crit.sum())
            complete = min(complete, m - 1)
            notes.append(f"time {m}: {int(crit.sum())} parent(s) contain the critical value")
        ok = lo >= c
        if not ok.all():
            lo, hi, ce, dlo, dhi, dce, word = (x[ok] for x in (lo, hi, ce, dlo, dhi, dce, word))
        if lo.size == 0:
            break
        sa = np.sqrt(lo - c); sb = np.sqrt(hi - c); sm = np.sqrt(ce - c)
        la = np.log(2 * sa); lb = np.log(2 * sb); lm = np.log(2 * sm)
        # '+' child keeps orientation, '-' child reverses it
        clo = np.concatenate([sa, -sb])
        chi = np.concatenate([sb, -sa])
        cce = np.concatenate([sm, -sm])
        cdlo = np.concatenate([dlo + la, dhi + lb])
        cdhi = np.concatenate([dhi + lb, dlo + la])
        cdce = np.concatenate([dce + lm, dce + lm])
        bit = np.concatenate([np.zeros(lo.size, np.int64), np.ones(lo.size, np.int64)])
        cword = (np.concatenate([word, word]) << 1) | bit
        inside, outside = _classify(clo, chi, v, PULLBACK_TOL)
        amb = ~(inside | outside)
        if amb.any():
            flagged += int(amb.sum())
            complete = min(complete, m - 1)
            notes.append(f"time {m}: {int(amb.sum())} ambiguous child(ren) straddle V")
        cols = (clo, chi, cce, cdlo, cdhi, cdce, cword)
        ret.append((m,) + tuple(x[inside] for x in cols))
        land.append((m,) + tuple(x[outside] for x in cols))
        lo, hi, ce, dlo, dhi, dce, word = (x[outside] for x in cols)
        if lo.size > MAX_NODES and m < time_cap:
            complete = min(complete, m)
            notes.append(f"tree truncated after time {m} ({lo.size} frontier nodes)")
            break
    return V, ret, land, complete, flagged, tuple(notes)


def _levels(c, n, lo, hi, time_cap):
    levels = np.zeros(lo.size, dtype=np.int64)
    k = 0
    while n + 3 * k + 1 <= time_cap:
        w = central_piece_halfwidth(c, n, k)
        inside = (lo >= -w - PULLBACK_TOL) & (hi <= w + PULLBACK_TOL)
        if not inside.any():
            break
        levels[inside] = k
        k += 1
    return levels


def _build(kind, map_or_c, n, time_cap, check_membership, delta3=DELTA3):
    c = _parameter(map_or_c)
    if time_cap > 40:
        raise DomainError("time_cap must be at most 40")
    if n < 3:
        raise DomainError("n must be at least 3")
    if check_membership:
        rep = kn_membership(c, n)
        if not rep["passed"]:
            raise DomainError(f"c={c!r} fails K_{n} membership: {rep.get('reason', rep)}")
    V, ret, land, complete, flagged, notes = _pullback_tree(c, n, max(time_cap, 1))
    parts = ret if kind == "first_return" else land
    parts = [p for p in parts if p[0] <= time_cap]
    if parts:
        times = np.concatenate([np.full(p[1].size, p[0], np.int64) for p in parts])
        lo, hi, ce, dlo, dhi, dce, word = (np.concatenate([p[i] for p in parts]) for i in range(1, 8))
    else:
        times = np.zeros(0, np.int64)
        lo = hi = ce = dlo = dhi = dce = np.zeros(0)
        word = np.zeros(0, np.int64)
    stack = np.vstack([dlo, dhi, dce]) if times.size else np.zeros((3, 0))
    if delta3 < 1:
        raise DomainError("distortion margin must be at least 1")
    margin = math.log(delta3)
    dmin = stack.min(axis=0) - margin
    dmax = stack.max(axis=0) + margin
    if kind == "first_return":
        levels = _levels(c, n, lo, hi, time_cap)
    else:
        levels = np.zeros(times.size, np.int64)
    return BranchInventory(kind, n, c, V, time_cap, min(complete, time_cap), lo, hi, ce, times,
                           levels, dmin, dmax, dce, word, flagged, list(notes))


def enumerate_return_branches(map_or_c, n: int, time_cap: int, check_membership: bool = True,
                              delta3: float = DELTA3) -> BranchInventory:
    """First-return branches to ``V`` with return time at most ``time_cap``."""
    return _build("first_return", map_or_c, n, time_cap, check_membership, delta3)


def enumerate_landing_branches(map_or_c, n: int, time_cap: int, check_membership: bool = True,
                               delta3: float = DELTA3) -> BranchInventory:
    """First-landing branches: pieces outside ``V`` and their landing times."""
    return _build("first_landing", map_or_c, n, time_cap, check_membership, delta3)


def onto_residual(inv: BranchInventory) -> float:
    """Largest mismatch between ``f^m`` of the branch endpoints and the ends of ``V``.

    The forward mismatch is divided by ``|Df^m|`` at the endpoint, so it is
    measured on the branch itself, where the endpoint rounding lives.
    """
    worst = 0.0
    v = inv.V_trace.right
    for i in range(len(inv)):
        m = int(inv.times[i])
        errs = []
        for x0 in (inv.left[i], inv.right[i]):
            x, logd = x0, 0.0
            for _ in range(m):
                logd += math.log(abs(2 * x))
                x = x * x + inv.c
            errs.append(min(abs(x + v), abs(x - v)) * math.exp(-logd))
        worst = max(worst, max(errs))
    return worst


# -- Peierls margin and partition functions -----------------------------------

def peierls_margin(inv: BranchInventory, chi_crit: float, upsilon: float = UPSILON) -> float:
    """``log kappa_hat``: least ``log_deriv_min - (chi_crit/2 + upsilon) m`` over the branches."""
    if inv.kind != "first_landing":
        raise DomainError("peierls_margin needs a first-landing inventory")
    if inv.complete_up_to < inv.n + 3:
        raise DomainError("inventory incomplete below n+3")
    if len(inv) == 0:
        return math.inf
    return float(np.min(inv.log_deriv_min - (chi_crit / 2 + upsilon) * inv.times))


def _log_terms(inv: BranchInventory, t: float, p: float, use: str) -> np.ndarray:
    if use == "sup":
        ld = inv.log_deriv_max
    elif use == "inf":
        ld = inv.log_deriv_min
    elif use == "mid":
        ld = inv.log_deriv_mid
    else:
        raise DomainError(f"use must be 'sup', 'inf' or 'mid', got {use!r}")
    return -p * inv.times - t * ld


def log_partition(inv: BranchInventory, t: float, p: float, use: str = "mid") -> float:
    """Natural log of the one-step partition function."""
    if len(inv) == 0:
        raise DomainError("empty inventory")
    return float(logsumexp(_log_terms(inv, t, p, use)))


def partition_function(inv: BranchInventory, t: float, p: float, use: str = "sup") -> LogScalar:
    """``Z_1(t, p)`` as a base-2 log scalar; ``use`` picks the derivative bound."""
    return _ln_to_log2(log_partition(inv, t, p, use))


@dataclass(frozen=True)
class PressureBracket:
    t: float
    p_low: float
    p_high: float
    consistency: float
    root_sup: float = math.nan
    root_inf: float = math.nan
    enclosure_at_mid: tuple = ()

    @property
    def mid(self) -> float:
        return 0.5 * (self.p_low + self.p_high)

    @property
    def width(self) -> float:
        return self.p_high - self.p_low


def _root(inv, t, use, tolerance, max_iter=400):
    f = lambda p: log_partition(inv, t, p, use)
    lo, hi = -1.0, 1.0
    while f(lo) < 0:
        lo *= 2
        if lo < -1e6:
            raise NoConvergence("no lower pressure bracket")
    while f(hi) > 0:
        hi *= 2
        if hi > 1e6:
            raise NoConvergence("partition function does not fall below 1")
    for _ in range(max_iter):
        if hi - lo < tolerance:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def bowen_pressure(inv: BranchInventory, t: float, tolerance: float = 1e-9) -> PressureBracket:
    """Root in ``p`` of ``log Z_1(t, p) = 0`` by bisection.

    The bracket follows the midpoint-derivative sum; the roots of the sup-
    and inf-based sums are reported alongside as an enclosure of the
    distortion error.
    """
    if inv.kind != "first_return":
        raise DomainError("bowen_pressure needs a first-return inventory")
    if len(inv) == 0:
        raise DomainError("empty inventory")
    if t > 0 and not np.all(inv.log_deriv_min > 0):
        raise DomainError("branches are not uniformly expanding")
    lo, hi = _root(inv, t, "mid", tolerance)
    mid = 0.5 * (lo + hi)
    cons = log_partition(inv, t, mid, "mid")
    r_sup = 0.5 * sum(_root(inv, t, "sup", tolerance))
    r_inf = 0.5 * sum(_root(inv, t, "inf", tolerance))
    enc = tuple(sorted((log_partition(inv, t, mid, "sup"), log_partition(inv, t, mid, "inf"))))
    return PressureBracket(t, lo, hi, cons, r_sup, r_inf, enc)


# -- preimage tree ------------------------------------------------------------

def _base_point(f: QuadraticMap, j_max: int):
    """0, unless 0 is periodic (then every preimage level repeats 0); use beta then."""
    z = 0j
    for _ in range(j_max):
        z = complex(f(z))
        if abs(z) < 1e-12:
            return complex(fixed_points(f).beta) if f.kind == "standard" else None
        if abs(z) > 1e6:
            break
    return 0j


def _inverse_deformed(f: QuadraticMap, y: np.ndarray, tol=1e-10, max_iter=80):
    # polynomial evaluation of the degree-28 map stalls near 1e-13 relative
    lam = complex(f.c)
    coeffs = np.asarray(f.coefficients, dtype=complex)[::-1]
    dcoef = np.polyder(coeffs)
    r0 = np.sqrt(y - lam)
    out = []
    for z in (r0, -r0):
        z = z.copy()
        for _ in range(max_iter):
            step = (np.polyval(coeffs, z) - y) / np.polyval(dcoef, z)
            z -= step
            if np.all(np.abs(step) <= tol * np.maximum(1, np.abs(z))):
                break
        else:
            bad = int(np.argmax(np.abs(step)))
            raise NoConvergence(f"preimage Newton failed at node {bad} (target {y[bad]!r})")
        out.append(z)
    return np.concatenate(out)


def preimage_pressure(f: QuadraticMap, t: float, j_max: int = 20, real_only: bool = False) -> float:
    """``(1/j) log`` of the sum of ``|Df^j(y)|^{-t}`` over ``y`` in ``f^{-j}(base)``.

    The base point is 0.  When 0 is periodic its preimage tree revisits 0,
    where the derivative vanishes, so the fixed point ``beta`` is used instead.
    """
    if not 1 <= j_max <= 24:
        raise DomainError("j_max must be in 1..24")
    if f.kind == "deformed":
        step = lambda y: _inverse_deformed(f, y)
    else:
        cc = complex(f.c)
        step = lambda y: np.concatenate([np.sqrt(y - cc), -np.sqrt(y - cc)])
    base = _base_point(f, j_max)
    if base is None:
        raise DomainError("critical point is periodic for this map")
    y = np.array([base], dtype=complex)
    logd = np.zeros(1)
    for _ in range(j_max):
        ny = step(y)
        logd = np.concatenate([logd, logd]) + np.log(np.abs(f.derivative(ny)))
        y = ny
        if real_only:
            keep = np.abs(y.imag) < 1e-9
            y, logd = y[keep], logd[keep]
            if y.size == 0:
                return -math.inf
    return float(logsumexp(-t * logd)) / j_max


# -- postcritical series ------------------------------------------------------

@dataclass
class SeriesEstimate:
    log_value: LogScalar
    tail_bound: LogScalar
    terms_used: int
    certified: bool
    log_terms: List[float] = field(default_factory=list)   # natural logs

    @property
    def value_ln(self) -> float:
        return _log2_to_ln(self.log_value)


def _critical_log_derivs(c: float, count: int) -> np.ndarray:
    """``log|Df^j(c)|`` for ``j = 0..count`` from the MPFR orbit."""
    orb = critical_orbit_mp(c, count)
    steps = np.log(np.abs(2 * np.asarray(orb[:count], dtype=float)))
    return np.concatenate([[0.0], np.cumsum(steps)])


def postcritical_series(map_or_c, n: int, t: float, p: float, k_max: int) -> SeriesEstimate:
    """Sum over ``k = 0..k_max`` of ``exp(-(n+3k)p) |Df^{n+3k}(c)|^{-t/2}``."""
    c = _parameter(map_or_c)
    if k_max < 0:
        raise DomainError("k_max must be nonnegative")
    ld = _critical_log_derivs(c, n + 3 * k_max)
    k = np.arange(k_max + 1)
    m = n + 3 * k
    terms = -m * p - 0.5 * t * ld[m]
    total = float(logsumexp(terms))
    certified = False
    tail = LogScalar(math.inf)
    if k_max >= 4:
        ratio = (terms[-1] - terms[-5]) / 4
        if ratio < math.log(0.9):
            certified = True
            tail_ln = terms[-1] + ratio - math.log1p(-math.exp(ratio))
            tail = _ln_to_log2(tail_ln)
    return SeriesEstimate(_ln_to_log2(total), tail, k_max + 1, certified, [float(x) for x in terms])


def counters_from_hat(hat: Sequence[str], k: int):
    """``N(k)`` (zeros among the first k symbols) and ``B(k)`` (number of blocks)."""
    if k == 0:
        return 0, 0
    head = list(hat[:k])
    N = sum(1 for s in head if s == "0")
    B = 1 + sum(1 for a, b in zip(head, head[1:]) if a != b)
    return N, B


def postcritical_bracket(c: float, n: int, t: float, delta: float, k_max: int,
                         delta1: float = DELTA1, delta2: float = 2.0) -> dict:
    """Compare each postcritical term with its two-variable weight bounds.

    The hat sequence is read off the critical itinerary (0 stays 0, 1 becomes 1+).
    Reported, not asserted: the bounds assume equal Lyapunov exponents at
    ``p+`` and ``p-``, which standard maps only approximate.
    """
    from .puzzle import critical_itinerary
    cd = cantor_data(c, delta2=delta2)
    chi = cd.chi_crit
    itin = critical_itinerary(c, n, k_max + 1, cd)
    hat = ["0" if s == 0 else "1+" for s in itin.symbols]
    ld = _critical_log_derivs(c, n + 3 * k_max)
    beta = fixed_points(QuadraticMap.standard(c)).beta.real
    log_theta = math.log(cd.theta)
    tau = log_theta / _LN2 * t
    lam = 3 * delta / _LN2
    pre = -n * delta + 0.5 * t * n * (chi - math.log(abs(2 * beta)))
    rows = []
    for k in range(k_max + 1):
        N, B = counters_from_hat(hat, k)
        m = n + 3 * k
        mid = -m * (-t * chi / 2 + delta) - 0.5 * t * ld[m]
        lo = -0.5 * t * math.log(delta1) + pre + _LN2 * (-lam * k - tau * N - cd.xi * tau * B)
        hi = 0.5 * t * math.log(delta1) + pre + _LN2 * (-lam * k - tau * N + cd.xi * tau * B)
        rows.append({"k": k, "N": N, "B": B, "log_term": float(mid), "log_lower": lo,
                     "log_upper": hi, "within": lo <= mid <= hi})
    return {"c": c, "n": n, "t": t, "delta": delta, "chi_crit": chi, "theta": cd.theta,
            "xi": cd.xi, "hat": hat, "rows": rows, "all_within": all(r["within"] for r in rows)}


# -- Gibbs weights ------------------------------------------------------------

def _orbit_points(c: float, x: float, period: int) -> np.ndarray:
    pts = [x]
    for _ in range(period - 1):
        x = x * x + c
        pts.append(x)
    return np.array(pts)


def gibbs_mass_report(inv: BranchInventory, t: float, p: float, radius: float = 0.05,
                      cd=None) -> dict:
    """Mass of the spread branch weights near the orbits of ``p``, ``p+`` and ``p-``."""
    if inv.kind != "first_return":
        raise DomainError("gibbs_mass_report needs a first-return inventory")
    if len(inv) == 0:
        raise DomainError("empty inventory")
    c = inv.c
    cd = cd or cantor_data(c)
    logw = -p * inv.times - t * inv.log_deriv_mid
    logw = logw - logsumexp(logw)
    w = np.exp(logw)
    if not np.isfinite(w).all() or w.sum() == 0:
        raise PrecisionExhausted("Gibbs weights underflow; raise the precision of the weights")
    orbits = {"O_p": _orbit_points(c, cd.p, 3),
              "O_plus": _orbit_points(c, cd.p_plus, 3),
              "O_minus": _orbit_points(c, cd.p_minus, 6)}
    mass = {k: 0.0 for k in orbits}
    union_pm = 0.0
    anywhere = 0.0
    # spread each weight uniformly over the m forward images of the midpoint
    x = 0.5 * (inv.left + inv.right)
    share = w / inv.times
    alive = np.ones(len(inv), bool)
    for j in range(int(inv.times.max())):
        alive = inv.times > j
        xs, sh = x[alive], share[alive]
        near = {}
        for name, pts in orbits.items():
            near[name] = np.min(np.abs(xs[:, None] - pts[None, :]), axis=1) < radius
            mass[name] += float(sh[near[name]].sum())
        union_pm += float(sh[near["O_plus"] | near["O_minus"]].sum())
        anywhere += float(sh[near["O_p"] | near["O_plus"] | near["O_minus"]].sum())
        x = np.where(alive, x * x + c, x)
    return {"t": t, "p": p, "radius": radius, "branches": len(inv),
            "total_weight": float(w.sum()), "mass_O_p": mass["O_p"],
            "mass_O_plus": mass["O_plus"], "mass_O_minus": mass["O_minus"],
            "mass_O_plus_or_minus": union_pm, "remainder": max(0.0, 1.0 - anywhere)}
