"""
The block partition ``I_s = [a_s, b_s)``, ``J_s = [b_s, a_{s+1})`` with
``a_s = 2**(q s**3)``, its counting functions ``N`` and ``B``, and the
two-variable series built from ``pi_k = 2**(-lam k - tau N(k) +- tau xi B(k))``.

Block endpoints overflow every native format almost immediately, so
index arithmetic is exact (python ints) where it is small and otherwise
carried by directed-rounding MPFR intervals; every sum is evaluated in
closed form from the geometric sums

    G(L, rho) = sum_{m=1..L} 2**(-rho m)
    H(L, rho) = sum_{m=1..L} m 2**(-rho m)

and the infinite tails are bounded by an explicit geometric majorant
whose precondition is checked at the cutoff.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError
from .logscalar import (
    DEFAULT_PRECISION,
    Interval,
    LogEnclosure,
    LogScalar,
    _contexts,
    ln2,
)


TAIL_BITS = 64
EXP_LIMIT = 1 << 29


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # 0.4 means 2/5, not the nearest double
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class PartitionScheme:
    xi: Fraction
    Xi: int
    q: int
    mode: str = "lemma"

    def __post_init__(self):
        object.__setattr__(self, "xi", _frac(self.xi))
        if self.xi <= 0:
            raise DomainError("xi must be positive")
        if self.Xi != math.ceil(2 * self.xi) + 1:
            raise DomainError(f"Xi must equal ceil(2 xi) + 1 = {math.ceil(2 * self.xi) + 1}")
        if self.mode not in ("lemma", "oracle"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.mode == "lemma" and self.q < 50 * (self.Xi + 1):
            raise DomainError(f"lemma mode needs q >= 50(Xi+1) = {50 * (self.Xi + 1)}")
        if self.q < 1:
            raise DomainError("q must be a positive integer")

    @classmethod
    def standard(cls, xi, q: Optional[int] = None) -> "PartitionScheme":
        xi = _frac(xi)
        Xi = math.ceil(2 * xi) + 1
        return cls(xi, Xi, 50 * (Xi + 1) if q is None else q)

    @classmethod
    def oracle(cls, q: int, xi) -> "PartitionScheme":
        xi = _frac(xi)
        return cls(xi, math.ceil(2 * xi) + 1, q, mode="oracle")


def partition_endpoints(scheme: PartitionScheme, s: int):
    """``(a_s, b_s, |I_s|, |J_s|)`` as exact integers.

    In oracle mode with tiny ``q`` the blocks may overlap, in which case
    ``|J_s|`` comes out nonpositive and the block is empty.
    """
    if s < 0 or int(s) != s:
        raise DomainError("s must be a nonnegative integer")
    s = int(s)
    q, Xi = scheme.q, scheme.Xi
    a = 1 << (q * s**3)
    nI = q * (2 * s + 1) + Xi
    b = a + nI
    return a, b, nI, (1 << (q * (s + 1) ** 3)) - b


def block_counters(scheme: PartitionScheme, k: int):
    """``(N(k), B(k))`` from the closed forms on the block containing ``k``."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k == 0:
        return 0, 0
    q, Xi = scheme.q, scheme.Xi
    e = k.bit_length() - 1          # a_s <= k  iff  q s^3 <= e
    s = int(round((e / q) ** (1 / 3))) + 1
    while q * s**3 > e:
        s -= 1
    a = 1 << (q * s**3)
    if k < a + q * (2 * s + 1) + Xi:
        return k - (a - 1) + q * s * s + Xi * s, 2 * s + 1
    return q * (s + 1) ** 2 + Xi * (s + 1), 2 * s + 2


# --- interval helpers -----------------------------------------------------

def _iv(x, prec) -> Interval:
    if isinstance(x, Interval):
        return x
    if isinstance(x, (Fraction, int)):
        return Interval(x, prec=prec)
    return Interval(_frac(x), prec=prec)


def _zero(prec):
    return Interval(0, prec=prec)


def _series_g(y: Interval) -> Interval:
    # g(y) = 1 - e^{-y}(1+y) = sum_{n>=2} (-1)^n (n-1)/n! y^n, y < 1
    prec = y.prec
    tol = mpfr(2) ** -(prec + 8)
    pw = y * y
    fact = 2
    total = _zero(prec)
    n = 2
    while True:
        term = pw * Interval(n - 1, prec=prec) / Interval(fact, prec=prec)
        total = total + term if n % 2 == 0 else total - term
        n += 1
        fact *= n
        pw = pw * y
        nxt = pw * Interval(n - 1, prec=prec) / Interval(fact, prec=prec)
        if total.lo > 0 and nxt.hi <= tol * total.lo:
            break
    # alternating with decreasing terms: remainder has the sign of nxt
    return total + (Interval(0, nxt.hi, prec) if n % 2 == 0 else -Interval(0, nxt.hi, prec))


def _g(y: Interval) -> Interval:
    if y.hi < 1:
        return _series_g(y)
    return 1 - (-y).exp() * (1 + y)


def _g1_over(d: Interval) -> Interval:
    # (e^{-d} - 1 + d) / d = sum_{n>=2} (-1)^n d^{n-1}/n!
    prec = d.prec
    if d.hi >= 1:
        return ((-d).expm1() + d) / d
    tol = mpfr(2) ** -(prec + 8)
    total = _zero(prec)
    pw = d
    fact = 2
    n = 2
    while True:
        term = pw / Interval(fact, prec=prec)
        total = total + term if n % 2 == 0 else total - term
        n += 1
        fact *= n
        pw = pw * d
        nxt = pw / Interval(fact, prec=prec)
        if total.lo > 0 and nxt.hi <= tol * total.lo:
            break
    return total + (Interval(0, nxt.hi, prec) if n % 2 == 0 else -Interval(0, nxt.hi, prec))


def _geo_pt(L, rho, prec) -> Interval:
    if L <= 0:
        return _zero(prec)
    Li = Interval(L, prec=prec)
    if rho == 0:
        return Li
    r = Interval(rho, prec=prec)
    d = r * ln2(prec)
    y = Li * d
    return (-r).exp2() * (-((-y).expm1())) / (-((-d).expm1()))


def _wgeo_pt(L, rho, prec) -> Interval:
    if L <= 0:
        return _zero(prec)
    Li = Interval(L, prec=prec)
    if rho == 0:
        return Li * (Li + 1) / 2
    r = Interval(rho, prec=prec)
    d = r * ln2(prec)
    y = Li * d
    f = _g(y) + y * (-y).exp() * _g1_over(d)
    return (-r).exp2() * f / (-((-d).expm1())) ** 2


def geo(L, rho, prec: int = DEFAULT_PRECISION) -> Interval:
    """Enclosure of ``sum_{m=1..L} 2**(-rho m)``; increasing in L, decreasing in rho."""
    L, rho = _iv(L, prec), _iv(rho, prec)
    if L.hi <= 0:
        return _zero(prec)
    lo = _geo_pt(max(L.lo, 0), rho.hi, prec).lo
    hi = _geo_pt(L.hi, rho.lo, prec).hi
    return Interval._raw(lo, hi, prec)


def wgeo(L, rho, prec: int = DEFAULT_PRECISION) -> Interval:
    """Enclosure of ``sum_{m=1..L} m 2**(-rho m)``."""
    L, rho = _iv(L, prec), _iv(rho, prec)
    if L.hi <= 0:
        return _zero(prec)
    lo = _wgeo_pt(max(L.lo, 0), rho.hi, prec).lo
    hi = _wgeo_pt(L.hi, rho.lo, prec).hi
    return Interval._raw(lo, hi, prec)


# --- endpoints as intervals (real s allowed) --------------------------------

def _a(scheme, s, prec) -> Interval:
    return (Interval(_frac(s) ** 3 * scheme.q, prec=prec)).exp2()


def _nI(scheme, s, prec) -> Interval:
    return Interval(scheme.q * (2 * _frac(s) + 1) + scheme.Xi, prec=prec)


def _b(scheme, s, prec) -> Interval:
    return _a(scheme, s, prec) + _nI(scheme, s, prec)


def _nJ(scheme, s, prec) -> Interval:
    s = _frac(s)
    if s.denominator == 1 and scheme.q * (s + 1) ** 3 < 4 * prec:
        return Interval(partition_endpoints(scheme, int(s))[3], prec=prec)
    return _a(scheme, s + 1, prec) - _b(scheme, s, prec)


def _lambda_iv(scheme, s, prec) -> Interval:
    nJ = _nJ(scheme, s, prec)
    if nJ.lo <= 0:
        raise DomainError(f"|J_s| is not positive at s={s}")
    return 1 / nJ


def lambda_of_s(scheme: PartitionScheme, s, precision_bits: int = DEFAULT_PRECISION) -> LogEnclosure:
    """``lam(s) = 1/|J_s|`` as a log2 enclosure; real ``s`` allowed."""
    if _frac(s) < 0:
        raise DomainError("s must be nonnegative")
    return LogEnclosure.from_interval(_lambda_iv(scheme, s, precision_bits))


# --- block sums -------------------------------------------------------------

_FIELDS = ("I_plus", "I_minus", "J_plus", "J_minus", "tildeI_plus", "tildeJ_plus",
           "hatJ_plus", "hatJ_minus")


@dataclass
class BlockSums:
    s: int
    I_plus: LogEnclosure
    I_minus: LogEnclosure
    J_plus: LogEnclosure
    J_minus: LogEnclosure
    tildeI_plus: LogEnclosure
    tildeJ_plus: LogEnclosure
    hatJ_plus: LogEnclosure
    hatJ_minus: LogEnclosure
    intervals: Dict[str, Interval] = field(default_factory=dict, repr=False)


class _Params:
    """Scheme, tau, lam as intervals with their precision."""

    def __init__(self, scheme, tau, lam, prec):
        self.scheme, self.prec = scheme, prec
        self.q, self.Xi = scheme.q, scheme.Xi
        self.tau = _iv(tau, prec)
        self.lam = _iv(lam, prec)
        self.xi = Interval(scheme.xi, prec=prec)
        if self.tau.lo < 0 or self.lam.lo < 0:
            raise DomainError("tau and lambda must be nonnegative")


def _block_parts(P: _Params, s: int) -> Dict[str, tuple]:
    """Each block series as ``(E, M)`` with value ``2**E * M`` and ``M`` of moderate size."""
    q, Xi, tau, lam, xi, prec = P.q, P.Xi, P.tau, P.lam, P.xi, P.prec
    a, b, nI = _a(P.scheme, s, prec), _b(P.scheme, s, prec), P.scheme.q * (2 * s + 1) + P.Xi
    nJ = _nJ(P.scheme, s, prec)
    out = {}
    # I_s: k = a-1+m, N = m + q s^2 + Xi s, B = 2s+1
    base = -(lam * (a - 1)) - tau * (q * s * s + Xi * s)
    shift = xi * tau * (2 * s + 1)
    G = geo(nI, lam + tau, prec)
    out["I_plus"] = (base + shift, G)
    out["I_minus"] = (base - shift, G)
    out["tildeI_plus"] = (base + shift, (a - 1) * G + wgeo(nI, lam + tau, prec))
    # J_s: k = b-1+m, N = q(s+1)^2 + Xi(s+1), B = 2s+2
    if nJ.hi <= 0:
        for k in ("J_plus", "J_minus", "tildeJ_plus", "hatJ_plus", "hatJ_minus"):
            out[k] = (_zero(prec), _zero(prec))
        return out
    E = {sg: -(tau * (q * (s + 1) ** 2)) - (Xi - sg * 2 * xi) * tau * (s + 1) for sg in (1, -1)}
    GJ = geo(nJ, lam, prec)
    lb = lam * (b - 1)
    out["J_plus"] = (E[1] - lb, GJ)
    out["J_minus"] = (E[-1] - lb, GJ)
    out["tildeJ_plus"] = (E[1] - lb, (b - 1) * GJ + wgeo(nJ, lam, prec))
    K0 = b + (s * s - 1)
    HJ = wgeo(nJ - s * s, lam, prec)
    out["hatJ_plus"] = (E[1] - lam * K0, HJ)
    out["hatJ_minus"] = (E[-1] - lam * K0, HJ)
    return out


def _block_intervals(P: _Params, s: int) -> Dict[str, Interval]:
    return {k: E.exp2() * M for k, (E, M) in _block_parts(P, s).items()}


def _log_enclosure(E: Interval, M: Interval) -> LogEnclosure:
    # log2(2**E * M) = E + log2(M); survives when 2**E underflows
    prec = E.prec
    if M.hi <= 0:
        z = LogScalar.zero("down", prec)
        return LogEnclosure(z, LogScalar.zero("up", prec))
    hi = (E + Interval._raw(M.hi, M.hi, prec).log2()).hi
    if M.lo <= 0:
        return LogEnclosure(LogScalar.zero("down", prec), LogScalar(hi, "up", prec))
    lo = (E + Interval._raw(M.lo, M.lo, prec).log2()).lo
    return LogEnclosure(LogScalar(lo, "down", prec), LogScalar(hi, "up", prec))


def block_sums(scheme: PartitionScheme, s: int, tau, lam,
               precision_bits: int = DEFAULT_PRECISION) -> BlockSums:
    """Closed-form enclosures of every block series at integer ``s``.

    ``tau`` and ``lam`` may be numbers, ``Fraction`` or ``Interval``
    (for instance ``lam(s')`` at a real ``s'``).
    """
    if s < 0 or int(s) != s:
        raise DomainError("s must be a nonnegative integer")
    P = _Params(scheme, tau, lam, precision_bits)
    parts = _block_parts(P, int(s))
    ivs = {k: E.exp2() * M for k, (E, M) in parts.items()}
    enc = {k: _log_enclosure(*parts[k]).check_width(what=f"{k}[s={s}]") for k in _FIELDS}
    return BlockSums(int(s), intervals=ivs, **enc)


# --- totals and tails ---------------------------------------------------------

@dataclass
class SeriesTotals:
    tau: object
    s_max: int
    pi_plus: Interval
    pi_minus: Interval
    pi_tilde_plus: Interval
    certified: bool
    weighted_certified: bool
    notes: List[str] = field(default_factory=list)

    def enclosures(self):
        return {k: LogEnclosure.from_interval(getattr(self, k))
                for k in ("pi_plus", "pi_minus", "pi_tilde_plus")}


def _tail_slack(P: _Params, j: int, G: Interval) -> float:
    # -tau (j+1) - [log2 G + tau xi - q tau (j+1)^2 - (Xi - 2xi) tau (j+1)], lower bound
    lhs = G.log2() + P.xi * P.tau - P.tau * (P.q * (j + 1) ** 2) - (P.Xi - 2 * P.xi) * P.tau * (j + 1)
    return float((-(P.tau * (j + 1)) - lhs).lo)


def _tail_ok(P: _Params, j: int, G: Interval) -> bool:
    return _tail_slack(P, j, G) >= 0


def _tail_majorants(P: _Params):
    """``G`` and weighted ``G`` over all ``k >= 0`` (None when divergent)."""
    if P.lam.lo <= 0:
        return None, None
    one_m = -((-(P.lam * ln2(P.prec))).expm1())
    G = 1 / one_m
    Gw = P.lam.exp2() / ((P.lam * ln2(P.prec)).expm1()) ** 2
    return G, Gw


def _tail_bound(P: _Params, S: int) -> Interval:
    t = (-(P.tau * (S + 2))).exp2()
    return t / (-((-(P.tau * ln2(P.prec))).expm1()))


def choose_cutoff(P: _Params, weighted: bool = True, start: Optional[int] = None, limit: int = 400):
    """Smallest ``S >= start`` where the tail precondition holds at ``S+1``."""
    G, Gw = _tail_majorants(P)
    if G is None or P.Xi - 2 * P.scheme.xi < 1 or P.tau.lo <= 0:
        return None
    S = math.ceil(P.tau.hi) + 2 if start is None else start
    while S <= limit:
        if _tail_ok(P, S + 1, G) and (not weighted or _tail_ok(P, S + 1, Gw)):
            return S
        S += 1
    return None


def _totals(P: _Params, s_max: Optional[int], blocks=None) -> SeriesTotals:
    notes = []
    S = s_max
    auto = choose_cutoff(P, weighted=True)
    if S is None:
        S = auto if auto is not None else math.ceil(P.tau.hi) + 2
        if auto is not None:
            # push the cutoff until the certified tail is below 2**-TAIL_BITS,
            # while a_{S+2} still fits the MPFR exponent range
            while (_tail_bound(P, S).hi > mpfr(2) ** -TAIL_BITS
                   and P.q * (S + 3) ** 3 < EXP_LIMIT):
                S += 1
    if S < math.ceil(P.tau.hi) + 2:
        raise DomainError("s_max must be at least ceil(tau) + 2")
    prec = P.prec
    one = Interval(1, prec=prec)
    pp, pm, pt = one, one, one
    blocks = {} if blocks is None else blocks
    for j in range(S + 2):
        if j not in blocks:
            blocks[j] = _block_intervals(P, j)
        B = blocks[j]
        pp = pp + B["I_plus"]
        pm = pm + B["I_minus"]
        pt = pt + B["tildeI_plus"]
        if j <= S:
            pp = pp + B["J_plus"]
            pm = pm + B["J_minus"]
            pt = pt + B["tildeJ_plus"]
    G, Gw = _tail_majorants(P)
    cert = G is not None and P.Xi - 2 * P.scheme.xi >= 1 and _tail_ok(P, S + 1, G)
    wcert = cert and _tail_ok(P, S + 1, Gw)
    if cert:
        T = _tail_bound(P, S)
        pp = Interval._raw(pp.lo, (pp + T).hi, prec)
        pm = Interval._raw(pm.lo, (pm + T).hi, prec)
    else:
        notes.append(f"tail precondition fails at j={S + 1}; upper bounds are not certified")
        pp = Interval._raw(pp.lo, mpfr("inf"), prec)
        pm = Interval._raw(pm.lo, mpfr("inf"), prec)
    if wcert:
        pt = Interval._raw(pt.lo, (pt + _tail_bound(P, S)).hi, prec)
    else:
        pt = Interval._raw(pt.lo, mpfr("inf"), prec)
    return SeriesTotals(P.tau, S, pp, pm, pt, cert, wcert, notes)


def series_totals(scheme: PartitionScheme, tau, lam, s_max: Optional[int] = None,
                  precision_bits: int = DEFAULT_PRECISION) -> SeriesTotals:
    """Enclosures of ``Pi+``, ``Pi-`` and the weighted ``Pi~+``.

    Blocks ``I_0..I_{S+1}`` and ``J_0..J_S`` are summed in closed form;
    the rest is bounded by ``2**(-tau(S+2)) / (1 - 2**-tau)`` once
    ``J_j + I_{j+1} <= 2**(-tau(j+1))`` is verified at ``j = S+1`` (it
    then holds for every larger ``j``).  Without ``s_max`` the smallest
    certifying cutoff is used.
    """
    return _totals(_Params(scheme, tau, lam, precision_bits), s_max)


# --- lemma verification -------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    log2_margin: float
    tau: Optional[float] = None
    s: Optional[float] = None
    detail: str = ""

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "log2_margin": self.log2_margin,
                "tau": self.tau, "s": self.s, "detail": self.detail}


def _margin_le(lhs: Interval, rhs: Interval) -> float:
    """log2(rhs_lo) - log2(lhs_hi), directed so a positive value certifies lhs <= rhs."""
    d, u, _ = _contexts(lhs.prec)
    if lhs.hi <= 0:
        return math.inf
    if rhs.lo <= 0 or gmpy2.is_infinite(lhs.hi):
        return -math.inf
    return float(d.sub(d.log2(rhs.lo), u.log2(lhs.hi)))


def _check(name, lhs, rhs, tau=None, s=None, detail="") -> Check:
    m = _margin_le(lhs, rhs)
    return Check(name, m > 0, m, None if tau is None else float(tau),
                 None if s is None else float(s), detail)


def _int_margin(lhs: int, rhs: int) -> float:
    return float(gmpy2.log2(gmpy2.mpfr(rhs, 128)) - gmpy2.log2(gmpy2.mpfr(lhs, 128)))


def verify_itinerary(scheme: PartitionScheme, s_values=range(11)) -> List[Check]:
    """Parts (a)-(c) with exact integers."""
    out = []
    for s in s_values:
        a, b, nI, nJ = partition_endpoints(scheme, s)
        a1 = 1 << (scheme.q * (s + 1) ** 3)
        out.append(Check("itinerary(a)", 2 * b <= a1, _int_margin(2 * b, a1), s=s,
                         detail="b_s <= a_{s+1}/2"))
        out.append(Check("itinerary(b)", a1 <= 2 * nJ, _int_margin(a1, 2 * nJ), s=s,
                         detail="a_{s+1}/2 <= |J_s|"))
        if s >= 1:
            out.append(Check("itinerary(c)", 4 * b <= 5 * a, _int_margin(4 * b, 5 * a), s=s,
                             detail="b_s/a_s <= 5/4"))
    return out


def verify_first_floor(scheme: PartitionScheme, tau, precision_bits: int = DEFAULT_PRECISION) -> List[Check]:
    tau = _frac(tau)
    prec = precision_bits
    tot1 = _totals(_Params(scheme, tau, _lambda_iv(scheme, tau - 1, prec), prec), None)
    rhs1 = 2 + (Interval(tau * scheme.xi, prec=prec)).exp2()
    c1 = _check("first_floor.1", tot1.pi_plus, rhs1, tau,
                detail="Pi+(tau, lam(tau-1)) <= 2 + 2^(tau xi)")
    P2 = _Params(scheme, tau, _lambda_iv(scheme, tau, prec), prec)
    tot2 = _totals(P2, math.ceil(tau) + 2)
    c2 = _check("first_floor.2", Interval(tau * tau, prec=prec).exp2(), tot2.pi_minus, tau,
                detail="2^(tau^2) <= Pi-(tau, lam(tau))")
    return [c1, c2]


def _x2_block(P: _Params, sig: int, coeff: Interval) -> Interval:
    """``2^(E+ - lam(b-1)) [coeff G(L) + H(sig^2) + sig^2 r^(sig^2) G(L - sig^2)]``."""
    prec, lam, tau, xi = P.prec, P.lam, P.tau, P.xi
    b = _b(P.scheme, sig, prec)
    L = _nJ(P.scheme, sig, prec)
    E = -(tau * (P.q * (sig + 1) ** 2)) - (P.Xi - 2 * xi) * tau * (sig + 1)
    sq = sig * sig
    inner = coeff * geo(L, lam, prec) + wgeo(sq, lam, prec) \
        + (-(lam * sq)).exp2() * sq * geo(L - sq, lam, prec)
    return (E - lam * (b - 1)).exp2() * inner


def verify_core_and_tower(scheme: PartitionScheme, tau, s,
                          precision_bits: int = DEFAULT_PRECISION) -> List[Check]:
    """Core parts 1-4 and both tower statements at one ``(tau, s)``."""
    tau, s = _frac(tau), _frac(s)
    if not (tau - 1 <= s <= tau):
        raise DomainError("s must lie in [tau-1, tau]")
    prec = precision_bits
    q, Xi = scheme.q, scheme.Xi
    s0, t0 = math.ceil(s), math.ceil(tau)
    lam = _lambda_iv(scheme, s, prec)
    P = _Params(scheme, tau, lam, prec)
    S = choose_cutoff(P, weighted=True)
    blocks = {}
    tot = _totals(P, S, blocks)
    S = tot.s_max
    out = []
    hat_s0 = blocks[s0]["hatJ_minus"]
    rhs1 = Interval(2 * q * (s + 1) ** 3 - q * tau * (s0 + 1) * (s0 + 2), prec=prec).exp2()
    out.append(_check("core.1", rhs1, hat_s0, tau, s, "hatJ-_{s0} >= 2^(2q(s+1)^3 - q tau (s0+1)(s0+2))"))
    rhs2 = Interval(q * tau * tau * (tau - 4), prec=prec).exp2()
    out.append(_check("core.2", rhs2, hat_s0, tau, s, "hatJ-_{s0} >= 2^(q tau^2 (tau-4))"))
    damp = Interval(-q * tau * tau, prec=prec).exp2()
    for sig in range(t0 - 3, s0):
        lhs = (_b(scheme, sig, prec) + sig * sig) * blocks[sig]["J_plus"]
        rhs = damp * blocks[sig]["hatJ_minus"] / 20
        out.append(_check("core.3", lhs, rhs, tau, s, f"varsigma={sig}"))
    coef4 = _nI(scheme, s0, prec) + _b(scheme, s0 - 1, prec) + 2 * s0 * s0
    out.append(_check("core.4", coef4 * blocks[s0]["J_plus"], damp * hat_s0 / 4, tau, s,
                      "(b_{s0} - |J_{s0-1}| + 2 s0^2) J+_{s0} <= 2^(-q tau^2) hatJ-_{s0} / 4"))
    # tower 1 at s = tau
    Pt = _Params(scheme, tau, _lambda_iv(scheme, tau, prec), prec)
    t1 = _totals(Pt, None)
    slack = _tail_slack(Pt, t1.s_max + 1, _tail_majorants(Pt)[1]) if t1.weighted_certified else -math.inf
    out.append(Check("tower.1", t1.weighted_certified, slack, float(tau), float(tau),
                     f"Pi~+(tau, lam(tau)) < inf; tail precondition slack at j={t1.s_max + 1}"))
    # tower 2: X1 <= X2 <= X3
    window = range(t0 - 3, s0 + 1)
    one = Interval(1, prec=prec)
    x2 = one
    for j in range(S + 2):
        x2 = x2 + blocks[j]["tildeI_plus"]
        if j > S:
            continue
        if j in window:
            if j < s0:
                coeff = _b(scheme, j, prec) - 1
            else:
                coeff = _b(scheme, s0 - 1, prec) + _nI(scheme, s0, prec) + (s0 * s0 - 1)
            x2 = x2 + _x2_block(P, j, coeff)
        else:
            x2 = x2 + blocks[j]["tildeJ_plus"]
    if tot.weighted_certified:
        x2 = Interval._raw(x2.lo, (x2 + _tail_bound(P, S)).hi, prec)
    else:
        x2 = Interval._raw(x2.lo, mpfr("inf"), prec)
    x3 = _zero(prec)
    for j in window:
        x3 = x3 + blocks[j]["hatJ_minus"]
    x3 = damp * x3
    out.append(_check("tower.2a", tot.pi_plus, x2, tau, s, "Pi+ <= Pi~+ - sum hatJ+ - (|J_{s0-1}| - s0^2) J+_{s0}"))
    out.append(_check("tower.2b", x2, x3, tau, s, "... <= 2^(-q tau^2) sum hatJ-"))
    return out


def verify_appendix_lemmas(scheme: PartitionScheme, tau_grid: Sequence = (2, 5, 10, 20, 50),
                           s_grid: Optional[Sequence] = None,
                           precision_bits: int = DEFAULT_PRECISION) -> dict:
    """Run every appendix inequality and report pass/fail with log2 margins.

    ``s_grid`` holds the ``s`` values for core/tower checks; each is paired
    with every ``tau`` in ``tau_grid`` with ``tau >= 50`` and
    ``s in [tau-1, tau]``.  The default tries ``tau-1``, ``tau-1/2``, ``tau``.
    """
    if scheme.mode != "lemma":
        raise DomainError("lemma verification needs a lemma-mode scheme")
    checks = verify_itinerary(scheme)
    for tau in tau_grid:
        fl = verify_first_floor(scheme, tau, precision_bits)
        if _frac(tau) < 2:
            for c in fl:
                c.detail += " (below the tau >= 2 threshold; reported only)"
        checks += fl
        if _frac(tau) >= 50:
            t = _frac(tau)
            grid = s_grid if s_grid is not None else (t - 1, t - Fraction(1, 2), t)
            for s in grid:
                if t - 1 <= _frac(s) <= t:
                    checks += verify_core_and_tower(scheme, t, s, precision_bits)
    below = [c for c in checks if "reported only" in c.detail]
    return {
        "xi": str(scheme.xi), "Xi": scheme.Xi, "q": scheme.q,
        "precision_bits": precision_bits,
        "checks": [c.as_dict() for c in checks],
        "all_passed": all(c.passed for c in checks if c not in below),
    }


# --- brute force ------------------------------------------------------------

@dataclass
class OracleSum:
    value: LogEnclosure
    interval: Interval
    k_max: int
    partial: bool


def brute_force_oracle(scheme: PartitionScheme, tau, lam, k_max: int, sign: int = 1,
                       precision_bits: int = DEFAULT_PRECISION) -> OracleSum:
    """``sum_{k=0..k_max} pi_k`` term by term, ``N`` and ``B`` from ``block_counters``.

    ``partial`` is set when ``k_max + 1`` is not a block boundary.
    """
    prec = precision_bits
    d, u, _ = _contexts(prec)
    tau_i, lam_i = _iv(tau, prec), _iv(lam, prec)
    xi_i = Interval(scheme.xi, prec=prec)
    lo, hi = mpfr(0), mpfr(0)
    for k in range(k_max + 1):
        N, B = block_counters(scheme, k)
        e = -(lam_i * k) - tau_i * N + sign * (xi_i * tau_i * B)
        lo = d.add(lo, d.exp2(e.lo))
        hi = u.add(hi, u.exp2(e.hi))
    nxt = k_max + 1
    boundary = nxt == 1 or any(
        nxt in (a, b) for a, b, _, _ in (partition_endpoints(scheme, s) for s in range(8)))
    iv = Interval._raw(lo, hi, prec)
    return OracleSum(LogEnclosure.from_interval(iv), iv, k_max, not boundary)


def _sum_terms(k0: int, k1: int, w0: Interval, ratios: Sequence[Interval], weights, prec):
    """Directed sums of ``weight(k) * w_k`` for ``k0 <= k < k1``,
    ``w_{k+1} = w_k * prod(ratios)``; ``weights`` maps names to ``k -> int``."""
    d, u, _ = _contexts(prec)
    acc = {n: [mpfr(0), mpfr(0)] for n in weights}
    wl, wh = w0.lo, w0.hi
    for k in range(k0, k1):
        for n, fn in weights.items():
            c = fn(k)
            if c:
                acc[n][0] = d.add(acc[n][0], d.mul(wl, c))
                acc[n][1] = u.add(acc[n][1], u.mul(wh, c))
        for r in ratios:
            wl, wh = d.mul(wl, r.lo), u.mul(wh, r.hi)
    return {n: Interval._raw(v[0], v[1], prec) for n, v in acc.items()}


def brute_force_block(scheme: PartitionScheme, s: int, tau, lam,
                      precision_bits: int = DEFAULT_PRECISION) -> Dict[str, Interval]:
    """Every block series of ``block_sums`` by explicit summation over ``k``.

    Each block uses its own closed-form ``N`` and ``B``, so overlapping
    blocks (tiny ``q`` in oracle mode) are handled independently.
    """
    prec = precision_bits
    q, Xi = scheme.q, scheme.Xi
    tau_i, lam_i = _iv(tau, prec), _iv(lam, prec)
    xi_i = Interval(scheme.xi, prec=prec)
    a, b, nI, nJ = partition_endpoints(scheme, s)
    rl, rt = (-lam_i).exp2(), (-tau_i).exp2()
    out = {}
    # I_s: N(k) = k - (a-1) + q s^2 + Xi s, B = 2s+1
    w0 = (-(lam_i * a) - tau_i * (1 + q * s * s + Xi * s)).exp2()
    sums = _sum_terms(a, b, w0, (rl, rt), {"one": lambda k: 1, "k": lambda k: k}, prec)
    sh = xi_i * tau_i * (2 * s + 1)
    out["I_plus"] = sh.exp2() * sums["one"]
    out["I_minus"] = (-sh).exp2() * sums["one"]
    out["tildeI_plus"] = sh.exp2() * sums["k"]
    # J_s: N constant, B = 2s+2
    K0 = b + s * s
    w0 = (-(lam_i * b)).exp2()
    sums = _sum_terms(b, b + max(nJ, 0), w0, (rl,),
                      {"one": lambda k: 1, "k": lambda k: k, "hat": lambda k: max(0, k + 1 - K0)}, prec)
    E = {sg: (-(tau_i * (q * (s + 1) ** 2)) - (Xi - sg * 2 * xi_i) * tau_i * (s + 1)).exp2()
         for sg in (1, -1)}
    out["J_plus"] = E[1] * sums["one"]
    out["J_minus"] = E[-1] * sums["one"]
    out["tildeJ_plus"] = E[1] * sums["k"]
    out["hatJ_plus"] = E[1] * sums["hat"]
    out["hatJ_minus"] = E[-1] * sums["hat"]
    return out
