"""
Sign-driven hat itineraries over the block partition, their binary
projections, and the temperature bookkeeping that decides which block
family (and so which periodic orbit) dominates at a given ``t``.

Block ``J_1`` already has about ``2**(8q)`` entries, so a hat sequence is
never materialized: ``HatSequence.symbol(j)`` locates ``j + 1`` in the
partition with exact integer arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .appendix import PartitionScheme, _lambda_iv, block_sums, partition_endpoints
from .errors import AmbiguousPrediction, DomainError, PrecisionExhausted
from .logscalar import DEFAULT_PRECISION, LogEnclosure

ZERO, PLUS, MINUS = "0", "1+", "1-"
_LN2 = math.log(2)
# largest block exponent q(s+1)^3 that MPFR can still represent
_EXP_LIMIT = 1 << 29


def scheduler_scheme(xi, q: Optional[int] = None) -> PartitionScheme:
    """Lemma-mode scheme with the least ``q >= 50(Xi+1)`` making ``q + Xi`` even."""
    base = PartitionScheme.standard(xi)
    if q is None:
        q = base.q + ((base.q + base.Xi) % 2)
    return PartitionScheme(base.xi, base.Xi, q)


def _block_of(scheme: PartitionScheme, k: int):
    """``(s, in_I)`` with ``k`` in ``I_s`` (``in_I``) or ``J_s``."""
    if k < 1:
        raise DomainError("positions start at 1")
    q = scheme.q
    e = k.bit_length() - 1                      # a_s <= k  iff  q s^3 <= e
    s = int(round((e / q) ** (1 / 3))) + 1
    while q * s**3 > e:
        s -= 1
    a, b, _, _ = partition_endpoints(scheme, s)
    return s, k < b


def _sign_char(x) -> str:
    if x in ("+", 1, "1+", True):
        return "+"
    if x in ("-", -1, "1-", False):
        return "-"
    raise DomainError(f"sign must be '+' or '-', got {x!r}")


@dataclass
class HatSequence:
    signs: List[str]                 # signs[m-1] is the sign for m >= 1
    scheme: PartitionScheme
    j_max: Optional[int] = None

    def block(self, j: int):
        return _block_of(self.scheme, j + 1)

    def symbol(self, j: int) -> str:
        if j < 0:
            raise DomainError("j must be nonnegative")
        if self.j_max is not None and j > self.j_max:
            raise DomainError(f"j={j} exceeds j_max={self.j_max}")
        s, in_I = self.block(j)
        if in_I:
            return ZERO
        if s == 0:
            return PLUS
        m = -(-s // 4)
        if m > len(self.signs):
            raise DomainError(f"sign prefix too short: block J_{s} needs the sign for m={m}")
        return PLUS if self.signs[m - 1] == "+" else MINUS

    def window(self, j0: int, j1: int) -> List[str]:
        """Symbols for ``j0 <= j < j1``, one lookup per block run."""
        out = []
        j = j0
        while j < j1:
            sym = self.symbol(j)
            s, in_I = self.block(j)
            a, b, _, _ = partition_endpoints(self.scheme, s)
            end = (b if in_I else partition_endpoints(self.scheme, s + 1)[0]) - 1
            stop = min(j1, end)
            out.extend([sym] * (stop - j))
            j = stop
        return out

    def __getitem__(self, j):
        if isinstance(j, slice):
            return self.window(j.start or 0, j.stop)
        return self.symbol(j)


def build_hat_sequence(sign_prefix: Sequence, scheme: PartitionScheme, j_max: Optional[int] = None) -> HatSequence:
    """Hat itinerary: ``0`` on ``I`` blocks, ``1+`` on ``J_0``, ``1^sign(m)`` on ``J_{4m-3..4m}``."""
    if (scheme.q + scheme.Xi) % 2:
        raise DomainError(f"q + Xi must be even (q={scheme.q}, Xi={scheme.Xi})")
    # the 1- blocks are the J_s with s >= 1; their ends a_s, b_s are even
    for s in range(1, 4):
        a, b, _, nJ = partition_endpoints(scheme, s)
        if a % 2 or b % 2 or nJ % 2:
            raise DomainError(f"odd block endpoint at s={s}")
    return HatSequence([_sign_char(x) for x in sign_prefix], scheme, j_max)


def project_itinerary(hat: HatSequence, j_range) -> List[int]:
    """Binary itinerary: ``1-`` becomes 0 on even ``j`` and 1 on odd ``j``."""
    j0, j1 = (j_range.start, j_range.stop) if isinstance(j_range, range) else j_range
    syms = hat.window(j0, j1)
    out = []
    for j, x in zip(range(j0, j1), syms):
        if x == ZERO:
            out.append(0)
        elif x == PLUS:
            out.append(1)
        else:
            out.append(j % 2)
    return out


def check_compatibility(binary: Sequence[int], hat, j0: int = 0) -> bool:
    """Clause check: 0 under ``0``, 1 under ``1+``, a switch inside each ``1- 1-`` pair.

    ``hat`` is a ``HatSequence`` (queried from ``j0``) or an explicit list.
    """
    n = len(binary)
    syms = hat.window(j0, j0 + n + 1) if isinstance(hat, HatSequence) else list(hat)
    if len(syms) < n:
        raise DomainError("hat window shorter than the binary sequence")
    for i in range(n):
        x = syms[i]
        if x == ZERO and binary[i] != 0:
            return False
        if x == PLUS and binary[i] != 1:
            return False
        if x == MINUS and i + 1 < n and i + 1 < len(syms) and syms[i + 1] == MINUS:
            if binary[i] == binary[i + 1]:
                return False
    return True


def check_hat_invariants(hat: HatSequence, j0: int, j1: int) -> Dict[str, bool]:
    """The three hat-sequence invariants on the window ``[j0, j1)``.

    Maximal ``1-`` blocks are judged by their exact block extent, so blocks
    cut by the window edges are still measured in full.
    """
    syms = hat.window(j0, j1)
    adjacent = all(not ({a, b} == {PLUS, MINUS}) for a, b in zip(syms, syms[1:]))
    even = True
    seen = set()
    for j, x in zip(range(j0, j1), syms):
        if x != MINUS:
            continue
        s, _ = hat.block(j)
        if s in seen:
            continue
        seen.add(s)
        _, b, _, nJ = partition_endpoints(hat.scheme, s)
        a_next = b + nJ
        # neighbors of J_s must not extend the run
        before = hat.symbol(b - 2)
        after = hat.symbol(a_next - 1)
        even = even and nJ % 2 == 0 and before != MINUS and after != MINUS
    q = hat.scheme.q
    first = j0 >= q or all(x == ZERO for x in syms[: max(0, q - j0)])
    return {"sigma_hat": adjacent, "even_minus_blocks": even, "first_q_zero": first}


# -- temperatures --------------------------------------------------------------

@dataclass(frozen=True)
class TemperatureWindow:
    m: int
    m_hat: int
    A: float
    t_low: float
    t_high: float
    predicted_sign: Optional[str] = None

    def tau(self, t: float) -> float:
        return 4 * t / self.A


def scale_A(theta: float) -> float:
    if not theta > 1:
        raise DomainError(f"theta must exceed 1 (got {theta}); no admissible window")
    return 4 * _LN2 / math.log(theta)


def tau_of(t: float, theta: float) -> float:
    return math.log(theta) / _LN2 * t


def temperature_window(theta: float, m: int, m_hat: int, signs: Optional[Sequence] = None) -> TemperatureWindow:
    if m_hat < m:
        raise DomainError("m_hat must be at least m")
    A = scale_A(theta)
    pred = None
    if signs is not None:
        window = {_sign_char(signs[k - 1]) for k in range(m, m_hat + 1) if k <= len(signs)}
        pred = window.pop() if len(window) == 1 else None
    return TemperatureWindow(m, m_hat, A, A * m, A * m_hat, pred)


@dataclass
class PressureBand:
    t: float
    tau: float
    P_minus: float
    P_plus: float
    log2_lambda_minus: float      # log2 lam(tau), sets P-
    log2_lambda_plus: float       # log2 lam(tau - 1), sets P+
    log2_gap: float               # log2 of (P+ - P-) * 3 / log 2
    asymptote: bool
    negative: bool


def _log2_lambda(scheme, s: float, prec: int):
    """``(log2 lam(s), underflowed)``."""
    if scheme.q * (s + 1) ** 3 >= _EXP_LIMIT:
        return -math.inf, True
    enc = LogEnclosure.from_interval(_lambda_iv(scheme, Fraction(s).limit_denominator(1 << 40), prec))
    return float(enc.hi.log2_value), False


def pressure_band(t: float, chi_crit: float, theta: float, scheme: PartitionScheme,
                  precision_bits: int = DEFAULT_PRECISION) -> PressureBand:
    """``P- = -t chi/2 + (log 2/3) lam(tau)`` and ``P+`` the same with ``lam(tau - 1)``."""
    tau = tau_of(t, theta)
    if tau < 2:
        raise DomainError(f"tau = {tau:.6g} < 2")
    lm, u1 = _log2_lambda(scheme, tau, precision_bits)
    lp, u2 = _log2_lambda(scheme, tau - 1, precision_bits)
    base = -t * chi_crit / 2
    lam_m = 2.0 ** lm if lm > -1075 else 0.0
    lam_p = 2.0 ** lp if lp > -1075 else 0.0
    Pm = base + _LN2 / 3 * lam_m
    Pp = base + _LN2 / 3 * lam_p
    if math.isinf(lp):
        gap = -math.inf
    elif math.isinf(lm):
        gap = lp
    else:
        gap = lp + math.log2(-math.expm1((lm - lp) * _LN2))
    asym = u1 or u2 or lam_p == 0.0 or abs(_LN2 / 3 * lam_p) < abs(base) * 2.0**-52
    return PressureBand(t, tau, Pm, Pp, lm, lp, gap, asym, Pm <= Pp < 0)


# -- predictions ---------------------------------------------------------------

def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else x


@dataclass
class BlockPrediction:
    sign: str
    tau: float
    m0: int
    blocks: List[int]
    block_signs: List[str]
    hatJ_minus: Dict[int, Optional[tuple]] = field(default_factory=dict)
    certified: bool = False


def dominant_block_report(t: float, theta: float, scheme: PartitionScheme, sign_prefix: Sequence,
                          evaluate_series: bool = True,
                          precision_bits: int = DEFAULT_PRECISION) -> BlockPrediction:
    """Sign of the ``J`` blocks ``ceil(tau)-3 .. ceil(tau)`` that dominate at ``t``."""
    signs = [_sign_char(x) for x in sign_prefix]
    tau = _snap(tau_of(t, theta))
    if tau <= 0:
        raise DomainError("t must be positive")
    m0 = math.ceil(_snap(tau / 4))
    top = math.ceil(tau)
    blocks = [s for s in range(top - 3, top + 1) if s >= 1]
    labels = []
    for s in blocks:
        m = -(-s // 4)
        if m > len(signs):
            raise DomainError(f"sign prefix too short: block J_{s} needs the sign for m={m}")
        labels.append(signs[m - 1])
    if len(set(labels)) != 1:
        raise AmbiguousPrediction(f"blocks {blocks} carry signs {labels} at tau={tau:.6g}")
    if m0 > len(signs):
        raise DomainError(f"sign prefix too short: need the sign for m={m0}")
    hat = {}
    if evaluate_series:
        lam2, under = _log2_lambda(scheme, tau, precision_bits)
        for s in blocks:
            if under or scheme.q * (s + 1) ** 3 >= _EXP_LIMIT:
                hat[s] = None
                continue
            lam = _lambda_iv(scheme, Fraction(tau).limit_denominator(1 << 40), precision_bits)
            try:
                bs = block_sums(scheme, s, Fraction(tau).limit_denominator(1 << 40), lam, precision_bits)
                hat[s] = bs.hatJ_minus.as_floats()
            except PrecisionExhausted:
                hat[s] = None
    return BlockPrediction(signs[m0 - 1] if labels[0] == signs[m0 - 1] else labels[0],
                           tau, m0, blocks, labels, hat, tau >= 50)


def dominant_block_prediction(t: float, theta: float, scheme: PartitionScheme, sign_prefix: Sequence) -> str:
    """``'+'`` or ``'-'``: which periodic orbit the Gibbs state should favor at ``t``."""
    return dominant_block_report(t, theta, scheme, sign_prefix, evaluate_series=False).sign


@dataclass
class Schedule:
    betas: List[float]
    A_sup: float
    A_inf: float
    m: List[int]
    growth_ok: List[bool]
    violations: List[int]
    signs: List[str]          # signs[m-1] for m = 1 .. m(last)

    @property
    def growth_holds(self) -> bool:
        return not self.violations

    def as_dict(self):
        return {"betas": self.betas, "A_sup": self.A_sup, "A_inf": self.A_inf, "m": self.m,
                "growth_ok": self.growth_ok, "violations": self.violations,
                "growth_holds": self.growth_holds, "sign_prefix": "".join(self.signs)}


def schedule_from_temperatures(beta_list: Sequence[float], A_sup: float, A_inf: float) -> Schedule:
    """``m(l) = floor(beta_l / A_sup)`` and signs ``+`` on ``[m(l), m(l+1))`` for even ``l``, ``-`` for odd.

    Violations of ``beta_{l+1} >= A_sup (beta_l / A_inf + 2)`` are listed by the index ``l``.
    """
    betas = [float(b) for b in beta_list]
    if not 0 < A_inf <= A_sup:
        raise DomainError("need 0 < A_inf <= A_sup")
    if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise DomainError("beta_list must be increasing")
    ms = [math.floor(_snap(b / A_sup)) for b in betas]
    ok = [betas[l + 1] >= A_sup * (betas[l] / A_inf + 2) for l in range(len(betas) - 1)]
    viol = [l for l, g in enumerate(ok) if not g]
    signs = []
    if ms:
        for m in range(1, ms[-1] + 1):
            l = max((i for i, mi in enumerate(ms) if mi <= m), default=None)
            signs.append("+" if l is None or l % 2 == 0 else "-")
    return Schedule(betas, A_sup, A_inf, ms, ok, viol, signs)
