"""
Directed-rounding interval arithmetic on MPFR numbers, and a base-2
logarithmic scalar used to report enclosures of astronomically large or
small nonnegative quantities.

MPFR's binary exponent range (about +-2**30) already holds numbers like
``2**(q * s**3)`` for the parameter scales used here, so intervals store
plain mpfr endpoints; ``LogScalar`` is the reporting format.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .errors import DomainError, PrecisionExhausted

DEFAULT_PRECISION = int(os.environ.get("ZEROTEMP_PRECISION", "256"))


@lru_cache(maxsize=None)
def _contexts(prec: int):
    down = gmpy2.context(precision=prec, round=gmpy2.RoundDown)
    up = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
    near = gmpy2.context(precision=prec, round=gmpy2.RoundToNearest)
    return down, up, near


def _convert(x, prec, ctx):
    if isinstance(x, Fraction):
        x = mpq(x.numerator, x.denominator)
    elif isinstance(x, int) and not isinstance(x, bool):
        x = mpz(x)
    elif isinstance(x, str):
        x = mpq(Fraction(x).numerator, Fraction(x).denominator)
    return mpfr(x, prec, ctx)


class Interval:
    """Closed interval ``[lo, hi]`` with outward-rounded arithmetic."""

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo, hi=None, prec: int = DEFAULT_PRECISION):
        d, u, _ = _contexts(prec)
        if hi is None:
            hi = lo
        self.lo = _convert(lo, prec, d)
        self.hi = _convert(hi, prec, u)
        self.prec = prec
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def coerce(cls, x, prec: int = DEFAULT_PRECISION) -> "Interval":
        if isinstance(x, Interval):
            return x
        return cls(x, prec=prec)

    @classmethod
    def _raw(cls, lo, hi, prec):
        iv = object.__new__(cls)
        iv.lo, iv.hi, iv.prec = lo, hi, prec
        return iv

    def _ctx(self):
        return _contexts(self.prec)

    def __repr__(self):
        return f"Interval({float(self.lo)!r}, {float(self.hi)!r})"

    # arithmetic
    def __add__(self, o):
        o = Interval.coerce(o, self.prec)
        d, u, _ = self._ctx()
        return Interval._raw(d.add(self.lo, o.lo), u.add(self.hi, o.hi), self.prec)

    __radd__ = __add__

    def __neg__(self):
        # plain unary minus would round to the global (53-bit) context
        d, u, _ = self._ctx()
        return Interval._raw(d.minus(self.hi), u.minus(self.lo), self.prec)

    def __sub__(self, o):
        return self + (-Interval.coerce(o, self.prec))

    def __rsub__(self, o):
        return Interval.coerce(o, self.prec) - self

    def __mul__(self, o):
        o = Interval.coerce(o, self.prec)
        d, u, _ = self._ctx()
        if self.lo >= 0 and o.lo >= 0:
            return Interval._raw(d.mul(self.lo, o.lo), u.mul(self.hi, o.hi), self.prec)
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return Interval._raw(min(d.mul(a, b) for a, b in pairs),
                             max(u.mul(a, b) for a, b in pairs), self.prec)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = Interval.coerce(o, self.prec)
        if o.lo <= 0 <= o.hi:
            raise DomainError("division by an interval containing 0")
        d, u, _ = self._ctx()
        pairs = [(a, b) for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return Interval._raw(min(d.div(a, b) for a, b in pairs),
                             max(u.div(a, b) for a, b in pairs), self.prec)

    def __rtruediv__(self, o):
        return Interval.coerce(o, self.prec) / self

    def __pow__(self, n: int):
        if n == 2 and self.lo >= 0:
            return self * self
        out = Interval(1, prec=self.prec)
        for _ in range(n):
            out = out * self
        return out

    def _mono(self, name):
        d, u, _ = self._ctx()
        return Interval._raw(getattr(d, name)(self.lo), getattr(u, name)(self.hi), self.prec)

    def exp(self):
        return self._mono("exp")

    def exp2(self):
        return self._mono("exp2")

    def expm1(self):
        return self._mono("expm1")

    def log(self):
        return self._mono("log")

    def log2(self):
        return self._mono("log2")

    def log1p(self):
        return self._mono("log1p")

    # queries
    @property
    def width(self):
        return self._ctx()[1].sub(self.hi, self.lo)

    @property
    def mid(self):
        near = _contexts(self.prec)[2]
        return near.div(near.add(self.lo, self.hi), 2)

    def contains(self, x) -> bool:
        x = Interval.coerce(x, self.prec)
        return self.lo <= x.lo and x.hi <= self.hi

    def certainly_le(self, o) -> bool:
        return self.hi <= Interval.coerce(o, self.prec).lo

    def hull(self, o):
        o = Interval.coerce(o, self.prec)
        return Interval._raw(min(self.lo, o.lo), max(self.hi, o.hi), self.prec)


def ln2(prec: int = DEFAULT_PRECISION) -> Interval:
    d, u, _ = _contexts(prec)
    return Interval._raw(d.const_log2(), u.const_log2(), prec)


def pow2(x, prec: int = DEFAULT_PRECISION) -> Interval:
    """Enclosure of ``2**x`` (exact for integer ``x``)."""
    return Interval.coerce(x, prec).exp2()


def one_minus_pow2(x, prec: int = DEFAULT_PRECISION) -> Interval:
    """``1 - 2**(-x)`` for ``x > 0`` without cancellation."""
    y = Interval.coerce(x, prec) * ln2(prec)
    return -((-y).expm1())


# --- log-domain scalars -------------------------------------------------

_ROUNDINGS = ("down", "up", "nearest")


def _pick(iv: Interval, rounding: str):
    if rounding == "down":
        return iv.lo
    if rounding == "up":
        return iv.hi
    return iv.mid


@dataclass(frozen=True)
class LogScalar:
    """A nonnegative number stored as ``log2`` (``-inf`` encodes zero)."""

    log2_value: object
    rounding: str = "nearest"
    precision_bits: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.rounding not in _ROUNDINGS:
            raise DomainError(f"unknown rounding {self.rounding!r}")

    @classmethod
    def zero(cls, rounding="nearest", prec=DEFAULT_PRECISION):
        return cls(mpfr("-inf"), rounding, prec)

    @classmethod
    def from_interval(cls, iv: Interval, rounding: str) -> "LogScalar":
        if iv.lo < 0:
            raise DomainError("LogScalar needs a nonnegative value")
        if rounding == "down":
            v = iv.lo
            lg = mpfr("-inf") if v == 0 else _contexts(iv.prec)[0].log2(v)
        elif rounding == "up":
            lg = _contexts(iv.prec)[1].log2(iv.hi)
        else:
            lg = _contexts(iv.prec)[2].log2(iv.mid)
        return cls(lg, rounding, iv.prec)

    @property
    def is_zero(self) -> bool:
        return gmpy2.is_infinite(self.log2_value) and self.log2_value < 0

    def _iv(self) -> Interval:
        return Interval(self.log2_value, prec=self.precision_bits)

    def __mul__(self, other: "LogScalar") -> "LogScalar":
        if self.is_zero or other.is_zero:
            return LogScalar.zero(self.rounding, self.precision_bits)
        return LogScalar(_pick(self._iv() + other._iv(), self.rounding),
                         self.rounding, self.precision_bits)

    def __add__(self, other: "LogScalar") -> "LogScalar":
        return logaddexp2(self, other)

    def __float__(self):
        return float(self.log2_value)

    def __repr__(self):
        return f"LogScalar(log2={float(self.log2_value):.12g}, {self.rounding})"


def logaddexp2(a: LogScalar, b: LogScalar) -> LogScalar:
    """``log2(2**a + 2**b)`` anchored at the larger argument."""
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if a.log2_value < b.log2_value:
        a, b = b, a
    prec = a.precision_bits
    diff = b._iv() - a._iv()
    corr = diff.exp2().log1p() / ln2(prec)
    return LogScalar(_pick(a._iv() + corr, a.rounding), a.rounding, prec)


def log1mexp2(x, rounding: str = "nearest", prec: int = DEFAULT_PRECISION) -> LogScalar:
    """``log2(1 - 2**(-x))`` for ``x > 0``, through ``expm1``."""
    xi = Interval.coerce(x, prec)
    if xi.lo <= 0:
        raise DomainError("log1mexp2 needs x > 0")
    val = one_minus_pow2(xi, prec).log() / ln2(prec)
    return LogScalar(_pick(val, rounding), rounding, prec)


@dataclass(frozen=True)
class LogEnclosure:
    """A pair of log2 bounds ``lo <= log2(value) <= hi``."""

    lo: LogScalar
    hi: LogScalar

    @classmethod
    def from_interval(cls, iv: Interval) -> "LogEnclosure":
        return cls(LogScalar.from_interval(iv, "down"), LogScalar.from_interval(iv, "up"))

    def to_interval(self) -> Interval:
        prec = self.lo.precision_bits
        lo = Interval(0, prec=prec) if self.lo.is_zero else Interval(self.lo.log2_value, prec=prec).exp2()
        hi = Interval(self.hi.log2_value, prec=prec).exp2()
        return Interval._raw(lo.lo, hi.hi, prec)

    @property
    def log2_width(self):
        if self.lo.is_zero:
            return mpfr("inf") if not self.hi.is_zero else mpfr(0)
        return _contexts(self.hi.precision_bits)[1].sub(self.hi.log2_value, self.lo.log2_value)

    def check_width(self, limit=mpfr(2) ** -8, what="value"):
        if self.log2_width > limit and not self.hi.is_zero:
            raise PrecisionExhausted(
                f"{what}: log2 enclosure width {float(self.log2_width):.3g} exceeds "
                f"{float(limit):.3g}; increase precision_bits")
        return self

    def as_floats(self):
        return float(self.lo.log2_value), float(self.hi.log2_value)

    def __repr__(self):
        lo, hi = self.as_floats()
        return f"LogEnclosure(log2 in [{lo:.12g}, {hi:.12g}])"
