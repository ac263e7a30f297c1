"""
Quadratic maps and their basic complex dynamics.

The standard family is ``z -> z**2 + c``.  A *deformed* map is an arbitrary
polynomial given by its coefficient list (constant term first); it is what
:mod:`zerotemp.deformation` produces.

Potentials, Böttcher coordinates and external rays are computed for the
standard family only.  Every orbit derivative is accumulated as a sum of
``log|Df|`` so long orbits never overflow.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NoConvergence, OrbitOverflow

# landing is declared when the last LANDING_TAIL vertices fit in this diameter
LANDING_TOL = 1e-8
LANDING_TAIL = 16
SUBSTEPS = 8            # potential levels per halving
MAX_DENOMINATOR = 2**31
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticMap:
    """A polynomial map of the plane.

    Parameters
    ----------
    kind : {"standard", "deformed"}
    c_or_lambda : complex
        The parameter ``c`` (standard) or ``lambda`` (deformed).  For both
        kinds this is the critical value, i.e. the image of 0.
    coefficients : tuple of complex
        Ascending coefficients; filled in for the deformed kind only.
    """

    kind: str
    c_or_lambda: complex
    coefficients: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("standard", "deformed"):
            raise DomainError(f"unknown map kind {self.kind!r}")
        if self.kind == "deformed" and len(self.coefficients) < 3:
            raise DomainError("deformed map needs at least a quadratic term")

    @classmethod
    def standard(cls, c) -> "QuadraticMap":
        return cls("standard", complex(c))

    @classmethod
    def deformed(cls, lam, coefficients: Sequence) -> "QuadraticMap":
        return cls("deformed", complex(lam), tuple(complex(a) for a in coefficients))

    @property
    def c(self) -> complex:
        return self.c_or_lambda

    @property
    def is_real(self) -> bool:
        if self.c_or_lambda.imag != 0.0:
            return False
        return all(a.imag == 0.0 for a in self.coefficients)

    @property
    def degree(self) -> int:
        return 2 if self.kind == "standard" else len(self.coefficients) - 1

    def _real_coeffs(self):
        return [a.real for a in self.coefficients] if self.is_real else list(self.coefficients)

    def __call__(self, z):
        if self.kind == "standard":
            c = self.c_or_lambda.real if self.is_real else self.c_or_lambda
            return z * z + c
        coeffs = self._real_coeffs()
        acc = coeffs[-1] * np.ones_like(z) if isinstance(z, np.ndarray) else coeffs[-1]
        for a in reversed(coeffs[:-1]):
            acc = acc * z + a
        return acc

    def derivative(self, z):
        if self.kind == "standard":
            return 2 * z
        coeffs = self._real_coeffs()
        n = len(coeffs) - 1
        acc = n * coeffs[-1] * (np.ones_like(z) if isinstance(z, np.ndarray) else 1)
        for i in range(n - 1, 0, -1):
            acc = acc * z + i * coeffs[i]
        return acc

    def second_derivative(self, z):
        if self.kind == "standard":
            return 2.0 + 0 * z
        coeffs = self._real_coeffs()
        n = len(coeffs) - 1
        acc = n * (n - 1) * coeffs[-1]
        for i in range(n - 1, 1, -1):
            acc = acc * z + i * (i - 1) * coeffs[i]
        return acc

    def iterate(self, z, n: int):
        for _ in range(n):
            z = self(z)
        return z

    def iterate_with_derivative(self, z, n: int):
        """Return ``(f^n(z), Df^n(z))`` as raw values (may overflow)."""
        d = 1.0
        for _ in range(n):
            d = d * self.derivative(z)
            z = self(z)
        return z, d


@dataclass
class OrbitTrace:
    points: list
    log_abs_derivative_prefix: list
    escaped_at: Optional[int]
    escape_radius: float


@dataclass
class GreenValue:
    value: float
    error_bound: float
    iterations_used: int


@dataclass
class RayPolyline:
    angle: Fraction
    vertices: list
    potential_levels: list
    landing_point: Optional[complex] = None
    landing_certified: bool = False
    diagnostic: str = ""


@dataclass
class FixedPointPair:
    alpha: complex
    beta: complex
    alpha_multiplier: complex
    beta_multiplier: complex


def default_escape_radius(f: QuadraticMap) -> float:
    return max(4.0, abs(f.c_or_lambda) + 2.0)


def iterate_orbit(f: QuadraticMap, z0, max_steps: int, escape_radius: float = 4.0,
                  stop_on_escape: bool = False) -> OrbitTrace:
    """Iterate ``f`` from ``z0`` for ``max_steps`` steps.

    ``escaped_at`` is the first index whose point has modulus above
    ``escape_radius``.  With ``stop_on_escape`` the orbit ends there,
    otherwise it runs the full budget (until a value overflows).

    Examples
    --------
    >>> tr = iterate_orbit(QuadraticMap.standard(0), 2, 3, escape_radius=3)
    >>> tr.escaped_at
    1
    """
    if max_steps < 1:
        raise DomainError("max_steps must be at least 1")
    if escape_radius < 2:
        raise DomainError("escape_radius must be at least 2")
    z = complex(z0)
    points = [z]
    logs = [0.0]
    escaped = 0 if abs(z) > escape_radius else None
    step = 0
    while step < max_steps and not (stop_on_escape and escaped is not None):
        d = f.derivative(z)
        z = f(z)
        step += 1
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise OrbitOverflow(step)
        ad = abs(d)
        logs.append(logs[-1] + (math.log(ad) if ad > 0 else -math.inf))
        points.append(z)
        if escaped is None and abs(z) > escape_radius:
            escaped = step
    return OrbitTrace(points, logs, escaped, escape_radius)


def _require_standard(f: QuadraticMap, what: str):
    if f.kind != "standard":
        raise DomainError(f"{what} is implemented for the standard family only")


def green_potential(f: QuadraticMap, z, tolerance: float = 1e-12, budget: int = 2000) -> GreenValue:
    """Escape-rate potential ``G_c(z)`` with a rigorous tail bound.

    After the orbit passes ``R0 = max(4, |c|+2)`` the error of
    ``2**-n log|z_n|`` is at most ``2**-n * (-log(1 - |c|/|z_n|**2))``;
    iteration continues until that bound is below ``tolerance``.
    """
    _require_standard(f, "green_potential")
    if tolerance <= 0:
        raise DomainError("tolerance must be positive")
    c = f.c
    ac = abs(c)
    r0 = default_escape_radius(f)
    z = complex(z)
    n = 0
    while abs(z) <= r0:
        if n >= budget:
            return GreenValue(0.0, 0.0, budget)
        z = z * z + c
        n += 1
    # log-domain continuation once |z| is beyond R0
    logz = math.log(abs(z))
    while True:
        ratio = ac * math.exp(-2.0 * logz)
        tail = -math.log1p(-ratio) if ratio > 0 else 0.0
        bound = math.ldexp(tail, -n)
        if bound <= tolerance or ratio == 0.0:
            return GreenValue(math.ldexp(logz, -n), bound, n)
        if logz < 300:
            z = z * z + c
            logz = math.log(abs(z))
        else:
            logz = 2 * logz
        n += 1


def boettcher(f: QuadraticMap, z, margin: float = 1e-9) -> complex:
    """Böttcher coordinate by iterated square roots.

    Far out the product ``z * prod (1 + c/z_k**2)**(1/2**(k+1))`` converges
    with principal branches.  Closer in, ``phi(z_k)`` is obtained from
    ``phi(z_{k+1})`` by a square root, choosing the root on the same side
    as ``z_k`` (``phi(z)/z`` stays near 1 on the basin of infinity).
    """
    _require_standard(f, "boettcher")
    c = f.c
    z = complex(z)
    g0 = green_potential(f, c).value / 2
    gz = green_potential(f, z).value
    if gz <= g0 + margin:
        raise DomainError(f"G(z)={gz:.3g} does not exceed G(0)+margin={g0 + margin:.3g}")
    big = 2.0 * max(1.0, math.sqrt(abs(c)))
    orbit = [z]
    while abs(orbit[-1]) <= big:
        orbit.append(orbit[-1] ** 2 + c)
    # product formula from the first large point
    w = orbit[-1]
    phi = w
    zk = w
    scale = 0.5
    for _ in range(64):
        term = c / (zk * zk)
        if abs(term) < 1e-18:
            break
        phi *= cmath.exp(scale * cmath.log(1 + term))
        zk = zk * zk + c
        scale *= 0.5
    for zk in reversed(orbit[:-1]):
        r = cmath.sqrt(phi)
        phi = r if (r * zk.conjugate()).real >= 0 else -r
    return phi


def _exact_angle(angle) -> Fraction:
    a = Fraction(angle) % 1
    if a.denominator > MAX_DENOMINATOR:
        raise DomainError("angle denominator exceeds 2**31")
    return a


def _ray_point(f: QuadraticMap, angle: Fraction, v: float, seed: complex, max_newton: int = 60):
    """Newton-solve ``f^n(z) = exp(2**n (v + 2 pi i angle))`` near ``seed``."""
    c = f.c
    n = max(0, math.ceil(math.log2(20.0 / v)))
    rot = (angle * 2**n) % 1
    target_log = complex(v * 2.0**n, 2 * math.pi * float(rot))
    z = seed
    prev = math.inf
    for _ in range(max_newton):
        w, d = z, 1.0 + 0j
        for _ in range(n):
            d = 2 * w * d
            w = w * w + c
        # compare in log coordinates: log f^n(z) - target, branch of nearest angle
        lw = cmath.log(w)
        diff = lw - target_log
        diff = complex(diff.real, (diff.imag + math.pi) % (2 * math.pi) - math.pi)
        step = diff * w / d
        z = z - step
        a = abs(step)
        if a <= 1e-15 * max(1.0, abs(z)):
            return z, True
        if a >= prev and a < 1e-12:
            return z, True
        prev = a
    return z, False


def trace_external_ray(f: QuadraticMap, angle, v_min: float = 1e-9, max_steps: int = 4000) -> RayPolyline:
    """Trace the external ray of a rational angle down to potential ``v_min``.

    Levels are ``v_k = 2 * 2**(-k/8)``; each vertex is Newton-corrected from
    the previous one.  On Newton failure the partial polyline is returned
    with ``landing_certified`` false and a diagnostic.
    """
    _require_standard(f, "trace_external_ray")
    if v_min <= 0:
        raise DomainError("v_min must be positive")
    ang = _exact_angle(angle)
    verts, levels = [], []
    seed = cmath.exp(complex(2.0, 2 * math.pi * float(ang)))
    k = 0
    diag = ""
    while True:
        v = 2.0 * 2.0 ** (-k / SUBSTEPS)
        if v < v_min or k >= max_steps:
            break
        z, ok = _ray_point(f, ang, v, seed)
        if not ok:
            diag = f"Newton did not converge at potential {v:.3e}"
            break
        verts.append(z)
        levels.append(v)
        seed = z
        k += 1
    ray = RayPolyline(ang, verts, levels, diagnostic=diag)
    if not diag and len(verts) >= LANDING_TAIL:
        tail = verts[-LANDING_TAIL:]
        diam = max(abs(a - b) for a in tail for b in tail)
        ray.landing_point = verts[-1]
        ray.landing_certified = diam < LANDING_TOL
        if not ray.landing_certified:
            ray.diagnostic = f"tail diameter {diam:.3e} above landing tolerance"
    return ray


def newton_fixed_point(f: QuadraticMap, seed: complex, period: int = 1, tol: float = 1e-14, max_iter: int = 100):
    z = complex(seed) if not isinstance(seed, float) else seed
    for _ in range(max_iter):
        w, d = f.iterate_with_derivative(z, period)
        den = d - 1
        if den == 0:
            raise NoConvergence("derivative of f^p - id vanished", z)
        step = (w - z) / den
        z = z - step
        if abs(step) <= tol * max(1.0, abs(z)):
            w = f.iterate(z, period)
            return z
    raise NoConvergence(f"Newton for period {period} did not converge", z)


def fixed_points(f: QuadraticMap) -> FixedPointPair:
    """The two fixed points, ``alpha`` and ``beta`` (beta = landing of ray 0)."""
    c = f.c_or_lambda
    if c == 0.25:
        raise DomainError("c = 1/4: the fixed points coincide")
    r = cmath.sqrt(1 - 4 * c)
    alpha, beta = (1 - r) / 2, (1 + r) / 2
    if f.is_real and (1 - 4 * c).real > 0:
        s = math.sqrt(1 - 4 * c.real)
        beta = (1 + s) / 2
        # alpha = c/beta avoids cancellation in (1 - s)/2
        alpha = c.real / beta
    if f.kind == "deformed":
        alpha = newton_fixed_point(f, alpha)
        beta = newton_fixed_point(f, beta)
    for p in (alpha, beta):
        if abs(f(p) - p) > RESIDUAL_TOL * max(1.0, abs(p)):
            raise NoConvergence("fixed point residual too large", p)
    return FixedPointPair(complex(alpha), complex(beta), complex(f.derivative(alpha)), complex(f.derivative(beta)))


def _minimal_period(f: QuadraticMap, z, period: int, tol: float = 1e-9) -> int:
    w = z
    for d in range(1, period + 1):
        w = f(w)
        if period % d == 0 and abs(w - z) < tol * max(1.0, abs(z)):
            return d
    return period


def refine_periodic_orbit(f: QuadraticMap, seed, period: int) -> list:
    """Newton-refine a periodic point and return its full orbit."""
    if period < 1:
        raise DomainError("period must be >= 1")
    real = f.is_real and isinstance(seed, (float, int))
    z = newton_fixed_point(f, float(seed) if real else complex(seed), period)
    res = abs(f.iterate(z, period) - z)
    if res >= 1e-12 * max(1.0, abs(z)):
        raise NoConvergence(f"residual {res:.2e} after Newton", z)
    mp = _minimal_period(f, z, period)
    if mp != period:
        raise NoConvergence(f"converged to a point of period {mp}, not {period}", z)
    orbit = [z]
    for _ in range(period - 1):
        orbit.append(f(orbit[-1]))
    return orbit


def log_abs_derivative(f: QuadraticMap, orbit: Sequence) -> float:
    """``sum log|Df|`` along the given points."""
    total = 0.0
    for z in orbit:
        d = abs(f.derivative(z))
        if d == 0:
            raise DomainError("derivative vanishes on the orbit (critical point)")
        total += math.log(d)
    return total


def lyapunov_exponent(f: QuadraticMap, periodic_orbit: Sequence, period: Optional[int] = None) -> float:
    """Mean of ``log|Df|`` over one period of a periodic orbit."""
    period = period or len(periodic_orbit)
    pts = list(periodic_orbit)[:period]
    back = f.iterate(pts[-1], 1)
    if abs(back - pts[0]) > 1e-9 * max(1.0, abs(pts[0])):
        raise DomainError("orbit is not periodic within tolerance")
    return log_abs_derivative(f, pts) / period
