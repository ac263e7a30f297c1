"""
The deformed family ``F(w) = lam + w**2 + omega * w**3 * P(w)``.

``P`` vanishes at ``+-beta`` and on the orbits of ``p``, ``p+``, ``p-``
(doubly at every orbit point except ``p-`` itself), so the deformation
agrees with ``z**2 + lam`` there, and the single free coefficient
``omega`` is tuned so that the modulus of the multiplier of the period-6
orbit of ``p-`` becomes the square of the multiplier of ``p+`` under
``g = f**3``.

Coefficients are expanded from the factored form in double-double
arithmetic (error-free transforms) and rounded once at the end.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .dynamics import QuadraticMap, fixed_points
from .errors import DomainError, SingularityError
from .puzzle import cantor_data, CantorData

_SPLIT = 134217729.0  # 2**27 + 1
_EPS = 2.0**-52


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    t = _SPLIT * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_mul_linear(poly, r):
    """Multiply a double-double coefficient list by ``(w - r)``."""
    hi, lo = poly
    n = len(hi)
    nh, nl = [0.0] * (n + 1), [0.0] * (n + 1)
    for i in range(n + 1):
        # new[i] = old[i-1] - r * old[i]
        sh, sl = (hi[i - 1], lo[i - 1]) if i > 0 else (0.0, 0.0)
        if i < n:
            ph, pl = _two_prod(-r, hi[i])
            pl += -r * lo[i]
            s, e = _two_sum(sh, ph)
            e += sl + pl
            sh, sl = _two_sum(s, e)
        nh[i], nl[i] = sh, sl
    return nh, nl


def expand_from_roots(roots) -> List[float]:
    """Coefficients (ascending) of ``prod (w - r)`` for real roots."""
    poly = ([1.0], [0.0])
    for r in roots:
        poly = _dd_mul_linear(poly, float(r))
    return [h + l for h, l in zip(*poly)]


@dataclass
class DeformationData:
    lam: float
    omega: float
    beta: float
    orbit_p: List[float]
    orbit_p_plus: List[float]
    orbit_p_minus: List[float]
    P_roots: List[float]
    dP_at_p_minus: float
    cantor: CantorData


@dataclass
class DeformationReport:
    lam: float
    omega: float
    interpolation_residuals: List[Tuple[str, float]] = field(default_factory=list)
    derivative_residuals: List[Tuple[str, float]] = field(default_factory=list)
    multiplier_identity_residual: float = 0.0
    lyapunov_gap: float = 0.0
    equality_residual: float = 0.0

    @property
    def max_interpolation_residual(self) -> float:
        return max((r for _, r in self.interpolation_residuals), default=0.0)

    @property
    def max_derivative_residual(self) -> float:
        return max((r for _, r in self.derivative_residuals), default=0.0)


def _orbit(c, x, n):
    out = [x]
    for _ in range(n - 1):
        out.append(out[-1] ** 2 + c)
    return out


def deformation_data(lam: float, delta2: float = 2.0) -> DeformationData:
    lam = float(lam)
    cd = cantor_data(lam, delta2)
    beta = fixed_points(QuadraticMap.standard(lam)).beta.real
    op = _orbit(lam, cd.p, 3)
    opp = _orbit(lam, cd.p_plus, 3)
    opm = _orbit(lam, cd.p_minus, 6)
    roots = [beta, -beta]
    for x in op + opp:
        roots += [x, x]
    roots.append(opm[0])
    for x in opm[1:]:
        roots += [x, x]
    pm = opm[0]
    # DP(p-) from the factored form: product of the other factors
    dP = (pm * pm - beta * beta)
    for x in op + opp + opm[1:]:
        dP *= (pm - x) ** 2
    if abs(dP) < 1e-12:
        raise SingularityError(f"|DP(p-)| = {abs(dP):.3e} is numerically zero")
    d3_plus = math.prod(2 * x for x in opp)
    d6_minus = math.prod(2 * x for x in opm)
    # |Df^6(p-)|: near -2 the period-6 multiplier is negative while the
    # squared period-3 multiplier is positive, and only moduli enter chi
    gap = d3_plus**2 / abs(d6_minus) - 1.0
    if abs(gap) <= 64 * _EPS:
        gap = 0.0  # rounding level; keeps F exactly quadratic at lam = -2
    omega = 2.0 / (pm * pm * dP) * gap
    return DeformationData(lam, omega, beta, op, opp, opm, roots, dP, cd)


def build_deformation(lam: float, delta2: float = 2.0) -> QuadraticMap:
    """The deformed polynomial at parameter ``lam`` (degree 28)."""
    dd = deformation_data(lam, delta2)
    P = expand_from_roots(dd.P_roots)
    coeffs = [dd.lam, 0.0, 1.0] + [dd.omega * a for a in P]
    return QuadraticMap.deformed(dd.lam, coeffs)


def omega_of(lam: float) -> float:
    return deformation_data(lam).omega


def factored_eval(dd: DeformationData, w):
    P = 1.0
    for r in dd.P_roots:
        P = P * (w - r)
    return dd.lam + w * w + dd.omega * w**3 * P


def comp_horner(coeffs, x: float) -> Tuple[float, float]:
    """Value and derivative of a real polynomial with compensated Horner."""
    v, ve = 0.0, 0.0
    d, de = 0.0, 0.0
    for a in reversed(coeffs):
        # d <- d*x + v ; v <- v*x + a, carrying the error terms
        p, pe = _two_prod(d, x)
        d, se = _two_sum(p, v)
        de = de * x + ve + pe + se
        p, pe = _two_prod(v, x)
        v, se = _two_sum(p, a)
        ve = ve * x + pe + se
    return v + ve, d + de


def _scale(F: QuadraticMap, x) -> float:
    return sum(abs(a) * abs(x) ** i for i, a in enumerate(F.coefficients))


def verify_interpolation_identities(F: QuadraticMap, delta2: float = 2.0) -> DeformationReport:
    """Residuals of the interpolation and multiplier identities.

    Value residuals are divided by ``sum |a_i| |x|**i``, the natural
    rounding scale of Horner evaluation at ``x``.
    """
    if F.kind != "deformed":
        raise DomainError("verify_interpolation_identities needs a deformed map")
    lam = F.c_or_lambda.real
    dd = deformation_data(lam, delta2)
    rep = DeformationReport(lam, dd.omega)
    nodes = [("beta", dd.beta), ("-beta", -dd.beta)]
    nodes += [(f"f^{i}(p)", x) for i, x in enumerate(dd.orbit_p)]
    nodes += [(f"f^{i}(p+)", x) for i, x in enumerate(dd.orbit_p_plus)]
    nodes += [(f"f^{i}(p-)", x) for i, x in enumerate(dd.orbit_p_minus)]
    for label, x in nodes:
        rep.interpolation_residuals.append((label, abs(F(x) - (x * x + lam)) / _scale(F, x)))
    dnodes = [(lbl, x) for lbl, x in nodes[2:] if lbl != "f^0(p-)"]
    for label, x in dnodes:
        dscale = sum(i * abs(a) * abs(x) ** (i - 1) for i, a in enumerate(F.coefficients) if i)
        rep.derivative_residuals.append((label, abs(F.derivative(x) - 2 * x) / dscale))
    d3_plus = math.prod(2 * x for x in dd.orbit_p_plus)
    pm = dd.orbit_p_minus[0]
    want = 2 * pm * d3_plus**2 / abs(math.prod(2 * x for x in dd.orbit_p_minus))
    dscale = sum(i * abs(a) * abs(pm) ** (i - 1) for i, a in enumerate(F.coefficients) if i)
    rep.derivative_residuals.append(("f^0(p-) twisted", abs(F.derivative(pm) - want) / dscale))
    real = [a.real for a in F.coefficients]

    def dF(x):
        return abs(comp_horner(real, x)[1])

    dhat6 = math.prod(dF(x) for x in dd.orbit_p_minus)
    dhat3_plus = math.prod(dF(x) for x in dd.orbit_p_plus)
    dhat3 = math.prod(dF(x) for x in dd.orbit_p)
    rep.multiplier_identity_residual = abs(dhat6 - dhat3_plus**2) / dhat3_plus**2
    rep.lyapunov_gap = math.log(dhat3) / 3 - math.log(dhat3_plus) / 3
    rep.equality_residual = abs(math.log(dhat6) / 6 - math.log(dhat3_plus) / 3)
    return rep


def _boundary_radius(F: QuadraticMap, phi: float, radius: float, r_max: float) -> float:
    """Smallest r with |F(r e^{i phi})| = radius, by scan then bisection."""
    u = cmath.exp(1j * phi)
    rs = np.linspace(0, r_max, 400)
    vals = np.abs(F(rs * u))
    idx = np.flatnonzero(vals >= radius)
    if idx.size == 0:
        return math.inf
    lo, hi = rs[idx[0] - 1], rs[idx[0]]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if abs(F(mid * u)) >= radius:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def quadratic_like_check(F: QuadraticMap, radius: float = 80.0, samples: int = 720) -> dict:
    """Numerical proxies for ``F: U -> B(0, radius)`` being quadratic-like.

    ``U`` is the component of the preimage of the disk that contains 0,
    approximated as a star-shaped region about 0 (first radial exit).
    """
    r_max = 2 * math.sqrt(radius + abs(F.c_or_lambda)) + 2
    phis = np.linspace(0, 2 * math.pi, samples, endpoint=False)
    rad = np.array([_boundary_radius(F, ph, radius, r_max) for ph in phis])
    report = {"lambda": F.c_or_lambda.real, "radius": radius, "samples": samples}
    if not np.all(np.isfinite(rad)):
        report.update(passed=False, failed_clause="boundary", critical_points_inside=None)
        return report
    contour = rad * np.exp(1j * phis)
    # (i) critical points inside U other than 0
    dcoef = [i * a for i, a in enumerate(F.coefficients)][1:]
    crit = np.roots(dcoef[::-1]) if F.kind == "deformed" else np.array([0.0])
    inside = []
    for w in crit:
        if abs(w) < 1e-8:
            continue
        k = int(round((cmath.phase(w) % (2 * math.pi)) / (2 * math.pi) * samples)) % samples
        if abs(w) < rad[k]:
            inside.append(complex(w))
    report["critical_points_inside"] = inside
    clause_i = not inside
    # (ii) winding number of F(contour) about 0
    img = F(contour)
    dphi = np.diff(np.unwrap(np.angle(np.append(img, img[0]))))
    winding = int(round(dphi.sum() / (2 * math.pi)))
    report["winding"] = winding
    clause_ii = winding == 2
    # (iii) closure of U inside the disk
    report["max_abs_on_contour"] = float(np.max(np.abs(contour)))
    clause_iii = report["max_abs_on_contour"] < radius
    report["clauses"] = {"critical": clause_i, "degree_two": clause_ii, "compact_inside": clause_iii}
    report["passed"] = clause_i and clause_ii and clause_iii
    if not report["passed"]:
        report["failed_clause"] = [k for k, v in report["clauses"].items() if not v][0]
    return report
