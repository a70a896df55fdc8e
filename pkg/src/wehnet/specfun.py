"""Special functions and adaptive quadrature for the closed-form network metrics.

Everything here works on real scalars and is pure, so it can be called from
any thread.  The implementations are deliberately self-contained; the test
suite checks each one against independent oracles (arbitrary precision
series, Euler integrals, fixed-grid Simpson rules).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

from .errors import ConvergenceError, DomainError

EULER_GAMMA = 0.5772156649015329
_EPS = 2.220446049250313e-16
_TINY = 1e-300


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy contract for :func:`integrate` and :func:`integrate_semi_infinite`."""

    relative_tolerance: float = 1e-9
    absolute_tolerance: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.absolute_tolerance > 0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureSpec()


# ---------------------------------------------------------------------------
# Gauss hypergeometric function


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _rgamma(x: float) -> float:
    """Reciprocal gamma, zero at the poles."""
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _hyp2f1_series(a, b, c, z, max_terms=200_000):
    total = 1.0
    term = 1.0
    quiet = 0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) <= _EPS * abs(total):
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0
    raise ConvergenceError(
        f"2F1 series did not converge after {max_terms} terms (z={z})",
        estimate=total,
        error_bound=abs(term),
    )


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1.

    The power series is summed directly for -0.5 <= z < 1.  Below that the
    argument is mapped into the unit disk: the Pfaff transform
    z -> z/(z-1) for moderately negative z, and the 1/z connection formula
    for z < -2 whenever b - a is not an integer.
    """
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 undefined for non-positive integer c={c}")
    if not z < 1.0:
        raise DomainError(f"2F1 is only implemented for z < 1, got z={z}")
    if z == 0.0:
        return 1.0
    if z >= -0.5:
        return _hyp2f1_series(a, b, c, z)

    ba = b - a
    if z < -2.0 and abs(ba - round(ba)) > 1e-3:
        w = 1.0 / z
        t1 = (
            math.gamma(c)
            * math.gamma(ba)
            * _rgamma(b)
            * _rgamma(c - a)
            * (-z) ** (-a)
        )
        if t1 != 0.0:
            t1 *= _hyp2f1_series(a, a - c + 1.0, a - b + 1.0, w)
        t2 = (
            math.gamma(c)
            * math.gamma(-ba)
            * _rgamma(a)
            * _rgamma(c - b)
            * (-z) ** (-b)
        )
        if t2 != 0.0:
            t2 *= _hyp2f1_series(b, b - c + 1.0, b - a + 1.0, w)
        return t1 + t2

    # Pfaff: 2F1(a,b;c;z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1))
    w = z / (z - 1.0)
    return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, w, max_terms=2_000_000)


# ---------------------------------------------------------------------------
# Exponential integral


def _e1_continued_fraction(x: float) -> float:
    # Modified Lentz on E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(-x)
    raise ConvergenceError("E1 continued fraction failed", estimate=h * math.exp(-x))


def _ei_series(x: float) -> float:
    total = 0.0
    term = 1.0
    for n in range(1, 1000):
        term *= x / n
        contrib = term / n
        total += contrib
        if abs(contrib) <= _EPS * abs(total):
            break
    return EULER_GAMMA + math.log(abs(x)) + total


def _ei_asymptotic(x: float) -> float:
    total = 1.0
    term = 1.0
    for n in range(1, 200):
        new = term * n / x
        if abs(new) >= abs(term):
            break
        term = new
        total += term
        if abs(term) < _EPS * abs(total):
            break
    return math.exp(x) / x * total


def expint_ei(x: float) -> float:
    """Exponential integral Ei(x) = -PV int_{-x}^inf e^{-t}/t dt."""
    if x == 0.0:
        raise DomainError("Ei(0) is undefined")
    if x < 0.0:
        if x >= -2.0:
            return _ei_series(x)
        return -_e1_continued_fraction(-x)
    if x > 709.0:
        return math.inf
    if x <= 40.0:
        return _ei_series(x)
    return _ei_asymptotic(x)


# ---------------------------------------------------------------------------
# Error function family


def _erf_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!, all terms positive
    x2 = x * x
    term = x
    total = x
    n = 0
    while abs(term) > _EPS * abs(total):
        n += 1
        term *= 2.0 * x2 / (2 * n + 1)
        total += term
    return 2.0 / math.sqrt(math.pi) * math.exp(-x2) * total


def _erfcx_continued_fraction(x: float) -> float:
    # sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    f = x
    c = x
    d = 0.0
    for k in range(1, 5000):
        a = 0.5 * k
        d = x + a * d
        d = 1.0 / (d if d != 0.0 else _TINY)
        c = x + a / c
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _EPS:
            return 1.0 / (f * math.sqrt(math.pi))
    raise ConvergenceError("erfc continued fraction failed", estimate=1.0 / (f * math.sqrt(math.pi)))


def erfc_c(x: float) -> float:
    """Complementary error function."""
    if x < 0.0:
        return 2.0 - erfc_c(-x)
    if x < 2.0:
        return 1.0 - _erf_series(x)
    if x > 27.3:
        return 0.0
    return math.exp(-x * x) * _erfcx_continued_fraction(x)


def erfcx(x: float) -> float:
    """Scaled complementary error function e^{x^2} erfc(x).

    Stays finite where ``erfc`` underflows; the closed form of the
    noise-limited coverage term needs it for very small noise powers.
    """
    if x < 0.0:
        if x < -26.6:
            return math.inf
        return 2.0 * math.exp(x * x) - erfcx(-x)
    if x < 2.0:
        return math.exp(x * x) * (1.0 - _erf_series(x))
    return _erfcx_continued_fraction(x)


def q_function(x: float) -> float:
    """Standard normal tail probability Q(x) = P(Z > x)."""
    return 0.5 * erfc_c(x / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature

_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f, a, b):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    kronrod = fc * _WGK[7]
    gauss = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        pair = f(center - dx) + f(center + dx)
        kronrod += _WGK[j] * pair
        if j % 2 == 1:
            gauss += _WG[j // 2] * pair
    result = kronrod * half
    err = abs((kronrod - gauss) * half)
    if not math.isfinite(result):
        raise ConvergenceError(f"non-finite integrand on [{a}, {b}]")
    return result, err


def integrate(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Integrate ``f`` over a finite interval by adaptive 15-point Gauss-Kronrod bisection."""
    if upper == lower:
        return 0.0
    if upper < lower:
        return -integrate(f, upper, lower, spec)

    value, err = _gk15(f, lower, upper)
    heap = [(-err, lower, upper, value)]
    total, total_err = value, err
    for _ in range(spec.max_subdivisions):
        if total_err <= max(spec.absolute_tolerance, spec.relative_tolerance * abs(total)):
            return total
        neg_err, a, b, v = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not (a < mid < b):
            heapq.heappush(heap, (neg_err, a, b, v))
            break
        v1, e1 = _gk15(f, a, mid)
        v2, e2 = _gk15(f, mid, b)
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    if total_err <= max(spec.absolute_tolerance, spec.relative_tolerance * abs(total)):
        return total
    raise ConvergenceError(
        f"quadrature did not converge: estimate {total!r}, error bound {total_err!r}",
        estimate=total,
        error_bound=total_err,
    )


def integrate_semi_infinite(
    f: Callable[[float], float],
    lower: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Integrate ``f`` over [lower, inf) via r = lower + t/(1-t), t in [0, 1)."""

    def g(t):
        s = 1.0 - t
        return f(lower + t / s) / (s * s)

    return integrate(g, 0.0, 1.0, spec)


# ---------------------------------------------------------------------------
# One-dimensional maximization

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_maximize(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    tol: float = 1e-10,
    max_iterations: int = 500,
) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [lower, upper]; returns (argmax, max)."""
    a, b = lower, upper
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iterations):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
    if f1 >= f2:
        return x1, f1
    return x2, f2
