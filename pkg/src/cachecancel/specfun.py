"""Special functions for interference analysis.

The interference field seen by a typical user enters the loss probability
through exponential functionals of a Poisson point process.  Two closely
related quantities appear:

* ``z1``: the normalized Laplace exponent of interference from *all*
  base stations beyond the serving distance,
  ``Z1 = (2 T / (beta - 2)) * 2F1(1, 1 - 2/beta; 2 - 2/beta; -T)``
  where ``T`` is the SINR threshold.
* ``interference_exponent_tail``: the exponent contributed by base
  stations beyond an exclusion radius ``e >= r``,
  ``G(r, e) = T**(2/beta) * integral_{L}^{inf} du / (1 + u**(beta/2))``
  with lower limit ``L = (e / r)**2 * T**(-2/beta)``.  ``G(r, r) = Z1``
  and ``G(r, inf) = 0``.

The hypergeometric evaluation uses the defining power series plus the Pfaff
and inverse-argument connection formulas to cover arguments ``x <= 0`` of
any magnitude (DLMF 15.8.1 and 15.8.2).
"""

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .exceptions import QuadratureError, SeriesConvergenceError

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "LaplaceExponent",
    "adaptive_quad",
    "hyp2f1_real",
    "z1",
    "interference_exponent_tail",
]

_SERIES_MAX_TERMS = 100_000
_SERIES_RTOL = 1e-16


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy targets for adaptive quadrature.

    Attributes
    ----------
    abs_tol, rel_tol : float
        Absolute and relative error targets, both > 0.
    max_subdivisions : int
        Interval subdivision budget, >= 1.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and math.isfinite(self.abs_tol)):
            raise ValueError("abs_tol must be finite and > 0")
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise ValueError("rel_tol must be finite and > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class LaplaceExponent:
    """Parameters the interference exponent depends on.

    Attributes
    ----------
    beta : float
        Path loss exponent, > 2.
    t_bar : float
        SINR threshold, > 0.
    """

    beta: float
    t_bar: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 2):
            raise ValueError("beta must be finite and > 2")
        if not (math.isfinite(self.t_bar) and self.t_bar > 0):
            raise ValueError("t_bar must be finite and > 0")


def adaptive_quad(func, lower, upper, spec=None):
    """Integrate ``func`` over ``[lower, upper]`` to the spec's accuracy.

    An infinite upper bound is mapped to ``[0, 1)`` via
    ``u = lower + t / (1 - t)`` before handing the integral to the adaptive
    Gauss-Kronrod engine.

    Raises
    ------
    QuadratureError
        If the engine reports non-convergence or suspected bad behaviour.
    """
    if spec is None:
        spec = DEFAULT_QUADRATURE
    if math.isinf(upper):

        def mapped(t):
            s = 1.0 - t
            return func(lower + t / s) / (s * s)

        integrand, a, b = mapped, 0.0, 1.0
    else:
        integrand, a, b = func, float(lower), float(upper)
    result = quad(integrand, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                  limit=spec.max_subdivisions, full_output=True)
    if len(result) > 3:
        raise QuadratureError(
            f"quadrature over [{lower}, {upper}] did not converge: {result[3]}")
    return result[0]


def _is_nonpos_int(v):
    return v <= 0 and float(v).is_integer()


def _gauss_series(a, b, c, x):
    """Defining series of 2F1; converges for |x| < 1 (any x if polynomial)."""
    term = 1.0
    total = 1.0
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        total += term
        if abs(term) <= _SERIES_RTOL * abs(total):
            return total
    raise SeriesConvergenceError(
        f"2F1 series did not converge for a={a}, b={b}, c={c}, x={x}",
        a=a, b=b, c=c, x=x, terms=_SERIES_MAX_TERMS)


def _rgamma(v):
    """1 / Gamma(v), zero at the poles."""
    if _is_nonpos_int(v):
        return 0.0
    return 1.0 / math.gamma(v)


def _tail_series(lower, half_beta):
    """integral_{L}^{inf} du / (1 + u**p) for L**p > 1, via the exact
    alternating expansion sum_k (-1)**(k+1) L**(1-kp) / (kp - 1)."""
    total = 0.0
    sign = 1.0
    for k in range(1, 400):
        term = sign * lower ** (1.0 - k * half_beta) / (k * half_beta - 1.0)
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total
        sign = -sign
    raise SeriesConvergenceError(
        f"tail expansion did not converge for L={lower}, p={half_beta}",
        x=lower, terms=400)


def _pfaff(a, b, c, x):
    """Pfaff transformation: maps x < 0 into (0, 1) (DLMF 15.8.1).

    Pulling out the smaller of a, b keeps the transformed series'
    convergence-boundary exponent c - a' - b' = |a - b| non-negative.
    """
    z = x / (x - 1.0)
    if a >= b:
        return (1.0 - x) ** (-b) * _gauss_series(c - a, b, c, z)
    return (1.0 - x) ** (-a) * _gauss_series(a, c - b, c, z)


def _inverse_argument(a, b, c, x):
    """Inverse-argument connection formula (DLMF 15.8.2); needs a - b
    non-integer."""
    w = 1.0 / x
    coef1 = math.gamma(c) * math.gamma(b - a) * _rgamma(b) * _rgamma(c - a)
    coef2 = math.gamma(c) * math.gamma(a - b) * _rgamma(a) * _rgamma(c - b)
    t1 = 0.0
    if coef1 != 0.0:
        t1 = coef1 * (-x) ** (-a) * _gauss_series(a, a - c + 1.0, a - b + 1.0, w)
    t2 = 0.0
    if coef2 != 0.0:
        t2 = coef2 * (-x) ** (-b) * _gauss_series(b, b - c + 1.0, b - a + 1.0, w)
    return t1 + t2


def hyp2f1_real(a, b, c, x):
    """Gauss hypergeometric function 2F1(a, b; c; x) for real x <= 0.

    Evaluation strategy by argument range:

    * ``-0.5 <= x <= 0``: defining series.
    * ``-2 < x < -0.5``: Pfaff transformation, then the series at
      ``x / (x - 1) in (1/3, 2/3)``.
    * ``x <= -2``: inverse-argument formula, then the series at
      ``1/x in [-0.5, 0)``; falls back to the Pfaff route when ``a - b``
      is (nearly) an integer, where the connection coefficients degenerate.

    Parameters with a or b a non-positive integer give a terminating
    polynomial, evaluated directly for any x.

    Raises
    ------
    ValueError
        If x > 0, c is a non-positive integer, or an argument is not finite.
    SeriesConvergenceError
        If the series budget is exhausted (extreme parameter ranges).
    """
    for name, v in (("a", a), ("b", b), ("c", c), ("x", x)):
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v}")
    if _is_nonpos_int(c):
        raise ValueError(f"c must not be a non-positive integer, got {c}")
    if x > 0:
        raise ValueError(f"only x <= 0 is supported, got {x}")
    if x == 0.0:
        return 1.0
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _gauss_series(a, b, c, x)
    if x >= -0.5:
        return _gauss_series(a, b, c, x)
    if x > -2.0:
        return _pfaff(a, b, c, x)
    if abs((a - b) - round(a - b)) < 1e-8:
        return _pfaff(a, b, c, x)
    try:
        return _inverse_argument(a, b, c, x)
    except OverflowError:
        return _pfaff(a, b, c, x)


def z1(laplace):
    """Normalized Laplace exponent of full-ring interference.

    For SINR threshold ``T`` and path loss exponent ``beta``, interference
    from every base station farther than the serving one multiplies the
    success probability's exponent by ``pi r^2 lambda * Z1`` with

        Z1 = (2 T / (beta - 2)) * 2F1(1, 1 - 2/beta; 2 - 2/beta; -T).

    Equals ``interference_exponent_tail(laplace, r, r)`` for any r > 0.
    """
    beta = laplace.beta
    t = laplace.t_bar
    return (2.0 * t / (beta - 2.0)) * hyp2f1_real(
        1.0, 1.0 - 2.0 / beta, 2.0 - 2.0 / beta, -t)


def interference_exponent_tail(laplace, r, exclusion, quadrature=None,
                               method="auto"):
    """Interference exponent from base stations beyond an exclusion radius.

    For a user served from distance ``r`` with interferers active only
    beyond ``exclusion``, the success probability's exponent carries
    ``pi r^2 lambda_active * G(r, exclusion)`` with

        G = T**(2/beta) * integral_{L}^{inf} (1 + u**(beta/2))**(-1) du,
        L = (exclusion / r)**2 * T**(-2/beta).

    Parameters
    ----------
    laplace : LaplaceExponent
    r : float
        Serving distance, > 0.
    exclusion : float
        Exclusion radius, >= 0; ``inf`` returns 0 (no residual
        interference).  ``exclusion = r`` reproduces :func:`z1`.
    quadrature : QuadratureSpec, optional
    method : {"auto", "closed_form", "quadrature"}
        ``closed_form`` is exact for beta = 4
        (``sqrt(T) * (pi/2 - atan(L))``) and rejected otherwise;
        ``auto`` uses it when available.

    Raises
    ------
    ValueError
        If r <= 0, exclusion < 0, or ``closed_form`` is requested for
        beta != 4.
    """
    if not (r > 0 and math.isfinite(r)):
        raise ValueError(f"serving distance r must be finite and > 0, got {r}")
    if not exclusion >= 0:
        raise ValueError(f"exclusion radius must be >= 0, got {exclusion}")
    if method not in ("auto", "closed_form", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    beta = laplace.beta
    t = laplace.t_bar
    if math.isinf(exclusion):
        return 0.0
    t2b = t ** (2.0 / beta)
    lower = (exclusion / r) ** 2 / t2b
    if method == "closed_form" and beta != 4.0:
        raise ValueError("closed_form is only available for beta = 4")
    if beta == 4.0 and method in ("auto", "closed_form"):
        return math.sqrt(t) * (math.pi / 2.0 - math.atan(lower))
    half_beta = beta / 2.0
    # Deep in the tail the integrand is a fast geometric expansion; the
    # adaptive engine would only accumulate roundoff there.
    if lower ** half_beta >= 4.0:
        integral = _tail_series(lower, half_beta)
    else:
        integral = adaptive_quad(
            lambda u: 1.0 / (1.0 + u ** half_beta), lower, math.inf,
            quadrature)
    return t2b * integral
