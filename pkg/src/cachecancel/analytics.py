"""Analytical packet loss rate of the typical user.

Base stations form a Poisson point process of intensity ``lambda_b``; the
typical user attaches to the nearest one and decodes a packet within the
slot iff its SINR reaches the threshold ``t_bar``.  A user that caches
subset ``i`` can reconstruct and cancel interference from any base station
that (a) is currently transmitting a packet in subset ``i`` (probability
``eta_i``) and (b) is close enough to decode reliably, i.e. within the
cancellation radius ``r_b``.

With serving distance ``r``, the conditional success probability is an
exponential in ``r``: noise contributes ``-r**beta * t_bar * sigma2 / P``;
interference from non-cancellable stations contributes
``-pi r^2 lambda (1 - eta) * Z1``; cancellable stations beyond the
exclusion radius ``max(r, r_b)`` contribute
``-pi r^2 lambda eta * G(r, max(r, r_b))``; and the void probability of the
serving cell contributes ``-pi r^2 lambda``.  Averaging over the serving
distance density ``2 pi lambda r exp(-pi lambda r^2)`` yields the loss
probability.  Two limits have closed forms in the interference-limited
(``sigma2 = 0``) regime:

* no side information (``r_b = 0``): ``Z1 / (1 + Z1)``;
* unlimited cancellation range (``r_b = inf``):
  ``(1-eta) Z1 / (1 + (1-eta) Z1)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import FullyCachedNetwork
from .model import (CachingScheme, NetworkParams, PacketLibrary,
                    alpha_fractions, eta, q_bar, sinr_threshold)
from .specfun import (DEFAULT_QUADRATURE, LaplaceExponent, adaptive_quad,
                      interference_exponent_tail, z1)

__all__ = [
    "REGIMES",
    "PlrQuery",
    "plr_partial_csi",
    "plr_no_csi",
    "plr_full_cancellation",
    "plr_pair",
    "average_plr",
    "plr_uniform",
    "plr_gain",
]

REGIMES = ("general", "no_csi", "full_cancel")


@dataclass(frozen=True, eq=False)
class PlrQuery:
    """A (subset, packet) pair whose conditional loss rate is wanted.

    ``subset_index`` indexes the scheme's stored rows; ``packet_index`` is a
    popularity rank into the library.
    """

    params: NetworkParams
    library: PacketLibrary
    scheme: CachingScheme
    subset_index: int
    packet_index: int

    def __post_init__(self):
        if self.library.n != self.scheme.n:
            raise ValueError("library and scheme disagree on packet count")
        if not 0 <= self.subset_index < self.scheme.densities.shape[0]:
            raise ValueError("subset_index out of range")
        if not 0 <= self.packet_index < self.library.n:
            raise ValueError("packet_index out of range")


def _check_eta(eta_i):
    if not (0.0 <= eta_i <= 1.0):
        raise ValueError(f"eta_i must lie in [0, 1], got {eta_i}")
    return float(eta_i)


def _upper_cutoff(lam, quad_coeff, abs_tol):
    """Radius beyond which the integrand's Gaussian envelope mass is
    below a tenth of the quadrature's absolute tolerance."""
    target = 0.1 * abs_tol
    mass = math.pi * lam / quad_coeff
    if mass <= target:
        return 0.0
    return math.sqrt(math.log(mass / target) / quad_coeff)


def _clamp_unit(v):
    return min(1.0, max(0.0, v))


def plr_partial_csi(params, eta_i, quadrature=None):
    """Loss rate with cancellable fraction ``eta_i`` and finite ``r_b``.

    The cancellation radius, noise level and threshold come from `params`.
    ``r_b = 0`` and ``r_b = inf`` delegate to the corresponding limit
    regimes of :func:`plr_no_csi` and :func:`plr_full_cancellation`.
    """
    eta_i = _check_eta(eta_i)
    spec = quadrature if quadrature is not None else DEFAULT_QUADRATURE
    t_bar = sinr_threshold(params)
    lap = LaplaceExponent(beta=params.beta, t_bar=t_bar)
    zv = z1(lap)
    lam = params.lambda_b
    r_b = params.r_b
    noise_coeff = t_bar * params.noise_power / params.tx_power

    if r_b == 0.0:
        return plr_no_csi(params, quadrature=quadrature)

    if math.isinf(r_b):
        if params.noise_power == 0.0:
            return plr_full_cancellation(eta_i, t_bar, params.beta)
        quad_coeff = math.pi * lam * (1.0 + (1.0 - eta_i) * zv)

        def integrand_far_only(r):
            return (2.0 * math.pi * lam * r
                    * math.exp(-noise_coeff * r ** params.beta
                               - quad_coeff * r * r))

        upper = _upper_cutoff(lam, quad_coeff, spec.abs_tol)
        p_s = adaptive_quad(integrand_far_only, 0.0, upper, spec)
        return _clamp_unit(1.0 - p_s)

    # Serving distance below r_b: cancellable interferers are excluded out
    # to r_b, the rest contribute the full ring beyond r.
    near_coeff = math.pi * lam * (1.0 + (1.0 - eta_i) * zv)

    def integrand_near(r):
        g = interference_exponent_tail(lap, r, r_b, quadrature=spec)
        return (2.0 * math.pi * lam * r
                * math.exp(-noise_coeff * r ** params.beta
                           - near_coeff * r * r
                           - math.pi * lam * eta_i * g * r * r))

    upper_near = min(r_b, _upper_cutoff(lam, near_coeff, spec.abs_tol))
    p_s = adaptive_quad(integrand_near, 0.0, upper_near, spec) \
        if upper_near > 0.0 else 0.0

    # Serving distance beyond r_b: nothing is cancellable.
    far_coeff = math.pi * lam * (1.0 + zv)

    def integrand_far(r):
        return (2.0 * math.pi * lam * r
                * math.exp(-noise_coeff * r ** params.beta
                           - far_coeff * r * r))

    upper_far = _upper_cutoff(lam, far_coeff, spec.abs_tol)
    p_b = adaptive_quad(integrand_far, r_b, upper_far, spec) \
        if upper_far > r_b else 0.0

    return _clamp_unit(1.0 - p_s - p_b)


def plr_no_csi(params, interference_limited=False, quadrature=None):
    """Loss rate with no cancellation side information (``r_b = 0``).

    With `interference_limited` set, the noise term is dropped and the
    closed form ``Z1 / (1 + Z1)`` is returned; otherwise the serving
    distance average is integrated numerically with the noise level from
    `params` (the two routes agree when ``noise_power = 0``).
    """
    t_bar = sinr_threshold(params)
    zv = z1(LaplaceExponent(beta=params.beta, t_bar=t_bar))
    if interference_limited:
        return zv / (1.0 + zv)
    spec = quadrature if quadrature is not None else DEFAULT_QUADRATURE
    lam = params.lambda_b
    noise_coeff = t_bar * params.noise_power / params.tx_power
    quad_coeff = math.pi * lam * (1.0 + zv)

    def integrand(r):
        return (2.0 * math.pi * lam * r
                * math.exp(-noise_coeff * r ** params.beta
                           - quad_coeff * r * r))

    upper = _upper_cutoff(lam, quad_coeff, spec.abs_tol)
    p_s = adaptive_quad(integrand, 0.0, upper, spec)
    return _clamp_unit(1.0 - p_s)


def plr_full_cancellation(eta_i, t_bar, beta):
    """Interference-limited loss rate with unlimited cancellation range.

    Closed form ``(1-eta) Z1 / (1 + (1-eta) Z1)``; ``eta_i = 1`` gives 0.
    """
    eta_i = _check_eta(eta_i)
    zv = z1(LaplaceExponent(beta=beta, t_bar=t_bar))
    wz = (1.0 - eta_i) * zv
    return wz / (1.0 + wz)


def _base_plr(params, eta_i, regime, quadrature):
    if regime == "general":
        return plr_partial_csi(params, eta_i, quadrature=quadrature)
    if regime == "no_csi":
        return plr_no_csi(params,
                          interference_limited=(params.noise_power == 0.0),
                          quadrature=quadrature)
    if regime == "full_cancel":
        return plr_full_cancellation(eta_i, sinr_threshold(params),
                                     params.beta)
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def plr_pair(query, regime="general", quadrature=None):
    """Loss rate of a specific (subset, packet) pair.

    A cached pair never loses (the request is served locally); otherwise
    the request goes over the air with the subset's cancellable fraction.
    """
    i = query.subset_index
    j = query.packet_index
    if query.scheme.cache_matrix[i, j]:
        return 0.0
    alpha = alpha_fractions(query.library, query.scheme)
    eta_i = float(eta(query.scheme, alpha)[i])
    return _base_plr(query.params, eta_i, regime, quadrature)


def average_plr(params, library, scheme, regime="general", quadrature=None):
    """Library- and scheme-averaged loss rate.

    Averages the pair loss rates over subsets (by density) and packets (by
    access probability).  A fully cached network returns 0.
    """
    if library.n != scheme.n:
        raise ValueError("library and scheme disagree on packet count")
    try:
        alpha = alpha_fractions(library, scheme)
    except FullyCachedNetwork:
        return 0.0
    etas = eta(scheme, alpha)
    f = library.probabilities
    q = scheme.cache_matrix.astype(np.float64)
    uncached_mass = 1.0 - q @ f
    terms = []
    for p_i, u_i, eta_i in zip(scheme.densities.tolist(),
                               uncached_mass.tolist(), etas.tolist()):
        if p_i == 0.0 or u_i <= 0.0:
            continue
        terms.append(p_i * u_i * _base_plr(params, eta_i, regime, quadrature))
    return math.fsum(terms)


def plr_uniform(n, m, t_bar, beta):
    """Closed-form average loss rate of uniform caching over all subsets.

    For an interference-limited network with unlimited cancellation range,
    caching every size-``m`` subset with equal probability yields

        (1 - m/n)**2 / ((1 + 1/Z1) - m/n).
    """
    if not (isinstance(n, int) and isinstance(m, int)):
        raise TypeError("n and m must be integers")
    if n < 1 or not 0 <= m <= n:
        raise ValueError("need n >= 1 and 0 <= m <= n")
    zv = z1(LaplaceExponent(beta=beta, t_bar=t_bar))
    ratio = m / n
    return (1.0 - ratio) ** 2 / ((1.0 + 1.0 / zv) - ratio)


def plr_gain(params, eta_i, quadrature=None):
    """Loss-rate reduction of cancellation over no side information."""
    base = plr_no_csi(params,
                      interference_limited=(params.noise_power == 0.0),
                      quadrature=quadrature)
    return base - plr_partial_csi(params, eta_i, quadrature=quadrature)
