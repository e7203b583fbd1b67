"""Network, traffic and caching model types.

All quantities are stored in SI units: intensities in BS (or users) per
square meter, powers in watts, bandwidth in Hz, packet size in bits, time in
seconds, distances in meters.  Unit conversions (dBm, MHz, Mb) belong at the
configuration boundary, not here.

Packets are indexed by popularity rank: index 0 is the most popular packet.
A caching scheme is a distribution over cache subsets; each subset lists the
``m`` packet ranks cached by the base stations that drew it.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import FullyCachedNetwork

__all__ = [
    "NetworkParams",
    "PacketLibrary",
    "CachingScheme",
    "DerivedLoad",
    "dbm_to_watts",
    "zipf_popularity",
    "sinr_threshold",
    "alpha_fractions",
    "q_bar",
    "eta",
    "derived_load",
]


def dbm_to_watts(dbm):
    """Convert a power level in dBm to watts."""
    return 10.0 ** (float(dbm) / 10.0) * 1e-3


def _require(cond, message):
    if not cond:
        raise ValueError(message)


@dataclass(frozen=True)
class NetworkParams:
    """Static parameters of the cellular layout and the radio link.

    Attributes
    ----------
    lambda_b : float
        Base station intensity (per m^2), > 0.
    lambda_u : float
        User intensity (per m^2), >= 0.  Recorded for experiment bookkeeping;
        the typical-user loss analysis does not depend on it.
    tx_power : float
        Base station transmit power in watts, > 0.
    noise_power : float
        Noise power sigma^2 in watts, >= 0 (0 selects the
        interference-limited regime).
    beta : float
        Path loss exponent, > 2.
    bandwidth : float
        Channel bandwidth in Hz, > 0.
    slot : float
        Slot duration in seconds, > 0.
    packet_size : float
        Packet size in bits, > 0.
    r_b : float
        Cancellation radius in meters, >= 0; ``math.inf`` means cached
        interference is cancellable at any distance.
    """

    lambda_b: float
    lambda_u: float
    tx_power: float
    noise_power: float
    beta: float
    bandwidth: float
    slot: float
    packet_size: float
    r_b: float

    def __post_init__(self):
        _require(math.isfinite(self.lambda_b) and self.lambda_b > 0,
                 "lambda_b must be finite and > 0")
        _require(math.isfinite(self.lambda_u) and self.lambda_u >= 0,
                 "lambda_u must be finite and >= 0")
        _require(math.isfinite(self.tx_power) and self.tx_power > 0,
                 "tx_power must be finite and > 0 (watts)")
        _require(math.isfinite(self.noise_power) and self.noise_power >= 0,
                 "noise_power must be finite and >= 0 (watts)")
        _require(math.isfinite(self.beta) and self.beta > 2,
                 "beta must be finite and > 2 for the interference "
                 "functionals to converge")
        _require(math.isfinite(self.bandwidth) and self.bandwidth > 0,
                 "bandwidth must be finite and > 0 (Hz)")
        _require(math.isfinite(self.slot) and self.slot > 0,
                 "slot must be finite and > 0 (seconds)")
        _require(math.isfinite(self.packet_size) and self.packet_size > 0,
                 "packet_size must be finite and > 0 (bits)")
        _require(self.r_b >= 0 and not math.isnan(self.r_b),
                 "r_b must be >= 0 (meters, inf allowed)")


def sinr_threshold(params):
    """SINR threshold for delivering one packet within one slot.

    A packet of ``packet_size`` bits fits in a slot of duration ``slot`` at
    bandwidth ``bandwidth`` iff the SINR reaches
    ``2**(packet_size / (slot * bandwidth)) - 1``.
    """
    return 2.0 ** (params.packet_size / (params.slot * params.bandwidth)) - 1.0


@dataclass(frozen=True, eq=False)
class PacketLibrary:
    """A finite packet catalogue with access probabilities in rank order.

    ``probabilities`` is sorted in non-increasing order and sums to one;
    index 0 is the most popular packet.
    """

    n: int
    probabilities: np.ndarray

    def __post_init__(self):
        f = np.ascontiguousarray(self.probabilities, dtype=np.float64)
        _require(self.n >= 1, "library must hold at least one packet")
        _require(f.shape == (self.n,), "probabilities must have shape (n,)")
        _require(np.all(f >= 0), "access probabilities must be >= 0")
        _require(abs(math.fsum(f.tolist()) - 1.0) <= 1e-12,
                 "access probabilities must sum to 1 within 1e-12")
        f = np.sort(f)[::-1].copy()
        f.flags.writeable = False
        object.__setattr__(self, "probabilities", f)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def from_probabilities(cls, probabilities):
        f = np.asarray(probabilities, dtype=np.float64)
        return cls(n=f.shape[0], probabilities=f)


def zipf_popularity(n, gamma):
    """Zipf-distributed packet library: f_j proportional to j**(-gamma).

    Parameters
    ----------
    n : int
        Number of packets, >= 1.
    gamma : float
        Skewness, >= 0.  ``gamma = 0`` gives the uniform library.
    """
    _require(n >= 1, "n must be >= 1")
    _require(math.isfinite(gamma) and gamma >= 0, "gamma must be finite and >= 0")
    ranks = np.arange(1, n + 1, dtype=np.float64)
    weights = ranks ** (-float(gamma))
    return PacketLibrary(n=int(n), probabilities=weights / weights.sum())


@dataclass(frozen=True, eq=False)
class CachingScheme:
    """A probability distribution over cache subsets of fixed size.

    Attributes
    ----------
    n : int
        Library size the subsets index into.
    m : int
        Cache capacity; every stored subset has exactly ``m`` packets.
    densities : ndarray, shape (s,)
        Probability that a base station holds each subset; sums to 1.
        Subsets not stored have density zero.
    cache_matrix : ndarray, shape (s, n), uint8
        ``cache_matrix[i, j] = 1`` iff subset ``i`` caches packet ``j``.

    Rows are stored in canonical order (density descending, ties broken by
    the lexicographically smallest subset); duplicate subsets are merged by
    summing their densities.
    """

    n: int
    m: int
    densities: np.ndarray
    cache_matrix: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        m = int(self.m)
        p = np.ascontiguousarray(self.densities, dtype=np.float64)
        q = np.ascontiguousarray(self.cache_matrix, dtype=np.uint8)
        _require(n >= 1, "n must be >= 1")
        _require(0 <= m <= n, "m must satisfy 0 <= m <= n")
        _require(p.ndim == 1 and q.shape == (p.shape[0], n),
                 "densities (s,) and cache_matrix (s, n) must be consistent")
        _require(p.shape[0] >= 1, "scheme must store at least one subset")
        _require(np.all(p >= 0), "subset densities must be >= 0")
        _require(abs(math.fsum(p.tolist()) - 1.0) <= 1e-12,
                 "subset densities must sum to 1 within 1e-12")
        _require(np.all((q == 0) | (q == 1)), "cache_matrix must be 0/1")
        _require(np.all(q.sum(axis=1) == m),
                 "every subset must cache exactly m packets")

        # Merge duplicate subsets, then sort canonically.
        keys = [tuple(np.flatnonzero(row).tolist()) for row in q]
        merged = {}
        for key, dens in zip(keys, p.tolist()):
            merged[key] = merged.get(key, 0.0) + dens
        order = sorted(merged, key=lambda k: (-merged[k], k))
        p = np.array([merged[k] for k in order], dtype=np.float64)
        q = np.zeros((len(order), n), dtype=np.uint8)
        for i, key in enumerate(order):
            q[i, list(key)] = 1
        p.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "densities", p)
        object.__setattr__(self, "cache_matrix", q)

    @classmethod
    def from_subsets(cls, n, m, subsets, densities):
        """Build a scheme from explicit subsets of packet ranks."""
        subsets = list(subsets)
        q = np.zeros((len(subsets), n), dtype=np.uint8)
        for i, subset in enumerate(subsets):
            idx = sorted(int(j) for j in subset)
            _require(len(idx) == len(set(idx)), "subset indices must be distinct")
            _require(all(0 <= j < n for j in idx), "subset indices out of range")
            q[i, idx] = 1
        return cls(n=n, m=m, densities=np.asarray(densities, dtype=np.float64),
                   cache_matrix=q)

    @classmethod
    def single_subset(cls, n, m, subset):
        """All base stations cache the same subset."""
        return cls.from_subsets(n, m, [subset], [1.0])

    @classmethod
    def no_caching(cls, n):
        """Empty caches (m = 0)."""
        return cls.from_subsets(n, 0, [()], [1.0])

    def subsets(self):
        """Return the stored subsets as tuples of packet ranks."""
        return [tuple(np.flatnonzero(row).tolist()) for row in self.cache_matrix]


@dataclass(frozen=True, eq=False)
class DerivedLoad:
    """Request-level quantities induced by a library and a caching scheme.

    Attributes
    ----------
    alpha : ndarray, shape (n,)
        Fraction of *uncached* requests that target each packet.
    q_bar : ndarray, shape (n,)
        Probability that a random base station caches each packet.
    eta : ndarray, shape (s,)
        For each subset, the fraction of interfering transmissions that a
        user holding that subset can cancel.
    t_bar : float
        SINR threshold for one-slot delivery.
    """

    alpha: np.ndarray
    q_bar: np.ndarray
    eta: np.ndarray
    t_bar: float


def q_bar(scheme):
    """Per-packet caching probability ``sum_i p_i q_{i,j}``."""
    return scheme.densities @ scheme.cache_matrix.astype(np.float64)


def alpha_fractions(library, scheme):
    """Distribution of transmitted (uncached-request) packets.

    ``alpha_j`` is the probability that a busy base station is serving
    packet ``j``: requests for ``j`` survive caching with probability
    ``1 - q_bar_j`` and are renormalized over all surviving traffic.

    Raises
    ------
    FullyCachedNetwork
        If every request is served from cache and no transmissions remain.
    """
    if library.n != scheme.n:
        raise ValueError("library and scheme disagree on the number of packets")
    f = library.probabilities
    qb = q_bar(scheme)
    surviving = f * (1.0 - qb)
    denom = math.fsum(surviving.tolist())
    if denom <= 1e-12:
        raise FullyCachedNetwork(
            "all requested packets are cached; no transmissions remain")
    return surviving / denom


def eta(scheme, alpha):
    """Cancellable interference fraction per subset.

    ``eta_i = sum_j alpha_j q_{i,j}``: the chance that a random interfering
    base station transmits a packet present in subset ``i``'s cache.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (scheme.n,):
        raise ValueError("alpha must have shape (n,)")
    return scheme.cache_matrix.astype(np.float64) @ alpha


def derived_load(params, library, scheme):
    """Bundle alpha, q_bar, eta and the SINR threshold for one scenario."""
    alpha = alpha_fractions(library, scheme)
    return DerivedLoad(
        alpha=alpha,
        q_bar=q_bar(scheme),
        eta=eta(scheme, alpha),
        t_bar=sinr_threshold(params),
    )
