"""Monte Carlo estimation of the packet loss rate.

Base stations are dropped as a Poisson process in a disc window around the
typical user, marked cancellable or not by independent thinning, and the
SINR of the nearest one decides delivery.  Each trial owns one
counter-based random stream (see :mod:`cachecancel.philox`), so estimates
are bit-for-bit reproducible for a given seed regardless of chunking or
worker count, and trials can be replayed individually.

Two interchangeable backends implement the same trial layout: a compiled
kernel (``cachecancel._mc_kernel``, built from Cython) and a NumPy fallback
(:mod:`cachecancel._mc_python`).  The compiled kernel is selected at import
when available; set ``CACHECANCEL_MC_BACKEND=python`` or ``compiled`` to
override, or pass ``backend=`` explicitly to any estimator.

The disc window defaults to ``10 / sqrt(pi * lambda_b)`` (the mean number
of simulated base stations is then 100).  Interference from beyond the
window is not simulated; instead its exact mean power,

    2 pi lambda P / (beta - 2) * ((1 - eta) * W**(2-beta)
                                  + eta * max(W, r_b)**(2-beta)),

is added to every trial's denominator (Campbell's formula applied to the
omitted far field, split by cancellable fraction).  This removes the
window-truncation bias; set ``far_field_correction=False`` to study it.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _mc_python, philox
from .exceptions import FullyCachedNetwork
from .model import (NetworkParams, alpha_fractions, eta, sinr_threshold)

try:
    from . import _mc_kernel
except ImportError:
    _mc_kernel = None

__all__ = [
    "TrialConfig",
    "TrialOutcome",
    "PlrEstimate",
    "SweepPoint",
    "active_backend",
    "available_backends",
    "default_window_radius",
    "run_trial",
    "sample_trials",
    "estimate_plr",
    "estimate_plr_labeled",
    "sweep",
    "average_plr_sim",
]

_ENV_VAR = "CACHECANCEL_MC_BACKEND"


def available_backends():
    """Names of the backends importable in this environment."""
    names = ["python"]
    if _mc_kernel is not None:
        names.insert(0, "compiled")
    return tuple(names)


def _resolve_backend(name=None):
    if name is None:
        name = os.environ.get(_ENV_VAR)
    if name is None:
        name = "compiled" if _mc_kernel is not None else "python"
    if name == "python":
        return _mc_python
    if name == "compiled":
        if _mc_kernel is None:
            raise RuntimeError(
                "the compiled Monte Carlo kernel is not available; "
                "reinstall with a C compiler or use the python backend")
        return _mc_kernel
    raise ValueError(f"unknown Monte Carlo backend {name!r}; "
                     f"expected 'compiled' or 'python'")


def active_backend():
    """Name of the backend estimators use when none is passed."""
    return _resolve_backend().NAME


def default_window_radius(params):
    """Disc radius holding 100 base stations on average."""
    return 10.0 / math.sqrt(math.pi * params.lambda_b)


@dataclass(frozen=True)
class TrialConfig:
    """One Monte Carlo scenario.

    Attributes
    ----------
    params : NetworkParams
    eta_i : float
        Cancellable fraction of interfering transmissions, in [0, 1].
    trials : int
        Number of trials, >= 1.
    seed : int
        64-bit master seed.
    window_radius : float or None
        Simulation disc radius in meters; None selects the default.
    far_field_correction : bool
        Add the mean beyond-window interference to every trial.
    """

    params: NetworkParams
    eta_i: float = 0.0
    trials: int = 100_000
    seed: int = 0
    window_radius: float = None
    far_field_correction: bool = True

    def __post_init__(self):
        if not 0.0 <= self.eta_i <= 1.0:
            raise ValueError("eta_i must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.window_radius is not None and not (
                math.isfinite(self.window_radius) and self.window_radius > 0):
            raise ValueError("window_radius must be finite and > 0")


@dataclass(frozen=True)
class TrialOutcome:
    """Result of a single trial."""

    serving_distance: float
    sinr: float
    lost: bool


@dataclass(frozen=True)
class PlrEstimate:
    """A loss-rate estimate with its binomial standard error."""

    mean: float
    std_error: float
    trials: int
    rejections: int


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a sweep."""

    r_b: float
    eta_i: float
    estimate: PlrEstimate


def _prepare(params, window_radius, far_field_correction):
    """Kernel constants shared by both backends for one scenario."""
    window = (window_radius if window_radius is not None
              else default_window_radius(params))
    mu = params.lambda_b * math.pi * window * window
    kmax = int(math.ceil(mu + 12.0 * math.sqrt(mu) + 40.0))
    cdf = np.empty(kmax + 1, dtype=np.float64)
    p = math.exp(-mu)
    total = p
    cdf[0] = total
    for k in range(1, kmax + 1):
        p = p * (mu / k)
        total = total + p
        cdf[k] = total
    if far_field_correction:
        tail_coeff = (2.0 * math.pi * params.lambda_b * params.tx_power
                      / (params.beta - 2.0))
    else:
        tail_coeff = 0.0
    return dict(
        cdf=cdf,
        window=window,
        beta=params.beta,
        t_bar=sinr_threshold(params),
        tx_power=params.tx_power,
        noise=params.noise_power,
        r_b=params.r_b,
        tail_coeff=tail_coeff,
        tail_w=window ** (2.0 - params.beta),
        tail_rb=max(window, params.r_b) ** (2.0 - params.beta),
    )


def _config_kernel_args(config):
    return _prepare(config.params, config.window_radius,
                    config.far_field_correction)


def run_trial(config, trial_index=0, backend=None):
    """Replay a single trial of the configuration."""
    kernel = _resolve_backend(backend)
    args = _config_kernel_args(config)
    trials = np.array([trial_index], dtype=np.uint64)
    etas = np.array([config.eta_i], dtype=np.float64)
    lost, serving, sinr, _ = kernel.simulate_batch(
        int(config.seed), trials, etas, 0, **args)
    return TrialOutcome(serving_distance=float(serving[0]),
                        sinr=float(sinr[0]), lost=bool(lost[0]))


def sample_trials(config, backend=None):
    """Run all trials and keep per-trial outputs.

    Returns
    -------
    (lost, serving_distance, sinr, rejections)
        Arrays over trial index, plus the empty-window redraw count.
    """
    kernel = _resolve_backend(backend)
    args = _config_kernel_args(config)
    trials = np.arange(config.trials, dtype=np.uint64)
    etas = np.full(config.trials, config.eta_i, dtype=np.float64)
    return kernel.simulate_batch(int(config.seed), trials, etas, 0, **args)


def _estimate_from_counts(losses, trials, rejections):
    mean = losses / trials
    std_error = math.sqrt(mean * (1.0 - mean) / trials)
    return PlrEstimate(mean=mean, std_error=std_error, trials=trials,
                       rejections=rejections)


def estimate_plr(config, backend=None, chunk_size=262_144):
    """Estimate the loss rate of one scenario.

    The estimate is a pure fold over per-trial outcomes, so it does not
    depend on `chunk_size` or on how work is scheduled.
    """
    kernel = _resolve_backend(backend)
    args = _config_kernel_args(config)
    losses = 0
    rejections = 0
    for lo in range(0, config.trials, chunk_size):
        hi = min(lo + chunk_size, config.trials)
        trials = np.arange(lo, hi, dtype=np.uint64)
        etas = np.full(hi - lo, config.eta_i, dtype=np.float64)
        lost, _, _, rej = kernel.simulate_batch(
            int(config.seed), trials, etas, 0, **args)
        losses += int(lost.sum())
        rejections += rej
    return _estimate_from_counts(losses, config.trials, rejections)


def estimate_plr_labeled(params, library, scheme, subset_index, trials=100_000,
                         seed=0, window_radius=None,
                         far_field_correction=True):
    """Loss-rate estimate with explicitly labeled interferer packets.

    Instead of thinning interferers by the cancellable fraction, each
    interferer is assigned a packet drawn from the transmit distribution
    and is cancellable iff the packet is in subset ``subset_index``'s
    cache.  Statistically equivalent to :func:`estimate_plr` with
    ``eta_i = eta(scheme, alpha)[subset_index]``; runs on the NumPy
    backend only (diagnostic mode).
    """
    alpha = alpha_fractions(library, scheme)
    cache_row = np.ascontiguousarray(scheme.cache_matrix[subset_index],
                                     dtype=np.uint8)
    eta_i = float(eta(scheme, alpha)[subset_index])
    args = _prepare(params, window_radius, far_field_correction)
    cum_alpha = np.cumsum(alpha)
    lost, _, _, rejections = _mc_python.simulate_batch_labeled(
        int(seed), np.arange(trials, dtype=np.uint64), cum_alpha, cache_row,
        eta_i, 0, **args)
    return _estimate_from_counts(int(lost.sum()), trials, rejections)


def sweep(params, r_b_values, eta_values, trials=100_000, seed=0,
          window_radius=None, far_field_correction=True, backend=None,
          workers=None):
    """Estimate the loss rate over a (r_b, eta) grid.

    Every grid point replays the same trial streams (common random
    numbers), so differences between points are not masked by sampling
    noise.  Points run on a thread pool; the compiled kernel releases the
    GIL, so threads give real parallelism.

    Returns a list of :class:`SweepPoint` in row-major (r_b, eta) order.
    """
    points = [(float(r_b), float(e)) for r_b in r_b_values
              for e in eta_values]
    if not points:
        return []

    def one(point):
        r_b, eta_i = point
        config = TrialConfig(
            params=replace(params, r_b=r_b), eta_i=eta_i, trials=trials,
            seed=seed, window_radius=window_radius,
            far_field_correction=far_field_correction)
        return SweepPoint(r_b=r_b, eta_i=eta_i,
                          estimate=estimate_plr(config, backend=backend))

    if workers == 1 or len(points) == 1:
        results = [one(p) for p in points]
    else:
        if workers is None:
            workers = min(len(points), os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, points))
    return results


def _pick(cdf, u):
    """Categorical sampling by CDF inversion (clamped to the last bin)."""
    return np.minimum(np.searchsorted(cdf, u, side="right"),
                      cdf.shape[0] - 1)


def average_plr_sim(params, library, scheme, r_b=None, trials=100_000,
                    seed=0, window_radius=None, far_field_correction=True,
                    backend=None, labeled=False):
    """Loss rate averaged over random (subset, packet) requests.

    Each trial first samples the user's cache subset (by scheme density)
    and requested packet (by access probability) from stream positions 0
    and 1.  A cached request is never lost; an uncached one runs the radio
    trial with that subset's cancellable fraction, consuming the stream
    from position 2.

    With ``labeled=True``, interferer packets are sampled explicitly
    instead of Bernoulli-thinned (NumPy backend only).
    """
    if library.n != scheme.n:
        raise ValueError("library and scheme disagree on packet count")
    if r_b is not None:
        params = replace(params, r_b=float(r_b))
    trials = int(trials)
    trial_idx = np.arange(trials, dtype=np.uint64)
    try:
        alpha = alpha_fractions(library, scheme)
    except FullyCachedNetwork:
        return _estimate_from_counts(0, trials, 0)
    eta_by_subset = eta(scheme, alpha)

    u_subset = philox.doubles_at_indices(
        seed, trial_idx, np.zeros(trials, dtype=np.uint64))
    u_packet = philox.doubles_at_indices(
        seed, trial_idx, np.ones(trials, dtype=np.uint64))
    subset_of = _pick(np.cumsum(scheme.densities), u_subset)
    packet_of = _pick(np.cumsum(library.probabilities), u_packet)
    cached = scheme.cache_matrix[subset_of, packet_of] == 1

    args = _prepare(params, window_radius, far_field_correction)
    losses = 0
    rejections = 0
    if labeled:
        cum_alpha = np.cumsum(alpha)
        for i in range(scheme.densities.shape[0]):
            sel = (~cached) & (subset_of == i)
            if not sel.any():
                continue
            cache_row = np.ascontiguousarray(scheme.cache_matrix[i],
                                             dtype=np.uint8)
            lost, _, _, rej = _mc_python.simulate_batch_labeled(
                int(seed), trial_idx[sel], cum_alpha, cache_row,
                float(eta_by_subset[i]), 2, **args)
            losses += int(lost.sum())
            rejections += rej
    else:
        kernel = _resolve_backend(backend)
        uncached = trial_idx[~cached]
        if uncached.size:
            etas = eta_by_subset[subset_of[~cached]].astype(np.float64)
            lost, _, _, rej = kernel.simulate_batch(
                int(seed), uncached, etas, 2, **args)
            losses += int(lost.sum())
            rejections += rej
    return _estimate_from_counts(losses, trials, rejections)
