"""NumPy Monte Carlo backend.

This is the reference implementation of the trial layout; the compiled
kernel replays the same random streams and must produce the same outcomes.

Each trial owns one Philox stream and consumes doubles sequentially from
``double_offset``:

* position 0: one uniform inverting the Poisson CDF of the number of base
  stations in the window (an empty window consumes the draw, counts as a
  rejection, and retries at the next position);
* then ``n`` uniforms for distances ``d = window * sqrt(u)``;
* then ``n`` uniforms for Rayleigh-fading powers ``h = -log(1 - u)``;
* then ``n`` uniforms for thinning marks (``u < eta`` marks the base
  station's current packet as cancellable).

The serving base station is the nearest one (first index on ties).  A
cancellable interferer inside ``max(serving distance, r_b)`` contributes
nothing; every other non-serving base station contributes ``h * d**-beta``.
The constant ``tail_coeff * ((1-eta) * tail_w + eta * tail_rb)`` adds the
expected interference power from beyond the window, so the finite window
does not bias the loss rate (see the montecarlo module for the constants).
"""

import math

import numpy as np

from . import philox
from .exceptions import NumericalError

NAME = "python"

_MAX_ATTEMPTS = 10_000
_SUBCHUNK = 4096


def _poisson_counts(seed, trials, double_offset, cdf):
    """Invert the Poisson CDF per trial, redrawing empty windows.

    Returns (counts, attempts, rejections); attempt ``a`` consumed draws at
    positions ``double_offset .. double_offset + a``.
    """
    counts = np.zeros(trials.shape[0], dtype=np.int64)
    attempts = np.zeros(trials.shape[0], dtype=np.int64)
    pending = np.arange(trials.shape[0])
    kmax = cdf.shape[0] - 1
    rejections = 0
    for attempt in range(_MAX_ATTEMPTS):
        pos = np.full(pending.shape[0], double_offset + attempt,
                      dtype=np.uint64)
        u = philox.doubles_at_indices(seed, trials[pending], pos)
        k = np.minimum(np.searchsorted(cdf, u, side="left"), kmax)
        counts[pending] = k
        attempts[pending] = attempt
        empty = k == 0
        rejections += int(empty.sum())
        pending = pending[empty]
        if pending.size == 0:
            return counts, attempts, rejections
    raise NumericalError(
        "a trial window stayed empty after 10000 redraws; "
        "lambda_b * window_radius**2 is far too small")


def _layout_doubles(seed, trials, base, counts):
    """Fetch each trial's 3n layout doubles as slices of one flat array.

    Returns (flat, start) where trial ``t`` owns
    ``flat[start[t] : start[t] + 3 * counts[t]]``.
    """
    first = base >> 1
    last = (base + 3 * counts - 1) >> 1
    nblk = last - first + 1
    seg_end = np.cumsum(nblk)
    seg_start = seg_end - nblk
    total = int(seg_end[-1])
    within = np.arange(total, dtype=np.int64) - np.repeat(seg_start, nblk)
    blocks = np.repeat(first, nblk) + within
    streams = np.repeat(trials, nblk)
    flat = philox.doubles_for_blocks(seed, streams, blocks).reshape(-1)
    start = 2 * seg_start + (base - 2 * first)
    return flat, start


def _finish_trial(sig_num, dp_s, interference, tail, tx_power, noise, t_bar):
    """SINR and loss decision shared by both cancellation modes."""
    denom = tx_power * interference + tail + noise
    if denom == 0.0 or dp_s == 0.0:
        return math.inf, 0
    sinr = sig_num / dp_s / denom
    return sinr, 1 if sinr < t_bar else 0


def simulate_batch(seed, trials, etas, double_offset, cdf, window, beta,
                   t_bar, tx_power, noise, r_b, tail_coeff, tail_w, tail_rb):
    """Run one batch of trials; see the module docstring for the layout.

    Parameters
    ----------
    seed : int
    trials : ndarray, uint64
        Stream index of each trial.
    etas : ndarray, float64
        Cancellable fraction per trial.
    double_offset : int
        First stream position to consume (callers that sampled a preamble
        pass the number of doubles already used).
    cdf : ndarray, float64
        Poisson CDF of the base station count, index = count.
    window, beta, t_bar, tx_power, noise, r_b : float
        Physics constants (SI units).
    tail_coeff, tail_w, tail_rb : float
        Far-field correction constants; pass ``tail_coeff = 0`` to disable.

    Returns
    -------
    (lost, serving, sinr, rejections)
        uint8/float64/float64 arrays of one entry per trial, plus the
        total number of empty-window redraws.
    """
    n_trials = trials.shape[0]
    lost = np.zeros(n_trials, dtype=np.uint8)
    serving = np.empty(n_trials, dtype=np.float64)
    sinr_out = np.empty(n_trials, dtype=np.float64)
    rejections = 0
    for lo in range(0, n_trials, _SUBCHUNK):
        hi = min(lo + _SUBCHUNK, n_trials)
        rejections += _sub_batch(
            seed, trials[lo:hi], etas[lo:hi], double_offset, cdf, window,
            beta, t_bar, tx_power, noise, r_b, tail_coeff, tail_w, tail_rb,
            None, None, lost[lo:hi], serving[lo:hi], sinr_out[lo:hi])
    return lost, serving, sinr_out, rejections


def simulate_batch_labeled(seed, trials, cum_alpha, cache_row, eta_i,
                           double_offset, cdf, window, beta, t_bar, tx_power,
                           noise, r_b, tail_coeff, tail_w, tail_rb):
    """Labeled-interferer variant: each interferer's packet is sampled from
    the transmit distribution ``alpha`` (via its CDF) and is cancellable iff
    the user's cache row holds that packet.

    Consumes the same stream positions as `simulate_batch`; the thinning
    mark doubles become packet labels.  ``eta_i`` must equal
    ``sum(alpha[cache_row == 1])`` and only feeds the far-field correction.
    """
    n_trials = trials.shape[0]
    lost = np.zeros(n_trials, dtype=np.uint8)
    serving = np.empty(n_trials, dtype=np.float64)
    sinr_out = np.empty(n_trials, dtype=np.float64)
    etas = np.full(n_trials, eta_i, dtype=np.float64)
    rejections = 0
    for lo in range(0, n_trials, _SUBCHUNK):
        hi = min(lo + _SUBCHUNK, n_trials)
        rejections += _sub_batch(
            seed, trials[lo:hi], etas[lo:hi], double_offset, cdf, window,
            beta, t_bar, tx_power, noise, r_b, tail_coeff, tail_w, tail_rb,
            cum_alpha, cache_row, lost[lo:hi], serving[lo:hi],
            sinr_out[lo:hi])
    return lost, serving, sinr_out, rejections


def _sub_batch(seed, trials, etas, double_offset, cdf, window, beta, t_bar,
               tx_power, noise, r_b, tail_coeff, tail_w, tail_rb, cum_alpha,
               cache_row, lost, serving, sinr_out):
    counts, attempts, rejections = _poisson_counts(
        seed, trials, double_offset, cdf)
    base = double_offset + 1 + attempts
    flat, start = _layout_doubles(seed, trials, base, counts)
    beta4 = beta == 4.0
    labeled = cum_alpha is not None
    n_packets = 0 if cum_alpha is None else cum_alpha.shape[0]
    for t in range(trials.shape[0]):
        n = int(counts[t])
        eta_t = float(etas[t])
        s0 = int(start[t])
        block = flat[s0:s0 + 3 * n]
        u_d = block[0:n]
        u_h = block[n:2 * n]
        u_m = block[2 * n:3 * n]
        d = window * np.sqrt(u_d)
        s = int(np.argmin(d))
        r_serv = float(d[s])
        excl = r_b if r_b > r_serv else r_serv
        if beta4:
            d2 = d * d
            dp = d2 * d2
        else:
            dp = d ** beta
        h = -np.log(1.0 - u_h)
        if labeled:
            labels = np.minimum(
                np.searchsorted(cum_alpha, u_m, side="right"), n_packets - 1)
            cancellable = cache_row[labels] == 1
        else:
            cancellable = u_m < eta_t
        contributes = ~(cancellable & (d <= excl))
        contributes[s] = False
        # Sequential sum matches the compiled kernel's accumulation order.
        interference = sum((h[contributes] / dp[contributes]).tolist())
        tail = tail_coeff * ((1.0 - eta_t) * tail_w + eta_t * tail_rb)
        sinr, is_lost = _finish_trial(
            tx_power * float(h[s]), float(dp[s]), interference, tail,
            tx_power, noise, t_bar)
        lost[t] = is_lost
        serving[t] = r_serv
        sinr_out[t] = sinr
    return rejections


def doubles_debug(seed, stream, start, count):
    """Stream doubles as the physics loop consumes them (test hook)."""
    return philox.doubles_at(seed, stream, start, count)
