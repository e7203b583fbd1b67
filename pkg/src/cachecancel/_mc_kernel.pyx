# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False
"""Compiled Monte Carlo kernel.

Replays exactly the random streams and trial layout of
``cachecancel._mc_python`` (see that module's docstring); only elementary
function rounding (log/pow) may differ from NumPy by an ulp.  The main loop
runs without the GIL, so sweeps can fan trials out over threads.
"""

from libc.math cimport INFINITY, log, pow, sqrt
from libc.stdlib cimport free, malloc

import numpy as np

cimport numpy as cnp

from .exceptions import NumericalError

cnp.import_array()

NAME = "compiled"

ctypedef unsigned int u32
ctypedef unsigned long long u64

cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef long _MAX_ATTEMPTS = 10000


cdef inline void _philox_block(u32 k0, u32 k1, u32 c0, u32 c1, u32 c2,
                               u32 c3, u32* out) noexcept nogil:
    cdef u64 p0, p1
    cdef u32 hi0, lo0, hi1, lo1, n0, n1, n2, n3
    cdef int rnd
    for rnd in range(10):
        if rnd:
            k0 = k0 + 0x9E3779B9u
            k1 = k1 + 0xBB67AE85u
        p0 = (<u64>c0) * (<u64>0xD2511F53u)
        p1 = (<u64>c2) * (<u64>0xCD9E8D57u)
        hi0 = <u32>(p0 >> 32)
        lo0 = <u32>p0
        hi1 = <u32>(p1 >> 32)
        lo1 = <u32>p1
        n0 = hi1 ^ c1 ^ k0
        n1 = lo1
        n2 = hi0 ^ c3 ^ k1
        n3 = lo0
        c0 = n0
        c1 = n1
        c2 = n2
        c3 = n3
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


cdef inline void _fill_doubles(u32 k0, u32 k1, u64 stream, u64 start,
                               u64 count, double* out) noexcept nogil:
    """Write stream doubles [start, start + count) into out."""
    cdef u64 end = start + count
    cdef u64 blk = start >> 1
    cdef u64 pos
    cdef u64 hi, lo
    cdef u32 words[4]
    cdef Py_ssize_t i = 0
    while blk * 2 < end:
        _philox_block(k0, k1, <u32>blk, <u32>(blk >> 32), <u32>stream,
                      <u32>(stream >> 32), words)
        hi = ((<u64>words[0]) << 32) | (<u64>words[1])
        lo = ((<u64>words[2]) << 32) | (<u64>words[3])
        pos = blk * 2
        if pos >= start and pos < end:
            out[i] = <double>(hi >> 11) * _INV_2_53
            i += 1
        pos += 1
        if pos >= start and pos < end:
            out[i] = <double>(lo >> 11) * _INV_2_53
            i += 1
        blk += 1


cdef inline long _poisson_pick(double u, const double* cdf,
                               long kmax) noexcept nogil:
    cdef long k = 0
    while u > cdf[k] and k < kmax:
        k += 1
    return k


def simulate_batch(seed, cnp.uint64_t[::1] trials, double[::1] etas,
                   long double_offset, double[::1] cdf, double window,
                   double beta, double t_bar, double tx_power, double noise,
                   double r_b, double tail_coeff, double tail_w,
                   double tail_rb):
    """Compiled counterpart of ``_mc_python.simulate_batch``."""
    cdef u64 seed_v = seed
    cdef u32 k0 = <u32>(seed_v & 0xFFFFFFFFu)
    cdef u32 k1 = <u32>(seed_v >> 32)
    cdef Py_ssize_t n_trials = trials.shape[0]
    cdef long kmax = cdf.shape[0] - 1

    lost_arr = np.zeros(n_trials, dtype=np.uint8)
    serving_arr = np.empty(n_trials, dtype=np.float64)
    sinr_arr = np.empty(n_trials, dtype=np.float64)
    cdef cnp.uint8_t[::1] lost = lost_arr
    cdef double[::1] serving = serving_arr
    cdef double[::1] sinr_out = sinr_arr

    cdef double* buf = <double*>malloc(3 * (kmax + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()

    cdef long rejections = 0
    cdef int error_flag = 0
    cdef bint beta4 = beta == 4.0
    cdef Py_ssize_t t, i
    cdef u64 stream, pos
    cdef long n, attempts, sidx
    cdef double eta_t, utmp, dd, d2, dp, hh, hs, dps
    cdef double r_serv, excl, interference, tail, denom, sinr

    with nogil:
        for t in range(n_trials):
            stream = trials[t]
            eta_t = etas[t]
            pos = <u64>double_offset
            attempts = 0
            n = 0
            while True:
                _fill_doubles(k0, k1, stream, pos, 1, &utmp)
                pos += 1
                n = _poisson_pick(utmp, &cdf[0], kmax)
                if n > 0:
                    break
                rejections += 1
                attempts += 1
                if attempts >= _MAX_ATTEMPTS:
                    error_flag = 1
                    break
            if error_flag:
                break
            _fill_doubles(k0, k1, stream, pos, <u64>(3 * n), buf)

            r_serv = INFINITY
            sidx = 0
            for i in range(n):
                dd = window * sqrt(buf[i])
                buf[i] = dd
                if dd < r_serv:
                    r_serv = dd
                    sidx = i
            excl = r_b if r_b > r_serv else r_serv

            interference = 0.0
            for i in range(n):
                if i == sidx:
                    continue
                dd = buf[i]
                if buf[2 * n + i] < eta_t and dd <= excl:
                    continue
                hh = -log(1.0 - buf[n + i])
                if beta4:
                    d2 = dd * dd
                    dp = d2 * d2
                else:
                    dp = pow(dd, beta)
                interference += hh / dp

            hs = -log(1.0 - buf[n + sidx])
            if beta4:
                d2 = r_serv * r_serv
                dps = d2 * d2
            else:
                dps = pow(r_serv, beta)
            tail = tail_coeff * ((1.0 - eta_t) * tail_w + eta_t * tail_rb)
            denom = tx_power * interference + tail + noise
            if denom == 0.0 or dps == 0.0:
                sinr = INFINITY
            else:
                sinr = tx_power * hs / dps / denom
            lost[t] = 1 if sinr < t_bar else 0
            serving[t] = r_serv
            sinr_out[t] = sinr

    free(buf)
    if error_flag:
        raise NumericalError(
            "a trial window stayed empty after 10000 redraws; "
            "lambda_b * window_radius**2 is far too small")
    return lost_arr, serving_arr, sinr_arr, rejections


def doubles_debug(seed, stream, start, count):
    """Stream doubles as the trial loop consumes them (test hook)."""
    cdef u64 seed_v = seed
    cdef u32 k0 = <u32>(seed_v & 0xFFFFFFFFu)
    cdef u32 k1 = <u32>(seed_v >> 32)
    out = np.empty(int(count), dtype=np.float64)
    cdef double[::1] view = out
    if int(count) > 0:
        _fill_doubles(k0, k1, <u64>stream, <u64>start, <u64>count, &view[0])
    return out
