"""Counter-based random number generation (Philox-4x32-10).

The simulator addresses every random draw by ``(seed, stream, position)``
instead of advancing shared generator state.  Each Monte Carlo trial owns one
stream, so results are bit-identical no matter how trials are chunked or how
many workers run them, and any single trial can be replayed in isolation.

Philox-4x32-10 is the counter-based generator of Salmon et al., "Parallel
random numbers: as easy as 1, 2, 3" (SC'11).  A 128-bit counter and a 64-bit
key go through 10 rounds of 32x32->64 bit multiply/xor mixing; the output is
four 32-bit words.  This module fixes the following conventions:

* key      = ``(seed & 0xFFFFFFFF, seed >> 32)``
* counter  = ``(block_lo, block_hi, stream_lo, stream_hi)``
* each 128-bit output block yields two doubles: words ``(w0, w1)`` and
  ``(w2, w3)`` each form ``u64 = (w_even << 32) | w_odd`` and map to
  ``(u64 >> 11) * 2**-53``, a uniform double in ``[0, 1)``.

Stream ``2**64 - 1`` is reserved for :func:`derive_seed` and must not be used
as a trial index.
"""

import numpy as np

__all__ = [
    "philox4x32",
    "doubles_at",
    "doubles_at_indices",
    "doubles_for_blocks",
    "derive_seed",
]

# Multipliers and key increments from the reference implementation.
_M0 = 0xD2511F53
_M1 = 0xCD9E8D57
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Stream index reserved for seed derivation.
RESERVED_STREAM = _MASK64

_INV_2_53 = 1.0 / 9007199254740992.0


def _check_u64(value, name):
    value = int(value)
    if not 0 <= value <= _MASK64:
        raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")
    return value


def philox4x32(key, counter):
    """Run Philox-4x32-10 on a batch of counters.

    Parameters
    ----------
    key : tuple of int
        Two 32-bit key words ``(k0, k1)``.
    counter : array_like, shape (n, 4), uint32
        One 128-bit counter per row, least significant word first.

    Returns
    -------
    ndarray, shape (n, 4), uint32
        The output blocks, one row per counter.
    """
    ctr = np.ascontiguousarray(counter, dtype=np.uint32)
    if ctr.ndim != 2 or ctr.shape[1] != 4:
        raise ValueError("counter must have shape (n, 4)")
    c0 = ctr[:, 0].copy()
    c1 = ctr[:, 1].copy()
    c2 = ctr[:, 2].copy()
    c3 = ctr[:, 3].copy()
    k0 = int(key[0]) & _MASK32
    k1 = int(key[1]) & _MASK32
    for rnd in range(10):
        if rnd:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = c0.astype(np.uint64) * np.uint64(_M0)
        p1 = c2.astype(np.uint64) * np.uint64(_M1)
        hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
        lo0 = p0.astype(np.uint32)
        hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
        lo1 = p1.astype(np.uint32)
        c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint32(k0), lo1, hi0 ^ c3 ^ np.uint32(k1), lo0
    return np.stack([c0, c1, c2, c3], axis=1)


def _key_words(seed):
    seed = _check_u64(seed, "seed")
    return seed & _MASK32, seed >> 32


def _blocks_to_doubles(blocks):
    """Map output blocks (n, 4) to doubles (n, 2) in [0, 1)."""
    w = blocks.astype(np.uint64)
    hi = (w[:, 0] << np.uint64(32)) | w[:, 1]
    lo = (w[:, 2] << np.uint64(32)) | w[:, 3]
    out = np.empty((blocks.shape[0], 2), dtype=np.float64)
    out[:, 0] = (hi >> np.uint64(11)).astype(np.float64) * _INV_2_53
    out[:, 1] = (lo >> np.uint64(11)).astype(np.float64) * _INV_2_53
    return out


def doubles_at(seed, stream, start, count):
    """Return doubles at positions ``[start, start + count)`` of a stream.

    Positions index an unbounded per-stream sequence of uniforms in
    ``[0, 1)``; the call is pure, so overlapping requests agree exactly.
    """
    seed = _check_u64(seed, "seed")
    stream = _check_u64(stream, "stream")
    start = int(start)
    count = int(count)
    if start < 0 or count < 0:
        raise ValueError("start and count must be non-negative")
    if count == 0:
        return np.empty(0, dtype=np.float64)
    first = start >> 1
    last = (start + count - 1) >> 1
    blk = first + np.arange(last - first + 1, dtype=np.uint64)
    ctr = np.empty((blk.shape[0], 4), dtype=np.uint32)
    ctr[:, 0] = (blk & np.uint64(_MASK32)).astype(np.uint32)
    ctr[:, 1] = (blk >> np.uint64(32)).astype(np.uint32)
    ctr[:, 2] = stream & _MASK32
    ctr[:, 3] = stream >> 32
    doubles = _blocks_to_doubles(philox4x32(_key_words(seed), ctr)).ravel()
    lo = start - 2 * first
    return doubles[lo:lo + count]


def doubles_at_indices(seed, streams, positions):
    """Return one double per (stream, position) pair.

    Parameters
    ----------
    seed : int
    streams : array_like, uint64
    positions : array_like, integer
        Same shape as `streams`.
    """
    st = np.ascontiguousarray(streams, dtype=np.uint64)
    pos = np.ascontiguousarray(positions, dtype=np.uint64)
    if st.shape != pos.shape:
        raise ValueError("streams and positions must have the same shape")
    blk = pos >> np.uint64(1)
    ctr = np.empty((st.shape[0], 4), dtype=np.uint32)
    ctr[:, 0] = (blk & np.uint64(_MASK32)).astype(np.uint32)
    ctr[:, 1] = (blk >> np.uint64(32)).astype(np.uint32)
    ctr[:, 2] = (st & np.uint64(_MASK32)).astype(np.uint32)
    ctr[:, 3] = (st >> np.uint64(32)).astype(np.uint32)
    doubles = _blocks_to_doubles(philox4x32(_key_words(seed), ctr))
    return np.where((pos & np.uint64(1)) == 0, doubles[:, 0], doubles[:, 1])


def doubles_for_blocks(seed, streams, blocks):
    """Return both doubles of each (stream, block) pair, shape (n, 2).

    Block ``b`` of a stream holds the stream's doubles at positions
    ``2 b`` and ``2 b + 1``.
    """
    st = np.ascontiguousarray(streams, dtype=np.uint64)
    blk = np.ascontiguousarray(blocks, dtype=np.uint64)
    if st.shape != blk.shape:
        raise ValueError("streams and blocks must have the same shape")
    ctr = np.empty((st.shape[0], 4), dtype=np.uint32)
    ctr[:, 0] = (blk & np.uint64(_MASK32)).astype(np.uint32)
    ctr[:, 1] = (blk >> np.uint64(32)).astype(np.uint32)
    ctr[:, 2] = (st & np.uint64(_MASK32)).astype(np.uint32)
    ctr[:, 3] = (st >> np.uint64(32)).astype(np.uint32)
    return _blocks_to_doubles(philox4x32(_key_words(seed), ctr))


def derive_seed(seed, index):
    """Derive an independent 64-bit sub-seed from a master seed.

    Uses the reserved stream, so sub-seed material never collides with
    trial streams under the same master seed.
    """
    seed = _check_u64(seed, "seed")
    index = _check_u64(index, "index")
    ctr = np.array(
        [[index & _MASK32, index >> 32, _MASK32, _MASK32]], dtype=np.uint32
    )
    block = philox4x32(_key_words(seed), ctr)[0]
    return (int(block[0]) << 32) | int(block[1])
