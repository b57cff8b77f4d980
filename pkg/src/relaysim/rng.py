"""Counter-based random number generation (Philox-4x64-10), vectorized.

Every Monte Carlo trial must be a pure function of ``(seed, trial_index)``
so that results do not depend on batch size, worker count, or the order in
which trials are executed.  A counter-based generator gives exactly that:
word ``w`` of trial ``t`` lives at a fixed counter position and can be
produced in any order, one at a time or a million at a time.

The generator is Philox-4x64 with 10 rounds.  The 256-bit counter is split
as ``(block, 0, 0, trial)`` where ``block`` indexes consecutive 4-word
outputs within a trial and ``trial`` is the trial index, so each trial owns
an independent stream of 2**66 words.  The key is ``(seed, 0)``.

The implementation is plain vectorized numpy on uint64 arrays.  It is
validated bit-for-bit against ``numpy.random.Philox`` in the test suite
(numpy's generator emits the block at counter ``c + 1`` first, because it
increments before generating; the tests account for that offset).
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

#: Number of mixing rounds (the standard full-strength parameterization).
PHILOX_ROUNDS = 10

#: Output words per counter block.
WORDS_PER_BLOCK = 4

# Round multipliers and key schedule ("Weyl") constants of Philox-4x64.
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)

_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = 0xFFFFFFFFFFFFFFFF
_S32 = np.uint64(32)

#: Scale turning a 52-bit integer plus a half into a double in (0, 1).
_U52_SCALE = 2.0 ** -52
_SHIFT12 = np.uint64(12)


def _mulhi(a: np.ndarray, b: np.uint64) -> np.ndarray:
    """High 64 bits of the 128-bit product ``a * b`` (elementwise)."""
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    cross = (lo_lo >> _S32) + (hi_lo & _MASK32) + lo_hi
    return a_hi * b_hi + (hi_lo >> _S32) + (cross >> _S32)


def philox_4x64(
    c0: np.ndarray,
    c1: np.ndarray,
    c2: np.ndarray,
    c3: np.ndarray,
    k0: np.uint64,
    k1: np.uint64,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Apply the 10-round Philox-4x64 bijection to counter words.

    Parameters
    ----------
    c0, c1, c2, c3 : uint64 arrays (broadcastable)
        Counter words, least significant first.
    k0, k1 : uint64
        Key words.

    Returns
    -------
    Four uint64 arrays: the output block for each input counter.
    """
    c0 = np.asarray(c0, dtype=np.uint64)
    c1 = np.broadcast_to(np.asarray(c1, dtype=np.uint64), c0.shape).copy()
    c2 = np.broadcast_to(np.asarray(c2, dtype=np.uint64), c0.shape).copy()
    c3 = np.broadcast_to(np.asarray(c3, dtype=np.uint64), c0.shape).copy()
    # uint64 arithmetic is modular by design; silence the overflow warning.
    with np.errstate(over="ignore"):
        for rnd in range(PHILOX_ROUNDS):
            if rnd:
                k0 = k0 + _W0
                k1 = k1 + _W1
            hi0 = _mulhi(c0, _M0)
            lo0 = _M0 * c0
            hi1 = _mulhi(c2, _M1)
            lo1 = _M1 * c2
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def _as_key(seed: int) -> tuple[np.uint64, np.uint64]:
    """Map an integer seed to the 128-bit Philox key ``(seed mod 2**64, 0)``."""
    return np.uint64(int(seed) & _MASK64), np.uint64(0)


def raw_words(
    seed: int,
    trial_indices: np.ndarray,
    word_start: int,
    word_count: int,
) -> np.ndarray:
    """Raw 64-bit output words for a batch of trial streams.

    Parameters
    ----------
    seed : int
        Stream key (reduced modulo 2**64).
    trial_indices : array of int
        Trial numbers; each selects an independent stream.
    word_start, word_count : int
        Half-open word range ``[word_start, word_start + word_count)``
        within each trial's stream.  Only the counter blocks overlapping
        the range are evaluated, so skipping words costs nothing.

    Returns
    -------
    uint64 array of shape ``(len(trial_indices), word_count)``.
    """
    if word_count < 0 or word_start < 0:
        raise ValueError("word range must be non-negative")
    trials = np.atleast_1d(np.asarray(trial_indices)).astype(np.uint64)
    if trials.ndim != 1:
        raise ValueError("trial_indices must be one-dimensional")
    n_trials = trials.shape[0]
    if word_count == 0:
        return np.empty((n_trials, 0), dtype=np.uint64)

    k0, k1 = _as_key(seed)
    first_block = word_start // WORDS_PER_BLOCK
    last_block = (word_start + word_count - 1) // WORDS_PER_BLOCK
    n_blocks = last_block - first_block + 1

    blocks = np.arange(first_block, last_block + 1, dtype=np.uint64)
    c0 = np.broadcast_to(blocks, (n_trials, n_blocks)).reshape(-1)
    c3 = np.repeat(trials, n_blocks)
    zero = np.uint64(0)
    w0, w1, w2, w3 = philox_4x64(c0, zero, zero, c3, k0, k1)

    words = np.empty((n_trials * n_blocks, WORDS_PER_BLOCK), dtype=np.uint64)
    words[:, 0] = w0
    words[:, 1] = w1
    words[:, 2] = w2
    words[:, 3] = w3
    words = words.reshape(n_trials, n_blocks * WORDS_PER_BLOCK)
    offset = word_start - first_block * WORDS_PER_BLOCK
    return words[:, offset : offset + word_count]


def uniform_open01(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles in the open interval (0, 1).

    Uses the top 52 bits plus a half-step offset, so the extremes map to
    2**-53 and 1 - 2**-53 — both strictly inside (0, 1) and exactly
    representable.  (With 53 bits the top word would round to exactly 1.0,
    which the normal inverse CDF maps to infinity.)
    """
    return ((words >> _SHIFT12).astype(np.float64) + 0.5) * _U52_SCALE


def normal_words(
    seed: int,
    trial_indices: np.ndarray,
    word_start: int,
    word_count: int,
) -> np.ndarray:
    """Standard normal variates at fixed word positions of trial streams.

    Each output element is ``ndtri`` (inverse normal CDF) of the uniform
    derived from the corresponding raw word, so element ``(t, w)`` depends
    only on ``(seed, trial_indices[t], word_start + w)``.
    """
    return ndtri(uniform_open01(raw_words(seed, trial_indices, word_start, word_count)))
