"""Channel model for the two-hop relay network.

A source communicates with a destination through K relays that together
carry N receive/transmit antennas; relay k owns a contiguous block of
``m[k]`` antennas.  All N backward coefficients (source to relay antennas)
and all N forward coefficients (relay antennas to destination) are i.i.d.
circularly-symmetric complex Gaussian with unit power, i.e. real and
imaginary parts are independent N(0, 1/2).

Randomness is counter-based (see :mod:`relaysim.rng`): trial ``t`` under
seed ``s`` always produces the same realization regardless of how trials
are batched or scheduled.  Word layout within a trial stream of length 4N:

========  =======================================
words     contents
========  =======================================
[0, N)    real parts of the backward coefficients
[N, 2N)   imaginary parts of the backward coefficients
[2N, 3N)  real parts of the forward coefficients
[3N, 4N)  imaginary parts of the forward coefficients
========  =======================================

Placing the forward coefficients in their own block range lets forward-only
studies skip generating the backward half entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import normal_words

_MASK64 = 0xFFFFFFFFFFFFFFFF

# Unit power per complex coefficient = 2*sigma^2 = 1 => sigma = sqrt(0.5).
_COEFF_SIGMA = np.sqrt(0.5)


@dataclass(frozen=True)
class Partition:
    """Antenna counts per relay, e.g. ``Partition((2, 2))`` for two
    dual-antenna relays.

    Relay k owns the contiguous antenna indices
    ``[offsets[k], offsets[k] + m[k])`` of the length-N coefficient vectors.
    """

    m: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.m) == 0:
            raise ValueError("partition must contain at least one relay")
        cleaned = []
        for mk in self.m:
            if int(mk) != mk or int(mk) < 1:
                raise ValueError(f"antenna counts must be positive integers, got {mk!r}")
            cleaned.append(int(mk))
        object.__setattr__(self, "m", tuple(cleaned))

    @classmethod
    def from_string(cls, text: str) -> "Partition":
        """Parse a comma-separated antenna-count list such as ``"2,1,1"``."""
        parts = [p.strip() for p in text.split(",")]
        if any(not p for p in parts):
            raise ValueError(f"empty antenna count in partition {text!r}")
        try:
            counts = tuple(int(p) for p in parts)
        except ValueError:
            raise ValueError(f"invalid antenna count in partition {text!r}") from None
        return cls(counts)

    @property
    def k(self) -> int:
        """Number of relays."""
        return len(self.m)

    @property
    def n(self) -> int:
        """Total number of antennas across all relays."""
        return sum(self.m)

    @property
    def offsets(self) -> tuple[int, ...]:
        """Starting antenna index of each relay block."""
        out = []
        pos = 0
        for mk in self.m:
            out.append(pos)
            pos += mk
        return tuple(out)

    def antenna_slices(self) -> tuple[slice, ...]:
        """Per-relay slices into a length-N antenna-indexed array."""
        return tuple(
            slice(start, start + mk) for start, mk in zip(self.offsets, self.m)
        )

    def __str__(self) -> str:
        return ",".join(str(mk) for mk in self.m)


def integer_partitions(n: int) -> list[Partition]:
    """All partitions of ``n`` antennas into relays, in non-increasing order.

    Example: ``integer_partitions(4)`` yields the five partitions
    4 / 3,1 / 2,2 / 2,1,1 / 1,1,1,1.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")

    def _gen(remaining: int, cap: int) -> list[tuple[int, ...]]:
        if remaining == 0:
            return [()]
        out = []
        for first in range(min(remaining, cap), 0, -1):
            for rest in _gen(remaining - first, first):
                out.append((first,) + rest)
        return out

    return [Partition(t) for t in _gen(n, n)]


@dataclass(frozen=True)
class TrialRngState:
    """Identifies one trial's random stream: a (seed, trial) pair.

    Both fields are reduced modulo 2**64, matching the generator's counter
    and key width.
    """

    seed: int
    trial_index: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "trial_index", int(self.trial_index) & _MASK64)


def derive_trial_rng(seed: int, trial_index: int) -> TrialRngState:
    """Random-stream handle for one trial; pure in ``(seed, trial_index)``."""
    return TrialRngState(seed=seed, trial_index=trial_index)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the backward and forward coefficient vectors.

    Attributes
    ----------
    h : complex ndarray, shape (N,)
        Backward coefficients, source to relay antennas.
    g : complex ndarray, shape (N,)
        Forward coefficients, relay antennas to destination.
    """

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=np.complex128)
        g = np.asarray(self.g, dtype=np.complex128)
        if h.ndim != 1 or g.ndim != 1 or h.shape != g.shape:
            raise ValueError("h and g must be one-dimensional with equal length")
        if h.shape[0] < 1:
            raise ValueError("realization needs at least one antenna")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @property
    def n(self) -> int:
        """Total number of antennas."""
        return self.h.shape[0]


def draw_batch(
    seed: int,
    trial_indices: np.ndarray,
    n: int,
    include_backward: bool = True,
) -> tuple[np.ndarray | None, np.ndarray]:
    """Draw coefficient vectors for many trials at once.

    Parameters
    ----------
    seed : int
        Stream key shared by the whole experiment.
    trial_indices : array of int
        Which trials to realize; any order, any subset.
    n : int
        Antennas per vector.
    include_backward : bool
        If False, only the forward vectors are generated (their stream
        words are at fixed positions, so the backward half is skipped at
        zero cost).

    Returns
    -------
    (H, G) : H is a complex (len(trials), n) array or None, G likewise.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    trials = np.atleast_1d(np.asarray(trial_indices))

    def _complex_block(word_start: int) -> np.ndarray:
        z = normal_words(seed, trials, word_start, 2 * n)
        return _COEFF_SIGMA * (z[:, :n] + 1j * z[:, n:])

    backward = _complex_block(0) if include_backward else None
    forward = _complex_block(2 * n)
    return backward, forward


def draw_realization(rng: TrialRngState, n: int) -> ChannelRealization:
    """Draw the channel realization of a single trial."""
    backward, forward = draw_batch(rng.seed, [rng.trial_index], n)
    return ChannelRealization(h=backward[0], g=forward[0])


def partition_view(
    real: ChannelRealization, partition: Partition
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-relay views ``(h_k, g_k)`` of a realization (no copies).

    The views tile the antenna axis exactly: relay k sees the contiguous
    block of ``partition.m[k]`` antennas starting at ``partition.offsets[k]``.
    """
    if partition.n != real.n:
        raise ValueError(
            f"partition covers {partition.n} antennas but realization has {real.n}"
        )
    return [(real.h[s], real.g[s]) for s in partition.antenna_slices()]
