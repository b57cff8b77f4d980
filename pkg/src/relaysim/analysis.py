"""Closed-form outage expressions, bounds, and diversity-order tooling.

Every SNR in the model is a scaled sum of squared magnitudes of i.i.d.
unit-power complex Gaussian coefficients, i.e. a scaled sum of unit-mean
exponentials (an Erlang variable).  Outage probabilities therefore reduce
to Erlang CDF evaluations and, in the high-SNR regime, to their leading
small-argument term ``x**n / n!``.  The bound pairs built here sandwich
the exact outage probability of the beamforming schemes between two
expressions with identical power decay ``eta**-N``, which is what pins the
diversity order to the full antenna count N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from .channel import Partition
from .combining import snr_threshold

#: Largest relay count for which decoding-set enumeration (2**K subsets)
#: is permitted.
MAX_ENUMERATED_RELAYS = 30


def erlang_cdf(shape: int, x):
    """CDF of a sum of ``shape`` i.i.d. unit-mean exponentials.

    Two series are used so the result is accurate everywhere:

    * ``x >= shape``: the complement form ``1 - exp(-x) * sum_{j<shape}
      x**j / j!`` (no cancellation, since the CDF is far from 0 there);
    * ``x < shape``: the positive tail series ``exp(-x) * sum_{j>=shape}
      x**j / j!``, which avoids the catastrophic cancellation of the
      complement form when the CDF is tiny.

    Accepts scalar or array ``x``; values must be non-negative.
    """
    if int(shape) != shape or shape < 1:
        raise ValueError("shape must be a positive integer")
    m = int(shape)
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("x must be non-negative")
    out = np.empty_like(arr)

    big = arr >= m
    xb = arr[big]
    if xb.size:
        s = np.ones_like(xb)
        term = np.ones_like(xb)
        for j in range(1, m):
            term = term * xb / j
            s += term
        out[big] = 1.0 - np.exp(-xb) * s

    xs = arr[~big]
    if xs.size:
        # First tail term x**m / m! * exp(-x) via logs (robust to tiny x;
        # log(0) -> -inf -> term 0 is the correct limit).
        with np.errstate(divide="ignore"):
            term = np.exp(m * np.log(xs) - gammaln(m + 1) - xs)
        acc = term.copy()
        # Terms decay at least geometrically once j > x, and x < m here;
        # the iteration cap is a Poisson tail bound far beyond any mass.
        j_max = m + int(10 * math.sqrt(m)) + 80
        for j in range(m + 1, j_max):
            term = term * xs / j
            acc += term
            if np.all(term <= acc * 1e-18):
                break
        out[~big] = acc

    return out if out.ndim else float(out)


def chi_square_tail_approx(n: int, eps):
    """Leading-order probability that a sum of ``n`` unit-mean exponentials
    falls below ``eps``: ``eps**n / n!``.

    This is the first term of the exact series and the source of every
    high-SNR bound in this module; it overstates the exact CDF by a factor
    of at most ``exp(eps)``.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    eps_arr = np.asarray(eps, dtype=np.float64)
    if np.any(eps_arr < 0):
        raise ValueError("eps must be non-negative")
    out = eps_arr ** int(n) / math.factorial(int(n))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class BoundSet:
    """A lower/upper outage-probability bound pair and its context.

    ``high_snr_valid`` flags whether the operating point is inside the
    regime where the high-SNR derivation is meaningful; outside it the raw
    expressions are still reported (they may exceed 1) rather than clamped.
    """

    lower: float
    upper: float
    n: int
    rate: float
    eta: float
    family: str
    partition: Partition | None = None

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    @property
    def high_snr_valid(self) -> bool:
        return self.upper <= 1.0


def genie_outage_bounds(n: int, rate: float, eta: float) -> BoundSet:
    """Outage bounds for beamforming with an ideal first hop.

    With all N antennas beamforming, the destination SNR is sandwiched
    between the single-branch share and the full coherent sum, giving

    ``theta**N / N!  <=  P_out  <=  (N * theta)**N / N!``

    with ``theta = (2**(2*rate) - 1) / eta``.  The two sides differ by the
    constant factor ``N**N`` — the same ``eta**-N`` decay, hence
    diversity order exactly N.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if eta <= 0:
        raise ValueError("eta must be positive")
    n = int(n)
    theta = snr_threshold(rate) / eta
    lower = chi_square_tail_approx(n, theta)
    upper = chi_square_tail_approx(n, n * theta)
    return BoundSet(
        lower=float(lower), upper=float(upper), n=n, rate=float(rate),
        eta=float(eta), family="genie",
    )


class DecodingSet(NamedTuple):
    """One possible set of relays that decoded the first hop."""

    relays: tuple[int, ...]
    n_antennas: int

    @property
    def n_relays(self) -> int:
        return len(self.relays)


def enumerate_selection_sets(partition: Partition) -> tuple[DecodingSet, ...]:
    """All 2**K decoding sets, in ascending-bitmask order.

    The bitmask of a set has bit k set iff relay k decoded, so element
    ``i`` of the result corresponds to bitmask ``i`` — convenient for
    aligning with histogram counts.
    """
    if partition.k > MAX_ENUMERATED_RELAYS:
        raise ValueError(
            f"refusing to enumerate 2**{partition.k} decoding sets "
            f"(limit {MAX_ENUMERATED_RELAYS} relays)"
        )
    sets = []
    for bits in range(1 << partition.k):
        relays = tuple(k for k in range(partition.k) if bits >> k & 1)
        sets.append(
            DecodingSet(relays=relays, n_antennas=sum(partition.m[k] for k in relays))
        )
    return tuple(sets)


def _validate_relay_set(partition: Partition, relays: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(r) for r in relays)
    if len(set(out)) != len(out):
        raise ValueError("relay set contains duplicates")
    for r in out:
        if not 0 <= r < partition.k:
            raise ValueError(f"relay index {r} outside 0..{partition.k - 1}")
    return out


def selection_set_probability(
    partition: Partition,
    relays: Sequence[int],
    rate: float,
    eta: float,
    mode: str = "exact",
) -> float:
    """Probability that exactly the given relays decode the first hop.

    Relay k decodes iff its Erlang(m_k) backward power sum reaches
    ``theta = (2**(2*rate) - 1) / eta``; relays are independent, so the set
    probability is the product of per-relay decode/fail factors.

    ``mode="exact"`` uses the Erlang CDF; ``mode="high-snr"`` replaces each
    factor by its leading term (decode -> 1, fail -> theta**m_k / m_k!),
    giving ``theta**(N - N~) * prod_fail 1/m_k!``.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    chosen = set(_validate_relay_set(partition, relays))
    theta = snr_threshold(rate) / eta
    prob = 1.0
    if mode == "exact":
        for k, m_k in enumerate(partition.m):
            f = erlang_cdf(m_k, theta)
            prob *= (1.0 - f) if k in chosen else f
    elif mode == "high-snr":
        for k, m_k in enumerate(partition.m):
            if k not in chosen:
                prob *= chi_square_tail_approx(m_k, theta)
    else:
        raise ValueError(f"unknown mode {mode!r}; use 'exact' or 'high-snr'")
    return float(prob)


def selection_outage_bounds(partition: Partition, rate: float, eta: float) -> BoundSet:
    """High-SNR outage bounds for selection beamforming.

    Total-probability sum over decoding sets: each set contributes its
    high-SNR probability ``theta**(N - N~) * prod 1/m_k!`` times the
    destination outage term, which given an active antenna count N~ lies
    between ``theta**N~ / N~!`` and ``(N~ * theta)**N~ / N~!`` (an empty
    set is a certain outage, factor 1 — consistent with both coefficient
    conventions at N~ = 0).  Every set contributes at total order
    ``theta**N``, so

    ``theta**N * sum_S prod(1/m_k!) / N~!
        <=  P_out  <=  theta**N * sum_S prod(1/m_k!) * N~**N~ / N~!``

    and the diversity order is again the full antenna count N.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    theta = snr_threshold(rate) / eta
    lower_sum = 0.0
    upper_sum = 0.0
    for dec in enumerate_selection_sets(partition):
        in_set = set(dec.relays)
        prod_fail = 1.0
        for k, m_k in enumerate(partition.m):
            if k not in in_set:
                prod_fail /= math.factorial(m_k)
        nt = dec.n_antennas
        lower_sum += prod_fail / math.factorial(nt)
        upper_sum += prod_fail * nt**nt / math.factorial(nt)
    scale = theta ** partition.n
    return BoundSet(
        lower=float(scale * lower_sum), upper=float(scale * upper_sum),
        n=partition.n, rate=float(rate), eta=float(eta),
        family="selection", partition=partition,
    )


def diversity_slope(eta_db, p_out) -> float:
    """Diversity-order estimate: negated least-squares slope of
    ``log10(P)`` against ``log10(eta)`` (= dB/10).

    A scheme with outage decaying as ``eta**-d`` returns ``d``.  All
    probabilities must be positive — a zero estimate carries no slope
    information and should be excluded by the caller.
    """
    x = np.asarray(eta_db, dtype=np.float64) / 10.0
    y = np.asarray(p_out, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("eta_db and p_out must be equal-length 1-D sequences")
    if x.size < 2 or np.unique(x).size < 2:
        raise ValueError("need at least two distinct power levels")
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("all outage probabilities must be positive and finite")
    slope = np.polyfit(x, np.log10(y), 1)[0]
    return float(-slope)
