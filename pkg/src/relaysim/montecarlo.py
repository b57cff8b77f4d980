"""Monte Carlo estimation of outage probabilities.

The engine exploits three structural facts:

* **Counter-based trials.**  Trial t's channel draw is a pure function of
  ``(seed, t)`` (see :mod:`relaysim.rng`), so estimates are bit-identical
  for any batch size or worker count — batches only decide how many trials
  are materialized at once.
* **Paired sampling.**  The same draw is reused across schemes, partitions,
  and the whole power grid.  Transmit power enters every SNR
  multiplicatively, so outage at power ``eta`` is equivalent to the
  eta-free SNR base falling below ``threshold / eta``; one draw therefore
  yields the outage indicator at every grid point.  Paired sampling makes
  scheme comparisons and power sweeps deterministic per draw, not just in
  distribution.
* **Integer reduction.**  Only outage *counts* (int64) cross batch
  boundaries, so accumulation order cannot perturb results.

The per-batch outage rules are algebraically the same comparisons as the
per-realization functions in :mod:`relaysim.combining`, rearranged into
division-free form; their equivalence is pinned by tests that replay the
engine's counts one realization at a time.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import math

import numpy as np

from .analysis import DecodingSet, enumerate_selection_sets, selection_set_probability
from .channel import Partition, draw_batch
from .combining import Scheme, snr_threshold

#: Two-sided 95% normal quantile used by the Wilson interval.
Z95 = 1.959963984540054

#: Trials materialized per batch; a fixed constant (never derived from the
#: worker count) so that batching can never influence results.
DEFAULT_BATCH_SIZE = 1 << 16

#: Minimum observed outage events for an estimate to be flagged reliable.
MIN_RELIABLE_EVENTS = 30

#: Largest relay count for which the stratified check histograms all 2**K
#: decoding sets.
_MAX_STRATIFIED_RELAYS = 20


def outage_event(snr, rate: float):
    """True where the end-to-end SNR cannot support the rate.

    Outage is the strict inequality ``snr < 2**(2*rate) - 1``; equality
    with the threshold is a success.
    """
    res = np.less(snr, snr_threshold(rate))
    return res if res.ndim else bool(res)


def confidence_interval(count: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Chosen over the normal (Wald) interval because outage probabilities of
    interest are tiny: Wilson stays inside [0, 1] and behaves sensibly at
    zero observed events.  ``count == 0`` pins the lower limit to exactly
    0 and ``count == trials`` pins the upper limit to exactly 1.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= count <= trials:
        raise ValueError("count must lie in [0, trials]")
    p = count / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    low = 0.0 if count == 0 else max(0.0, center - half)
    high = 1.0 if count == trials else min(1.0, center + half)
    return low, high


@dataclass(frozen=True)
class OutageEstimate:
    """Estimated outage probability with a 95% Wilson interval."""

    outages: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float
    reliable: bool

    @classmethod
    def from_counts(cls, outages: int, trials: int) -> "OutageEstimate":
        low, high = confidence_interval(outages, trials)
        return cls(
            outages=int(outages),
            trials=int(trials),
            p_hat=outages / trials,
            ci_low=low,
            ci_high=high,
            reliable=outages >= MIN_RELIABLE_EVENTS,
        )


def _as_partition(p) -> Partition:
    return p if isinstance(p, Partition) else Partition.from_string(str(p))


def _as_scheme(s) -> Scheme:
    return s if isinstance(s, Scheme) else Scheme(str(s))


@dataclass(frozen=True)
class SimConfig:
    """Full description of one outage-estimation run.

    All partitions must cover the same total antenna count N (they share
    channel draws).  ``eta_grid`` holds linear transmit powers.  Results
    are invariant to ``workers`` and ``batch_size``; those only trade
    memory against parallelism.
    """

    partitions: tuple[Partition, ...]
    eta_grid: tuple[float, ...]
    rate: float
    trials: int
    seed: int = 0
    schemes: tuple[Scheme, ...] = tuple(Scheme)
    workers: int = 1
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self) -> None:
        parts = tuple(_as_partition(p) for p in self.partitions)
        if not parts:
            raise ValueError("at least one partition is required")
        if len({p.n for p in parts}) != 1:
            raise ValueError(
                "all partitions must cover the same total antenna count; got "
                + "; ".join(str(p) for p in parts)
            )
        etas = tuple(float(e) for e in self.eta_grid)
        if not etas or any(e <= 0 for e in etas):
            raise ValueError("eta_grid must be non-empty with positive powers")
        schemes = tuple(_as_scheme(s) for s in self.schemes)
        if not schemes or len(set(schemes)) != len(schemes):
            raise ValueError("schemes must be non-empty and unique")
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if int(self.trials) < 1:
            raise ValueError("trials must be positive")
        if int(self.workers) < 1:
            raise ValueError("workers must be positive")
        if int(self.batch_size) < 1:
            raise ValueError("batch_size must be positive")
        object.__setattr__(self, "partitions", parts)
        object.__setattr__(self, "eta_grid", etas)
        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "workers", int(self.workers))
        object.__setattr__(self, "batch_size", int(self.batch_size))

    @property
    def n(self) -> int:
        """Total antenna count shared by all partitions."""
        return self.partitions[0].n


def _relay_power_sums(power: np.ndarray, partition: Partition, total: np.ndarray | None):
    """Per-relay power sums (B, K); reuses the pairwise total when K == 1."""
    if partition.k == 1:
        if total is None:
            total = power.sum(axis=-1)
        return total[:, None]
    return np.add.reduceat(power, partition.offsets, axis=-1)


def _batch_outage_counts(config: SimConfig, start: int, stop: int) -> np.ndarray:
    """Outage counts of trials [start, stop), shape (schemes, partitions, etas)."""
    need_backward = any(s.is_selection for s in config.schemes)
    n = config.n
    indices = np.arange(start, stop, dtype=np.uint64)
    backward, forward = draw_batch(
        config.seed, indices, n, include_backward=need_backward
    )
    gp = forward.real**2 + forward.imag**2
    total_g = gp.sum(axis=-1)
    hp = backward.real**2 + backward.imag**2 if need_backward else None

    # Outage at power eta <=> eta-free SNR base < threshold / eta.
    cuts = snr_threshold(config.rate) / np.asarray(config.eta_grid)
    counts = np.zeros(
        (len(config.schemes), len(config.partitions), len(cuts)), dtype=np.int64
    )
    scheme_row = {s: i for i, s in enumerate(config.schemes)}

    if Scheme.GENIE_STC in scheme_row:
        # Partition-independent: same counts land in every partition row.
        stc_counts = ((total_g / n)[:, None] < cuts).sum(axis=0)
        counts[scheme_row[Scheme.GENIE_STC], :, :] = stc_counts

    for ip, partition in enumerate(config.partitions):
        k = partition.k
        m = np.asarray(partition.m, dtype=np.float64)
        s_g = _relay_power_sums(gp, partition, total_g)

        if Scheme.GENIE_TB in scheme_row:
            if k == 1:
                tb_base = total_g
            else:
                tb_base = np.sqrt(m / n * s_g).sum(axis=-1) ** 2
            counts[scheme_row[Scheme.GENIE_TB], ip, :] = (
                tb_base[:, None] < cuts
            ).sum(axis=0)

        if Scheme.SEL_TB in scheme_row or Scheme.SEL_STC in scheme_row:
            s_h = _relay_power_sums(hp, partition, None)
            amps = np.sqrt(m * s_g) if Scheme.SEL_TB in scheme_row else None
            m_int = np.asarray(partition.m, dtype=np.int64)
            for ie, cut in enumerate(cuts):
                mask = s_h >= cut
                n_active = (mask * m_int).sum(axis=-1)
                empty = n_active == 0
                if Scheme.SEL_TB in scheme_row:
                    num = (amps * mask).sum(axis=-1)
                    out = empty | (num * num < cut * n_active)
                    counts[scheme_row[Scheme.SEL_TB], ip, ie] = out.sum()
                if Scheme.SEL_STC in scheme_row:
                    tot = (s_g * mask).sum(axis=-1)
                    out = empty | (tot < cut * n_active)
                    counts[scheme_row[Scheme.SEL_STC], ip, ie] = out.sum()
    return counts


def _batch_ranges(trials: int, batch_size: int) -> list[tuple[int, int]]:
    return [(s, min(s + batch_size, trials)) for s in range(0, trials, batch_size)]


def estimate_outage(
    config: SimConfig,
) -> Mapping[tuple[Scheme, Partition, float], OutageEstimate]:
    """Estimate the outage probability of every requested combination.

    Returns a dict keyed by ``(scheme, partition, eta)`` covering the full
    cross product of the configuration.  Bit-reproducible for a given
    ``(seed, trials)`` regardless of batching or parallelism.
    """
    ranges = _batch_ranges(config.trials, config.batch_size)
    total = np.zeros(
        (len(config.schemes), len(config.partitions), len(config.eta_grid)),
        dtype=np.int64,
    )
    if config.workers == 1 or len(ranges) == 1:
        for start, stop in ranges:
            total += _batch_outage_counts(config, start, stop)
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            for part in pool.map(
                lambda r: _batch_outage_counts(config, r[0], r[1]), ranges
            ):
                total += part

    results: dict[tuple[Scheme, Partition, float], OutageEstimate] = {}
    for i_s, scheme in enumerate(config.schemes):
        for i_p, partition in enumerate(config.partitions):
            for i_e, eta in enumerate(config.eta_grid):
                results[(scheme, partition, eta)] = OutageEstimate.from_counts(
                    int(total[i_s, i_p, i_e]), config.trials
                )
    return results


@dataclass(frozen=True)
class StratifiedCheck:
    """Cross-validation of the decoding-set machinery against simulation.

    One selection-beamforming run, histogrammed by which decoding set
    occurred.  Index ``i`` of every array corresponds to the decoding set
    with bitmask ``i`` (bit k set iff relay k decoded), matching
    :func:`relaysim.analysis.enumerate_selection_sets`.
    """

    partition: Partition
    eta: float
    rate: float
    trials: int
    sets: tuple[DecodingSet, ...]
    set_probability: np.ndarray
    set_counts: np.ndarray
    set_outage_counts: np.ndarray
    direct_outage_count: int

    @property
    def stratified_outage_count(self) -> int:
        """Outage count recombined from the per-set histogram."""
        return int(self.set_outage_counts.sum())

    @property
    def set_frequency(self) -> np.ndarray:
        return self.set_counts / self.trials

    def frequency_z_scores(self) -> np.ndarray:
        """Per-set z-scores of observed frequency vs exact probability.

        Sets with probability exactly 0 or 1 have zero variance; they score
        0 when the observation agrees and infinity when it does not.
        """
        p = self.set_probability
        se = np.sqrt(p * (1.0 - p) / self.trials)
        diff = self.set_frequency - p
        with np.errstate(divide="ignore", invalid="ignore"):
            z = diff / se
        return np.where(se > 0, z, np.where(diff == 0, 0.0, np.inf))


def stratified_consistency_check(
    partition: Partition,
    eta: float,
    rate: float,
    trials: int,
    seed: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> StratifiedCheck:
    """Histogram selection-beamforming outages by decoding set.

    Runs the same trials as a direct estimate, but tallies which decoding
    set actually occurred, which set membership led to outage, and the
    direct outage count.  By construction the direct count must equal the
    recombined per-set sum exactly; set frequencies can then be compared
    against the exact closed-form set probabilities.
    """
    partition = _as_partition(partition)
    if partition.k > _MAX_STRATIFIED_RELAYS:
        raise ValueError(
            f"refusing to histogram 2**{partition.k} decoding sets "
            f"(limit {_MAX_STRATIFIED_RELAYS} relays)"
        )
    if eta <= 0:
        raise ValueError("eta must be positive")
    if rate <= 0:
        raise ValueError("rate must be positive")
    if trials < 1:
        raise ValueError("trials must be positive")

    n_sets = 1 << partition.k
    cut = snr_threshold(rate) / eta
    m = np.asarray(partition.m, dtype=np.float64)
    m_int = np.asarray(partition.m, dtype=np.int64)
    bit_values = np.int64(1) << np.arange(partition.k, dtype=np.int64)

    set_counts = np.zeros(n_sets, dtype=np.int64)
    set_outage_counts = np.zeros(n_sets, dtype=np.int64)
    direct = 0
    for start, stop in _batch_ranges(trials, batch_size):
        indices = np.arange(start, stop, dtype=np.uint64)
        backward, forward = draw_batch(seed, indices, partition.n)
        gp = forward.real**2 + forward.imag**2
        hp = backward.real**2 + backward.imag**2
        s_g = _relay_power_sums(gp, partition, None)
        s_h = _relay_power_sums(hp, partition, None)

        mask = s_h >= cut
        set_ids = (mask * bit_values).sum(axis=-1)
        n_active = (mask * m_int).sum(axis=-1)
        num = (np.sqrt(m * s_g) * mask).sum(axis=-1)
        out = (n_active == 0) | (num * num < cut * n_active)

        set_counts += np.bincount(set_ids, minlength=n_sets)
        set_outage_counts += np.bincount(set_ids[out], minlength=n_sets)
        direct += int(out.sum())

    sets = enumerate_selection_sets(partition)
    probs = np.array(
        [
            selection_set_probability(partition, dec.relays, rate, eta, mode="exact")
            for dec in sets
        ]
    )
    return StratifiedCheck(
        partition=partition,
        eta=float(eta),
        rate=float(rate),
        trials=int(trials),
        sets=sets,
        set_probability=probs,
        set_counts=set_counts,
        set_outage_counts=set_outage_counts,
        direct_outage_count=direct,
    )
