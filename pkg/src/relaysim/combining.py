"""Receive combining and transmit beamforming for the relay schemes.

Transmission is half-duplex in two slots.  In the first slot the source
broadcasts and each relay maximum-ratio-combines its own antennas; relay k
decodes iff its combined SNR reaches the threshold ``2**(2*rate) - 1``
(the rate is halved by the two-slot protocol, hence ``2R`` in the
exponent; SNR exactly at the threshold counts as a decode).  In the second
slot the relays that decoded retransmit toward the destination.

Four retransmission schemes are modeled, named by two axes:

* ``genie-*``: every relay is assumed to have decoded (first hop ideal);
  ``sel-*``: only the relays that actually decoded transmit, and the total
  transmit power is re-spread over their antennas.
* ``*-tb``: transmit beamforming — each antenna phase-aligns to its forward
  coefficient so the destination sees amplitudes adding coherently;
  ``*-stc``: a space-time-code baseline that splits power uniformly over
  antennas without channel knowledge, so only powers add.

All SNR functions are broadcast-ready: coefficient arrays may have shape
``(..., N)`` with the antenna axis last, and a
:class:`~relaysim.channel.ChannelRealization` is accepted anywhere a
coefficient array is.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, Partition


class Scheme(enum.Enum):
    """Retransmission scheme identifiers (values are the CLI spellings)."""

    GENIE_TB = "genie-tb"
    GENIE_STC = "genie-stc"
    SEL_TB = "sel-tb"
    SEL_STC = "sel-stc"

    @property
    def is_selection(self) -> bool:
        """True if the scheme honors per-relay decoding outcomes."""
        return self in (Scheme.SEL_TB, Scheme.SEL_STC)

    @property
    def is_beamforming(self) -> bool:
        """True for coherent transmit beamforming, False for the STC baseline."""
        return self in (Scheme.GENIE_TB, Scheme.SEL_TB)


def snr_threshold(rate: float) -> float:
    """Minimum SNR to support ``rate`` bits/s/Hz end to end.

    The two-slot protocol halves the spectral efficiency, so each slot must
    carry ``2*rate``; the Shannon threshold is ``2**(2*rate) - 1``.
    """
    if rate < 0:
        raise ValueError("rate must be non-negative")
    return 2.0 ** (2.0 * rate) - 1.0


def _coeffs(x, name: str) -> np.ndarray:
    """Accept a ChannelRealization or an array; return the coefficient array."""
    if isinstance(x, ChannelRealization):
        return x.g if name == "forward" else x.h
    return np.asarray(x, dtype=np.complex128)


def _power(x: np.ndarray) -> np.ndarray:
    """Squared magnitudes without the sqrt/square round trip of abs()**2."""
    return x.real**2 + x.imag**2


def _check_eta(eta: float) -> float:
    if eta < 0:
        raise ValueError("eta (transmit power) must be non-negative")
    return float(eta)


def _check_antennas(x: np.ndarray, partition: Partition) -> None:
    if x.shape[-1] != partition.n:
        raise ValueError(
            f"coefficient array has {x.shape[-1]} antennas, partition needs {partition.n}"
        )


def per_relay_power(values, partition: Partition) -> np.ndarray:
    """Per-relay sums over the antenna axis, shape ``(..., K)``.

    ``values`` is any per-antenna array with the antenna axis last; complex
    coefficients are converted to squared magnitudes first.
    """
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        arr = _power(arr)
    _check_antennas(arr, partition)
    if partition.k == 1:
        return arr.sum(axis=-1, keepdims=True)
    return np.add.reduceat(arr, partition.offsets, axis=-1)


def mrc_relay_snr(backward_k, eta: float) -> np.ndarray | float:
    """Post-combining SNR of one relay that maximum-ratio-combines its
    ``m_k`` antennas: ``eta`` times the summed squared magnitudes."""
    eta = _check_eta(eta)
    h = _coeffs(backward_k, "backward")
    return eta * _power(h).sum(axis=-1)


def relay_snrs(backward, partition: Partition, eta: float) -> np.ndarray:
    """MRC SNR of every relay, shape ``(..., K)``."""
    eta = _check_eta(eta)
    h = _coeffs(backward, "backward")
    return eta * per_relay_power(_power(h), partition)


def decode_mask(relay_snr_values: np.ndarray, rate: float) -> np.ndarray:
    """Boolean mask of relays whose SNR supports the rate (ties decode)."""
    return np.asarray(relay_snr_values) >= snr_threshold(rate)


def select_decoding_set(relay_snr_values: np.ndarray, rate: float) -> tuple[int, ...]:
    """Indices of the relays that decode, for a single realization."""
    snrs = np.asarray(relay_snr_values)
    if snrs.ndim != 1:
        raise ValueError("select_decoding_set expects a single trial's relay SNRs")
    return tuple(int(i) for i in np.nonzero(decode_mask(snrs, rate))[0])


def _selection_mask(selected, k: int) -> np.ndarray:
    """Normalize an index sequence or boolean mask to a boolean array."""
    sel = np.asarray(selected)
    if sel.dtype == bool:
        if sel.shape[-1] != k:
            raise ValueError(f"selection mask has {sel.shape[-1]} relays, expected {k}")
        return sel
    mask = np.zeros(k, dtype=bool)
    for idx in np.atleast_1d(sel):
        i = int(idx)
        if not 0 <= i < k:
            raise ValueError(f"relay index {i} outside 0..{k - 1}")
        mask[i] = True
    return mask


def tb_destination_snr(forward, partition: Partition, eta: float) -> np.ndarray | float:
    """Destination SNR under transmit beamforming with all relays active.

    Relay k spends power ``eta * m_k / N`` and phase-aligns, so amplitudes
    add: the SNR is ``eta * (sum_k sqrt(m_k/N * S_k))**2`` with ``S_k`` the
    relay's forward power sum.  A single relay owning all antennas reduces
    to ``eta * S`` exactly (no sqrt/square round trip).
    """
    eta = _check_eta(eta)
    g = _coeffs(forward, "forward")
    _check_antennas(g, partition)
    if partition.k == 1:
        return eta * _power(g).sum(axis=-1)
    s = per_relay_power(_power(g), partition)
    m = np.asarray(partition.m, dtype=np.float64)
    amps = np.sqrt(m / partition.n * s)
    return eta * amps.sum(axis=-1) ** 2


def stc_destination_snr(forward, eta: float) -> np.ndarray | float:
    """Destination SNR of the space-time-coded baseline.

    Power is split uniformly over all N antennas and only powers add, so
    the SNR is ``eta/N`` times the total forward power — independent of how
    antennas are grouped into relays, and exactly 1/N of the beamforming
    SNR of a single N-antenna relay.
    """
    eta = _check_eta(eta)
    g = _coeffs(forward, "forward")
    n = g.shape[-1]
    if n < 1:
        raise ValueError("need at least one antenna")
    return eta * _power(g).sum(axis=-1) / n


def selection_tb_snr(forward, partition: Partition, selected, eta: float):
    """Destination SNR when only the selected relays beamform.

    The total power ``eta`` is re-spread over the ``N~ = sum m_k`` antennas
    of the selected relays (relay k spends ``eta * m_k / N~``).  An empty
    selection yields SNR 0.

    ``selected`` is a boolean mask of shape ``(..., K)`` or a sequence of
    relay indices.
    """
    eta = _check_eta(eta)
    g = _coeffs(forward, "forward")
    _check_antennas(g, partition)
    mask = _selection_mask(selected, partition.k)
    s = per_relay_power(_power(g), partition)
    m = np.asarray(partition.m, dtype=np.float64)
    amps = np.sqrt(m * s)
    num = np.where(mask, amps, 0.0).sum(axis=-1)
    n_active = np.where(mask, m, 0.0).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = eta * num**2 / n_active
    return np.where(n_active > 0, snr, 0.0)[()]


def selection_stc_snr(forward, partition: Partition, selected, eta: float):
    """Destination SNR when only the selected relays use the STC baseline.

    Power is split uniformly over the selected relays' ``N~`` antennas;
    powers add.  An empty selection yields SNR 0.
    """
    eta = _check_eta(eta)
    g = _coeffs(forward, "forward")
    _check_antennas(g, partition)
    mask = _selection_mask(selected, partition.k)
    s = per_relay_power(_power(g), partition)
    m = np.asarray(partition.m, dtype=np.float64)
    total = np.where(mask, s, 0.0).sum(axis=-1)
    n_active = np.where(mask, m, 0.0).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = eta * total / n_active
    return np.where(n_active > 0, snr, 0.0)[()]


def tb_transmit_vector(
    forward_k: np.ndarray, n_total: int, eta: float, symbol: complex = 1.0
) -> np.ndarray:
    """Antenna weights one relay applies to ``symbol`` when beamforming.

    The relay conjugate-aligns to its forward coefficients and scales so the
    radiated power is exactly its share ``eta * m_k / n_total`` (for a
    unit-modulus symbol).  If the relay's forward channel is identically
    zero there is no useful direction; it stays silent (all-zero vector).
    """
    eta = _check_eta(eta)
    g = np.asarray(forward_k, dtype=np.complex128)
    if g.ndim != 1 or g.shape[0] < 1:
        raise ValueError("forward_k must be a non-empty vector")
    if n_total < g.shape[0]:
        raise ValueError("n_total must be at least the relay's antenna count")
    norm = np.sqrt(_power(g).sum())
    if norm == 0.0:
        return np.zeros(g.shape[0], dtype=np.complex128)
    return np.sqrt(eta * g.shape[0] / n_total) * (np.conj(g) / norm) * symbol


@dataclass(frozen=True)
class SnrReport:
    """All per-trial SNR figures for one realization and partition."""

    relay_snr: np.ndarray
    decoding_set: tuple[int, ...]
    genie_tb: float
    genie_stc: float
    sel_tb: float
    sel_stc: float
    eta: float
    rate: float

    def scheme_snr(self, scheme: Scheme) -> float:
        return {
            Scheme.GENIE_TB: self.genie_tb,
            Scheme.GENIE_STC: self.genie_stc,
            Scheme.SEL_TB: self.sel_tb,
            Scheme.SEL_STC: self.sel_stc,
        }[scheme]


def snr_report(
    real: ChannelRealization, partition: Partition, eta: float, rate: float
) -> SnrReport:
    """Evaluate every scheme on one realization."""
    snrs = relay_snrs(real, partition, eta)
    selected = select_decoding_set(snrs, rate)
    return SnrReport(
        relay_snr=snrs,
        decoding_set=selected,
        genie_tb=float(tb_destination_snr(real, partition, eta)),
        genie_stc=float(stc_destination_snr(real, eta)),
        sel_tb=float(selection_tb_snr(real, partition, selected, eta)),
        sel_stc=float(selection_stc_snr(real, partition, selected, eta)),
        eta=float(eta),
        rate=float(rate),
    )


@dataclass(frozen=True)
class SignalLevelEstimate:
    """SNRs measured from simulated symbol transmission (not formulas)."""

    relay_snr: np.ndarray
    destination_snr: float
    n_symbols: int


def signal_level_oracle(
    real: ChannelRealization,
    partition: Partition,
    eta: float,
    n_symbols: int = 10**6,
    rng: np.random.Generator | None = None,
    chunk: int = 1 << 16,
) -> SignalLevelEstimate:
    """Estimate SNRs by pushing symbols and noise through the signal chain.

    Independent check on the closed-form SNR expressions: the signal
    amplitude is propagated through the actual combining arithmetic
    (inner products, normalizations, :func:`tb_transmit_vector`), while the
    noise power at each combiner output is measured from ``n_symbols``
    simulated unit-variance complex Gaussian noise draws.  Relative
    estimation error scales like ``1/sqrt(n_symbols)``.

    Relays with an identically zero channel report SNR 0.
    """
    eta = _check_eta(eta)
    if n_symbols < 1:
        raise ValueError("n_symbols must be positive")
    if rng is None:
        rng = np.random.default_rng(0)
    views = [
        (real.h[s], real.g[s]) for s in partition.antenna_slices()
    ]

    def _cn_noise(size: tuple[int, ...]) -> np.ndarray:
        z = rng.standard_normal(size=size + (2,))
        return np.sqrt(0.5) * (z[..., 0] + 1j * z[..., 1])

    # First hop: each relay MRC-combines; signal goes through h^H h / ||h||.
    relay_est = np.zeros(partition.k)
    for k, (h_k, _) in enumerate(views):
        norm = np.sqrt(_power(h_k).sum())
        if norm == 0.0:
            continue
        sig_amp = np.sqrt(eta) * (np.conj(h_k) @ h_k).real / norm
        noise_power = 0.0
        done = 0
        while done < n_symbols:
            t = min(chunk, n_symbols - done)
            combined = _cn_noise((t, h_k.shape[0])) @ np.conj(h_k) / norm
            noise_power += _power(combined).sum()
            done += t
        relay_est[k] = sig_amp**2 / (noise_power / n_symbols)

    # Second hop: all relays beamform; amplitudes combine through g_k @ d_k.
    coupling = 0.0 + 0.0j
    for _, g_k in views:
        d_k = tb_transmit_vector(g_k, partition.n, eta)
        coupling += g_k @ d_k
    noise_power = 0.0
    done = 0
    while done < n_symbols:
        t = min(chunk, n_symbols - done)
        noise_power += _power(_cn_noise((t,))).sum()
        done += t
    dest_est = float(_power(np.asarray(coupling)) / (noise_power / n_symbols))

    return SignalLevelEstimate(
        relay_snr=relay_est, destination_snr=dest_est, n_symbols=n_symbols
    )
