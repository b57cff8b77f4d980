"""Outage simulation and analytical bounds for two-hop multi-antenna
decode-and-forward relay networks.

The package compares transmit beamforming against a space-time-coding
baseline when N antennas are distributed over K relays, under both an
idealized first hop and per-relay selection decoding, and validates the
Monte Carlo results against closed-form high-SNR bounds that pin the
diversity order to the full antenna count N.
"""

from .analysis import (
    BoundSet,
    DecodingSet,
    chi_square_tail_approx,
    diversity_slope,
    enumerate_selection_sets,
    erlang_cdf,
    genie_outage_bounds,
    selection_outage_bounds,
    selection_set_probability,
)
from .channel import (
    ChannelRealization,
    Partition,
    TrialRngState,
    derive_trial_rng,
    draw_batch,
    draw_realization,
    integer_partitions,
    partition_view,
)
from .combining import (
    Scheme,
    SignalLevelEstimate,
    SnrReport,
    decode_mask,
    mrc_relay_snr,
    per_relay_power,
    relay_snrs,
    select_decoding_set,
    selection_stc_snr,
    selection_tb_snr,
    signal_level_oracle,
    snr_report,
    snr_threshold,
    stc_destination_snr,
    tb_destination_snr,
    tb_transmit_vector,
)
from .montecarlo import (
    OutageEstimate,
    SimConfig,
    StratifiedCheck,
    confidence_interval,
    estimate_outage,
    outage_event,
    stratified_consistency_check,
)

__version__ = "0.1.0"

__all__ = [
    "BoundSet",
    "ChannelRealization",
    "DecodingSet",
    "OutageEstimate",
    "Partition",
    "Scheme",
    "SignalLevelEstimate",
    "SimConfig",
    "SnrReport",
    "StratifiedCheck",
    "TrialRngState",
    "chi_square_tail_approx",
    "confidence_interval",
    "decode_mask",
    "derive_trial_rng",
    "diversity_slope",
    "draw_batch",
    "draw_realization",
    "enumerate_selection_sets",
    "erlang_cdf",
    "estimate_outage",
    "genie_outage_bounds",
    "integer_partitions",
    "mrc_relay_snr",
    "outage_event",
    "partition_view",
    "per_relay_power",
    "relay_snrs",
    "select_decoding_set",
    "selection_outage_bounds",
    "selection_set_probability",
    "selection_stc_snr",
    "selection_tb_snr",
    "signal_level_oracle",
    "snr_report",
    "snr_threshold",
    "stc_destination_snr",
    "stratified_consistency_check",
    "tb_destination_snr",
    "tb_transmit_vector",
]
