"""Path loss, link budget, SNR feasibility, and 5G NR data-rate model.

All functions are stateless and accept scalars or numpy arrays for the
distance argument (the simulation engine evaluates them on full
user-by-station matrices).
"""

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_MPS = 3.0e8
THERMAL_NOISE_DBM_PER_HZ = -174.0
SUBCARRIERS_PER_RB = 12

PROPAGATION_RMA_LOS = "rma_los"
PROPAGATION_RMA_NLOS = "rma_nlos"

RMA_LOS_MAX_DISTANCE_M = 10000.0
RMA_NLOS_MAX_DISTANCE_M = 5000.0
RMA_MIN_DISTANCE_M = 10.0


@dataclass(frozen=True)
class LinkBudgetParams:
    """Downlink budget parameters shared by every station of the network.

    The noise figure defaults to 3 dB: together with the rural-macro NLOS
    curve and full-carrier noise bandwidth it closes the configured
    transmit powers to coverage radii of ~2.28 km (macro) and ~0.50 km
    (small cell) at the -2 dB SNR floor.
    """

    carrier_freq_ghz: float = 3.41
    bandwidth_mhz: float = 40.0
    subcarrier_khz: float = 30.0
    slow_fading_margin_db: float = 6.0
    body_loss_db: float = 3.0
    foliage_loss_db: float = 11.0
    bs_antenna_gain_db: float = 17.5
    ue_antenna_gain_db: float = 0.0
    noise_figure_db: float = 3.0
    min_snr_db: float = -2.0
    propagation: str = PROPAGATION_RMA_NLOS
    avg_building_height_m: float = 5.0
    street_width_m: float = 20.0
    # Feasibility / coverage SNR is evaluated over the full carrier so the
    # SNR floor is allocation-independent (one radius per station class).
    snr_eval_n_rbs: int = 106

    @property
    def rb_bandwidth_hz(self) -> float:
        return SUBCARRIERS_PER_RB * self.subcarrier_khz * 1e3

    @property
    def total_margin_db(self) -> float:
        return self.slow_fading_margin_db + self.body_loss_db + self.foliage_loss_db

    def validate(self):
        if self.propagation not in (PROPAGATION_RMA_LOS, PROPAGATION_RMA_NLOS):
            raise ValueError(f"unknown propagation model {self.propagation!r}")
        if not 0.5 <= self.carrier_freq_ghz <= 30.0:
            raise ValueError("carrier_freq_ghz outside RMa validity [0.5, 30] GHz")
        if self.snr_eval_n_rbs < 1:
            raise ValueError("snr_eval_n_rbs must be >= 1")


@dataclass(frozen=True)
class RateModelParams:
    """Approximate-maximum-rate parameters (TS 38.306 style PDSCH formula)."""

    n_layers: int = 1
    modulation_order: int = 8
    scaling_factor: float = 1.0
    max_code_rate: float = 948.0 / 1024.0
    overhead: float = 0.14
    numerology_mu: int = 1
    dl_symbol_fraction: float = 12.0 / 14.0  # TDD slot with 2 UL symbols at the end

    def validate(self):
        if self.n_layers < 1 or self.modulation_order < 1:
            raise ValueError("n_layers and modulation_order must be >= 1")
        if not 0.0 < self.scaling_factor <= 1.0:
            raise ValueError("scaling_factor must be in (0, 1]")
        if not 0.0 <= self.overhead < 1.0:
            raise ValueError("overhead must be in [0, 1)")


def _check_pl_domain(d2d_m, fc_ghz, max_distance_m):
    d = np.asarray(d2d_m, dtype=float)
    if np.any(d < RMA_MIN_DISTANCE_M) or np.any(d > max_distance_m):
        raise ValueError(
            f"2D distance outside RMa validity [{RMA_MIN_DISTANCE_M}, {max_distance_m}] m"
        )
    if not 0.5 <= fc_ghz <= 30.0:
        raise ValueError("carrier frequency outside RMa validity [0.5, 30] GHz")
    return d


def _los_from_log10(d3d, log10_d3d, fc_ghz, h_building_m, d_bp):
    """Two-slope LOS curve given a precomputed log10(d3d)."""
    corr = min(0.03 * h_building_m**1.72, 10.0)
    off = min(0.044 * h_building_m**1.72, 14.77)
    k_lin = 0.002 * math.log10(h_building_m)
    base = 20.0 * math.log10(40.0 * math.pi * fc_ghz / 3.0) - off
    pl1 = base + (20.0 + corr) * log10_d3d + k_lin * d3d
    log10_bp = np.log10(d_bp)
    pl1_at_bp = base + (20.0 + corr) * log10_bp + k_lin * d_bp
    pl2 = pl1_at_bp + 40.0 * (log10_d3d - log10_bp)
    return np.where(d3d <= d_bp, pl1, pl2)


def path_loss_rma(d2d_m, fc_ghz, h_bs_m, h_ue_m, avg_building_height_m=5.0):
    """Rural-macro LOS path loss in dB (two-slope, breakpoint model).

    Valid for 10 m <= d2d <= 10 km and 0.5 <= fc <= 30 GHz; raises
    ValueError outside that domain.  Continuous and non-decreasing in
    distance.  h_bs_m may be an array broadcastable against d2d_m.
    """
    d2d = _check_pl_domain(d2d_m, fc_ghz, RMA_LOS_MAX_DISTANCE_M)
    d3d = np.hypot(d2d, np.asarray(h_bs_m, dtype=float) - h_ue_m)
    d_bp = 2.0 * math.pi * np.asarray(h_bs_m) * h_ue_m * fc_ghz * 1e9 / SPEED_OF_LIGHT_MPS
    out = _los_from_log10(d3d, np.log10(d3d), fc_ghz, avg_building_height_m, d_bp)
    return float(out) if np.isscalar(d2d_m) and np.isscalar(h_bs_m) else out


def path_loss_rma_nlos(
    d2d_m, fc_ghz, h_bs_m, h_ue_m, avg_building_height_m=5.0, street_width_m=20.0
):
    """Rural-macro NLOS path loss in dB, lower-bounded by the LOS curve.

    Valid for 10 m <= d2d <= 5 km.
    """
    d2d = _check_pl_domain(d2d_m, fc_ghz, RMA_NLOS_MAX_DISTANCE_M)
    h_bs = np.asarray(h_bs_m, dtype=float)
    d3d = np.hypot(d2d, h_bs - h_ue_m)
    log10_d3d = np.log10(d3d)
    h = avg_building_height_m
    const = (
        161.04
        - 7.1 * math.log10(street_width_m)
        + 7.5 * math.log10(h)
        - (24.37 - 3.7 * (h / h_bs) ** 2) * np.log10(h_bs)
        + 20.0 * math.log10(fc_ghz)
        - (3.2 * math.log10(11.75 * h_ue_m) ** 2 - 4.97)
    )
    pl_prime = const + (43.42 - 3.1 * np.log10(h_bs)) * (log10_d3d - 3.0)
    d_bp = 2.0 * math.pi * h_bs * h_ue_m * fc_ghz * 1e9 / SPEED_OF_LIGHT_MPS
    los = _los_from_log10(d3d, log10_d3d, fc_ghz, h, d_bp)
    out = np.maximum(los, pl_prime)
    return float(out) if np.isscalar(d2d_m) and np.isscalar(h_bs_m) else out


def path_loss(d2d_m, params: LinkBudgetParams, h_bs_m, h_ue_m):
    """Path loss under the configured propagation model.

    Distances below the model floor are clamped to 10 m (users may be
    deployed arbitrarily close to a site).
    """
    d = np.maximum(d2d_m, RMA_MIN_DISTANCE_M)
    if params.propagation == PROPAGATION_RMA_LOS:
        return path_loss_rma(
            d, params.carrier_freq_ghz, h_bs_m, h_ue_m, params.avg_building_height_m
        )
    return path_loss_rma_nlos(
        d,
        params.carrier_freq_ghz,
        h_bs_m,
        h_ue_m,
        params.avg_building_height_m,
        params.street_width_m,
    )


def noise_power_dbm(n_rbs, subcarrier_khz, noise_figure_db):
    """Thermal noise over n_rbs resource blocks plus receiver noise figure."""
    bw_hz = n_rbs * SUBCARRIERS_PER_RB * subcarrier_khz * 1e3
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(bw_hz) + noise_figure_db


def link_snr(tx_power_dbm, params: LinkBudgetParams, pl_db, n_rbs, bs_gain_db=None):
    """Downlink SNR in dB over an allocation of n_rbs resource blocks."""
    if np.any(np.asarray(n_rbs) < 1):
        raise ValueError("n_rbs must be >= 1")
    gain = params.bs_antenna_gain_db if bs_gain_db is None else bs_gain_db
    return (
        tx_power_dbm
        + gain
        + params.ue_antenna_gain_db
        - params.total_margin_db
        - pl_db
        - noise_power_dbm(n_rbs, params.subcarrier_khz, params.noise_figure_db)
    )


def coverage_radius(bs, params: LinkBudgetParams, h_ue_m=1.5):
    """Largest distance at which the station clears the SNR floor.

    Bisection to 1 m resolution over the propagation model's validity
    range; 0 if infeasible even at 10 m, the domain edge if feasible
    everywhere.  `bs` needs tx_power_dbm, antenna_height_m and
    antenna_gain_dbi attributes.
    """
    hi_limit = (
        RMA_LOS_MAX_DISTANCE_M
        if params.propagation == PROPAGATION_RMA_LOS
        else RMA_NLOS_MAX_DISTANCE_M
    )

    def feasible(d):
        pl = path_loss(d, params, bs.antenna_height_m, h_ue_m)
        snr = link_snr(
            bs.tx_power_dbm, params, pl, params.snr_eval_n_rbs, bs_gain_db=bs.antenna_gain_dbi
        )
        return snr >= params.min_snr_db

    lo, hi = RMA_MIN_DISTANCE_M, hi_limit
    if not feasible(lo):
        return 0.0
    if feasible(hi):
        return hi
    while hi - lo > 1.0:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def max_data_rate(n_prb, p: RateModelParams):
    """Approximate maximum PDSCH data rate in bit/s for an n_prb allocation.

    rate = v * Qm * f * Rmax * (n_prb * 12 / Ts(mu)) * (1 - OH) * dl_fraction
    with Ts(mu) = 1e-3 / (14 * 2^mu).  Exactly linear in n_prb.
    """
    if n_prb < 0:
        raise ValueError("n_prb must be >= 0")
    ts = 1e-3 / (14 * 2**p.numerology_mu)
    return (
        p.n_layers
        * p.modulation_order
        * p.scaling_factor
        * p.max_code_rate
        * (n_prb * SUBCARRIERS_PER_RB / ts)
        * (1.0 - p.overhead)
        * p.dl_symbol_fraction
    )
