"""Reported quantities computed from a finished run's log.

Energy efficiency follows the mean-of-per-tick-ratios reading of
"averaged over all simulation steps"; the ratio-of-sums variant is also
computed and both appear in the summary, since the two differ whenever
load and draw are correlated.
"""

import warnings
from dataclasses import dataclass

import numpy as np

GROUP_SCBS = "scbs"
GROUP_MBS = "mbs"
GROUP_TOTAL = "total"

CONVENTION_MEAN_OF_RATIOS = "mean_of_ratios"
CONVENTION_RATIO_OF_SUMS = "ratio_of_sums"


@dataclass(frozen=True)
class EnergyEfficiencyReport:
    ee_scbs: float  # Mb per Joule per second, mean of per-tick ratios
    ee_mbs: float
    ee_total: float
    ee_scbs_ratio_of_sums: float
    ee_mbs_ratio_of_sums: float
    ee_total_ratio_of_sums: float
    on_grid_kwh: float
    mbs_load_share: float
    outage_share: float


def _group_series(log, group):
    if group == GROUP_SCBS:
        return log.scbs_rate_mbps, log.scbs_draw_w
    if group == GROUP_MBS:
        return log.mbs_rate_mbps, log.mbs_draw_w
    if group == GROUP_TOTAL:
        return log.sum_rate_mbps, log.scbs_draw_w + log.mbs_draw_w
    raise ValueError(f"unknown group {group!r}")


def energy_efficiency(log, group=GROUP_TOTAL, convention=CONVENTION_MEAN_OF_RATIOS):
    """Mean energy efficiency of a station group in Mb per Joule per second.

    Per tick, EE = (group sum rate in Mb/s) / (group energy that tick in
    J); ticks where the group consumed no energy are excluded from the
    mean.  Raises when every tick has zero energy.
    """
    rate_mbps, draw_w = _group_series(log, group)
    energy_j = draw_w * log.tick_s
    nonzero = energy_j > 0.0
    if not nonzero.any():
        raise ValueError(f"group {group!r} consumed no energy in any tick")
    if convention == CONVENTION_RATIO_OF_SUMS:
        return float(rate_mbps[nonzero].sum() / energy_j[nonzero].sum() * log.tick_s)
    if convention != CONVENTION_MEAN_OF_RATIOS:
        raise ValueError(f"unknown convention {convention!r}")
    return float((rate_mbps[nonzero] * log.tick_s / energy_j[nonzero]).mean())


def excluded_zero_energy_ticks(log, group=GROUP_TOTAL) -> int:
    _, draw_w = _group_series(log, group)
    return int((draw_w * log.tick_s == 0.0).sum())


def mbs_load_share(log) -> float:
    """Fraction of served resource-block-ticks carried directly by the MBS."""
    mbs = float(log.mbs_rbs.sum())
    total = mbs + float(log.scbs_rbs.sum())
    if total == 0.0:
        warnings.warn("no served traffic in log; MBS load share defined as 0")
        return 0.0
    return mbs / total


def outage_share(log) -> float:
    """Mean over ticks of the unserved-user fraction."""
    if log.n_users == 0:
        return 0.0
    return float(log.outage_users.mean() / log.n_users)


def on_grid_energy_series(log, window_s) -> np.ndarray:
    """kWh of on-grid energy per window; the windows partition the run."""
    duration = int(log.t[-1]) - int(log.t[0])
    if window_s <= 0 or (duration and duration % window_s != 0):
        raise ValueError("window_s must be > 0 and divide the run duration")
    # row 0 is the snapshot; energy accrues over rows 1..N
    ongrid_wh = log.ongrid_w[1:] * log.tick_s / 3600.0
    if len(ongrid_wh) == 0:
        return np.zeros(0)
    per_window = window_s // log.tick_s
    return ongrid_wh.reshape(-1, per_window).sum(axis=1) / 1e3


def on_grid_total_kwh(log) -> float:
    return float((log.ongrid_w[1:] * log.tick_s).sum() / 3.6e6)


def energy_efficiency_report(log) -> EnergyEfficiencyReport:
    return EnergyEfficiencyReport(
        ee_scbs=energy_efficiency(log, GROUP_SCBS),
        ee_mbs=energy_efficiency(log, GROUP_MBS),
        ee_total=energy_efficiency(log, GROUP_TOTAL),
        ee_scbs_ratio_of_sums=energy_efficiency(log, GROUP_SCBS, CONVENTION_RATIO_OF_SUMS),
        ee_mbs_ratio_of_sums=energy_efficiency(log, GROUP_MBS, CONVENTION_RATIO_OF_SUMS),
        ee_total_ratio_of_sums=energy_efficiency(log, GROUP_TOTAL, CONVENTION_RATIO_OF_SUMS),
        on_grid_kwh=on_grid_total_kwh(log),
        mbs_load_share=mbs_load_share(log),
        outage_share=outage_share(log),
    )


def energy_conservation_residuals(log) -> np.ndarray:
    """Per-tick, per-cell ledger residual, relative to the tick's energy flow.

    For every renewable cell and tick:
    gen_wh - draw_wh - (dcharge_wh + curtailed_wh - shortfall_wh)
    normalized by max(|terms|, 1 Wh).  Zero up to float rounding when the
    battery bookkeeping is consistent.
    """
    dt_h = log.tick_s / 3600.0
    gen = log.gen_w[1:, 1:] * dt_h
    draw = log.draw_w[1:, 1:] * dt_h
    curt = log.curtailed_w[1:, 1:] * dt_h
    short = log.shortfall_w[1:, 1:] * dt_h
    dcharge = np.diff(log.charge_wh[:, 1:], axis=0)
    residual = gen - draw - (dcharge + curt - short)
    scale = np.maximum.reduce([np.abs(gen), np.abs(draw), np.abs(dcharge), np.ones_like(gen)])
    return residual / scale
