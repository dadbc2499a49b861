"""Metric computations over synthetic logs with hand-computed expectations."""

import numpy as np
import pytest

from greenran.engine import MetricsLog
from greenran.metrics import (
    GROUP_MBS,
    GROUP_SCBS,
    GROUP_TOTAL,
    CONVENTION_RATIO_OF_SUMS,
    energy_efficiency,
    energy_efficiency_report,
    mbs_load_share,
    on_grid_energy_series,
    on_grid_total_kwh,
    outage_share,
)


def synthetic_log(
    n_rows,
    n_users=4,
    mbs_rate=None,
    scbs_rate=None,
    mbs_draw=None,
    scbs_draw=None,
    mbs_rbs=None,
    scbs_rbs=None,
    outage=None,
):
    log = MetricsLog.allocate(n_rows, tick_s=1, n_users=n_users, n_scbs=2)
    log.t[:] = np.arange(n_rows)
    if mbs_rate is not None:
        log.mbs_rate_mbps[:] = mbs_rate
    if scbs_rate is not None:
        log.scbs_rate_mbps[:] = scbs_rate
    log.sum_rate_mbps[:] = log.mbs_rate_mbps + log.scbs_rate_mbps
    if mbs_draw is not None:
        log.mbs_draw_w[:] = mbs_draw
        log.ongrid_w[:] = mbs_draw
    if scbs_draw is not None:
        log.scbs_draw_w[:] = scbs_draw
    if mbs_rbs is not None:
        log.mbs_rbs[:] = mbs_rbs
    if scbs_rbs is not None:
        log.scbs_rbs[:] = scbs_rbs
    if outage is not None:
        log.outage_users[:] = outage
        log.served_users[:] = n_users - log.outage_users
    return log


class TestEnergyEfficiency:
    def test_constant_ratio(self):
        log = synthetic_log(10, mbs_rate=100.0, mbs_draw=50.0, scbs_rate=0.0, scbs_draw=30.0)
        assert energy_efficiency(log, GROUP_MBS) == pytest.approx(2.0)

    def test_two_tick_mean_of_ratios(self):
        # hand oracle: mean(100/50, 80/100) = mean(2.0, 0.8) = 1.4
        log = synthetic_log(2)
        log.mbs_rate_mbps[:] = [100.0, 80.0]
        log.mbs_draw_w[:] = [50.0, 100.0]
        assert energy_efficiency(log, GROUP_MBS) == pytest.approx(1.4)

    def test_two_tick_ratio_of_sums_differs(self):
        # hand oracle: (100+80)/(50+100) = 1.2
        log = synthetic_log(2)
        log.mbs_rate_mbps[:] = [100.0, 80.0]
        log.mbs_draw_w[:] = [50.0, 100.0]
        got = energy_efficiency(log, GROUP_MBS, CONVENTION_RATIO_OF_SUMS)
        assert got == pytest.approx(1.2)

    def test_zero_energy_ticks_excluded(self):
        log = synthetic_log(3)
        log.scbs_rate_mbps[:] = [10.0, 10.0, 10.0]
        log.scbs_draw_w[:] = [10.0, 0.0, 5.0]
        assert energy_efficiency(log, GROUP_SCBS) == pytest.approx((1.0 + 2.0) / 2.0)

    def test_all_zero_energy_rejected(self):
        log = synthetic_log(3, scbs_rate=10.0, scbs_draw=0.0)
        with pytest.raises(ValueError):
            energy_efficiency(log, GROUP_SCBS)

    def test_total_group_combines_draws(self):
        log = synthetic_log(1, mbs_rate=50.0, scbs_rate=50.0, mbs_draw=40.0, scbs_draw=60.0)
        assert energy_efficiency(log, GROUP_TOTAL) == pytest.approx(1.0)

    def test_report_fields_consistent(self):
        log = synthetic_log(
            4, mbs_rate=30.0, scbs_rate=90.0, mbs_draw=60.0, scbs_draw=45.0,
            mbs_rbs=30, scbs_rbs=90, outage=1,
        )
        rep = energy_efficiency_report(log)
        assert rep.ee_mbs == pytest.approx(0.5)
        assert rep.ee_scbs == pytest.approx(2.0)
        assert rep.mbs_load_share == pytest.approx(0.25)
        assert rep.outage_share == pytest.approx(0.25)
        assert rep.ee_total >= 0.0 and rep.ee_scbs >= 0.0 and rep.ee_mbs >= 0.0


class TestLoadShare:
    def test_all_on_mbs(self):
        log = synthetic_log(5, mbs_rbs=60, scbs_rbs=0)
        assert mbs_load_share(log) == 1.0

    def test_none_on_mbs(self):
        log = synthetic_log(5, mbs_rbs=0, scbs_rbs=60)
        assert mbs_load_share(log) == 0.0

    def test_crafted_five_percent(self):
        # 30 macro block-ticks of 600 total
        log = synthetic_log(10, mbs_rbs=3, scbs_rbs=57)
        assert mbs_load_share(log) == pytest.approx(0.05)

    def test_zero_traffic_warns(self):
        log = synthetic_log(3)
        with pytest.warns(UserWarning):
            assert mbs_load_share(log) == 0.0

    def test_shares_sum_to_one(self):
        log = synthetic_log(7, mbs_rbs=13, scbs_rbs=29)
        scbs_share = 29.0 / 42.0
        assert mbs_load_share(log) + scbs_share == pytest.approx(1.0)


class TestOutageShare:
    def test_all_served(self):
        assert outage_share(synthetic_log(5, outage=0)) == 0.0

    def test_all_outage(self):
        assert outage_share(synthetic_log(5, n_users=4, outage=4)) == 1.0

    def test_one_of_400_users(self):
        log = synthetic_log(100, n_users=400, outage=1)
        assert outage_share(log) == pytest.approx(0.0025)


class TestOnGridSeries:
    def test_constant_kw_hourly_windows(self):
        log = synthetic_log(3601, mbs_draw=1000.0)
        series = on_grid_energy_series(log, 3600)
        assert len(series) == 1
        assert series[0] == pytest.approx(1.0)

    def test_partition_property(self):
        rng = np.random.default_rng(5)
        log = synthetic_log(1201)
        log.ongrid_w[:] = rng.uniform(500.0, 2500.0, 1201)
        series = on_grid_energy_series(log, 300)
        assert len(series) == 4
        assert series.sum() == pytest.approx(on_grid_total_kwh(log), rel=1e-9)

    def test_window_must_divide_duration(self):
        log = synthetic_log(1001, mbs_draw=100.0)
        with pytest.raises(ValueError):
            on_grid_energy_series(log, 999)
