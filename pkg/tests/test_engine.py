"""Simulation-loop tests: determinism, fixed points, handover, batches."""

import dataclasses

import numpy as np
import pytest

from greenran import metrics
from greenran.config import ConfigError, FullConfig
from greenran.engine import EVENT_HANDOVER, MetricsLog, Simulation, run_batch
from greenran.mobility import MobilityConfig
from greenran.scenario import ScenarioConfig


def small_config(duration_s=0, seed=1, **run_kwargs):
    """4-cell, 40-user network that runs in milliseconds."""
    cfg = FullConfig()
    cfg = dataclasses.replace(
        cfg,
        scenario=dataclasses.replace(
            cfg.scenario, n_scbs=4, n_users=40, scbs_grid_spacing_m=800.0
        ),
        run=dataclasses.replace(cfg.run, duration_s=duration_s, **run_kwargs),
    )
    return cfg.with_seed(seed)


def frozen_users_config(duration_s, seed=1, **kwargs):
    cfg = small_config(duration_s, seed, **kwargs)
    return dataclasses.replace(
        cfg,
        mobility=dataclasses.replace(cfg.mobility, speed_min_mps=0.0, speed_max_mps=0.0),
    )


def log_row(log, i):
    return (
        int(log.t[i]),
        int(log.served_users[i]),
        int(log.outage_users[i]),
        float(log.sum_rate_mbps[i]),
        int(log.mbs_rbs[i]),
        int(log.scbs_rbs[i]),
        float(log.mbs_draw_w[i]),
        float(log.scbs_draw_w[i]),
        log.occupied_rbs[i].tolist(),
        log.sleep_level[i].tolist(),
    )


class TestZeroDuration:
    def test_snapshot_only(self):
        log = Simulation(small_config(0)).run()
        assert log.n_rows == 1
        assert log.t[0] == 0
        assert log.served_users[0] + log.outage_users[0] == 40
        assert all(ev[1] == "initial" for ev in log.events)

    def test_row_count_matches_duration(self):
        log = Simulation(small_config(30)).run()
        assert log.n_rows == 31


class TestDeterminism:
    def test_bit_identical_logs(self):
        a = Simulation(small_config(120, seed=5)).run()
        b = Simulation(small_config(120, seed=5)).run()
        assert a.events == b.events
        for name in ("sum_rate_mbps", "charge_wh", "draw_w", "occupied_rbs", "ongrid_w"):
            assert np.array_equal(getattr(a, name), getattr(b, name)), name

    def test_seed_changes_outcome(self):
        a = Simulation(small_config(0, seed=5)).run()
        b = Simulation(small_config(0, seed=6)).run()
        assert not np.array_equal(a.occupied_rbs, b.occupied_rbs)


class TestFixedPoint:
    def test_static_users_static_network(self):
        # frozen users, giant battery: every logged row repeats exactly once
        # sleep levels settle (cells with no users descend for 900 s)
        cfg = frozen_users_config(1100)
        cfg = dataclasses.replace(
            cfg, battery=dataclasses.replace(cfg.battery, capacity_wh=1e9, charge_wh=1e9)
        )
        log = Simulation(cfg).run()
        settled = [log_row(log, i) for i in range(950, 1100)]
        assert all(r[1:] == settled[0][1:] for r in settled)

    def test_no_handover_without_movement(self):
        log = Simulation(frozen_users_config(300)).run()
        assert not any(ev[1] == EVENT_HANDOVER for ev in log.events)

    def test_idempotent_periodic_reassociation(self):
        # periodic re-association of an unchanged network must not move anyone
        log = Simulation(frozen_users_config(600, periodic_reassoc_s=200)).run()
        periodic = [ev for ev in log.events if ev[1] == "periodic"]
        assert periodic, "periodic pass did not run"
        assert all(ev[7] == 0 for ev in periodic)  # no reallocation moves
        initial = {ev[2]: (ev[3], ev[4], ev[5]) for ev in log.events if ev[1] == "initial"}
        for ev in periodic:
            assert initial[ev[2]] == (ev[3], ev[4], ev[5])


class TestHandover:
    def test_cell_crossing_fires_one_move(self, monkeypatch):
        # one user walking between two adjacent cell sites (overlapping
        # discs): the serving cell changes exactly once, one tick after the
        # target clears the 3 dB hysteresis, and the edge-triggered detector
        # never storms (the mid-walk macro flag re-lands on the same cell)
        from greenran import mobility

        cfg = FullConfig()
        cfg = dataclasses.replace(
            cfg,
            scenario=dataclasses.replace(cfg.scenario, n_users=1),
            run=dataclasses.replace(
                cfg.run, duration_s=700, periodic_reassoc_s=0, retry_unserved_every_s=0
            ),
        ).with_seed(1)

        def straight_segment(self, t):  # cell 9 site -> cell 1 site
            return (0.0, 1e9, (-1600.0, 0.0), (-800.0, 0.0), 1.3)

        monkeypatch.setattr(mobility.Trajectory, "segment_at", straight_segment)
        sim = Simulation(cfg)
        sim.users[0].position = (-1600.0, 0.0)
        log = sim.run()
        handovers = [ev for ev in log.events if ev[1] == EVENT_HANDOVER]
        assert 1 <= len(handovers) <= 2
        moves = [ev for ev in handovers if ev[4] == 1]  # landed on cell id 1
        assert len(moves) == 1
        assert moves[0] == handovers[-1]  # stable after the move
        t_fire = moves[0][0]
        # offline SNR-trace oracle: first tick where the target cell exceeds
        # the starting cell by the 3 dB hysteresis (cells 9 and 1 are
        # columns 8 and 0 of the cell SNR table)
        walk = Simulation(cfg)
        expect = next(
            t
            for t in range(700)
            if (
                lambda snr: snr[0] > snr[8] + 3.0
            )(walk._snr_tables(np.array([[-1600.0 + 1.3 * t, 0.0]]))[0][0])
        )
        assert abs(t_fire - expect) <= 1

    def test_leaving_all_coverage_releases_user(self, monkeypatch):
        from greenran import mobility

        cfg = small_config(2100, periodic_reassoc_s=0, retry_unserved_every_s=0)
        cfg = dataclasses.replace(
            cfg,
            scenario=dataclasses.replace(
                cfg.scenario, n_scbs=0, n_users=1, mbs_coverage_radius_m=2200.0
            ),
        )

        def outbound(self, t):  # walks past the macro coverage edge (~2276 m)
            return (0.0, 1e9, (0.0, 0.0), (2600.0, 0.0), 1.3)

        monkeypatch.setattr(mobility.Trajectory, "segment_at", outbound)
        sim = Simulation(cfg)
        sim.users[0].position = (0.0, 0.0)
        log = sim.run()
        assert log.outage_users[-1] == 1
        drops = [ev for ev in log.events if ev[1] == EVENT_HANDOVER and ev[3] == "outage"]
        assert len(drops) == 1
        # fired within one tick of the SNR floor crossing
        radio_edge = 2276.0
        t_cross = radio_edge / 1.3
        assert t_cross <= drops[0][0] <= t_cross + 2


class TestConsistency:
    def test_user_conservation_every_tick(self):
        log = Simulation(small_config(400, seed=3)).run()
        assert np.all(log.served_users + log.outage_users == 40)

    def test_capacity_caps_never_violated(self):
        log = Simulation(small_config(600, seed=4)).run()
        assert np.all(log.occupied_rbs[:, 1:] <= 106)
        assert np.all(log.occupied_rbs[:, 0] <= 3 * 106)

    def test_energy_ledger_replay(self):
        log = Simulation(small_config(3600, seed=3)).run()
        residuals = metrics.energy_conservation_residuals(log)
        assert np.abs(residuals).max() < 1e-6

    def test_battery_bounds(self):
        log = Simulation(small_config(3600, seed=3)).run()
        assert np.all(log.charge_wh[:, 1:] >= -1e-9)
        assert np.all(log.charge_wh[:, 1:] <= 924.0 + 1e-9)

    def test_rejects_deployment_beyond_coverage(self):
        cfg = small_config(0)
        cfg = dataclasses.replace(
            cfg, scenario=dataclasses.replace(cfg.scenario, mbs_coverage_radius_m=2600.0)
        )
        with pytest.raises(ConfigError):
            Simulation(cfg)


class TestBatteryShutdownRecoveryCycle:
    def test_overnight_cycle_evicts_and_repatriates(self):
        # small batteries, calm wind: loaded cells cross the threshold during
        # the night, evict their users, sleep and recharge at dawn, recover,
        # and pull their users back from the macro station
        cfg = small_config(26000, seed=2)
        cfg = dataclasses.replace(
            cfg,
            battery=dataclasses.replace(cfg.battery, capacity_wh=150.0, charge_wh=150.0),
            farm=dataclasses.replace(cfg.farm, wt_rated_w=0.0),
        )
        log = Simulation(cfg).run()

        shutdowns = [ev for ev in log.events if ev[1] == "shutdown"]
        recoveries = [ev for ev in log.events if ev[1] == "recovery"]
        assert shutdowns, "no battery-low evictions fired"
        assert recoveries, "no battery-recovered pulls fired"
        t_shutdown = min(ev[0] for ev in shutdowns)
        t_recovery = min(ev[0] for ev in recoveries)
        assert t_shutdown < 21600 < t_recovery  # night eviction, post-dawn pull

        # energy gating: between a cell's eviction and its recovery no new
        # grant lands on it (threshold at 20%, recovery at 35% of capacity)
        frac = log.charge_wh[:, 1:] / 150.0
        below = frac < 0.2
        grant_events = [
            ev for ev in log.events if ev[3] == "scbs" and ev[1] != "initial" and ev[0] > 0
        ]
        for ev in grant_events:
            t, bs_id = ev[0], ev[4]
            if below[t, bs_id - 1]:
                # allowed only if the cell already recovered (hysteresis gate
                # reopens at 35%, charge cannot be below 20% right after)
                raise AssertionError(f"grant to gated cell {bs_id} at t={t}")

        # recovered cells actually hold users again by the end
        assert log.scbs_rbs[-1] > 0


class TestBatch:
    def test_single_run_equals_batch_of_one(self):
        cfg = small_config(0)
        batch = run_batch(cfg, 1, 42, "proposed")
        single = Simulation(
            dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, duration_s=0)).with_seed(42)
        ).run()
        assert batch.mbs_load_share[0] == pytest.approx(metrics.mbs_load_share(single))
        assert batch.outage_share[0] == pytest.approx(metrics.outage_share(single))

    def test_histogram_bookkeeping(self):
        batch = run_batch(small_config(0), 12, 7, "reference")
        counts, edges = batch.histogram("mbs_load_share", bins=6)
        assert counts.sum() == 12
        assert len(edges) == 7

    def test_proposed_offloads_macro(self):
        cfg = FullConfig()
        p = run_batch(cfg, 8, 100, "proposed")
        r = run_batch(cfg, 8, 100, "reference")
        assert p.mbs_load_share.mean() < r.mbs_load_share.mean()

    def test_batch_seeds_are_consecutive(self):
        batch = run_batch(small_config(0), 3, 9, "proposed")
        assert batch.seeds == [9, 10, 11]
