"""Random-waypoint trajectory tests."""

import math

import numpy as np
import pytest

from greenran.mobility import MobilityConfig, Trajectory, TrajectoryBundle, step_mobility

CENTER = (0.0, 0.0)
RADIUS = 2270.0


def make_traj(user_id=0, seed=1, start=(100.0, 50.0), **kwargs):
    cfg = MobilityConfig(rng_seed=seed, **kwargs)
    return Trajectory(user_id, start, cfg, CENTER, RADIUS)


class TestTrajectory:
    def test_zero_speed_never_moves(self):
        traj = make_traj(speed_min_mps=0.0, speed_max_mps=0.0)
        for t in (0, 100, 5000, 50000):
            assert step_mobility(traj, t) == (100.0, 50.0)

    def test_determinism(self):
        a = make_traj(user_id=3, seed=5)
        b = make_traj(user_id=3, seed=5)
        for t in range(0, 5000, 7):
            assert a.position(t) == b.position(t)

    def test_users_get_distinct_paths(self):
        a = make_traj(user_id=0)
        b = make_traj(user_id=1)
        assert a.position(3000) != b.position(3000)

    def test_stays_inside_disc(self):
        traj = make_traj(user_id=2, seed=9)
        for t in range(0, 100000, 50):
            x, y = traj.position(t)
            assert math.hypot(x, y) <= RADIUS + 1e-6

    def test_displacement_bounded_by_max_speed(self):
        cfg_max = 1.5
        traj = make_traj(user_id=4, seed=2, speed_max_mps=cfg_max)
        prev = traj.position(0)
        for t in range(1, 3000):
            cur = traj.position(t)
            step = math.hypot(cur[0] - prev[0], cur[1] - prev[1])
            assert step <= cfg_max + 1e-9
            prev = cur

    def test_epoch_spacing_has_bounded_jitter(self):
        traj = make_traj(user_id=5, seed=3)
        traj.position(50000)  # force segments
        spans = [t1 - t0 for t0, t1, _, _, _ in traj._segments]
        assert all(450.0 - 1e-9 <= s <= 550.0 + 1e-9 for s in spans)

    def test_waypoints_uniform_over_reachable_neighborhood(self):
        # a user pinned deep in the interior: waypoints should be chi-square
        # uniform over the reachable ball (rings x quadrants, 16 cells)
        cfg = MobilityConfig(
            rng_seed=7, speed_min_mps=1.0, speed_max_mps=1.0, interval_jitter_frac=0.0
        )
        traj = Trajectory(6, (0.0, 0.0), cfg, CENTER, RADIUS)
        reach = 500.0
        pts = np.array(traj.waypoints(10000))
        origins = np.array([s[2] for s in traj._segments[:10000]])
        rel = pts - origins
        r = np.hypot(rel[:, 0], rel[:, 1])
        assert float(r.max()) <= reach + 1e-9
        theta = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2 * math.pi)
        ring = np.minimum((4 * (r / reach) ** 2).astype(int), 3)
        quad = (theta // (math.pi / 2)).astype(int)
        counts = np.bincount(ring * 4 + quad, minlength=16)
        expected = len(pts) / 16.0
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # 99.9% quantile of chi-square with 15 dof
        assert chi2 < 37.70

    def test_long_run_positions_stay_uniform_in_interior(self):
        # 1500 independent users sampled after ten epochs: the interior
        # (one reach-length inside the rim) must stay chi-square uniform,
        # i.e. no inward drift of the population
        cfg = MobilityConfig(rng_seed=13)
        rng = np.random.default_rng(99)
        rr = RADIUS * np.sqrt(rng.random(1500))
        th = 2 * math.pi * rng.random(1500)
        pos = []
        for i in range(1500):
            start = (rr[i] * math.cos(th[i]), rr[i] * math.sin(th[i]))
            pos.append(Trajectory(i, start, cfg, CENTER, RADIUS).position(5000.0))
        pos = np.array(pos)
        r = np.hypot(pos[:, 0], pos[:, 1])
        interior = RADIUS - 850.0  # max reach ~1.5 m/s * 550 s
        inside = pos[r <= interior]
        frac_expected = (interior / RADIUS) ** 2
        # population loss from the interior would show up here first
        assert len(inside) / len(pos) == pytest.approx(frac_expected, abs=0.04)
        ri = np.hypot(inside[:, 0], inside[:, 1])
        theta = np.mod(np.arctan2(inside[:, 1], inside[:, 0]), 2 * math.pi)
        ring = np.minimum((4 * (ri / interior) ** 2).astype(int), 3)
        quad = (theta // (math.pi / 2)).astype(int)
        counts = np.bincount(ring * 4 + quad, minlength=16)
        expected = len(inside) / 16.0
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < 37.70

    def test_random_access_matches_sequential(self):
        seq = make_traj(user_id=8, seed=11)
        rnd = make_traj(user_id=8, seed=11)
        ts = list(range(0, 4000, 13))
        sequential = [seq.position(t) for t in ts]
        shuffled_order = ts[::-1]
        random_access = {t: rnd.position(t) for t in shuffled_order}
        assert all(random_access[t] == p for t, p in zip(ts, sequential))

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            make_traj().position(-1)


class TestTrajectoryBundle:
    def test_bit_identical_to_per_user_calls(self):
        cfg = MobilityConfig(rng_seed=4)
        singles = [Trajectory(i, (10.0 * i, -5.0 * i), cfg, CENTER, RADIUS) for i in range(25)]
        bundle = TrajectoryBundle(
            Trajectory(i, (10.0 * i, -5.0 * i), cfg, CENTER, RADIUS) for i in range(25)
        )
        for t in range(0, 3000, 3):
            got = bundle.positions(float(t))
            want = np.array([s.position(t) for s in singles])
            assert np.array_equal(got, want)


class TestConfigValidation:
    def test_bad_speed_range(self):
        with pytest.raises(ValueError):
            MobilityConfig(speed_min_mps=2.0, speed_max_mps=1.0).validate()

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            MobilityConfig(reposition_interval_s=0.0).validate()
