"""Random-waypoint mobility inside the macro coverage disc.

Each user re-draws a speed and a waypoint at reposition epochs spaced
roughly every 500 s (seeded jitter) and glides linearly to the waypoint,
dwelling there until the next epoch.  Waypoints are uniform over the
part of the disc the user can actually reach within the epoch: gliding
toward targets drawn over the whole disc at pedestrian speeds has a
compounding inward drift that piles the population onto the inner cells
within the hour, while the reachable-ball law keeps the stationary
density uniform away from the rim (detailed balance against the clipped
neighborhood area).  Trajectories are a pure function of
(seed, user id, t).
"""

import math
from dataclasses import dataclass

import numpy as np

_TRAJECTORY_TAG = 0x574150  # keeps user streams independent of deployment draws


@dataclass(frozen=True)
class MobilityConfig:
    reposition_interval_s: float = 500.0
    interval_jitter_frac: float = 0.1
    speed_min_mps: float = 0.5
    speed_max_mps: float = 1.5
    rng_seed: int = 1

    def validate(self):
        if self.reposition_interval_s <= 0:
            raise ValueError("reposition_interval_s must be > 0")
        if not 0.0 <= self.speed_min_mps <= self.speed_max_mps:
            raise ValueError("need 0 <= speed_min <= speed_max")
        if not 0.0 <= self.interval_jitter_frac < 1.0:
            raise ValueError("interval_jitter_frac must be in [0, 1)")


class Trajectory:
    """Lazy per-user waypoint path; position(t) is deterministic in t."""

    def __init__(self, user_id, start_xy, cfg: MobilityConfig, center_xy, radius_m):
        cfg.validate()
        self.cfg = cfg
        self.center = (float(center_xy[0]), float(center_xy[1]))
        self.radius = float(radius_m)
        self._rng = np.random.default_rng([cfg.rng_seed, int(user_id), _TRAJECTORY_TAG])
        # segments: (t_start, t_end, origin_xy, waypoint_xy, speed)
        self._segments = [self._draw_segment(0.0, (float(start_xy[0]), float(start_xy[1])))]
        self._cursor = 0

    def _draw_segment(self, t_start, origin):
        jitter = self.cfg.interval_jitter_frac * (2.0 * self._rng.random() - 1.0)
        dt = self.cfg.reposition_interval_s * (1.0 + jitter)
        speed = self._rng.uniform(self.cfg.speed_min_mps, self.cfg.speed_max_mps)
        reach = speed * dt
        while True:  # uniform over B(origin, reach) ∩ disc, by rejection
            r = reach * math.sqrt(self._rng.random())
            theta = 2.0 * math.pi * self._rng.random()
            waypoint = (origin[0] + r * math.cos(theta), origin[1] + r * math.sin(theta))
            dx = waypoint[0] - self.center[0]
            dy = waypoint[1] - self.center[1]
            if math.hypot(dx, dy) <= self.radius:
                return (t_start, t_start + dt, origin, waypoint, speed)

    def _position_in(self, seg, t):
        t0, _, origin, waypoint, speed = seg
        dx = waypoint[0] - origin[0]
        dy = waypoint[1] - origin[1]
        dist = math.hypot(dx, dy)
        if dist == 0.0 or speed == 0.0:
            return origin
        travelled = min(speed * (t - t0), dist)
        f = travelled / dist
        return (origin[0] + f * dx, origin[1] + f * dy)

    def segment_at(self, t):
        """The (t_start, t_end, origin, waypoint, speed) segment covering t."""
        if t < 0:
            raise ValueError("t must be >= 0")
        if t < self._segments[self._cursor][0]:
            self._cursor = 0  # random access backwards: rescan
        while t >= self._segments[self._cursor][1]:
            if self._cursor == len(self._segments) - 1:
                seg = self._segments[-1]
                self._segments.append(self._draw_segment(seg[1], self._position_in(seg, seg[1])))
            self._cursor += 1
        return self._segments[self._cursor]

    def position(self, t):
        """Position at time t >= 0 (extends the path as needed)."""
        return self._position_in(self.segment_at(t), t)

    def waypoints(self, n):
        """First n waypoints (test hook for distribution checks)."""
        while len(self._segments) < n:
            seg = self._segments[-1]
            self._segments.append(self._draw_segment(seg[1], self._position_in(seg, seg[1])))
        return [s[3] for s in self._segments[:n]]


def step_mobility(trajectory: Trajectory, t):
    """Position of the user at simulation time t."""
    return trajectory.position(t)


class TrajectoryBundle:
    """Vectorized positions over many trajectories.

    Caches each user's current segment in flat arrays and only touches a
    Trajectory object when its segment expires, so a whole population is
    advanced with a handful of array operations per tick.  Results are
    bit-identical to calling Trajectory.position per user.
    """

    def __init__(self, trajectories):
        self.trajectories = list(trajectories)
        n = len(self.trajectories)
        self.t0 = np.zeros(n)
        self.t1 = np.full(n, -1.0)  # force a load on first use
        self.ox = np.zeros(n)
        self.oy = np.zeros(n)
        self.dx = np.zeros(n)
        self.dy = np.zeros(n)
        self.dist = np.zeros(n)
        self.speed = np.zeros(n)

    def _load(self, i, t):
        t0, t1, origin, waypoint, speed = self.trajectories[i].segment_at(t)
        self.t0[i], self.t1[i] = t0, t1
        self.ox[i], self.oy[i] = origin
        self.dx[i] = waypoint[0] - origin[0]
        self.dy[i] = waypoint[1] - origin[1]
        self.dist[i] = math.hypot(self.dx[i], self.dy[i])
        self.speed[i] = speed

    def positions(self, t, out=None):
        """(n, 2) array of user positions at time t."""
        stale = (t >= self.t1) | (t < self.t0)
        for i in np.nonzero(stale)[0]:
            self._load(int(i), t)
        travelled = np.minimum(self.speed * (t - self.t0), self.dist)
        safe = np.where(self.dist > 0.0, self.dist, 1.0)
        f = np.where(self.dist > 0.0, travelled / safe, 0.0)
        if out is None:
            out = np.zeros((len(self.trajectories), 2))
        out[:, 0] = self.ox + f * self.dx
        out[:, 1] = self.oy + f * self.dy
        return out
