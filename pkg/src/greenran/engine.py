"""Deterministic 1 s-resolution simulation loop.

Per tick, in fixed order: mobility, handover triggers, generation and
battery bookkeeping, battery-low shutdowns, battery recoveries, retries
of unserved users, sleep-state transitions, logging.  Identical
(config, seed) pairs produce bit-identical logs.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import assignment, metrics, radio
from .assignment import (
    ON_MBS,
    ON_SCBS,
    OUTCOME_OUTAGE,
    UNSERVED,
    CellLoadView,
    assign_reference,
    assign_user,
    handle_bs_recovery,
    handle_bs_shutdown,
)
from .config import ALGORITHM_PROPOSED, ConfigError, FullConfig
from .energy import (
    ACTIVE,
    STATUS_BELOW,
    STATUS_RECOVERED,
    SleepState,
    battery_step,
    bs_power,
    BatteryGate,
    hourly_wind_speeds,
    pv_power,
    sleep_transition,
    wt_power,
)
from .mobility import Trajectory, TrajectoryBundle
from .radio import coverage_radius, link_snr, max_data_rate, path_loss
from .scenario import MBS_ID, build_layout, deploy_users, user_positions

EVENT_INITIAL = "initial"
EVENT_HANDOVER = "handover"
EVENT_SHUTDOWN = "shutdown"
EVENT_RECOVERY = "recovery"
EVENT_RETRY = "retry"
EVENT_PERIODIC = "periodic"


@dataclass
class MetricsLog:
    """Per-tick time series plus the per-event decision records.

    Row 0 is the post-initial-assignment snapshot; rows 1..N follow each
    tick, so a run of duration D at tick dt has D/dt + 1 rows.  Per-BS
    columns put the MBS at index 0 and small cells at 1..n_scbs.
    """

    tick_s: int
    n_users: int
    n_scbs: int
    t: np.ndarray = None
    served_users: np.ndarray = None
    outage_users: np.ndarray = None
    sum_rate_mbps: np.ndarray = None
    mbs_rate_mbps: np.ndarray = None
    scbs_rate_mbps: np.ndarray = None
    mbs_rbs: np.ndarray = None
    scbs_rbs: np.ndarray = None
    mbs_draw_w: np.ndarray = None
    scbs_draw_w: np.ndarray = None
    ongrid_w: np.ndarray = None
    occupied_rbs: np.ndarray = None
    sleep_level: np.ndarray = None
    draw_w: np.ndarray = None
    gen_w: np.ndarray = None
    charge_wh: np.ndarray = None
    shortfall_w: np.ndarray = None
    curtailed_w: np.ndarray = None
    events: list = field(default_factory=list)

    @classmethod
    def allocate(cls, n_rows, tick_s, n_users, n_scbs) -> "MetricsLog":
        log = cls(tick_s=tick_s, n_users=n_users, n_scbs=n_scbs)
        n_bs = 1 + n_scbs
        log.t = np.zeros(n_rows, dtype=np.int64)
        for name in ("served_users", "outage_users", "mbs_rbs", "scbs_rbs"):
            setattr(log, name, np.zeros(n_rows, dtype=np.int64))
        for name in (
            "sum_rate_mbps",
            "mbs_rate_mbps",
            "scbs_rate_mbps",
            "mbs_draw_w",
            "scbs_draw_w",
            "ongrid_w",
        ):
            setattr(log, name, np.zeros(n_rows, dtype=np.float64))
        log.occupied_rbs = np.zeros((n_rows, n_bs), dtype=np.int64)
        log.sleep_level = np.zeros((n_rows, n_bs), dtype=np.int64)
        for name in ("draw_w", "gen_w", "charge_wh", "shortfall_w", "curtailed_w"):
            setattr(log, name, np.zeros((n_rows, n_bs), dtype=np.float64))
        return log

    @property
    def n_rows(self) -> int:
        return len(self.t)


class Simulation:
    """One seeded run of the network under one assignment algorithm."""

    def __init__(self, cfg: FullConfig, trajectories=None):
        cfg.validate()
        self.cfg = cfg
        self.layout = build_layout(cfg.scenario)
        self.users = deploy_users(cfg.scenario)
        self.n_users = len(self.users)
        self.n_scbs = len(self.layout.scbs)

        mbs_radius = coverage_radius(self.layout.mbs, cfg.radio)
        if cfg.scenario.mbs_coverage_radius_m > mbs_radius + 1.0:
            raise ConfigError(
                f"deployment disc ({cfg.scenario.mbs_coverage_radius_m:.0f} m) exceeds the "
                f"computed MBS coverage radius ({mbs_radius:.0f} m); users at the rim would "
                "be unservable"
            )

        # station columns: 0 = MBS, 1.. = small cells
        stations = self.layout.stations
        self._bs_xy = np.array([bs.position for bs in stations])
        self._bs_h = np.array([bs.antenna_height_m for bs in stations])
        self._bs_tx = np.array([bs.tx_power_dbm for bs in stations])
        self._bs_gain = np.array([bs.antenna_gain_dbi for bs in stations])

    # -- signal model ----------------------------------------------------------

    def _snr_tables(self, positions):
        """(scbs_snr, mbs_snr, mbs_sector) for an (n, 2) position array."""
        cfg = self.cfg
        mx, my = self.layout.mbs.position
        dx = positions[:, 0] - mx
        dy = positions[:, 1] - my
        sector = (np.mod(np.arctan2(dy, dx), 2.0 * math.pi) // (2.0 * math.pi / 3.0)).astype(int)
        d = np.hypot(
            positions[:, 0:1] - self._bs_xy[None, :, 0],
            positions[:, 1:2] - self._bs_xy[None, :, 1],
        )
        pl = path_loss(d, cfg.radio, self._bs_h[None, :], 1.5)
        snr = link_snr(
            self._bs_tx[None, :],
            cfg.radio,
            pl,
            cfg.radio.snr_eval_n_rbs,
            bs_gain_db=self._bs_gain[None, :],
        )
        return snr[:, 1:], snr[:, 0], sector

    def _scbs_azimuth_sectors(self):
        mx, my = self.layout.mbs.position
        out = []
        for bs in self.layout.scbs:
            theta = math.atan2(bs.position[1] - my, bs.position[0] - mx) % (2.0 * math.pi)
            out.append(int(theta // (2.0 * math.pi / 3.0)))
        return np.array(out, dtype=int)

    # -- run -------------------------------------------------------------------

    def run(self) -> MetricsLog:
        cfg = self.cfg
        tick = cfg.run.tick_s
        n_ticks = cfg.run.duration_s // tick
        log = MetricsLog.allocate(n_ticks + 1, tick, self.n_users, self.n_scbs)

        demand = np.array([u.demand_rbs for u in self.users], dtype=int)
        positions = user_positions(self.users)
        scbs_snr, mbs_snr, mbs_sector = self._snr_tables(positions)
        view = CellLoadView(
            scbs_snr,
            mbs_snr,
            mbs_sector,
            demand,
            self._scbs_azimuth_sectors(),
            min_snr_db=cfg.radio.min_snr_db,
            rb_cap=self.layout.mbs.n_rb_per_sector,
            backhaul_cap=self.layout.mbs.backhaul_rb_cap,
        )
        if cfg.run.algorithm == ALGORITHM_PROPOSED:
            assign_fn = lambda u, v: assign_user(u, v, realloc_depth=cfg.run.realloc_depth)
        else:
            assign_fn = assign_reference

        walkers = TrajectoryBundle(
            Trajectory(
                u.id,
                u.position,
                cfg.mobility,
                cfg.scenario.mbs_position,
                cfg.scenario.mbs_coverage_radius_m,
            )
            for u in self.users
        )

        batteries = [cfg.battery for _ in range(self.n_scbs)]  # start fully charged
        gates = [BatteryGate(cfg.policy) for _ in range(self.n_scbs)]
        sleep = [SleepState() for _ in range(self.n_scbs)]
        wind_interval = cfg.wind.change_interval_s
        n_wind = max(1, cfg.run.duration_s // wind_interval + 1)
        wind = hourly_wind_speeds(n_wind, cfg.run.rng_seed, cfg.wind)
        per_rb_mbps = max_data_rate(1, cfg.rate) / 1e6

        # initial association, largest demands first
        for u in sorted(range(self.n_users), key=lambda u: (-demand[u], u)):
            decision = assign_fn(u, view)
            self._record(log, 0, EVENT_INITIAL, decision)
        prev_above = self._above_matrix(view)

        self._log_row(log, 0, 0, view, batteries, sleep, wind, per_rb_mbps)

        for step in range(1, n_ticks + 1):
            t = step * tick
            # 1. mobility
            walkers.positions(t, out=positions)
            scbs_snr, mbs_snr, mbs_sector = self._snr_tables(positions)
            view.scbs_snr, view.mbs_snr, view.mbs_sector = scbs_snr, mbs_snr, mbs_sector

            # 2. handover triggers (edge-triggered hysteresis or lost floor)
            for u in self._handover_candidates(view, prev_above):
                view.release(u)
                decision = assign_fn(u, view)
                self._record(log, t, EVENT_HANDOVER, decision)

            # optional periodic global re-association
            if cfg.run.periodic_reassoc_s and t % cfg.run.periodic_reassoc_s == 0:
                for u in sorted(range(self.n_users), key=lambda u: (-demand[u], u)):
                    view.release(u)
                    decision = assign_fn(u, view)
                    self._record(log, t, EVENT_PERIODIC, decision)

            # 3. generation, draws, batteries
            tod = t % 86400
            gen = pv_power(tod, cfg.farm) + wt_power(wind[t // wind_interval], cfg.farm)
            below_events, recovered_events = [], []
            for j in range(self.n_scbs):
                occupied = int(self.layout.mbs.n_rb_per_sector - view.free_scbs[j])
                eff = occupied if sleep[j].awake else 0
                draw = bs_power(eff, sleep[j], cfg.power_scbs)
                res = battery_step(batteries[j], gen, draw, tick)
                batteries[j] = res.battery
                event = gates[j].update(res.battery)
                if event == STATUS_BELOW:
                    below_events.append(j)
                elif event == STATUS_RECOVERED:
                    recovered_events.append(j)
                self._stash_bs(log, step, 1 + j, eff, sleep[j].level, draw, gen, res)

            # 4. battery-low shutdowns
            for j in below_events:
                for decision in handle_bs_shutdown(view.scbs_id(j), view, assign_fn):
                    self._record(log, t, EVENT_SHUTDOWN, decision)
            # 5. recoveries (the reference policy only reopens the gate)
            for j in recovered_events:
                if cfg.run.algorithm == ALGORITHM_PROPOSED:
                    for decision in handle_bs_recovery(view.scbs_id(j), view):
                        self._record(log, t, EVENT_RECOVERY, decision)
                else:
                    view.battery_ok[j] = True

            # retries of unserved users
            if cfg.run.retry_unserved_every_s and t % cfg.run.retry_unserved_every_s == 0:
                for u in np.nonzero(view.serving_kind == UNSERVED)[0]:
                    decision = assign_fn(int(u), view)
                    if decision.outcome != OUTCOME_OUTAGE:
                        self._record(log, t, EVENT_RETRY, decision)

            # 6. sleep transitions
            for j in range(self.n_scbs):
                sleep[j] = sleep_transition(
                    sleep[j], len(view.users_of_scbs[j]) > 0, tick, cfg.power_scbs
                )

            # 7. log
            self._log_row(log, step, t, view, batteries, sleep, wind, per_rb_mbps)
            prev_above = self._above_matrix(view)

        view.check_capacity()
        return log

    # -- helpers ---------------------------------------------------------------

    def _serving_snr(self, view):
        gather_idx = np.minimum(view.serving_idx, max(view.n_scbs - 1, 0))
        if view.n_scbs:
            scbs_val = view.scbs_snr[np.arange(view.n_users), gather_idx]
        else:
            scbs_val = np.zeros(view.n_users)
        return np.where(
            view.serving_kind == ON_SCBS,
            scbs_val,
            np.where(view.serving_kind == ON_MBS, view.mbs_snr, np.inf),
        )

    def _above_matrix(self, view):
        """Stations exceeding each served user's serving SNR by the margin."""
        hyst = self.cfg.run.handover_hysteresis_db
        all_snr = np.concatenate([view.mbs_snr[:, None], view.scbs_snr], axis=1)
        above = all_snr > (self._serving_snr(view) + hyst)[:, None]
        served = view.serving_kind != UNSERVED
        cols = np.where(view.serving_kind == ON_SCBS, 1 + view.serving_idx, 0)
        rows = np.nonzero(served)[0]
        above[rows, cols[rows]] = False
        above[~served] = False
        return above

    def _handover_candidates(self, view, prev_above):
        served = view.serving_kind != UNSERVED
        below_floor = served & (self._serving_snr(view) < view.min_snr_db)
        above = self._above_matrix(view)
        crossed = (above & ~prev_above).any(axis=1)
        return sorted(np.nonzero(below_floor | (served & crossed))[0].tolist())

    def _stash_bs(self, log, row, col, occupied, level, draw, gen, res):
        log.occupied_rbs[row, col] = occupied
        log.sleep_level[row, col] = level
        log.draw_w[row, col] = draw
        log.gen_w[row, col] = gen
        log.charge_wh[row, col] = res.battery.charge_wh
        log.shortfall_w[row, col] = res.shortfall_w
        log.curtailed_w[row, col] = res.curtailed_w

    def _log_row(self, log, row, t, view, batteries, sleep, wind, per_rb_mbps):
        cfg = self.cfg
        tick = cfg.run.tick_s
        rb_cap = self.layout.mbs.n_rb_per_sector

        if row == 0:
            # snapshot row: batteries untouched, everything awake, tick-0 weather
            gen0 = pv_power(0, cfg.farm) + wt_power(wind[0], cfg.farm)
            for j in range(self.n_scbs):
                occupied = int(rb_cap - view.free_scbs[j])
                draw = bs_power(occupied, sleep[j], cfg.power_scbs)
                log.occupied_rbs[0, 1 + j] = occupied
                log.sleep_level[0, 1 + j] = sleep[j].level
                log.draw_w[0, 1 + j] = draw
                log.gen_w[0, 1 + j] = gen0
                log.charge_wh[0, 1 + j] = batteries[j].charge_wh

        # the MBS never sleeps and is on-grid
        mbs_occ = int(3 * rb_cap - view.free_mbs.sum())
        mbs_draw = sum(
            bs_power(int(rb_cap - view.free_mbs[s]), SleepState(), cfg.power_mbs)
            for s in range(len(view.free_mbs))
        )
        log.occupied_rbs[row, 0] = mbs_occ
        log.draw_w[row, 0] = mbs_draw

        awake = np.array([s.awake for s in sleep], dtype=bool) if self.n_scbs else np.zeros(0, bool)
        served = view.serving_kind != UNSERVED
        on_scbs = view.serving_kind == ON_SCBS
        if self.n_scbs:
            # users on a waking cell hold their blocks but get no service this tick
            active_scbs_user = on_scbs & awake[np.minimum(view.serving_idx, view.n_scbs - 1)]
        else:
            active_scbs_user = np.zeros(self.n_users, dtype=bool)
        on_mbs = view.serving_kind == ON_MBS

        scbs_rbs = int(view.demand[active_scbs_user].sum())
        mbs_rbs = int(view.demand[on_mbs].sum())
        log.t[row] = t
        log.served_users[row] = int(served.sum())
        log.outage_users[row] = int((~served).sum())
        log.mbs_rbs[row] = mbs_rbs
        log.scbs_rbs[row] = scbs_rbs
        log.mbs_rate_mbps[row] = mbs_rbs * per_rb_mbps
        log.scbs_rate_mbps[row] = scbs_rbs * per_rb_mbps
        log.sum_rate_mbps[row] = (mbs_rbs + scbs_rbs) * per_rb_mbps
        log.mbs_draw_w[row] = log.draw_w[row, 0]
        log.scbs_draw_w[row] = float(log.draw_w[row, 1:].sum())
        log.ongrid_w[row] = log.draw_w[row, 0]

    @staticmethod
    def _record(log, t, event_type, decision):
        log.events.append(
            (
                t,
                event_type,
                decision.user_id,
                decision.outcome,
                decision.bs_id,
                decision.sector,
                decision.rbs,
                len(decision.moves),
            )
        )


def run_simulation(cfg: FullConfig) -> MetricsLog:
    return Simulation(cfg).run()


@dataclass
class BatchResult:
    algorithm: str
    seeds: list
    mbs_load_share: np.ndarray
    outage_share: np.ndarray

    def summary(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n_runs": len(self.seeds),
            "mbs_load_share_mean": float(self.mbs_load_share.mean()),
            "mbs_load_share_std": float(self.mbs_load_share.std()),
            "mbs_load_share_min": float(self.mbs_load_share.min()),
            "mbs_load_share_max": float(self.mbs_load_share.max()),
            "outage_share_mean": float(self.outage_share.mean()),
            "outage_share_std": float(self.outage_share.std()),
            "outage_share_min": float(self.outage_share.min()),
            "outage_share_max": float(self.outage_share.max()),
        }

    def histogram(self, what, bins=10):
        values = self.mbs_load_share if what == "mbs_load_share" else self.outage_share
        counts, edges = np.histogram(values, bins=bins, range=(0.0, max(values.max(), 1e-9)))
        return counts, edges


def run_batch(cfg: FullConfig, n_runs, base_seed, algorithm) -> BatchResult:
    """n_runs static runs (initial placement only) with consecutive seeds."""
    import dataclasses

    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    shares, outages, seeds = [], [], []
    for k in range(n_runs):
        seed = base_seed + k
        run_cfg = dataclasses.replace(
            cfg, run=dataclasses.replace(cfg.run, duration_s=0, algorithm=algorithm)
        ).with_seed(seed)
        log = Simulation(run_cfg).run()
        shares.append(metrics.mbs_load_share(log))
        outages.append(metrics.outage_share(log))
        seeds.append(seed)
    return BatchResult(
        algorithm=algorithm,
        seeds=seeds,
        mbs_load_share=np.array(shares),
        outage_share=np.array(outages),
    )
