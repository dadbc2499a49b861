"""Renewable generation, battery storage, station power draw, sleep modes.

All operations are pure state-in/state-out transforms; the engine owns
the per-station state and applies them once per tick.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

# Sleep levels, ordered by depth.
ACTIVE = 0
SM1, SM2, SM3, SM4 = 1, 2, 3, 4
SLEEP_LEVEL_NAMES = {ACTIVE: "active", SM1: "sm1", SM2: "sm2", SM3: "sm3", SM4: "sm4"}

STATUS_ABOVE = "above"
STATUS_BELOW = "below"
STATUS_RECOVERED = "recovered"

# PV generation window (solar noon centered); energy inside the window is
# normalized so the daily yield equals pv_rated_w * pv_daily_hours.
PV_WINDOW_START_S = 6 * 3600
PV_WINDOW_END_S = 18 * 3600


@dataclass(frozen=True)
class Battery:
    capacity_wh: float = 924.0  # Trojan 24-GEL nameplate: 77 Ah * 12 V
    charge_wh: float = 924.0
    max_charge_w: float = 924.0
    max_discharge_w: float = 924.0

    def validate(self):
        if self.capacity_wh <= 0:
            raise ValueError("capacity_wh must be > 0")
        if not 0.0 <= self.charge_wh <= self.capacity_wh:
            raise ValueError("charge_wh must lie in [0, capacity_wh]")
        if self.max_charge_w < 0 or self.max_discharge_w < 0:
            raise ValueError("charge/discharge limits must be >= 0")

    @property
    def fraction(self) -> float:
        return self.charge_wh / self.capacity_wh


@dataclass(frozen=True)
class ResFarm:
    pv_rated_w: float = 500.0
    pv_daily_hours: float = 8.0
    wt_rated_w: float = 400.0
    wt_cut_in_mps: float = 3.0
    wt_rated_speed_mps: float = 12.0
    wt_cut_out_mps: float = 25.0

    def validate(self):
        if min(self.pv_rated_w, self.pv_daily_hours, self.wt_rated_w) < 0:
            raise ValueError("farm ratings must be >= 0")
        if not 0 <= self.wt_cut_in_mps < self.wt_rated_speed_mps < self.wt_cut_out_mps:
            raise ValueError("need cut_in < rated_speed < cut_out")


@dataclass(frozen=True)
class WindModel:
    """Hourly piecewise-constant wind speed drawn from a Weibull law."""

    weibull_shape: float = 2.0
    weibull_scale_mps: float = 6.0
    change_interval_s: int = 3600


@dataclass(frozen=True)
class SleepState:
    level: int = ACTIVE
    idle_since_s: float = 0.0
    wake_remaining_s: float = 0.0

    @property
    def awake(self) -> bool:
        return self.level == ACTIVE


@dataclass(frozen=True)
class PowerModel:
    p_overhead_w: float
    p_idle_active_w: float
    delta_load_w_per_rb: float
    sleep_fraction: tuple = (0.50, 0.30, 0.15, 0.05)  # of p_idle_active, SM1..SM4
    descend_after_s: tuple = (1.0, 60.0, 300.0, 900.0)  # idle time to reach SM1..SM4
    wake_latency_s: tuple = (0.0, 0.0, 1.0, 1.0)  # leaving SM1..SM4

    def validate(self):
        if any(a <= b for a, b in zip(self.sleep_fraction, self.sleep_fraction[1:])):
            raise ValueError("sleep_fraction must be strictly decreasing")
        if any(a >= b for a, b in zip(self.descend_after_s, self.descend_after_s[1:])):
            raise ValueError("descend_after_s must be strictly increasing")
        if any(a > b for a, b in zip(self.wake_latency_s, self.wake_latency_s[1:])):
            raise ValueError("wake_latency_s must be non-decreasing")


def default_scbs_power() -> PowerModel:
    return PowerModel(p_overhead_w=20.0, p_idle_active_w=56.0, delta_load_w_per_rb=0.5)


def default_mbs_sector_power() -> PowerModel:
    return PowerModel(p_overhead_w=260.0, p_idle_active_w=430.0, delta_load_w_per_rb=2.0)


@dataclass(frozen=True)
class EnergyPolicy:
    threshold_e: float = 0.20  # battery fraction below which the cell takes no users
    recovery_threshold: float = 0.35

    def validate(self):
        if not 0.0 <= self.threshold_e < self.recovery_threshold <= 1.0:
            raise ValueError("need 0 <= threshold_e < recovery_threshold <= 1")


def pv_power(time_of_day_s, farm: ResFarm) -> float:
    """Half-sine PV profile over the 06:00-18:00 window.

    The peak is scaled so the daily energy equals
    pv_rated_w * pv_daily_hours (full-power-equivalent hours).
    """
    if not 0 <= time_of_day_s < 86400:
        raise ValueError("time_of_day_s must be in [0, 86400)")
    if time_of_day_s <= PV_WINDOW_START_S or time_of_day_s >= PV_WINDOW_END_S:
        return 0.0
    window_s = PV_WINDOW_END_S - PV_WINDOW_START_S
    peak = farm.pv_rated_w * farm.pv_daily_hours * 3600 * math.pi / (2.0 * window_s)
    return peak * math.sin((time_of_day_s - PV_WINDOW_START_S) / window_s * math.pi)


def wt_power(wind_speed_mps, farm: ResFarm) -> float:
    """Piecewise turbine power curve: cubic ramp between cut-in and rated."""
    if wind_speed_mps < 0:
        raise ValueError("wind speed must be >= 0")
    v, ci, vr, co = wind_speed_mps, farm.wt_cut_in_mps, farm.wt_rated_speed_mps, farm.wt_cut_out_mps
    if v < ci or v > co:
        return 0.0
    if v >= vr:
        return farm.wt_rated_w
    return farm.wt_rated_w * (v**3 - ci**3) / (vr**3 - ci**3)


def hourly_wind_speeds(n_intervals, seed, model: WindModel) -> np.ndarray:
    """Seeded Weibull draw per wind interval, shared by all farms."""
    rng = np.random.default_rng([seed, 0x57494E44])
    return rng.weibull(model.weibull_shape, n_intervals) * model.weibull_scale_mps


def bs_power(occupied_rbs, state: SleepState, model: PowerModel) -> float:
    """Instantaneous draw in W for the given occupancy and sleep level."""
    if state.level == ACTIVE:
        return model.p_overhead_w + model.p_idle_active_w + model.delta_load_w_per_rb * occupied_rbs
    if occupied_rbs > 0:
        raise ValueError("a sleeping station cannot hold occupied resource blocks")
    return model.p_overhead_w + model.sleep_fraction[state.level - 1] * model.p_idle_active_w


def sleep_transition(state: SleepState, has_load, dt_s, model: PowerModel) -> SleepState:
    """Advance the sleep state machine by dt seconds.

    With load the station wakes after the wake latency of its current
    level (no resource blocks may be granted while waking); without load
    the idle timer accumulates and the level deepens one threshold at a
    time.
    """
    if dt_s <= 0:
        raise ValueError("dt_s must be > 0")
    if has_load:
        if state.level == ACTIVE:
            return SleepState()
        # wake_remaining_s is the time until service, including this tick;
        # it stays > 0 while a wake is pending (0 = no wake in progress)
        remaining = state.wake_remaining_s
        if remaining <= 0.0:
            remaining = model.wake_latency_s[state.level - 1] + dt_s
        remaining -= dt_s
        if remaining <= 0.0:
            return SleepState()
        return replace(state, wake_remaining_s=remaining)
    # No load: cancel any wake in progress and keep descending.
    idle = state.idle_since_s + dt_s
    level = state.level
    while level < SM4 and idle >= model.descend_after_s[level]:
        level += 1
    return SleepState(level=level, idle_since_s=idle, wake_remaining_s=0.0)


@dataclass(frozen=True)
class BatteryStep:
    battery: Battery
    shortfall_w: float  # draw that could not be supplied
    curtailed_w: float  # generation that could not be stored


def battery_step(b: Battery, generation_w, draw_w, dt_s) -> BatteryStep:
    """Integrate net power over dt, clamping to capacity and rate limits.

    Unmet draw is reported as shortfall, unstorable generation as
    curtailment; the identity
    gen*dt - draw*dt == dcharge*3600 + curtailed*dt - shortfall*dt
    holds exactly.
    """
    if dt_s <= 0:
        raise ValueError("dt_s must be > 0")
    net = generation_w - draw_w
    if net >= 0:
        rate = min(net, b.max_charge_w, (b.capacity_wh - b.charge_wh) * 3600.0 / dt_s)
        return BatteryStep(
            battery=replace(b, charge_wh=b.charge_wh + rate * dt_s / 3600.0),
            shortfall_w=0.0,
            curtailed_w=net - rate,
        )
    rate = min(-net, b.max_discharge_w, b.charge_wh * 3600.0 / dt_s)
    return BatteryStep(
        battery=replace(b, charge_wh=b.charge_wh - rate * dt_s / 3600.0),
        shortfall_w=-net - rate,
        curtailed_w=0.0,
    )


def energy_status(b: Battery, policy: EnergyPolicy, was_below=False):
    """Classify the stored-energy level with hysteresis.

    Returns (status, below_latch).  While latched below, the status stays
    BELOW until the charge crosses recovery_threshold, at which point a
    single RECOVERED is reported and the latch clears.
    """
    frac = b.fraction
    if frac < policy.threshold_e:
        return STATUS_BELOW, True
    if was_below:
        if frac >= policy.recovery_threshold:
            return STATUS_RECOVERED, False
        return STATUS_BELOW, True
    return STATUS_ABOVE, False


class BatteryGate:
    """Stateful wrapper emitting edge-triggered below/recovered events."""

    def __init__(self, policy: EnergyPolicy):
        self.policy = policy
        self._below = False
        self.battery_ok = True

    def update(self, b: Battery) -> str | None:
        """Feed the current battery; returns 'below' or 'recovered' on edges."""
        was_below = self._below
        status, self._below = energy_status(b, self.policy, was_below)
        if status == STATUS_BELOW and not was_below:
            self.battery_ok = False
            return STATUS_BELOW
        if status == STATUS_RECOVERED:
            self.battery_ok = True
            return STATUS_RECOVERED
        return None
