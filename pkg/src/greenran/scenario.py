"""Static network geometry and user population.

One on-grid macro station (MBS) sits at the center of the area; the
renewable-powered small cells (SCBS) occupy a regular square lattice
around it and backhaul to the MBS over a star topology.  Users are drawn
uniformly over the macro coverage disc.
"""

import math
from dataclasses import dataclass, field

import numpy as np

MBS_ID = 0
KIND_MBS = "MBS"
KIND_SCBS = "SCBS"
SUPPLY_ON_GRID = "on_grid"
SUPPLY_RENEWABLE = "renewable"

CLASS_LOW_RATE = "low_rate"
CLASS_HIGH_RATE = "high_rate"
LOW_RATE_RBS = 3
HIGH_RATE_RBS = 10

N_RB_PER_SECTOR = 106
MBS_BACKHAUL_RB_CAP = 27 * N_RB_PER_SECTOR  # per sector


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    area_half_width_m: float = 2500.0
    n_scbs: int = 24
    mbs_position: tuple = (0.0, 0.0)
    scbs_grid_spacing_m: float = 800.0
    n_users: int = 400
    user_class_mix: float = 0.2  # fraction of high-rate users
    rng_seed: int = 1
    mbs_coverage_radius_m: float = 2270.0
    scbs_coverage_radius_m: float = 500.0

    def validate(self):
        if self.n_scbs < 0 or self.n_users < 0:
            raise ValueError("n_scbs and n_users must be >= 0")
        if not 0.0 <= self.user_class_mix <= 1.0:
            raise ValueError("user_class_mix must be in [0, 1]")
        if self.scbs_grid_spacing_m <= 0:
            raise ValueError("scbs_grid_spacing_m must be > 0")
        if self.mbs_coverage_radius_m <= 0 or self.area_half_width_m <= 0:
            raise ValueError("radii and area dimensions must be > 0")


@dataclass(frozen=True)
class BaseStationConfig:
    id: int
    kind: str
    position: tuple
    antenna_height_m: float
    n_sectors: int
    tx_power_dbm: float
    antenna_gain_dbi: float = 17.5
    n_rb_per_sector: int = N_RB_PER_SECTOR
    backhaul_rb_cap: int = N_RB_PER_SECTOR
    power_supply: str = SUPPLY_RENEWABLE


def mbs_config(position=(0.0, 0.0)) -> BaseStationConfig:
    return BaseStationConfig(
        id=MBS_ID,
        kind=KIND_MBS,
        position=tuple(position),
        antenna_height_m=47.0,
        n_sectors=3,
        tx_power_dbm=46.0,
        backhaul_rb_cap=MBS_BACKHAUL_RB_CAP,
        power_supply=SUPPLY_ON_GRID,
    )


def scbs_config(bs_id, position) -> BaseStationConfig:
    return BaseStationConfig(
        id=bs_id,
        kind=KIND_SCBS,
        position=tuple(position),
        antenna_height_m=16.0,
        n_sectors=1,
        tx_power_dbm=32.0,
        power_supply=SUPPLY_RENEWABLE,
    )


@dataclass
class UserEquipment:
    id: int
    position: tuple
    antenna_height_m: float = 1.5
    traffic_class: str = CLASS_LOW_RATE
    serving: tuple | None = None  # (bs_id, sector_id)
    rbs_granted: int = 0

    @property
    def demand_rbs(self) -> int:
        return HIGH_RATE_RBS if self.traffic_class == CLASS_HIGH_RATE else LOW_RATE_RBS


@dataclass
class NetworkLayout:
    mbs: BaseStationConfig
    scbs: list = field(default_factory=list)
    backhaul: dict = field(default_factory=dict)  # scbs_id -> mbs_id

    @property
    def stations(self):
        return [self.mbs] + list(self.scbs)

    def to_csv(self) -> str:
        lines = ["bs_id,kind,x,y,height,sectors"]
        for bs in self.stations:
            lines.append(
                f"{bs.id},{bs.kind},{bs.position[0]:.10g},{bs.position[1]:.10g},"
                f"{bs.antenna_height_m:.10g},{bs.n_sectors}"
            )
        return "\n".join(lines) + "\n"


def _lattice_points(n_scbs, spacing):
    """Smallest centered odd lattice holding n_scbs sites, center excluded.

    Points are ordered by distance from the center, then x, then y, so
    full rings are filled before farther ones.
    """
    if n_scbs == 0:
        return []
    k = 3
    while k * k - 1 < n_scbs:
        k += 2
    half = k // 2
    pts = [
        (ix * spacing, iy * spacing)
        for ix in range(-half, half + 1)
        for iy in range(-half, half + 1)
        if (ix, iy) != (0, 0)
    ]
    pts.sort(key=lambda p: (round(math.hypot(*p), 9), p[0], p[1]))
    return pts[:n_scbs]


def build_layout(config: ScenarioConfig) -> NetworkLayout:
    """Place the MBS at the configured center and n_scbs cells on the grid.

    Raises LayoutError when any small-cell site would fall outside the
    macro coverage disc.
    """
    config.validate()
    mx, my = config.mbs_position
    mbs = mbs_config(config.mbs_position)
    layout = NetworkLayout(mbs=mbs)
    for i, (px, py) in enumerate(_lattice_points(config.n_scbs, config.scbs_grid_spacing_m)):
        pos = (mx + px, my + py)
        dist = math.hypot(px, py)
        if dist > config.mbs_coverage_radius_m:
            raise LayoutError(
                f"SCBS grid site at {dist:.0f} m exceeds the MBS coverage radius "
                f"({config.mbs_coverage_radius_m:.0f} m); reduce scbs_grid_spacing_m or n_scbs"
            )
        bs = scbs_config(MBS_ID + 1 + i, pos)
        layout.scbs.append(bs)
        layout.backhaul[bs.id] = MBS_ID
    return layout


def deploy_users(config: ScenarioConfig) -> list:
    """Draw n_users positions i.i.d. uniform over the MBS coverage disc.

    The traffic class of each user is high-rate with probability
    user_class_mix.  Identical seed gives an identical deployment.
    """
    config.validate()
    rng = np.random.default_rng(config.rng_seed)
    n = config.n_users
    radii = config.mbs_coverage_radius_m * np.sqrt(rng.random(n))
    angles = 2.0 * math.pi * rng.random(n)
    high = rng.random(n) < config.user_class_mix
    mx, my = config.mbs_position
    users = []
    for i in range(n):
        users.append(
            UserEquipment(
                id=i,
                position=(mx + radii[i] * math.cos(angles[i]), my + radii[i] * math.sin(angles[i])),
                traffic_class=CLASS_HIGH_RATE if high[i] else CLASS_LOW_RATE,
            )
        )
    return users


def user_positions(users) -> np.ndarray:
    return np.array([u.position for u in users], dtype=float).reshape(len(users), 2)
