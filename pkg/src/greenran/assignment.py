"""Energy-aware user association with green-first priority.

The proposed policy tries the strongest small cell that has spectrum and
battery headroom, then a depth-1 reallocation of an already-served user
to free room, and only then the macro station; the reference policy is a
plain strongest-feasible-server rule.  Both operate on a CellLoadView
snapshot, which the engine keeps up to date incrementally.
"""

from dataclasses import dataclass, field

import numpy as np

from .scenario import MBS_ID

OUTCOME_SCBS = "scbs"
OUTCOME_MBS = "mbs"
OUTCOME_OUTAGE = "outage"

# serving_kind codes inside CellLoadView
UNSERVED = 0
ON_SCBS = 1
ON_MBS = 2


@dataclass
class AssignmentDecision:
    user_id: int
    outcome: str
    bs_id: int | None = None
    sector: int | None = None
    rbs: int = 0
    moves: list = field(default_factory=list)  # (user_id, from_bs, to_bs)


class CellLoadView:
    """Mutable snapshot of spectrum, battery, backhaul, and signal state.

    Small cells are indexed 0..n_scbs-1 (bs_id = index + 1); the macro
    station is bs_id 0 with mbs_n_sectors azimuth sectors.  Each user sees
    one candidate macro sector (its azimuth); per-sector backhaul counts
    both direct macro users and the users of small cells attached to that
    sector.
    """

    def __init__(
        self,
        scbs_snr,
        mbs_snr,
        mbs_sector,
        demand,
        scbs_sector,
        min_snr_db=-2.0,
        rb_cap=106,
        mbs_n_sectors=3,
        backhaul_cap=27 * 106,
    ):
        self.scbs_snr = np.asarray(scbs_snr, dtype=float)
        self.mbs_snr = np.asarray(mbs_snr, dtype=float)
        self.mbs_sector = np.asarray(mbs_sector, dtype=int)
        self.demand = np.asarray(demand, dtype=int)
        self.scbs_sector = np.asarray(scbs_sector, dtype=int)
        self.min_snr_db = float(min_snr_db)
        self.rb_cap = int(rb_cap)
        self.backhaul_cap = int(backhaul_cap)

        self.n_users = len(self.demand)
        self.n_scbs = self.scbs_snr.shape[1] if self.scbs_snr.size else 0
        self.free_scbs = np.full(self.n_scbs, self.rb_cap, dtype=int)
        self.free_mbs = np.full(mbs_n_sectors, self.rb_cap, dtype=int)
        self.backhaul_free = np.full(mbs_n_sectors, self.backhaul_cap, dtype=int)
        self.battery_ok = np.ones(self.n_scbs, dtype=bool)
        self.serving_kind = np.zeros(self.n_users, dtype=int)
        self.serving_idx = np.zeros(self.n_users, dtype=int)
        self.users_of_scbs = [set() for _ in range(self.n_scbs)]
        self.mbs_users = set()

    def copy(self) -> "CellLoadView":
        new = CellLoadView(
            self.scbs_snr.copy(),
            self.mbs_snr.copy(),
            self.mbs_sector.copy(),
            self.demand.copy(),
            self.scbs_sector.copy(),
            min_snr_db=self.min_snr_db,
            rb_cap=self.rb_cap,
            mbs_n_sectors=len(self.free_mbs),
            backhaul_cap=self.backhaul_cap,
        )
        new.free_scbs = self.free_scbs.copy()
        new.free_mbs = self.free_mbs.copy()
        new.backhaul_free = self.backhaul_free.copy()
        new.battery_ok = self.battery_ok.copy()
        new.serving_kind = self.serving_kind.copy()
        new.serving_idx = self.serving_idx.copy()
        new.users_of_scbs = [set(s) for s in self.users_of_scbs]
        new.mbs_users = set(self.mbs_users)
        return new

    # -- id <-> index helpers ------------------------------------------------

    @staticmethod
    def scbs_id(idx) -> int:
        return int(idx) + 1

    @staticmethod
    def scbs_idx(bs_id) -> int:
        return int(bs_id) - 1

    def serving_of(self, user):
        """(bs_id, sector) currently serving the user, or None."""
        kind = self.serving_kind[user]
        if kind == UNSERVED:
            return None
        if kind == ON_SCBS:
            return (self.scbs_id(self.serving_idx[user]), 0)
        return (MBS_ID, int(self.serving_idx[user]))

    # -- mutation ------------------------------------------------------------

    def grant_scbs(self, user, idx):
        d = int(self.demand[user])
        sector = int(self.scbs_sector[idx])
        if self.free_scbs[idx] < d or self.backhaul_free[sector] < d:
            raise ValueError("grant exceeds spectrum or backhaul capacity")
        self.free_scbs[idx] -= d
        self.backhaul_free[sector] -= d
        self.serving_kind[user] = ON_SCBS
        self.serving_idx[user] = idx
        self.users_of_scbs[idx].add(int(user))

    def grant_mbs(self, user, sector):
        d = int(self.demand[user])
        if self.free_mbs[sector] < d or self.backhaul_free[sector] < d:
            raise ValueError("grant exceeds spectrum or backhaul capacity")
        self.free_mbs[sector] -= d
        self.backhaul_free[sector] -= d
        self.serving_kind[user] = ON_MBS
        self.serving_idx[user] = sector
        self.mbs_users.add(int(user))

    def release(self, user):
        kind = self.serving_kind[user]
        if kind == UNSERVED:
            return
        d = int(self.demand[user])
        if kind == ON_SCBS:
            idx = int(self.serving_idx[user])
            self.free_scbs[idx] += d
            self.backhaul_free[self.scbs_sector[idx]] += d
            self.users_of_scbs[idx].discard(int(user))
        else:
            sector = int(self.serving_idx[user])
            self.free_mbs[sector] += d
            self.backhaul_free[sector] += d
            self.mbs_users.discard(int(user))
        self.serving_kind[user] = UNSERVED

    # -- feasibility ---------------------------------------------------------

    def scbs_can_serve(self, user, idx, demand=None):
        d = int(self.demand[user]) if demand is None else demand
        return (
            self.battery_ok[idx]
            and self.free_scbs[idx] >= d
            and self.backhaul_free[self.scbs_sector[idx]] >= d
            and self.scbs_snr[user, idx] >= self.min_snr_db
        )

    def check_capacity(self):
        """Raise if any spectrum or backhaul ledger left its bounds."""
        if np.any(self.free_scbs < 0) or np.any(self.free_scbs > self.rb_cap):
            raise AssertionError("SCBS RB ledger out of bounds")
        if np.any(self.free_mbs < 0) or np.any(self.free_mbs > self.rb_cap):
            raise AssertionError("MBS RB ledger out of bounds")
        if np.any(self.backhaul_free < 0) or np.any(self.backhaul_free > self.backhaul_cap):
            raise AssertionError("backhaul ledger out of bounds")


def candidate_scbs(user, view: CellLoadView):
    """Small-cell indices above the SNR floor, strongest first, id tiebreak."""
    snrs = view.scbs_snr[user]
    js = np.nonzero(snrs >= view.min_snr_db)[0]
    if len(js) == 0:
        return []
    order = np.lexsort((js, -snrs[js]))
    return [int(j) for j in js[order]]


def _first_feasible(user, view, cands):
    """First candidate (in order) with battery, spectrum, and backhaul room."""
    if len(cands) == 0:
        return None
    js = np.asarray(cands, dtype=int)
    d = int(view.demand[user])
    ok = (
        view.battery_ok[js]
        & (view.free_scbs[js] >= d)
        & (view.backhaul_free[view.scbs_sector[js]] >= d)
    )
    hits = np.nonzero(ok)[0]
    return int(js[hits[0]]) if len(hits) else None


def assign_user(user, view: CellLoadView, realloc_depth=1) -> AssignmentDecision:
    """Green-first association for a currently unserved user.

    Step 1: strongest feasible small cell.  Step 2: depth-1 reallocation.
    Step 3: the user's macro sector.  Otherwise outage.
    """
    d = int(view.demand[user])
    cands = candidate_scbs(user, view)
    j = _first_feasible(user, view, cands)
    if j is not None:
        view.grant_scbs(user, j)
        return AssignmentDecision(user, OUTCOME_SCBS, view.scbs_id(j), 0, d)
    if realloc_depth >= 1:
        moved = reallocate_for(user, view, cands)
        if moved is not None:
            return moved
    sector = int(view.mbs_sector[user])
    if (
        view.mbs_snr[user] >= view.min_snr_db
        and view.free_mbs[sector] >= d
        and view.backhaul_free[sector] >= d
    ):
        view.grant_mbs(user, sector)
        return AssignmentDecision(user, OUTCOME_MBS, MBS_ID, sector, d)
    return AssignmentDecision(user, OUTCOME_OUTAGE)


def _best_alternative(u, j, view, room_mask):
    """Strongest small cell other than j that can serve u, or None.

    room_mask already holds battery/spectrum/backhaul feasibility for
    the user's demand class."""
    ok = room_mask & (view.scbs_snr[u] >= view.min_snr_db)
    ok[j] = False
    alts = np.nonzero(ok)[0]
    if len(alts) == 0:
        return None
    return int(alts[np.lexsort((alts, -view.scbs_snr[u, alts]))[0]])


def reallocate_for(user, view: CellLoadView, cands=None):
    """Try to free room on one of the user's candidate cells by moving a
    single already-served user to its best alternative small cell.

    The evicted user is the one with the smallest sufficient demand
    (lowest id on ties).  Returns the new user's decision with the move
    recorded, or None when no single move suffices.
    """
    d = int(view.demand[user])
    if cands is None:
        cands = candidate_scbs(user, view)
    if len(cands) == 0:
        return None
    # room per demand class is constant until a move is applied (and a
    # successful move returns immediately)
    backhaul_ok = view.backhaul_free[view.scbs_sector]
    room = {
        du: view.battery_ok & (view.free_scbs >= du) & (backhaul_ok >= du)
        for du in np.unique(view.demand)
    }
    for j in cands:
        if not view.battery_ok[j]:
            continue
        for u in sorted(view.users_of_scbs[j], key=lambda u: (view.demand[u], u)):
            du = int(view.demand[u])
            if view.free_scbs[j] + du < d:
                continue
            j2 = _best_alternative(u, j, view, room[du])
            if j2 is None:
                continue
            view.release(u)
            view.grant_scbs(u, j2)
            view.grant_scbs(user, j)
            move = (int(u), view.scbs_id(j), view.scbs_id(j2))
            return AssignmentDecision(user, OUTCOME_SCBS, view.scbs_id(j), 0, d, moves=[move])
    return None


def assign_reference(user, view: CellLoadView) -> AssignmentDecision:
    """Strongest-feasible-server baseline: no green priority, no moves."""
    d = int(view.demand[user])
    snrs = np.concatenate(([view.mbs_snr[user]], view.scbs_snr[user]))
    ids = np.arange(len(snrs))  # position 0 = MBS, i >= 1 -> scbs idx i-1
    keep = snrs >= view.min_snr_db
    ids = ids[keep]
    order = np.lexsort((ids, -snrs[keep]))
    for bs in ids[order]:
        if bs == 0:
            sector = int(view.mbs_sector[user])
            if view.free_mbs[sector] >= d and view.backhaul_free[sector] >= d:
                view.grant_mbs(user, sector)
                return AssignmentDecision(user, OUTCOME_MBS, MBS_ID, sector, d)
        else:
            j = int(bs) - 1
            if (
                view.battery_ok[j]
                and view.free_scbs[j] >= d
                and view.backhaul_free[view.scbs_sector[j]] >= d
            ):
                view.grant_scbs(user, j)
                return AssignmentDecision(user, OUTCOME_SCBS, view.scbs_id(j), 0, d)
    return AssignmentDecision(user, OUTCOME_OUTAGE)


def handle_bs_shutdown(bs_id, view: CellLoadView, assign_fn) -> list:
    """Evict every user of a cell whose battery fell below the threshold.

    The cell keeps sleeping and charging but takes no users until it
    recovers; evicted users are re-run through the active policy in
    descending-demand order.
    """
    j = view.scbs_idx(bs_id)
    users = sorted(view.users_of_scbs[j], key=lambda u: (-view.demand[u], u))
    for u in users:
        view.release(u)
    view.battery_ok[j] = False
    return [assign_fn(u, view) for u in users]


def handle_bs_recovery(bs_id, view: CellLoadView) -> list:
    """Reopen a recovered cell and pull feasible macro users back to it.

    Strongest-signal users first; each move is applied only while the
    cell keeps enough free blocks for the user's demand.
    """
    j = view.scbs_idx(bs_id)
    view.battery_ok[j] = True
    pulls = [
        u
        for u in view.mbs_users
        if view.scbs_snr[u, j] >= view.min_snr_db
    ]
    pulls.sort(key=lambda u: (-view.scbs_snr[u, j], u))
    decisions = []
    for u in pulls:
        if not view.scbs_can_serve(u, j):
            continue
        view.release(u)
        view.grant_scbs(u, j)
        decisions.append(
            AssignmentDecision(int(u), OUTCOME_SCBS, bs_id, 0, int(view.demand[u]))
        )
    return decisions
