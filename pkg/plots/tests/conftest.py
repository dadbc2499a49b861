"""Fixture builders emitting schema-conformant simulator outputs."""

import json

import numpy as np
import pytest

BATCH_HEADER = "run_index,seed,algorithm,mbs_load_share,outage_share"
PER_SECOND_HEADER = (
    "t_s,served_users,outage_users,sum_rate_mbps,mbs_rate_mbps,scbs_rate_mbps,"
    "mbs_rbs,scbs_rbs,mbs_draw_w,scbs_draw_w,ongrid_w"
)


@pytest.fixture
def batch_csv(tmp_path):
    def make(n_runs=12, path=None):
        rng = np.random.default_rng(1)
        lines = [BATCH_HEADER]
        for algo, base in (("proposed", 0.10), ("reference", 0.20)):
            for k in range(n_runs):
                share = base + 0.02 * rng.random()
                outage = 0.002 * rng.random()
                lines.append(f"{k},{1000 + k},{algo},{share:.6f},{outage:.6f}")
        p = path or tmp_path / "batch_runs.csv"
        p.write_text("\n".join(lines) + "\n")
        return str(p)

    return make


@pytest.fixture
def per_second_csv(tmp_path):
    def make(hours=3, ongrid_w=1200.0, name="run", jitter_seed=None):
        rows = [PER_SECOND_HEADER]
        rng = np.random.default_rng(jitter_seed) if jitter_seed is not None else None
        for t in range(hours * 3600 + 1):
            grid = ongrid_w if rng is None else ongrid_w + 40.0 * rng.random()
            rows.append(f"{t},400,0,733.7,110.1,623.6,60,340,{grid:.4f},2640,{grid:.4f}")
        d = tmp_path / name
        d.mkdir(exist_ok=True)
        p = d / "per_second.csv"
        p.write_text("\n".join(rows) + "\n")
        return str(p)

    return make


@pytest.fixture
def summary_json(tmp_path):
    def make(algorithm, ee_scbs, ee_mbs, ee_total, schema_version=1):
        data = {
            "schema_version": schema_version,
            "tool_version": "0.1.0",
            "seed": 11,
            "algorithm": algorithm,
            "duration_s": 43200,
            "n_users": 400,
            "n_scbs": 24,
            "ee_scbs": ee_scbs,
            "ee_mbs": ee_mbs,
            "ee_total": ee_total,
            "ee_scbs_ratio_of_sums": ee_scbs * 0.97,
            "ee_mbs_ratio_of_sums": ee_mbs * 0.99,
            "ee_total_ratio_of_sums": ee_total * 0.98,
            "on_grid_kwh": 31.0,
            "mbs_load_share": 0.14,
            "outage_share": 0.007,
            "excluded_zero_energy_ticks_total": 0,
            "n_events": 12345,
        }
        p = tmp_path / f"summary_{algorithm}.json"
        p.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return str(p)

    return make
