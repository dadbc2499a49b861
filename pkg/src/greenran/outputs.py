"""Output writers: per-second CSV, energy CSV, events CSV, summary JSON.

Schemas are versioned and every numeric column carries its unit in the
header.  Writers are atomic per directory: on failure, partial files are
removed so a run directory is either complete or absent.
"""

import dataclasses
import json
import os

from . import metrics
from .config import RunManifest

SCHEMA_VERSION = 1

PER_SECOND_HEADER = (
    "t_s,served_users,outage_users,sum_rate_mbps,mbs_rate_mbps,scbs_rate_mbps,"
    "mbs_rbs,scbs_rbs,mbs_draw_w,scbs_draw_w,ongrid_w"
)
ENERGY_HEADER = "t_s,bs_id,sleep_level,gen_w,draw_w,charge_wh,shortfall_w,curtailed_w"
EVENTS_HEADER = "t_s,event_type,user_id,outcome,bs_id,sector,rbs,n_moves"
BATCH_HEADER = "run_index,seed,algorithm,mbs_load_share,outage_share"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def write_per_second_csv(log, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PER_SECOND_HEADER + "\n")
        for i in range(log.n_rows):
            fh.write(
                ",".join(
                    _fmt(v)
                    for v in (
                        int(log.t[i]),
                        int(log.served_users[i]),
                        int(log.outage_users[i]),
                        float(log.sum_rate_mbps[i]),
                        float(log.mbs_rate_mbps[i]),
                        float(log.scbs_rate_mbps[i]),
                        int(log.mbs_rbs[i]),
                        int(log.scbs_rbs[i]),
                        float(log.mbs_draw_w[i]),
                        float(log.scbs_draw_w[i]),
                        float(log.ongrid_w[i]),
                    )
                )
                + "\n"
            )


def write_energy_csv(log, path):
    """Per-second, per-renewable-cell energy ledger."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ENERGY_HEADER + "\n")
        for i in range(log.n_rows):
            for j in range(1, 1 + log.n_scbs):
                fh.write(
                    ",".join(
                        _fmt(v)
                        for v in (
                            int(log.t[i]),
                            j,
                            int(log.sleep_level[i, j]),
                            float(log.gen_w[i, j]),
                            float(log.draw_w[i, j]),
                            float(log.charge_wh[i, j]),
                            float(log.shortfall_w[i, j]),
                            float(log.curtailed_w[i, j]),
                        )
                    )
                    + "\n"
                )


def write_events_csv(log, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(EVENTS_HEADER + "\n")
        for ev in log.events:
            fh.write(",".join(_fmt(v) for v in ev) + "\n")


def summary_dict(log, manifest: RunManifest) -> dict:
    report = metrics.energy_efficiency_report(log)
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": manifest.tool_version,
        "seed": manifest.seed,
        "algorithm": manifest.config["run.algorithm"],
        "duration_s": manifest.config["run.duration_s"],
        "n_users": log.n_users,
        "n_scbs": log.n_scbs,
        **dataclasses.asdict(report),
        "excluded_zero_energy_ticks_total": metrics.excluded_zero_energy_ticks(log),
        "n_events": len(log.events),
    }


def write_outputs(log, manifest: RunManifest, out_dir) -> dict:
    """Write the full output set; returns {name: path}.

    Partial outputs are removed if any writer fails.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "per_second": os.path.join(out_dir, "per_second.csv"),
        "energy": os.path.join(out_dir, "energy.csv"),
        "events": os.path.join(out_dir, "events.csv"),
        "summary": os.path.join(out_dir, "summary.json"),
        "manifest": os.path.join(out_dir, "manifest.json"),
    }
    written = []
    try:
        write_per_second_csv(log, paths["per_second"])
        written.append(paths["per_second"])
        write_energy_csv(log, paths["energy"])
        written.append(paths["energy"])
        write_events_csv(log, paths["events"])
        written.append(paths["events"])
        with open(paths["summary"], "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary_dict(log, manifest), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(paths["summary"])
        with open(paths["manifest"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(manifest.to_json())
        written.append(paths["manifest"])
    except BaseException:
        for p in written:
            try:
                os.remove(p)
            except OSError:
                pass
        raise
    return paths


def write_batch_outputs(results, manifest: RunManifest, out_dir, bins=10) -> dict:
    """Write per-run rows, per-algorithm summaries, and histogram CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {"runs": os.path.join(out_dir, "batch_runs.csv")}
    with open(paths["runs"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(BATCH_HEADER + "\n")
        for result in results:
            for i, seed in enumerate(result.seeds):
                fh.write(
                    f"{i},{seed},{result.algorithm},"
                    f"{_fmt(float(result.mbs_load_share[i]))},"
                    f"{_fmt(float(result.outage_share[i]))}\n"
                )
    summary = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": manifest.tool_version,
        "config_digest": manifest.config_digest,
        "results": [r.summary() for r in results],
    }
    paths["summary"] = os.path.join(out_dir, "batch_summary.json")
    with open(paths["summary"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for result in results:
        for what in ("mbs_load_share", "outage_share"):
            counts, edges = result.histogram(what, bins=bins)
            name = f"hist_{what}_{result.algorithm}.csv"
            paths[name] = os.path.join(out_dir, name)
            with open(paths[name], "w", encoding="utf-8", newline="\n") as fh:
                fh.write("bin_left,bin_right,count\n")
                for k in range(len(counts)):
                    fh.write(f"{_fmt(float(edges[k]))},{_fmt(float(edges[k + 1]))},{counts[k]}\n")
    paths["manifest"] = os.path.join(out_dir, "manifest.json")
    with open(paths["manifest"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(manifest.to_json())
    return paths
