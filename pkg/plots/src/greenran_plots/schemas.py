"""Readers for the simulator's published output schemas.

Parsing is schema-strict: a header or schema_version mismatch is an
error, never a guess.  All readers are pure and read-only.
"""

import json

SUPPORTED_SCHEMA_VERSION = 1

BATCH_HEADER = "run_index,seed,algorithm,mbs_load_share,outage_share"
PER_SECOND_HEADER = (
    "t_s,served_users,outage_users,sum_rate_mbps,mbs_rate_mbps,scbs_rate_mbps,"
    "mbs_rbs,scbs_rbs,mbs_draw_w,scbs_draw_w,ongrid_w"
)

EE_FIELDS = ("ee_scbs", "ee_mbs", "ee_total")


class SchemaError(ValueError):
    pass


def _read_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().strip().split("\n")
    if not lines or lines == [""]:
        raise SchemaError(f"{path}: empty input")
    return lines


def read_batch_runs(path):
    """batch_runs.csv -> {algorithm: {"mbs_load_share": [...], "outage_share": [...]}}."""
    lines = _read_lines(path)
    if lines[0] != BATCH_HEADER:
        raise SchemaError(f"{path}: unexpected header {lines[0]!r}")
    if len(lines) < 2:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for line in lines[1:]:
        _, _, algorithm, share, outage = line.split(",")
        bucket = out.setdefault(algorithm, {"mbs_load_share": [], "outage_share": []})
        bucket["mbs_load_share"].append(float(share))
        bucket["outage_share"].append(float(outage))
    return out


def read_per_second(path):
    """per_second.csv -> {"t_s": [...], "ongrid_w": [...]} (fields used by figures)."""
    lines = _read_lines(path)
    if lines[0] != PER_SECOND_HEADER:
        raise SchemaError(f"{path}: unexpected header {lines[0]!r}")
    if len(lines) < 2:
        raise SchemaError(f"{path}: no data rows")
    cols = lines[0].split(",")
    i_t = cols.index("t_s")
    i_grid = cols.index("ongrid_w")
    t, grid = [], []
    for line in lines[1:]:
        parts = line.split(",")
        t.append(int(parts[i_t]))
        grid.append(float(parts[i_grid]))
    return {"t_s": t, "ongrid_w": grid}


def read_summary(path):
    """summary.json -> dict, verifying the schema version and EE fields."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    version = data.get("schema_version")
    if version != SUPPORTED_SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: schema_version {version!r}, supported {SUPPORTED_SCHEMA_VERSION}"
        )
    missing = [f for f in EE_FIELDS if f not in data]
    if missing:
        raise SchemaError(f"{path}: missing fields {missing}")
    return data
