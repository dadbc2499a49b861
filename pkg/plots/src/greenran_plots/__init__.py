"""Figure rendering for greenran simulation outputs.

Reads only the published CSV/JSON schemas (batch_runs.csv,
per_second.csv, summary.json); no coupling to simulator internals.
"""

__version__ = "0.1.0"
