"""Heterogeneous 5G RAN simulator with renewable-powered small cells.

A macro base station (on-grid, 3 sectors) anchors a grid of small cells
that run on PV/wind farms with battery storage.  Users are steered by an
energy-aware assignment algorithm that prefers green cells, reallocates
existing users to make room, and falls back to the macro cell only as a
last resort; a strongest-signal baseline is provided for comparison.
"""

__version__ = "0.1.0"
