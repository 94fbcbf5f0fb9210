"""Published cluster summaries and period changes for the Beethoven cello
sonata corpus, used to parameterize synthetic reconstructions.

Cluster rows are ``(label, n, mean_bpm, range_min, range_max)``; a missing
range is ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MovementSummary:
    movement_id: str
    sonata_label: str
    movement_name: str
    character: str
    beats_per_bar: int
    feature_spec: str
    rows: tuple[tuple[str, int, float, float | None, float | None], ...]
    # mid-cluster drift as published (slope BPM/yr may be unknown)
    mid_r_squared: float | None = None
    mid_slope: float | None = None


FAST_MOVEMENTS = (
    MovementSummary(
        "op5n1_rondo", "Op.5/1", "Rondo", "fast", 2, "mean_only",
        (("slow", 3, 78.0, 75, 82), ("mid", 13, 83.1, 80, 86), ("fast", 4, 90.2, 88, 92)),
        mid_r_squared=0.001,
    ),
    MovementSummary(
        "op5n2_rondo", "Op.5/2", "Rondo", "fast", 2, "mean_only",
        (("mid", 14, 66.5, 61, 71), ("fast", 5, 76.7, 73, 81), ("slow", 0, None, None, None)),
        mid_r_squared=0.142,
    ),
    MovementSummary(
        "op69_scherzo", "Op.69", "Scherzo", "fast", 3, "mean_only",
        (("mid", 14, 92.3, 88, 98), ("fast", 8, 115.0, 105, 161), ("slow", 0, None, None, None)),
        mid_r_squared=0.067, mid_slope=-0.013,
    ),
    MovementSummary(
        "op69_allegro", "Op.69", "Allegro vivace", "fast", 2, "mean_only",
        (("slow", 6, 145.0, 142, 148), ("mid", 7, 148.6, 147, 151), ("fast", 9, 156.0, 152, 161)),
        mid_r_squared=0.076, mid_slope=-0.015,
    ),
    MovementSummary(
        "op102n1_allegro", "Op.102/1", "Allegro con brio", "fast", 2, "mean_only",
        (("slow", 6, 98.8, 97, 103), ("mid", 8, 110.5, 110, 118), ("fast", 7, 121.4, 116, 161)),
        mid_r_squared=0.246, mid_slope=-0.032,
    ),
    MovementSummary(
        "op102n2_allegro", "Op.102/2", "Allegro", "fast", 2, "mean_only",
        (("slow", 6, 52.2, 30, 57), ("mid", 14, 56.6, 53, 60), ("fast", 1, 65.7, None, None)),
        mid_r_squared=0.080, mid_slope=0.012,
    ),
)

SLOW_MOVEMENTS = (
    MovementSummary(
        "op69_adagio", "Op.69", "Adagio cantabile", "slow", 2, "mean_and_cv",
        (("slow", 6, 36.3, 31, 39), ("mid", 10, 42.7, 42, 46), ("fast", 4, 48.3, 48, 53)),
        mid_r_squared=0.012, mid_slope=0.018,
    ),
    MovementSummary(
        "op102n1_adagio", "Op.102/1", "Adagio", "slow", 3, "mean_and_cv",
        (("slow", 3, 37.3, 36, 39), ("mid", 11, 43.0, 42, 46), ("fast", 6, 49.2, 48, 53)),
        mid_r_squared=0.026,
    ),
    MovementSummary(
        "op102n2_adagio", "Op.102/2", "Adagio", "slow", 3, "mean_and_cv",
        (("mid", 14, 33.8, 30, 37), ("fast", 9, 42.3, 39, 53), ("slow", 0, None, None, None)),
        mid_r_squared=0.236, mid_slope=0.008,
    ),
)

MOVEMENTS = {m.movement_id: m for m in FAST_MOVEMENTS + SLOW_MOVEMENTS}

# (tempo %, duration %) between the 1930-1970 and 1970-2012 sub-corpora
PERIOD_CHANGES = {
    "op5n1_rondo": (10.0, -9.1),
    "op5n2_rondo": (5.1, -5.0),
    "op69_scherzo": (-40.4, 67.9),
    "op69_adagio": (13.9, -12.5),
    "op69_allegro": (1.2, 5.3),
    "op102n1_adagio": (-2.3, 2.1),
    "op102n1_allegro": (4.1, -4.0),
    "op102n2_adagio": (14.0, -12.5),
    "op102n2_allegro": (9.4, -8.7),
}

# the significant mid-range drift: N, year span, slope (BPM/yr), R^2
DRIFT_CASE = {"n": 8, "year_min": 1937, "year_max": 2004, "slope": -0.032, "r_squared": 0.246}
