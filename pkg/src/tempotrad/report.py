"""Text tables, JSON bundle and SVG scatter plots for analysis results."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from . import DomainError, __version__
from .corpus import Corpus
from .features import mean_bpm
from .regress import RegressionFit
from .traditions import (
    LABELS,
    AggregateChange,
    AssociationResult,
    LabeledCluster,
    MovementReport,
)
from .validity import ValidityPolicy, ValidityReport

PALETTES = {
    "default": {"slow": "#2ca02c", "mid": "#1f77b4", "fast": "#d62728"},
    # Okabe-Ito colours, distinguishable under common colour-vision deficiencies
    "accessible": {"slow": "#009e73", "mid": "#0072b2", "fast": "#d55e00"},
}
DASH = "---"


@dataclass
class ReportBundle:
    reports: list[MovementReport]
    changes: list[AggregateChange] = field(default_factory=list)
    correlation: float | None = None
    associations: list[AssociationResult] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def run_metadata(seed: int, restarts: int, policy: ValidityPolicy, **extra) -> dict:
    meta = {
        "seed": seed,
        "restarts": restarts,
        "policy": {"min_silhouette": policy.min_silhouette, "min_cluster_size": policy.min_cluster_size, "slack": policy.slack},
        "version": __version__,
    }
    meta.update(extra)
    return meta


# ---------------------------------------------------------------- text tables

_TABLE_HEADER = ("Movement", "Cluster", "N", "T̄", "Range", "R²")


def _fmt_row(cells, widths) -> str:
    return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()


def emit_cluster_table(reports, character_filter: str) -> str:
    """Cluster summary table for movements of one character (fast or slow)."""
    if character_filter not in ("fast", "slow"):
        raise DomainError(f"character_filter must be 'fast' or 'slow', got {character_filter!r}")
    chosen = sorted((r for r in reports if r.character == character_filter), key=lambda r: r.movement_id)
    if not chosen:
        raise DomainError(f"no {character_filter}-character movements to tabulate")
    rows = []
    for report in chosen:
        for label in LABELS:
            c = report.cluster(label)
            if c is None:
                rows.append((report.movement_id, label.capitalize(), "0", DASH, DASH, DASH))
                continue
            lo, hi = c.bpm_range
            r2 = DASH if c.fit is None else f"{c.fit.r_squared:.3f}"
            rows.append((report.movement_id, label.capitalize(), str(c.n), f"{c.mean_bpm:.1f}", f"{lo:.1f}--{hi:.1f}", r2))
    widths = [max(len(str(r[i])) for r in rows + [_TABLE_HEADER]) for i in range(len(_TABLE_HEADER))]
    lines = [_fmt_row(_TABLE_HEADER, widths), "  ".join("-" * w for w in widths)]
    lines += [_fmt_row(r, widths) for r in rows]
    return "\n".join(lines) + "\n"


def parse_cluster_table(text: str) -> list[tuple]:
    """Inverse of :func:`emit_cluster_table` at displayed precision.

    Rows come back as ``(movement, label, n, mean, (lo, hi), r2)`` with None
    for dashes.
    """
    out = []
    for line in text.splitlines()[2:]:
        if not line.strip():
            continue
        movement, label, n, mean, rng, r2 = line.split()
        bounds = None if rng == DASH else tuple(float(v) for v in rng.split("--"))
        out.append(
            (
                movement,
                label.lower(),
                int(n),
                None if mean == DASH else float(mean),
                bounds,
                None if r2 == DASH else float(r2),
            )
        )
    return out


def _pct(value: float) -> str:
    text = f"{value:+.1f}%"
    return "+0.0%" if text == "-0.0%" else text


def emit_change_table(changes, correlation: float | None) -> str:
    changes = list(changes)
    if not changes:
        raise DomainError("no period changes to tabulate")
    header = ("Movement", "Tempo %", "Duration %")
    rows = [(c.movement_id, _pct(c.tempo_pct), _pct(c.duration_pct)) for c in changes]
    widths = [max(len(r[i]) for r in rows + [header]) for i in range(3)]
    lines = [_fmt_row(header, widths), "  ".join("-" * w for w in widths)]
    lines += [_fmt_row(r, widths) for r in rows]
    footer = DASH if correlation is None else f"{abs(correlation):.2f}"
    lines.append(f"|r| = {footer}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------- JSON

def _num(x):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"cannot serialize non-finite value {x}")
    y = float(f"{x:.6g}")
    return 0.0 if y == 0 else y


def _fit_to_dict(fit: RegressionFit | None):
    if fit is None:
        return None
    return {
        "n": fit.n,
        "slope": _num(fit.slope),
        "intercept": _num(fit.intercept),
        "r2": _num(fit.r_squared),
        "slope_se": _num(fit.slope_se),
        "t": _num(fit.t_stat),
        "df": fit.df,
        "p": _num(fit.p_two_tailed),
        "degenerate": fit.degenerate,
    }


def _fit_from_dict(d) -> RegressionFit | None:
    if d is None:
        return None
    return RegressionFit(d["n"], d["slope"], d["intercept"], d["r2"], d["slope_se"], d["t"], d["df"], d["p"], d["degenerate"])


def _validity_to_dict(v: ValidityReport) -> dict:
    return {
        "k_range": list(v.k_range),
        "wcss_by_k": {str(k): _num(x) for k, x in v.wcss_by_k.items()},
        "mean_silhouette_by_k": {str(k): _num(x) for k, x in v.mean_silhouette_by_k.items()},
        "cluster_sizes_by_k": {str(k): list(s) for k, s in v.cluster_sizes_by_k.items()},
        "supported_k": v.supported_k,
        "three_way_supported": v.three_way_supported,
        "elbow_k": v.elbow_k,
        "policy": {"min_silhouette": _num(v.policy.min_silhouette), "min_cluster_size": v.policy.min_cluster_size, "slack": _num(v.policy.slack)},
    }


def _validity_from_dict(movement_id: str, d: dict) -> ValidityReport:
    p = d["policy"]
    return ValidityReport(
        movement_id=movement_id,
        k_range=tuple(d["k_range"]),
        wcss_by_k={int(k): x for k, x in d["wcss_by_k"].items()},
        mean_silhouette_by_k={int(k): x for k, x in d["mean_silhouette_by_k"].items()},
        supported_k=d["supported_k"],
        three_way_supported=d["three_way_supported"],
        policy=ValidityPolicy(p["min_silhouette"], p["min_cluster_size"], p["slack"]),
        cluster_sizes_by_k={int(k): tuple(s) for k, s in d["cluster_sizes_by_k"].items()},
    )


def _report_to_dict(r: MovementReport) -> dict:
    return {
        "movement_id": r.movement_id,
        "character": r.character,
        "validity": _validity_to_dict(r.validity),
        "clusters": [
            {
                "label": c.label,
                "n": c.n,
                "mean_bpm": _num(c.mean_bpm),
                "range": [_num(c.bpm_range[0]), _num(c.bpm_range[1])],
                "sd": _num(c.sd_bpm),
                "fit": _fit_to_dict(c.fit),
                "member_ids": list(c.member_ids),
            }
            for c in r.clusters
        ],
        "empty_labels": [l for l in LABELS if l in r.empty_labels],
        "dominant_label": r.dominant_label,
        "dominant_share": _num(r.dominant_share),
        "feature_columns": list(r.feature_columns),
        "degenerate_columns": sorted(r.degenerate_columns),
    }


def _report_from_dict(d: dict) -> MovementReport:
    clusters = tuple(
        LabeledCluster(
            label=c["label"],
            member_ids=tuple(c["member_ids"]),
            n=c["n"],
            mean_bpm=c["mean_bpm"],
            bpm_range=tuple(c["range"]),
            sd_bpm=c["sd"],
            fit=_fit_from_dict(c["fit"]),
        )
        for c in d["clusters"]
    )
    return MovementReport(
        movement_id=d["movement_id"],
        validity=_validity_from_dict(d["movement_id"], d["validity"]),
        clusters=clusters,
        empty_labels=frozenset(d["empty_labels"]),
        dominant_label=d["dominant_label"],
        dominant_share=d["dominant_share"],
        character=d["character"],
        feature_columns=tuple(d["feature_columns"]),
        degenerate_columns=frozenset(d["degenerate_columns"]),
    )


def _change_to_dict(c: AggregateChange) -> dict:
    return {
        "movement_id": c.movement_id,
        "split_year": c.split_year,
        "tempo_pct": _num(c.tempo_pct),
        "duration_pct": _num(c.duration_pct),
        "n_early": c.n_early,
        "n_late": c.n_late,
    }


def _association_to_dict(a: AssociationResult) -> dict:
    return {
        "category_name": a.category_name,
        "row_labels": list(a.row_labels),
        "column_values": list(a.column_values),
        "contingency": [list(r) for r in a.contingency],
        "chi_square": _num(a.chi_square),
        "df": a.df,
        "p_value": _num(a.p_value),
        "cramers_v": _num(a.cramers_v),
    }


def bundle_to_dict(bundle: ReportBundle) -> dict:
    return {
        "meta": bundle.meta,
        "movements": [_report_to_dict(r) for r in sorted(bundle.reports, key=lambda r: r.movement_id)],
        "changes": [_change_to_dict(c) for c in sorted(bundle.changes, key=lambda c: c.movement_id)],
        "correlation": _num(bundle.correlation),
        "associations": [_association_to_dict(a) for a in bundle.associations],
    }


def bundle_from_dict(d: dict) -> ReportBundle:
    return ReportBundle(
        reports=[_report_from_dict(m) for m in d["movements"]],
        changes=[AggregateChange(**c) for c in d["changes"]],
        correlation=d["correlation"],
        associations=[
            AssociationResult(
                a["category_name"],
                tuple(a["row_labels"]),
                tuple(a["column_values"]),
                tuple(tuple(r) for r in a["contingency"]),
                a["chi_square"],
                a["df"],
                a["p_value"],
                a["cramers_v"],
            )
            for a in d["associations"]
        ],
        meta=d["meta"],
    )


def emit_json(bundle: ReportBundle) -> str:
    """Sorted-key JSON with floats rounded to 6 significant digits."""
    return json.dumps(bundle_to_dict(bundle), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def parse_json(text: str) -> ReportBundle:
    return bundle_from_dict(json.loads(text))


# ------------------------------------------------------------------------ SVG

_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 64, 120, 40, 52


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _ticks(lo: float, hi: float) -> list[float]:
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append(round(v, 10))
        v += step
    return out


def _f(v: float) -> str:
    return f"{v:.2f}"


def emit_scatter_svg(report: MovementReport, corpus: Corpus, palette: str | dict = "default", title: str | None = None) -> str:
    """Tempo-by-year scatter, coloured by tradition, with the mid-range
    regression drawn dashed when a fit exists."""
    if not report.clusters:
        raise DomainError("report has no clusters to plot")
    colours = PALETTES[palette] if isinstance(palette, str) else dict(palette)
    points = {
        c.label: [(corpus.recordings[i].year, mean_bpm(corpus.recordings[i].bar_bpm)) for i in c.member_ids]
        for c in report.clusters
    }
    xs = [p[0] for ps in points.values() for p in ps]
    ys = [p[1] for ps in points.values() for p in ps]
    x0, x1 = min(xs) - 5, max(xs) + 5
    pad = max(1.0, 0.08 * (max(ys) - min(ys)))
    y0, y1 = min(ys) - pad, max(ys) + pad
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def sx(x):
        return _LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return _TOP + ph - (y - y0) / (y1 - y0) * ph

    heading = title if title is not None else f"{report.movement_id}: mean tempo by recording year"
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text class="title" x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(heading)}</text>',
        '<g class="axes" stroke="black" stroke-width="1">',
        f'<line x1="{_LEFT}" y1="{_TOP + ph}" x2="{_LEFT + pw}" y2="{_TOP + ph}"/>',
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_TOP + ph}"/>',
        "</g>",
        '<g class="ticks" fill="black">',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{_f(sx(t))}" y="{_TOP + ph + 16}" text-anchor="middle">{t:.0f}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{_LEFT - 6}" y="{_f(sy(t) + 4)}" text-anchor="end">{t:g}</text>')
    out.append("</g>")
    out.append(f'<text class="xlabel" x="{_LEFT + pw / 2:.1f}" y="{_H - 12}" text-anchor="middle">Recording year</text>')
    out.append(
        f'<text class="ylabel" x="16" y="{_TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_TOP + ph / 2:.1f})">Mean tempo (BPM)</text>'
    )

    for label in LABELS:
        if label not in points:
            continue
        out.append(f'<g class="points" data-label="{label}" fill="{colours[label]}" stroke="black" stroke-width="0.5">')
        for x, y in points[label]:
            out.append(f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="4"/>')
        out.append("</g>")

    mid = report.cluster("mid")
    if mid is not None and mid.fit is not None:
        years = [p[0] for p in points["mid"]]
        a, b = min(years), max(years)
        ya, yb = mid.fit.intercept + mid.fit.slope * a, mid.fit.intercept + mid.fit.slope * b
        out.append(
            f'<polyline class="regression" points="{_f(sx(a))},{_f(sy(ya))} {_f(sx(b))},{_f(sy(yb))}" '
            f'fill="none" stroke="{colours["mid"]}" stroke-width="1.5" stroke-dasharray="6 4"/>'
        )

    out.append('<g class="legend">')
    ly = _TOP + 8
    for label in LABELS:
        c = report.cluster(label)
        text = f"{label} (n={c.n})" if c is not None else f"{label} (empty)"
        out.append(f'<circle cx="{_LEFT + pw + 18}" cy="{ly}" r="4" fill="{colours[label]}" stroke="black" stroke-width="0.5"/>')
        out.append(f'<text x="{_LEFT + pw + 28}" y="{ly + 4}">{escape(text)}</text>')
        ly += 18
    if mid is not None and mid.fit is not None:
        out.append(f'<text x="{_LEFT + pw + 10}" y="{ly + 4}">mid R² = {mid.fit.r_squared:.3f}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
