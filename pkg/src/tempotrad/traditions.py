"""Per-movement tradition analysis: cluster, label, regress within clusters,
plus aggregate period changes and background association."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import DomainError
from .corpus import Corpus, duration_minutes
from .features import build_feature_matrix, de_standardize, mean_bpm, z_standardize
from .kmeans import ClusterModel
from .regress import RegressionFit, chi2_sf, ols_fit, pearson_r
from .validity import ValidityPolicy, ValidityReport, assess_validity

LABELS = ("slow", "mid", "fast")
MIN_FIT_SIZE = 3
MIN_RECORDINGS = 4


@dataclass(frozen=True)
class LabeledCluster:
    label: str
    member_ids: tuple[str, ...]
    n: int
    mean_bpm: float
    bpm_range: tuple[float, float]
    sd_bpm: float
    fit: RegressionFit | None


@dataclass(frozen=True)
class MovementReport:
    movement_id: str
    validity: ValidityReport
    clusters: tuple[LabeledCluster, ...]
    empty_labels: frozenset[str]
    dominant_label: str
    dominant_share: float
    character: str = "fast"
    feature_columns: tuple[str, ...] = ("mean_bpm",)
    degenerate_columns: frozenset[str] = frozenset()

    def cluster(self, label: str) -> LabeledCluster | None:
        for c in self.clusters:
            if c.label == label:
                return c
        return None


@dataclass(frozen=True)
class AggregateChange:
    movement_id: str
    split_year: int
    tempo_pct: float
    duration_pct: float
    n_early: int
    n_late: int


@dataclass(frozen=True)
class AssociationResult:
    category_name: str
    row_labels: tuple[str, ...]
    column_values: tuple[str, ...]
    contingency: tuple[tuple[int, ...], ...]
    chi_square: float
    df: int
    p_value: float
    cramers_v: float


def label_clusters(model: ClusterModel, supported_k: int, member_counts=None) -> dict[int, str]:
    """Map cluster index -> slow/mid/fast from raw mean-BPM centroids.

    Three clusters are labeled in ascending centroid order. With two, the
    more populous one is "mid" and the other is "fast" or "slow" depending on
    which side of it its centroid lies.
    """
    if supported_k not in (2, 3):
        raise DomainError(f"labels exist only for k = 2 or 3, got {supported_k}")
    if model.centroids_raw is None:
        raise DomainError("model has no raw-unit centroids")
    if model.k != supported_k:
        raise DomainError(f"model has k={model.k}, expected {supported_k}")
    centre = np.asarray(model.centroids_raw, dtype=float)[:, 0]
    counts = np.asarray(model.sizes() if member_counts is None else member_counts)
    by_tempo = sorted(range(supported_k), key=lambda j: (centre[j], j))
    if supported_k == 3:
        return dict(zip(by_tempo, LABELS))
    low, high = by_tempo
    mid = high if counts[high] > counts[low] else low
    other = low if mid == high else high
    return {mid: "mid", other: "fast" if other == high else "slow"}


def intra_cluster_fit(years, tempi) -> RegressionFit | None:
    """Tempo-on-year regression inside one cluster; None below three members
    or when every recording shares a year."""
    years = np.asarray(years, dtype=float)
    if years.size < MIN_FIT_SIZE or np.all(years == years[0]):
        return None
    return ols_fit(years, tempi)


def analyze_movement(
    corpus: Corpus,
    movement_id: str,
    k_target: int = 3,
    restarts: int = 100,
    seed: int = 0,
    policy: ValidityPolicy = ValidityPolicy(),
) -> MovementReport:
    if k_target not in (2, 3):
        raise DomainError(f"k_target must be 2 or 3, got {k_target}")
    recordings = corpus.recordings_for(movement_id)
    if movement_id in corpus.movements and len(recordings) < MIN_RECORDINGS:
        raise DomainError(f"movement {movement_id!r} has {len(recordings)} recordings; at least {MIN_RECORDINGS} needed")
    features = build_feature_matrix(corpus, movement_id)
    standard = z_standardize(features)
    validity, models = assess_validity(
        standard.values, movement_id, (2, 3), restarts=restarts, seed=seed, policy=policy
    )
    k = min(validity.supported_k, k_target)
    model = models[k]
    model = model.with_raw([de_standardize(c, standard) for c in model.centroids_std])
    labels = label_clusters(model, k)

    by_id = {r.recording_id: r for r in recordings}
    tempo = features.values[:, 0]
    clusters = []
    for j, label in sorted(labels.items(), key=lambda item: LABELS.index(item[1])):
        rows = np.flatnonzero(model.assignments == j)
        if rows.size == 0:
            continue
        ids = tuple(features.row_ids[i] for i in rows)
        values = tempo[rows]
        clusters.append(
            LabeledCluster(
                label=label,
                member_ids=ids,
                n=len(ids),
                mean_bpm=float(values.mean()),
                bpm_range=(float(values.min()), float(values.max())),
                sd_bpm=float(values.std(ddof=1)) if len(ids) > 1 else 0.0,
                fit=intra_cluster_fit([by_id[i].year for i in ids], values),
            )
        )
    present = {c.label for c in clusters}
    total = sum(c.n for c in clusters)
    # population first, then mid before the flanks
    dominant = max(clusters, key=lambda c: (c.n, c.label == "mid", -LABELS.index(c.label)))
    return MovementReport(
        movement_id=movement_id,
        validity=validity,
        clusters=tuple(clusters),
        empty_labels=frozenset(LABELS) - present,
        dominant_label=dominant.label,
        dominant_share=dominant.n / total,
        character=corpus.movements[movement_id].character,
        feature_columns=features.columns,
        degenerate_columns=standard.degenerate_columns,
    )


def aggregate_period_change(corpus: Corpus, movement_id: str, split_year: int = 1970) -> AggregateChange:
    """Percentage change in mean tempo and mean duration, early vs late.

    Recordings from ``split_year`` onward count as late.
    """
    if movement_id not in corpus.movements:
        raise DomainError(f"unknown movement {movement_id!r}")
    movement = corpus.movements[movement_id]
    early, late = [], []
    for rec in corpus.recordings_for(movement_id):
        (late if rec.year >= split_year else early).append(rec)
    if not early:
        raise DomainError(f"movement {movement_id!r}: early period (before {split_year}) is empty")
    if not late:
        raise DomainError(f"movement {movement_id!r}: late period ({split_year} onward) is empty")

    def mean_of(values):
        return math.fsum(values) / len(values)

    tempo_e = mean_of([mean_bpm(r.bar_bpm) for r in early])
    tempo_l = mean_of([mean_bpm(r.bar_bpm) for r in late])
    dur_e = mean_of([duration_minutes(r, movement) for r in early])
    dur_l = mean_of([duration_minutes(r, movement) for r in late])
    return AggregateChange(
        movement_id,
        split_year,
        100.0 * (tempo_l - tempo_e) / tempo_e,
        100.0 * (dur_l - dur_e) / dur_e,
        len(early),
        len(late),
    )


def tempo_duration_correlation(changes) -> float:
    changes = list(changes)
    if len(changes) < 2:
        raise DomainError("correlation needs at least two movements")
    return pearson_r([c.tempo_pct for c in changes], [c.duration_pct for c in changes])


def contingency_statistics(table) -> tuple[float, int, float, float]:
    """Pearson chi-square, df, p-value and Cramer's V for a count table."""
    obs = np.asarray(table, dtype=float)
    if obs.ndim != 2 or min(obs.shape) < 2:
        raise DomainError("contingency table needs at least two rows and two columns")
    n = obs.sum()
    expected = np.outer(obs.sum(axis=1), obs.sum(axis=0)) / n
    if np.any(expected == 0):
        raise DomainError("contingency table has an empty row or column")
    chi2 = float(np.sum((obs - expected) ** 2 / expected))
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    v = math.sqrt(chi2 / (n * (min(obs.shape) - 1)))
    return chi2, df, chi2_sf(chi2, df), min(1.0, v)


def background_association(reports, corpus: Corpus, category_name: str) -> AssociationResult:
    """Cross-tabulate tradition labels against one background category.

    ``reports`` is one MovementReport or several (pooled). Recordings that
    lack the category are left out.
    """
    if isinstance(reports, MovementReport):
        reports = [reports]
    counts: dict[tuple[str, str], int] = {}
    for report in reports:
        for cluster in report.clusters:
            for rid in cluster.member_ids:
                value = corpus.recordings[rid].background.get(category_name)
                if value is None:
                    continue
                counts[cluster.label, value] = counts.get((cluster.label, value), 0) + 1
    rows = tuple(l for l in LABELS if any(k[0] == l for k in counts))
    cols = tuple(sorted({k[1] for k in counts}))
    if len(rows) < 2 or len(cols) < 2:
        raise DomainError(
            f"category {category_name!r}: need two labels and two values, got {len(rows)} and {len(cols)}"
        )
    table = tuple(tuple(counts.get((r, c), 0) for c in cols) for r in rows)
    chi2, df, p, v = contingency_statistics(table)
    return AssociationResult(category_name, rows, cols, table, chi2, df, p, v)
