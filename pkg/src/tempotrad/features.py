"""Per-recording tempo features and z-standardization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import DomainError
from .corpus import Corpus

# relative SD below which a column counts as constant
_DEGENERATE_RTOL = 1e-12


def mean_bpm(bar_bpm) -> float:
    values = np.asarray(bar_bpm, dtype=float)
    if values.size == 0:
        raise DomainError("mean_bpm of an empty series")
    return float(math.fsum(values) / values.size)


def cv_bpm(bar_bpm) -> float:
    """Coefficient of variation of bar tempi (sample SD over mean)."""
    values = np.asarray(bar_bpm, dtype=float)
    if values.size < 2:
        raise DomainError("cv_bpm needs at least two bars")
    return float(np.std(values, ddof=1) / mean_bpm(values))


@dataclass(frozen=True)
class FeatureMatrix:
    movement_id: str
    row_ids: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class StandardizedMatrix:
    base: FeatureMatrix
    values: np.ndarray
    column_means: np.ndarray
    column_sds: np.ndarray
    degenerate_columns: frozenset[str]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.base.columns


def build_feature_matrix(corpus: Corpus, movement_id: str) -> FeatureMatrix:
    if movement_id not in corpus.movements:
        raise DomainError(f"unknown movement {movement_id!r}")
    movement = corpus.movements[movement_id]
    recordings = corpus.recordings_for(movement_id)
    if not recordings:
        raise DomainError(f"movement {movement_id!r} has no recordings")

    with_cv = movement.feature_spec == "mean_and_cv"
    rows = []
    for rec in recordings:
        row = [mean_bpm(rec.bar_bpm)]
        if with_cv:
            if len(rec.bar_bpm) < 2:
                raise DomainError(f"recording {rec.recording_id!r} has a single bar; CV is undefined")
            row.append(cv_bpm(rec.bar_bpm))
        rows.append(row)
    columns = ("mean_bpm", "cv") if with_cv else ("mean_bpm",)
    return FeatureMatrix(
        movement_id,
        tuple(r.recording_id for r in recordings),
        columns,
        np.array(rows, dtype=float),
    )


def z_standardize(m: FeatureMatrix) -> StandardizedMatrix:
    """Z-score each column with the sample (n-1) SD.

    Zero-variance columns are zero-filled and listed in ``degenerate_columns``.
    """
    x = np.asarray(m.values, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DomainError("z_standardize needs at least two rows")
    means = x.mean(axis=0)
    sds = x.std(axis=0, ddof=1)
    out = np.zeros_like(x)
    degenerate = []
    for j, name in enumerate(m.columns):
        if sds[j] <= _DEGENERATE_RTOL * max(1.0, abs(means[j])):
            degenerate.append(name)
            continue
        z = (x[:, j] - means[j]) / sds[j]
        # a second centring pass removes the O(eps * |mean| / sd) residue
        z -= z.mean()
        out[:, j] = z / z.std(ddof=1)
    return StandardizedMatrix(m, out, means, sds, frozenset(degenerate))


def de_standardize(point, s: StandardizedMatrix) -> np.ndarray:
    """Map a standardized vector back to raw feature units."""
    p = np.asarray(point, dtype=float)
    if p.shape != (len(s.columns),):
        raise DomainError(f"expected a vector of length {len(s.columns)}, got shape {p.shape}")
    raw = p * s.column_sds + s.column_means
    for j, name in enumerate(s.columns):
        if name in s.degenerate_columns:
            raw[j] = s.column_means[j]
    return raw
