"""Deterministic synthetic corpora built from per-cluster parameters."""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass

import numpy as np

from . import DomainError
from .corpus import CHARACTERS, FEATURE_SPECS, VALID_YEARS, Corpus, Movement, Recording


class SpecError(DomainError):
    """Malformed synthesis spec; ``path`` is a JSON path to the bad field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ClusterSpec:
    label_hint: str
    n: int
    mean_bpm: float
    sd_bpm: float = 0.0
    year_min: int = 1930
    year_max: int = 2012
    slope_bpm_per_year: float = 0.0


@dataclass(frozen=True)
class SynthSpec:
    movement_id: str
    clusters: tuple[ClusterSpec, ...]
    sonata_label: str = ""
    movement_name: str = ""
    character: str = "fast"
    beats_per_bar: int = 2
    feature_spec: str = "mean_only"
    bars_per_recording: int = 32
    bar_noise_sd: float = 0.0
    seed: int = 0
    # rescale each cluster's tempo draws to exactly mean 0 / sample SD 1
    moment_matched: bool = False

    def check(self, path: str = "$") -> None:
        if not self.movement_id:
            raise SpecError(f"{path}.movement_id", "must be non-empty")
        if self.character not in CHARACTERS:
            raise SpecError(f"{path}.character", f"must be one of {CHARACTERS}")
        if self.feature_spec not in FEATURE_SPECS:
            raise SpecError(f"{path}.feature_spec", f"must be one of {FEATURE_SPECS}")
        if self.feature_spec == "mean_and_cv" and self.character != "slow":
            raise SpecError(f"{path}.feature_spec", "mean_and_cv requires character 'slow'")
        if self.beats_per_bar < 1:
            raise SpecError(f"{path}.beats_per_bar", "must be >= 1")
        if self.bars_per_recording < 1:
            raise SpecError(f"{path}.bars_per_recording", "must be >= 1")
        if self.feature_spec == "mean_and_cv" and self.bars_per_recording < 2:
            raise SpecError(f"{path}.bars_per_recording", "CV needs at least 2 bars")
        if not self.bar_noise_sd >= 0:
            raise SpecError(f"{path}.bar_noise_sd", "must be >= 0")
        if not self.clusters:
            raise SpecError(f"{path}.clusters", "at least one cluster required")
        for i, c in enumerate(self.clusters):
            where = f"{path}.clusters[{i}]"
            if c.n < 1:
                raise SpecError(f"{where}.n", "must be >= 1")
            if not (math.isfinite(c.mean_bpm) and c.mean_bpm > 0):
                raise SpecError(f"{where}.mean_bpm", "must be positive")
            if not c.sd_bpm >= 0:
                raise SpecError(f"{where}.sd_bpm", "must be >= 0")
            if c.year_min > c.year_max:
                raise SpecError(f"{where}.year_min", "must not exceed year_max")
            if c.year_min < VALID_YEARS[0] or c.year_max > VALID_YEARS[1]:
                raise SpecError(f"{where}.year_min", f"years must lie in {VALID_YEARS[0]}-{VALID_YEARS[1]}")


_CLUSTER_FIELDS = {
    "label_hint": str, "n": int, "mean_bpm": float, "sd_bpm": float,
    "year_min": int, "year_max": int, "slope_bpm_per_year": float,
}
_SPEC_FIELDS = {
    "movement_id": str, "sonata_label": str, "movement_name": str, "character": str,
    "beats_per_bar": int, "feature_spec": str, "bars_per_recording": int,
    "bar_noise_sd": float, "seed": int, "moment_matched": bool,
}


def _coerce(value, kind, path):
    if kind is str:
        if not isinstance(value, str):
            raise SpecError(path, "expected a string")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise SpecError(path, "expected true or false")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(path, f"expected a number, got {type(value).__name__}")
    if kind is int:
        if float(value) != int(value):
            raise SpecError(path, "expected an integer")
        return int(value)
    return float(value)


def _fields(obj, allowed, path, required=()):
    if not isinstance(obj, dict):
        raise SpecError(path, "expected an object")
    for key in obj:
        if key not in allowed:
            raise SpecError(f"{path}.{key}", "unknown field")
    for key in required:
        if key not in obj:
            raise SpecError(f"{path}.{key}", "missing required field")
    return {k: _coerce(v, allowed[k], f"{path}.{k}") for k, v in obj.items()}


def spec_from_dict(data: dict, path: str = "$") -> SynthSpec:
    allowed = dict(_SPEC_FIELDS, clusters=list)
    if not isinstance(data, dict):
        raise SpecError(path, "expected an object")
    for key in data:
        if key not in allowed:
            raise SpecError(f"{path}.{key}", "unknown field")
    for key in ("movement_id", "clusters"):
        if key not in data:
            raise SpecError(f"{path}.{key}", "missing required field")
    top = _fields({k: v for k, v in data.items() if k != "clusters"}, _SPEC_FIELDS, path)
    raw_clusters = data["clusters"]
    if not isinstance(raw_clusters, list):
        raise SpecError(f"{path}.clusters", "expected a list")
    clusters = tuple(
        ClusterSpec(**_fields(c, _CLUSTER_FIELDS, f"{path}.clusters[{i}]", ("label_hint", "n", "mean_bpm")))
        for i, c in enumerate(raw_clusters)
    )
    spec = SynthSpec(clusters=clusters, **top)
    spec.check(path)
    return spec


def specs_from_json(text: str) -> list[SynthSpec]:
    """Parse one spec object, or ``{"movements": [spec, ...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError("$", f"invalid JSON: {exc}") from None
    if isinstance(data, dict) and "movements" in data:
        if set(data) != {"movements"} or not isinstance(data["movements"], list):
            raise SpecError("$.movements", "expected {\"movements\": [...]} only")
        specs = [spec_from_dict(d, f"$.movements[{i}]") for i, d in enumerate(data["movements"])]
        seen = set()
        for i, s in enumerate(specs):
            if s.movement_id in seen:
                raise SpecError(f"$.movements[{i}].movement_id", "duplicate movement_id")
            seen.add(s.movement_id)
        return specs
    return [spec_from_dict(data)]


def spec_to_dict(spec: SynthSpec) -> dict:
    d = asdict(spec)
    d["clusters"] = [asdict(c) for c in spec.clusters]
    return d


def _stream(*parts) -> np.random.Generator:
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def cluster_years(c: ClusterSpec) -> list[int]:
    """Recording years spread evenly over the cluster's window."""
    if c.n == 1:
        return [int(round((c.year_min + c.year_max) / 2))]
    return [int(round(y)) for y in np.linspace(c.year_min, c.year_max, c.n)]


def _recordings(spec: SynthSpec) -> list[Recording]:
    out = []
    for ci, c in enumerate(spec.clusters):
        rng = _stream(spec.seed, spec.movement_id, ci)
        years = cluster_years(c)
        midpoint = (c.year_min + c.year_max) / 2
        z = rng.normal(0.0, 1.0, c.n)
        if spec.moment_matched:
            z = (z - z.mean()) / z.std(ddof=1) if c.n > 1 else np.zeros(1)
        tempo_noise = z * c.sd_bpm
        bar_noise = rng.normal(0.0, 1.0, (c.n, spec.bars_per_recording)) * spec.bar_noise_sd
        for j in range(c.n):
            tempo = max(1.0, c.mean_bpm + c.slope_bpm_per_year * (years[j] - midpoint) + tempo_noise[j])
            bars = np.maximum(1.0, tempo + bar_noise[j])
            rid = f"{spec.movement_id}-{ci}{c.label_hint[:1] or 'c'}-{j:03d}"
            out.append(
                Recording(
                    recording_id=rid,
                    performer=f"Synthetic {c.label_hint or ci} {j + 1}",
                    year=years[j],
                    movement_id=spec.movement_id,
                    bar_bpm=tuple(float(b) for b in bars),
                )
            )
    return out


def _movement(spec: SynthSpec) -> Movement:
    return Movement(
        spec.movement_id,
        spec.sonata_label or spec.movement_id,
        spec.movement_name or spec.movement_id,
        spec.character,
        spec.beats_per_bar,
        spec.feature_spec,
    )


def synth_corpus(spec: SynthSpec | list[SynthSpec]) -> Corpus:
    """Materialize one or several movement specs into a corpus.

    Recording tempo is ``mean + slope * (year - window midpoint) + N(0, sd)``
    and each bar adds ``N(0, bar_noise_sd)``; both are floored at 1 BPM.
    """
    specs = [spec] if isinstance(spec, SynthSpec) else list(spec)
    movements, recordings = {}, {}
    for i, s in enumerate(specs):
        s.check(f"$[{i}]" if len(specs) > 1 else "$")
        if s.movement_id in movements:
            raise SpecError(f"$[{i}].movement_id", "duplicate movement_id")
        movements[s.movement_id] = _movement(s)
        for rec in _recordings(s):
            recordings[rec.recording_id] = rec
    return Corpus(movements, recordings)


_ROW = re.compile(
    r"^\s*(?P<label>\w+)\s+(?P<n>\d+)\s+(?P<mean>---|[\d.]+)\s+"
    r"(?P<range>---|(?P<lo>[\d.]+)\s*-{1,2}\s*(?P<hi>[\d.]+))\s*$"
)


def parse_table_row(text: str) -> tuple[str, int, float | None, float | None, float | None]:
    """Parse ``"Mid 13 83.1 80--86"`` style rows; ``---`` marks a missing value."""
    m = _ROW.match(text)
    if not m:
        raise DomainError(f"cannot parse table row {text!r}")
    mean = None if m["mean"] == "---" else float(m["mean"])
    lo = None if m["lo"] is None else float(m["lo"])
    hi = None if m["hi"] is None else float(m["hi"])
    return m["label"].lower(), int(m["n"]), mean, lo, hi


def spec_from_table_row(
    movement_id: str,
    rows,
    year_min: int = 1930,
    year_max: int = 2012,
    sd_divisor: float = 4.0,
    **movement_fields,
) -> SynthSpec:
    """SynthSpec from published cluster rows.

    Each row is ``(label, n, mean, range_min, range_max)`` or its text form.
    SD is taken as range / ``sd_divisor``; rows with n = 0 are dropped and a
    missing range gives SD 0. Draws are moment-matched unless the caller
    overrides ``moment_matched``, so each cluster reproduces its row's mean.
    """
    movement_fields.setdefault("moment_matched", True)
    clusters = []
    for row in rows:
        label, n, mean, lo, hi = parse_table_row(row) if isinstance(row, str) else row
        if n == 0:
            continue
        if mean is None:
            raise DomainError(f"row {label!r} has members but no mean")
        if (lo is None) != (hi is None):
            raise DomainError(f"row {label!r} has a half-specified range")
        if lo is not None and lo > hi:
            raise DomainError(f"row {label!r} has an inverted range {lo}-{hi}")
        sd = 0.0 if lo is None else (hi - lo) / sd_divisor
        clusters.append(ClusterSpec(label, int(n), float(mean), sd, year_min, year_max))
    if not clusters:
        raise DomainError("no populated rows")
    return SynthSpec(movement_id=movement_id, clusters=tuple(clusters), **movement_fields)


def noise_sd_for_r_squared(slope: float, years, r_squared: float) -> float:
    """Tempo noise SD at which a line of ``slope`` over ``years`` explains
    ``r_squared`` of the variance."""
    if not 0 < r_squared < 1:
        raise DomainError("r_squared must lie in (0, 1)")
    y = np.asarray(years, dtype=float)
    signal_var = slope**2 * float(np.mean((y - y.mean()) ** 2))
    return math.sqrt(signal_var * (1 - r_squared) / r_squared)


def synth_period_change(
    movement_id: str,
    tempo_pct: float,
    duration_pct: float,
    early_bpm: float = 100.0,
    n_early: int = 10,
    n_late: int = 10,
    split_year: int = 1970,
    bars_early: int = 1000,
    beats_per_bar: int = 2,
    character: str = "fast",
) -> Corpus:
    """Uniform-bar corpus whose early/late periods hit the requested changes.

    Tempo is constant within each period; the late bar count is solved so
    that the mean duration moves by ``duration_pct``.
    """
    if n_early < 1 or n_late < 1:
        raise DomainError("both periods need recordings")
    late_bpm = early_bpm * (1 + tempo_pct / 100)
    if late_bpm <= 0:
        raise DomainError("tempo change would make the late tempo non-positive")
    bars_late = round(bars_early * (1 + duration_pct / 100) * late_bpm / early_bpm)
    if bars_late < 1:
        raise DomainError("duration change would leave no bars")
    movement = Movement(movement_id, movement_id, movement_id, character, beats_per_bar, "mean_only")
    recordings = {}
    early_years = np.linspace(1930, split_year - 1, n_early) if n_early > 1 else [1950]
    late_years = np.linspace(split_year, 2012, n_late) if n_late > 1 else [1990]
    for tag, years, bpm, bars in (("e", early_years, early_bpm, bars_early), ("l", late_years, late_bpm, bars_late)):
        for j, year in enumerate(years):
            rid = f"{movement_id}-{tag}{j:03d}"
            recordings[rid] = Recording(rid, f"Synthetic {tag}{j}", int(round(year)), movement_id, (float(bpm),) * bars)
    return Corpus({movement_id: movement}, recordings)
