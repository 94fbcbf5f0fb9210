"""Recording corpus: CSV ingestion, validation, and per-recording duration."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from . import DomainError

MOVEMENT_COLUMNS = (
    "movement_id",
    "sonata_label",
    "movement_name",
    "character",
    "beats_per_bar",
    "feature_spec",
)
RECORDING_COLUMNS = ("recording_id", "performer", "year", "movement_id")
BAR_COLUMNS = ("recording_id", "bar_index", "bpm")
BACKGROUND_PREFIX = "background."

CHARACTERS = ("fast", "slow")
FEATURE_SPECS = ("mean_only", "mean_and_cv")

VALID_YEARS = (1900, 2100)
STUDY_YEARS = (1930, 2012)
COUNT_RANGE = (5, 100)


class CorpusParseError(DomainError):
    """A CSV input could not be turned into a consistent corpus."""

    def __init__(self, filename: str, line: int | None, key: str | None, message: str):
        self.filename = filename
        self.line = line
        self.key = key
        where = filename if line is None else f"{filename}:{line}"
        if key is not None:
            where += f" [{key}]"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Movement:
    movement_id: str
    sonata_label: str
    movement_name: str
    character: str
    beats_per_bar: int
    feature_spec: str = "mean_only"


@dataclass(frozen=True)
class Recording:
    recording_id: str
    performer: str
    year: int
    movement_id: str
    bar_bpm: tuple[float, ...]
    background: dict[str, str] = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class Corpus:
    movements: dict[str, Movement]
    recordings: dict[str, Recording]

    def recordings_for(self, movement_id: str) -> list[Recording]:
        """Recordings of one movement, ordered by recording_id."""
        return sorted(
            (r for r in self.recordings.values() if r.movement_id == movement_id),
            key=lambda r: r.recording_id,
        )

    def movement_ids(self) -> list[str]:
        return sorted(self.movements)

    def background_categories(self) -> list[str]:
        names = set()
        for rec in self.recordings.values():
            names.update(rec.background)
        return sorted(names)


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" or "warning"
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __len__(self) -> int:
        return len(self.findings)

    def __bool__(self) -> bool:
        return bool(self.findings)


def _read_rows(text: str, filename: str, required: Iterable[str]):
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        raise CorpusParseError(filename, 1, None, f"missing column(s) {', '.join(missing)}")
    # header is line 1, first data row line 2
    for line, row in enumerate(reader, start=2):
        if None in row:
            raise CorpusParseError(filename, line, None, "too many fields")
        yield line, header, row


def _parse_int(value: str | None, filename: str, line: int, key: str, what: str) -> int:
    try:
        return int((value or "").strip())
    except ValueError:
        raise CorpusParseError(filename, line, key, f"{what} is not an integer: {value!r}") from None


def parse_corpus(
    movements_csv: str,
    recordings_csv: str,
    bars_csv: str,
    year_window: tuple[int, int] = VALID_YEARS,
) -> Corpus:
    """Build a cross-referenced corpus from the three CSV documents.

    Structural problems (missing or duplicate keys, dangling references,
    non-numeric or non-positive BPM, gaps in bar numbering, years outside
    ``year_window``) raise :class:`CorpusParseError` naming file, line and key.
    """
    movements: dict[str, Movement] = {}
    for line, _, row in _read_rows(movements_csv, "movements.csv", MOVEMENT_COLUMNS):
        mid = row["movement_id"].strip()
        if not mid:
            raise CorpusParseError("movements.csv", line, None, "empty movement_id")
        if mid in movements:
            raise CorpusParseError("movements.csv", line, mid, "duplicate movement_id")
        character = row["character"].strip()
        if character not in CHARACTERS:
            raise CorpusParseError("movements.csv", line, mid, f"unknown character {character!r}")
        spec = row["feature_spec"].strip() or "mean_only"
        if spec not in FEATURE_SPECS:
            raise CorpusParseError("movements.csv", line, mid, f"unknown feature_spec {spec!r}")
        if spec == "mean_and_cv" and character != "slow":
            raise CorpusParseError("movements.csv", line, mid, "mean_and_cv requires a slow movement")
        beats = _parse_int(row["beats_per_bar"], "movements.csv", line, mid, "beats_per_bar")
        if beats < 1:
            raise CorpusParseError("movements.csv", line, mid, "beats_per_bar must be >= 1")
        movements[mid] = Movement(
            mid, row["sonata_label"].strip(), row["movement_name"].strip(), character, beats, spec
        )

    heads: dict[str, dict] = {}
    for line, header, row in _read_rows(recordings_csv, "recordings.csv", RECORDING_COLUMNS):
        rid = row["recording_id"].strip()
        if not rid:
            raise CorpusParseError("recordings.csv", line, None, "empty recording_id")
        if rid in heads:
            raise CorpusParseError("recordings.csv", line, rid, "duplicate recording_id")
        year = _parse_int(row["year"], "recordings.csv", line, rid, "year")
        if not year_window[0] <= year <= year_window[1]:
            raise CorpusParseError(
                "recordings.csv", line, rid,
                f"year {year} outside validity window {year_window[0]}-{year_window[1]}",
            )
        mid = row["movement_id"].strip()
        if mid not in movements:
            raise CorpusParseError("recordings.csv", line, rid, f"unknown movement_id {mid!r}")
        background = {
            col[len(BACKGROUND_PREFIX):]: row[col].strip()
            for col in header
            if col.startswith(BACKGROUND_PREFIX) and row[col] and row[col].strip()
        }
        heads[rid] = dict(
            recording_id=rid,
            performer=row["performer"].strip(),
            year=year,
            movement_id=mid,
            background=background,
        )

    bars: dict[str, dict[int, float]] = defaultdict(dict)
    for line, _, row in _read_rows(bars_csv, "bars.csv", BAR_COLUMNS):
        rid = row["recording_id"].strip()
        if rid not in heads:
            raise CorpusParseError("bars.csv", line, rid, "unknown recording_id")
        index = _parse_int(row["bar_index"], "bars.csv", line, rid, "bar_index")
        key = f"{rid} bar {index}"
        if index in bars[rid]:
            raise CorpusParseError("bars.csv", line, key, "duplicate bar_index")
        try:
            bpm = float(row["bpm"])
        except (TypeError, ValueError):
            raise CorpusParseError("bars.csv", line, key, f"bpm is not numeric: {row['bpm']!r}") from None
        if not math.isfinite(bpm) or bpm <= 0:
            raise CorpusParseError("bars.csv", line, key, f"bpm must be positive and finite, got {bpm}")
        bars[rid][index] = bpm

    recordings: dict[str, Recording] = {}
    for rid, head in heads.items():
        series = bars.get(rid)
        if not series:
            raise CorpusParseError("bars.csv", None, rid, "recording has no bars")
        indices = sorted(series)
        if indices != list(range(len(indices))):
            raise CorpusParseError("bars.csv", None, rid, "bar_index must be contiguous from 0")
        recordings[rid] = Recording(bar_bpm=tuple(series[i] for i in indices), **head)
    return Corpus(movements, recordings)


def load_corpus(directory) -> Corpus:
    """Read movements.csv, recordings.csv and bars.csv from ``directory``."""
    from pathlib import Path

    d = Path(directory)
    texts = [(d / name).read_text(encoding="utf-8") for name in ("movements.csv", "recordings.csv", "bars.csv")]
    return parse_corpus(*texts)


def _to_csv(header: list[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_corpus(corpus: Corpus) -> tuple[str, str, str]:
    """Serialize ``corpus`` to (movements_csv, recordings_csv, bars_csv)."""
    movements = _to_csv(
        list(MOVEMENT_COLUMNS),
        (
            [m.movement_id, m.sonata_label, m.movement_name, m.character, m.beats_per_bar, m.feature_spec]
            for m in (corpus.movements[k] for k in sorted(corpus.movements))
        ),
    )
    categories = corpus.background_categories()
    recs = [corpus.recordings[k] for k in sorted(corpus.recordings)]
    recordings = _to_csv(
        list(RECORDING_COLUMNS) + [BACKGROUND_PREFIX + c for c in categories],
        ([r.recording_id, r.performer, r.year, r.movement_id] + [r.background.get(c, "") for c in categories] for r in recs),
    )
    bars = _to_csv(
        list(BAR_COLUMNS),
        ([r.recording_id, i, repr(float(b))] for r in recs for i, b in enumerate(r.bar_bpm)),
    )
    return movements, recordings, bars


def validate_corpus(
    corpus: Corpus,
    year_window: tuple[int, int] = VALID_YEARS,
    study_window: tuple[int, int] = STUDY_YEARS,
    count_range: tuple[int, int] = COUNT_RANGE,
) -> ValidationReport:
    """Check corpus invariants; structural breaks are errors, statistical
    oddities (recording counts, years outside the study window, repeated
    performer/year pairs) are warnings."""
    findings: list[Finding] = []

    for mid in sorted(corpus.movements):
        m = corpus.movements[mid]
        loc = f"movement {mid}"
        if m.beats_per_bar < 1:
            findings.append(Finding("error", loc, "beats_per_bar must be >= 1"))
        if m.character not in CHARACTERS:
            findings.append(Finding("error", loc, f"unknown character {m.character!r}"))
        if m.feature_spec not in FEATURE_SPECS:
            findings.append(Finding("error", loc, f"unknown feature_spec {m.feature_spec!r}"))
        elif m.feature_spec == "mean_and_cv" and m.character != "slow":
            findings.append(Finding("error", loc, "mean_and_cv requires a slow movement"))

    seen: Counter = Counter()
    for rid in sorted(corpus.recordings):
        r = corpus.recordings[rid]
        loc = f"recording {rid}"
        if rid != r.recording_id:
            findings.append(Finding("error", loc, f"keyed under {rid!r} but recording_id is {r.recording_id!r}"))
        if r.movement_id not in corpus.movements:
            findings.append(Finding("error", loc, f"dangling movement_id {r.movement_id!r}"))
        if not r.bar_bpm:
            findings.append(Finding("error", loc, "empty bar series"))
        for i, bpm in enumerate(r.bar_bpm):
            if not (math.isfinite(bpm) and bpm > 0):
                findings.append(Finding("error", f"{loc} bar {i}", f"bpm must be positive and finite, got {bpm}"))
        if not year_window[0] <= r.year <= year_window[1]:
            findings.append(Finding("error", loc, f"year {r.year} outside validity window"))
        if not study_window[0] <= r.year <= study_window[1]:
            findings.append(Finding("warning", loc, f"year {r.year} outside study window"))
        seen[(r.performer, r.year, r.movement_id)] += 1

    for (performer, year, mid), count in sorted(seen.items()):
        if count > 1:
            findings.append(
                Finding("warning", f"movement {mid}", f"{count} recordings share performer {performer!r} and year {year}")
            )

    per_movement = Counter(r.movement_id for r in corpus.recordings.values())
    for mid in sorted(corpus.movements):
        n = per_movement.get(mid, 0)
        if n < count_range[0]:
            findings.append(Finding("warning", f"movement {mid}", f"movement count below {count_range[0]} ({n} recordings)"))
        elif n > count_range[1]:
            findings.append(Finding("warning", f"movement {mid}", f"movement count above {count_range[1]} ({n} recordings)"))
    return ValidationReport(tuple(findings))


def duration_minutes(recording: Recording, movement: Movement) -> float:
    """Playing time implied by the bar tempi: sum of beats_per_bar / bpm."""
    if not recording.bar_bpm:
        raise DomainError(f"recording {recording.recording_id} has no bars")
    return math.fsum(movement.beats_per_bar / bpm for bpm in recording.bar_bpm)
