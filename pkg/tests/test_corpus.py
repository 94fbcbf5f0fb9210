import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_corpus
from tempotrad.corpus import (
    CorpusParseError,
    Movement,
    Recording,
    emit_corpus,
    duration_minutes,
    parse_corpus,
    validate_corpus,
)

MOVEMENTS = "movement_id,sonata_label,movement_name,character,beats_per_bar,feature_spec\nm1,Op.5/1,Rondo,fast,2,mean_only\n"
RECORDINGS = "recording_id,performer,year,movement_id\nr1,Casals,1939,m1\n"
BARS = "recording_id,bar_index,bpm\nr1,0,60\nr1,1,60\nr1,2,60\n"


def test_minimal_corpus():
    corpus = parse_corpus(MOVEMENTS, RECORDINGS, BARS)
    assert list(corpus.recordings) == ["r1"]
    assert corpus.recordings["r1"].bar_bpm == (60.0, 60.0, 60.0)
    assert corpus.movements["m1"].beats_per_bar == 2


def test_bars_are_sorted_by_index():
    bars = "recording_id,bar_index,bpm\nr1,2,62\nr1,0,60\nr1,1,61\n"
    assert parse_corpus(MOVEMENTS, RECORDINGS, bars).recordings["r1"].bar_bpm == (60.0, 61.0, 62.0)


def test_zero_bpm_names_recording_and_bar():
    bars = "recording_id,bar_index,bpm\nr1,0,60\nr1,1,0\n"
    with pytest.raises(CorpusParseError) as err:
        parse_corpus(MOVEMENTS, RECORDINGS, bars)
    assert err.value.filename == "bars.csv"
    assert "r1" in err.value.key and "1" in err.value.key
    assert err.value.line == 3


@pytest.mark.parametrize("bpm", ["abc", "-5", "nan", "inf"])
def test_bad_bpm_rejected(bpm):
    with pytest.raises(CorpusParseError):
        parse_corpus(MOVEMENTS, RECORDINGS, f"recording_id,bar_index,bpm\nr1,0,{bpm}\n")


def test_duplicate_recording_id():
    recordings = RECORDINGS + "r1,Fournier,1948,m1\n"
    with pytest.raises(CorpusParseError, match="duplicate") as err:
        parse_corpus(MOVEMENTS, recordings, BARS)
    assert err.value.key == "r1" and err.value.filename == "recordings.csv"


def test_duplicate_movement_id():
    with pytest.raises(CorpusParseError, match="duplicate"):
        parse_corpus(MOVEMENTS + "m1,Op.5/1,Rondo,fast,2,mean_only\n", RECORDINGS, BARS)


def test_dangling_movement_reference():
    with pytest.raises(CorpusParseError, match="unknown movement_id"):
        parse_corpus(MOVEMENTS, "recording_id,performer,year,movement_id\nr1,X,1950,nope\n", BARS)


def test_bars_for_unknown_recording():
    with pytest.raises(CorpusParseError, match="unknown recording_id"):
        parse_corpus(MOVEMENTS, RECORDINGS, BARS + "r9,0,60\n")


def test_missing_header_column():
    with pytest.raises(CorpusParseError) as err:
        parse_corpus(MOVEMENTS, RECORDINGS, "recording_id,bpm\nr1,60\n")
    assert err.value.filename == "bars.csv"


def test_gap_in_bar_index():
    with pytest.raises(CorpusParseError, match="contiguous"):
        parse_corpus(MOVEMENTS, RECORDINGS, "recording_id,bar_index,bpm\nr1,0,60\nr1,2,60\n")


def test_cv_feature_requires_slow_character():
    bad = MOVEMENTS.replace("fast,2,mean_only", "fast,2,mean_and_cv")
    with pytest.raises(CorpusParseError, match="slow"):
        parse_corpus(bad, RECORDINGS, BARS)


def test_background_columns():
    recordings = "recording_id,performer,year,movement_id,background.nation,background.cohort\nr1,Casals,1939,m1,Spanish,\n"
    corpus = parse_corpus(MOVEMENTS, recordings, BARS)
    assert corpus.recordings["r1"].background == {"nation": "Spanish"}
    assert corpus.background_categories() == ["nation"]


def test_year_outside_validity_window_is_parse_error():
    with pytest.raises(CorpusParseError, match="validity window"):
        parse_corpus(MOVEMENTS, RECORDINGS.replace("1939", "1890"), BARS)


def test_well_formed_corpus_validates_clean():
    corpus = make_corpus([80 + i for i in range(20)])
    report = validate_corpus(corpus)
    assert len(report) == 0 and report.ok


def test_small_movement_warns():
    report = validate_corpus(make_corpus([80, 81, 82]))
    assert report.ok
    assert any("movement count below 5" in f.message for f in report.warnings)


def test_year_1890_warns_outside_study_window():
    corpus = make_corpus([80 + i for i in range(6)], years=[1890, 1940, 1950, 1960, 1970, 1980])
    report = validate_corpus(corpus)
    assert any("outside study window" in f.message for f in report.warnings)


def test_study_window_edge_years_are_clean():
    corpus = make_corpus([80 + i for i in range(6)], years=[1930, 1940, 1950, 1960, 1970, 2012])
    assert len(validate_corpus(corpus)) == 0


def test_duplicate_performer_year_is_a_warning():
    corpus = make_corpus([80 + i for i in range(6)], years=[1950] * 6)
    corpus.recordings["m1-r001"] = Recording("m1-r001", "P0", 1950, "m1", (81.0,))
    report = validate_corpus(corpus)
    assert report.ok
    assert any("share performer" in f.message for f in report.warnings)


def test_validate_is_pure():
    corpus = make_corpus([80, 81, 82], years=[1920, 1950, 1960])
    before = emit_corpus(corpus)
    assert validate_corpus(corpus) == validate_corpus(corpus)
    assert emit_corpus(corpus) == before


def test_duration_examples():
    three_four = Movement("m", "s", "n", "fast", 3)
    common = Movement("m", "s", "n", "fast", 4)
    assert duration_minutes(Recording("a", "p", 1950, "m", (60.0,) * 60), three_four) == 3.0
    assert duration_minutes(Recording("b", "p", 1950, "m", (120.0,)), common) == pytest.approx(4 / 120, rel=1e-15)


bpm_series = st.lists(st.floats(1.0, 400.0), min_size=1, max_size=40)


@given(bpm_series)
def test_halving_tempo_doubles_duration(series):
    m = Movement("m", "s", "n", "fast", 2)
    full = duration_minutes(Recording("a", "p", 1950, "m", tuple(series)), m)
    half = duration_minutes(Recording("a", "p", 1950, "m", tuple(b / 2 for b in series)), m)
    assert half == pytest.approx(2 * full, rel=1e-12)


@given(bpm_series, st.integers(0, 39), st.floats(0.01, 50.0), st.integers(1, 12))
def test_duration_monotone_and_linear_in_meter(series, i, bump, beats):
    i %= len(series)
    rec = Recording("a", "p", 1950, "m", tuple(series))
    faster = Recording("a", "p", 1950, "m", tuple(b + bump if j == i else b for j, b in enumerate(series)))
    m1 = Movement("m", "s", "n", "fast", 1)
    mk = Movement("m", "s", "n", "fast", beats)
    assert duration_minutes(faster, m1) < duration_minutes(rec, m1)
    assert duration_minutes(rec, mk) == pytest.approx(beats * duration_minutes(rec, m1), rel=1e-12)


@settings(max_examples=50)
@given(
    st.lists(
        st.tuples(
            st.integers(1930, 2012),
            st.lists(st.floats(1.0, 400.0, allow_subnormal=False), min_size=1, max_size=8),
            st.sampled_from(["", "French", "German, Austrian", 'say "hi"']),
        ),
        min_size=1,
        max_size=6,
    )
)
def test_csv_round_trip(rows):
    movement = Movement("m1", "Op.5/1", "Rondo, finale", "slow", 2, "mean_and_cv")
    recordings = {}
    for i, (year, bars, nation) in enumerate(rows):
        rid = f"r{i}"
        bg = {"nation": nation} if nation else {}
        recordings[rid] = Recording(rid, f"Performer {i}", year, "m1", tuple(bars), bg)
    from tempotrad.corpus import Corpus

    corpus = Corpus({"m1": movement}, recordings)
    back = parse_corpus(*emit_corpus(corpus))
    assert back.movements == corpus.movements
    assert sorted(back.recordings) == sorted(corpus.recordings)
    for rid, rec in corpus.recordings.items():
        got = back.recordings[rid]
        assert (got.performer, got.year, got.movement_id, got.background) == (
            rec.performer, rec.year, rec.movement_id, rec.background,
        )
        assert all(round(a, 6) == round(b, 6) for a, b in zip(got.bar_bpm, rec.bar_bpm))
    assert emit_corpus(back) == emit_corpus(corpus)
    assert math.isfinite(sum(duration_minutes(r, movement) for r in back.recordings.values()))
