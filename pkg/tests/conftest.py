import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tempotrad.corpus import Corpus, Movement, Recording  # noqa: E402
from tempotrad.synth import ClusterSpec, SynthSpec, synth_corpus  # noqa: E402


def make_corpus(tempi, years=None, movement_id="m1", beats_per_bar=2, bars=4, background=None):
    """Corpus of uniform-bar recordings, one per tempo."""
    movement = Movement(movement_id, "Op.1", "Allegro", "fast", beats_per_bar, "mean_only")
    years = years or [1930 + 4 * i for i in range(len(tempi))]
    recordings = {}
    for i, (bpm, year) in enumerate(zip(tempi, years)):
        rid = f"{movement_id}-r{i:03d}"
        bg = {} if background is None else background[i]
        recordings[rid] = Recording(rid, f"P{i}", year, movement_id, (float(bpm),) * bars, bg)
    return Corpus({movement_id: movement}, recordings)


@pytest.fixture
def op5n1_corpus():
    clusters = (
        ClusterSpec("slow", 3, 78.0, 1.0),
        ClusterSpec("mid", 13, 83.1, 1.0),
        ClusterSpec("fast", 4, 90.2, 1.0),
    )
    return synth_corpus(SynthSpec("op5n1", clusters, seed=3))


@pytest.fixture
def two_mode_corpus():
    clusters = (ClusterSpec("mid", 14, 66.5, 1.0), ClusterSpec("fast", 5, 76.7, 1.0))
    return synth_corpus(SynthSpec("op5n2", clusters, seed=1))


# criterion number -> (passed, one-line detail); filled by test_acceptance
ACCEPTANCE: dict = {}
ACCEPTANCE_TITLES = {
    1: "k-means oracle equivalence",
    2: "Lloyd monotonicity",
    3: "standardization moments",
    4: "regression correctness",
    5: "t-distribution accuracy",
    6: "cluster-table reconstruction",
    7: "mid-cluster drift recovery",
    8: "tempo/duration correlation",
    9: "aggregate-change identity",
    10: "CLI determinism",
    11: "association sanity",
}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_TITLES):
        if number not in ACCEPTANCE:
            continue
        passed, detail = ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {ACCEPTANCE_TITLES[number]}: {detail}")
