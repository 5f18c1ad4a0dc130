from __future__ import annotations

import pytest

from provlens import RawAction, SessionState

MOVIES_CSV = """id,Title,Genre,Running Time,IMDB Rating,Worldwide Gross
m0,Godzilla,Action,139,6.4,379014294
m1,Kingpin,Comedy,114,6.9,25023434
m2,Saving Private Ryan,Drama,169,8.6,481840909
m3,Titanic,Drama,194,7.9,2187463944
m4,Pearl Harbor,Action,183,6.2,449220945
m5,The Mask,Comedy,101,6.9,351583407
"""


@pytest.fixture
def movies_dataset():
    from provlens import load_dataset

    return load_dataset(MOVIES_CSV, "csv")


def fig1_actions() -> list[RawAction]:
    """The four-interaction walkthrough: two encodes, then two point hovers."""
    return [
        RawAction(kind="encode-assign", attribute="Running Time", timestamp_ms=1_000),
        RawAction(kind="encode-assign", attribute="IMDB Rating", timestamp_ms=2_000),
        RawAction(kind="record-hover", record="m0", dwell_ms=400, timestamp_ms=3_000),
        RawAction(kind="record-hover", record="m1", dwell_ms=400, timestamp_ms=4_000),
    ]


@pytest.fixture
def fig1_session(movies_dataset) -> SessionState:
    state = SessionState(mode="edit", dataset=movies_dataset)
    for raw in fig1_actions():
        state.record_action(raw)
    return state


GLYPH_PANEL_CSV = """id,Title,Worldwide Gross,Production Budget,Genre,Release Year,Running Time
m0,Godzilla,379014294,125000000,Action,1998,139
m1,Kingpin,25023434,27000000,Comedy,1996,114
m2,Titanic,2187463944,200000000,Drama,1997,194
"""

# Attribute interaction counts that reproduce the attribute-panel ordering:
# Title most interacted, then Worldwide Gross, Production Budget, Genre at
# exactly the 0.5 relative score, and the remaining three lightest.
GLYPH_PANEL_SEQUENCE = (
    ["Running Time", "Release Year", "id"]
    + ["Genre", "Production Budget", "Worldwide Gross", "Title"] * 3
    + ["Production Budget", "Worldwide Gross", "Title"]
    + ["Worldwide Gross", "Title", "Title"]
)


@pytest.fixture
def glyph_panel_session():
    from provlens import load_dataset

    dataset = load_dataset(GLYPH_PANEL_CSV, "csv")
    state = SessionState(mode="edit", dataset=dataset)
    for i, name in enumerate(GLYPH_PANEL_SEQUENCE):
        state.record_action(RawAction(kind="encode-assign", attribute=name, timestamp_ms=1_000 + i))
    return state


# --- acceptance summary -----------------------------------------------------
# One PASS/FAIL line per acceptance criterion, printed after the run.

_acceptance_results: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or "test_acceptance" not in item.nodeid:
        return
    name = item.originalname or item.name
    label = name.replace("test_", "", 1)
    if report.passed:
        _acceptance_results.setdefault(label, "PASS")
    elif report.failed:
        _acceptance_results[label] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for label, verdict in _acceptance_results.items():
        terminalreporter.write_line(f"{verdict}  {label}")
