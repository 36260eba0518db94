"""Pytest plugin recording measured constants on the first run and comparing against them afterwards."""

import sqlite3
from pathlib import Path
from typing import Protocol

import pytest
from pytest import FixtureRequest

from newformology.reports import STATUS_RECORDED
from newformology.reports import UPPER
from newformology.reports import CheckReport
from newformology.reports import LockedConstants

OPT_LOCKED_DIR = "--nfy-locked-dir"
OPT_LOCKED_UPDATE = "--nfy-locked-update"

LOCKED_NAME = "locked_constants.json"

NFY_RECORDED = pytest.StashKey[dict]()


class LockedConstantsFixture(Protocol):
    """Pytest fixture comparing the measured constant of a report with the locked store."""

    def __call__(self, report: CheckReport, direction: str = UPPER) -> CheckReport:
        """Record or compare the measured constant of a report.

        Args:
            report: Report carrying a measured constant; reports without one pass through unchanged.
            direction: "upper" when the measurement may not exceed the locked value, "floor" for the mirror.

        Returns:
            The same report, with its locked constant and status updated.
        """


def _get_session_root(session: pytest.Session) -> Path:
    """Find the directory holding the locked store and the results shared between xdist workers."""
    root_opt = session.config.getoption(OPT_LOCKED_DIR)
    root = Path(root_opt) if root_opt else Path(session.config.rootdir) / ".pytest_newformology"
    if not root.exists():
        root.mkdir(parents=True, exist_ok=True)
        (root / ".gitignore").write_text("# Created automatically by newformology pytest plugin.\n*\n")
    return root


@pytest.fixture(name="locked_constants")
def locked_constants_fixture(request: FixtureRequest) -> LockedConstantsFixture:
    """Create a function that applies the session's locked constants to reports.

    New recordings are kept on the test item and merged into the store once the session ends, so parallel workers
    never write the store concurrently.
    """
    store = LockedConstants(
        _get_session_root(request.session) / LOCKED_NAME,
        update=request.config.getoption(OPT_LOCKED_UPDATE),
    )
    node = request.node

    def _apply(report: CheckReport, direction: str = UPPER) -> CheckReport:
        store.apply(report, direction)
        if report.status == STATUS_RECORDED:
            node.stash.setdefault(NFY_RECORDED, {})[report.key] = store.values[report.key]
        return report

    return _apply


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add options controlling where constants are locked and whether they are re-recorded."""
    parser.addoption(
        OPT_LOCKED_DIR,
        action="store",
        help="Directory of the locked constants store. Defaults to: <project root>/.pytest_newformology",
    )
    parser.addoption(
        OPT_LOCKED_UPDATE,
        action="store_true",
        help="Re-record every locked constant instead of comparing against it.",
    )


def pytest_sessionstart(session: pytest.Session) -> None:
    """Create the table shared by xdist workers; workers themselves skip this."""
    if getattr(session.config, "workerinput", None) is not None:
        return
    with sqlite3.connect(_get_session_root(session) / "locked.db") as con:
        cur = con.cursor()
        cur.execute("DROP TABLE IF EXISTS recorded")
        cur.execute("CREATE TABLE recorded(key varchar PRIMARY KEY, value real)")


def pytest_sessionfinish(session: pytest.Session, exitstatus: int) -> None:  # pylint: disable=unused-argument
    """Share the recordings of every item, then let the controlling process merge them into the store."""
    session_root = _get_session_root(session)
    if hasattr(session, "items"):
        with sqlite3.connect(session_root / "locked.db") as con:
            cursor = con.cursor()
            for item in session.items:
                for key, value in item.stash.get(NFY_RECORDED, {}).items():
                    cursor.execute("INSERT OR REPLACE INTO recorded VALUES (?, ?)", (key, value))
            con.commit()

    if getattr(session.config, "workerinput", None) is not None:
        return

    with sqlite3.connect(session_root / "locked.db") as con:
        recorded = dict(con.execute("SELECT key, value FROM recorded ORDER BY key").fetchall())
    if recorded:
        store = LockedConstants(session_root / LOCKED_NAME)
        store.values.update(recorded)
        store.dirty = True
        store.save()
        session.config.nfy_recorded_count = len(recorded)
        session.config.nfy_store_path = store.path


def pytest_terminal_summary(
    terminalreporter: "pytest.TerminalReporter",
    exitstatus: int,  # Match pytest arguments. pylint: disable=unused-argument
    config: pytest.Config,
) -> None:
    """Summarize constants recorded for the first time in this session."""
    if hasattr(config, "nfy_recorded_count"):
        terminalreporter.ensure_newline()
        terminalreporter.section(f"{config.nfy_recorded_count} constant(s) recorded", sep="=", bold=True)
        terminalreporter.line(
            f"Stored in file://{config.nfy_store_path}\n"
            "\n"
            "Later runs compare against these values; rerun using the following syntax to re-record them:\n"
            f"pytest {OPT_LOCKED_UPDATE}"
        )
