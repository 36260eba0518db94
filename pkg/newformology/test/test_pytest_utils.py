"""Unit tests for pytest_utils module."""

from newformology import pytest_utils
from newformology.counting import HalfPlanePoint
from newformology.counting import count_ratio
from newformology.reports import FLOOR
from newformology.reports import STATUS_INFO
from newformology.reports import STATUS_PASS
from newformology.reports import STATUS_RECORDED
from newformology.reports import CheckReport


def test_locked_constants_fixture(locked_constants: pytest_utils.LockedConstantsFixture) -> None:
    """Test that a measured ratio is recorded on the first session and compared in later sessions."""
    z = HalfPlanePoint.from_complex("2i")
    report = CheckReport("counting/count", params={"z": str(z), "l": 4}, measured_constant=count_ratio(z, 4, 0.1, 1))
    assert locked_constants(report) is report
    assert report.status in (STATUS_RECORDED, STATUS_PASS)
    assert report.locked_constant is not None


def test_locked_constants_fixture_floor(locked_constants: pytest_utils.LockedConstantsFixture) -> None:
    """Test floor comparisons and reports without a measured constant."""
    report = locked_constants(CheckReport("fixture/floor", measured_constant=1.0), FLOOR)
    assert report.status in (STATUS_RECORDED, STATUS_PASS)
    untouched = locked_constants(CheckReport("fixture/none", status=STATUS_INFO))
    assert untouched.status == STATUS_INFO
    assert untouched.locked_constant is None
