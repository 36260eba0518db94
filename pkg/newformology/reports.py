"""Check reports, locked constants, and deterministic JSON and CSV output."""

import csv
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from dataclasses import field
from dataclasses import is_dataclass
from fractions import Fraction
from os import PathLike
from pathlib import Path
from typing import Any
from typing import Iterable

import numpy as np

from newformology.cyclo import CyclotomicNumber
from newformology.exceptions import CacheError
from newformology.logging import get_logger

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_RECORDED = "recorded"
STATUS_INFO = "info"

UPPER = "upper"
FLOOR = "floor"

# Relative slack when comparing a measured constant with its locked value.
LOCK_TOLERANCE = 1e-9

# Failures beyond this count are summarized rather than listed.
MAX_LISTED_FAILURES = 20


def serialize(value: Any) -> Any:
    """Convert a value into plain JSON data, keeping exact values as strings."""
    if isinstance(value, (Fraction, CyclotomicNumber)):
        return str(value)
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, dict):
        return {str(key): serialize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [serialize(item) for item in value]
        return sorted(items, key=str) if isinstance(value, (set, frozenset)) else items
    if hasattr(value, "to_json"):
        return serialize(value.to_json())
    if is_dataclass(value):
        return {name: serialize(getattr(value, name)) for name in value.__dataclass_fields__}
    return str(value)


def param_key(params: dict) -> str:
    """Stable text key for a parameter set."""
    return ",".join(f"{key}={serialize(params[key])}" for key in sorted(params))


@dataclass
class CheckReport:
    """Outcome of a single verification check.

    Attributes:
        check: Name of the check, such as "whittaker/support".
        params: Parameters identifying the run, such as the prime and representation label.
        status: One of "pass", "fail", "recorded", or "info".
        measured_constant: The measured value for checks that report a constant.
        locked_constant: The recorded value the measurement was compared against.
        details: Free form data, including counterexamples under "failures".
    """

    check: str
    params: dict = field(default_factory=dict)
    status: str = STATUS_PASS
    measured_constant: Any = None
    locked_constant: Any = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != STATUS_FAIL

    @property
    def key(self) -> str:
        return f"{self.check}/{param_key(self.params)}"

    def fail(self, reason: str, **counterexample: Any) -> None:
        """Mark the report failed and record a counterexample."""
        self.status = STATUS_FAIL
        failures = self.details.setdefault("failures", [])
        if len(failures) < MAX_LISTED_FAILURES:
            failures.append({"reason": reason, **counterexample})
        self.details["failure_count"] = self.details.get("failure_count", 0) + 1

    def require(self, condition: bool, reason: str, **counterexample: Any) -> bool:
        """Fail the report unless the condition holds; returns the condition."""
        if not condition:
            self.fail(reason, **counterexample)
        return condition

    def merge(self, other: "CheckReport", prefix: str) -> None:
        """Fold a sub-report into this one, keeping its failures and details under a prefix."""
        self.details[prefix] = {"status": other.status, **other.details}
        if other.status == STATUS_FAIL:
            self.status = STATUS_FAIL
            self.details["failure_count"] = self.details.get("failure_count", 0) + other.details.get("failure_count", 1)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "params": serialize(self.params),
            "status": self.status,
            "measured_constant": serialize(self.measured_constant),
            "locked_constant": serialize(self.locked_constant),
            "details": serialize(self.details),
        }


def dumps(data: Any) -> str:
    """Deterministic JSON text with sorted keys and a trailing newline."""
    return json.dumps(serialize(data), sort_keys=True, indent=2) + "\n"


def write_json(data: Any, path: str | PathLike) -> None:
    """Write JSON data atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_path = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(handle, "w", encoding="utf-8") as file:
        file.write(dumps(data))
    os.replace(temp_path, path)


def write_reports(reports: Iterable[CheckReport], path: str | PathLike) -> None:
    """Write reports sorted by key so repeated runs are byte identical."""
    write_json([report.to_json() for report in sorted(reports, key=lambda report: report.key)], path)


def write_csv(rows: Iterable[dict], columns: list[str], path: str | PathLike) -> None:
    """Write rows with a fixed column order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as file:
        writer = csv.DictWriter(file, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({column: serialize(row.get(column)) for column in columns})


class LockedConstants:
    """JSON store of constants recorded by the first run and compared by later runs."""

    def __init__(
        self,
        path: str | PathLike | None,
        update: bool = False,
        tolerance: float = LOCK_TOLERANCE,
        logger: logging.Logger | None = None,
    ) -> None:
        """Load the store.

        Args:
            path: Location of the JSON file; None keeps the store in memory only.
            update: Re-record every constant instead of comparing.
            tolerance: Relative slack of the comparison.
            logger: Optional logger for recorded and compared values.
        """
        self.path = Path(path) if path is not None else None
        self.update = update
        self.tolerance = tolerance
        self.logger = get_logger(logger)
        self.values: dict[str, float] = {}
        self.dirty = False
        if self.path is not None and self.path.exists():
            try:
                with open(self.path, encoding="utf-8") as file:
                    self.values = {key: float(value) for key, value in json.load(file).items()}
            except (OSError, ValueError) as error:
                raise CacheError(f"Unreadable locked constants {self.path}: {error}") from error

    def compare(self, key: str, measured: float, direction: str = UPPER) -> tuple[str, float]:
        """Record or compare a constant.

        Args:
            key: Identifier of the constant.
            measured: The freshly measured value.
            direction: "upper" when the measurement must not exceed the locked value, "floor" for the mirror.

        Returns:
            The status and the locked value in effect.
        """
        measured = float(measured)
        if self.update or key not in self.values:
            self.values[key] = measured
            self.dirty = True
            self.logger.info(f"Recorded locked constant {key} = {measured!r}")
            return STATUS_RECORDED, measured
        locked = self.values[key]
        slack = self.tolerance * max(abs(locked), 1e-300)
        within = measured <= locked + slack if direction == UPPER else measured >= locked - slack
        return (STATUS_PASS if within else STATUS_FAIL), locked

    def apply(self, report: CheckReport, direction: str = UPPER) -> CheckReport:
        """Compare a report's measured constant with the store, updating its status."""
        if report.measured_constant is None:
            return report
        status, locked = self.compare(report.key, report.measured_constant, direction)
        report.locked_constant = locked
        if status == STATUS_FAIL:
            report.fail("measured constant outside locked value", measured=report.measured_constant, locked=locked)
        elif status == STATUS_RECORDED and report.status == STATUS_PASS:
            report.status = STATUS_RECORDED
        return report

    def save(self) -> None:
        """Persist recorded values when anything changed."""
        if self.path is None or not self.dirty:
            return
        write_json(dict(sorted(self.values.items())), self.path)
        self.dirty = False
