"""Unit tests for cli module."""

import json
from pathlib import Path
from typing import Callable

import pytest

from newformology import cli

TEST_CASES = {
    "main": {
        "level bound": {
            "args": [["bound", "--level", "12"]],
            "returns": cli.EXIT_OK,
        },
        "expansion bound": {
            "args": [["bound", "--qg", "2", "--height", "10", "--y", "0.5"]],
            "returns": cli.EXIT_OK,
        },
        "level with bad character level": {
            "args": [["bound", "--level", "12", "--character-level", "5"]],
            "returns": cli.EXIT_ERROR,
        },
        "count": {
            "args": [["count", "--l", "1", "--delta", "0"]],
            "returns": cli.EXIT_OK,
        },
        "count in the lower half plane": {
            "args": [["count", "--z", "0.5-1i", "--l", "1", "--delta", "0"]],
            "returns": cli.EXIT_ERROR,
        },
        "bessel": {
            "args": [["bessel", "--t", "2", "--y", "3"]],
            "returns": cli.EXIT_OK,
        },
        "bessel argument out of range": {
            "args": [["bessel", "--t", "1", "--y", "600"]],
            "returns": cli.EXIT_ERROR,
        },
        "table": {
            "args": [["table"]],
            "returns": cli.EXIT_OK,
        },
        "verify case order": {
            "args": [["verify", "caseorder"]],
            "returns": cli.EXIT_OK,
        },
        "missing configuration file": {
            "args": [["--config", "missing.ini", "table"]],
            "returns": cli.EXIT_ERROR,
        },
        "invalid override": {
            "args": [["--workers", "0", "table"]],
            "returns": cli.EXIT_ERROR,
        },
    },
}


@pytest.mark.parametrize_test_case("test", TEST_CASES["main"])
def test_main(test: dict, function_tester: Callable, tmp_path: Path) -> None:
    """Test exit codes of commands and of configuration and range errors."""
    function_tester(test, lambda argv: cli.main(["--output-dir", str(tmp_path), *argv]))


def test_main_outputs(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    """Test printed results, report files named after the command and the CSV table."""
    assert cli.main(["--output-dir", str(tmp_path), "bound", "--level", "12"]) == cli.EXIT_OK
    assert capsys.readouterr().out == "N0^(1/6) N1^(1/3) lambda^(5/24)\n"
    (report,) = json.loads((tmp_path / "bound.json").read_text(encoding="utf-8"))
    assert report["check"] == "assembly/level"
    assert report["details"]["N2"] == 3

    assert cli.main(["--output-dir", str(tmp_path), "table"]) == cli.EXIT_OK
    lines = (tmp_path / "intro_table.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "N,M,N0,N1,M1,upper,lower,conjectured_sharp"
    assert (tmp_path / "table.json").exists()


def test_main_locked_constants(tmp_path: Path) -> None:
    """Test that the first count records its ratio and the repeated count is compared against it."""
    argv = ["--output-dir", str(tmp_path), "count", "--l", "2", "--delta", "0"]
    assert cli.main(argv) == cli.EXIT_OK
    (first,) = json.loads((tmp_path / "count.json").read_text(encoding="utf-8"))
    assert first["status"] == "info"
    assert first["locked_constant"] == first["measured_constant"]
    assert first["details"]["count"] == 2
    locked = json.loads((tmp_path / "locked_constants.json").read_text(encoding="utf-8"))
    assert list(locked) == ["counting/count/N2=1,delta=0.0,l=2,z=0+1i"]

    assert cli.main(argv) == cli.EXIT_OK
    (second,) = json.loads((tmp_path / "count.json").read_text(encoding="utf-8"))
    assert second["status"] == "info"
    assert second["locked_constant"] == first["measured_constant"]
