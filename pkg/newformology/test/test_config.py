"""Unit tests for config module."""

from pathlib import Path
from typing import Callable

import pytest

from newformology import config
from newformology.config import RunConfig
from newformology.exceptions import ConfigError

TEST_CASES = {
    "RunConfig init": {
        "defaults": {
            "attributes": {
                "seed": 0,
                "ring": "exact",
                "workers": 1,
                "primes": (2, 3, 5),
                "n_max": 4,
                "n_max_large": 3,
                "epsilon": 0.01,
                "log_level": "INFO",
            },
        },
        "complex ring": {
            "kwargs": {"ring": "complex", "workers": 4},
            "attributes": {"ring": "complex", "workers": 4},
        },
        "float ring": {
            "kwargs": {"ring": "float"},
            "raises": ConfigError,
        },
        "no workers": {
            "kwargs": {"workers": 0},
            "raises": ConfigError,
        },
        "composite prime": {
            "kwargs": {"primes": (2, 4)},
            "raises": ConfigError,
        },
        "no primes": {
            "kwargs": {"primes": ()},
            "raises": ConfigError,
        },
        "negative catalog bound": {
            "kwargs": {"n_max_large": -1},
            "raises": ConfigError,
        },
        "epsilon too large": {
            "kwargs": {"epsilon": 1.0},
            "raises": ConfigError,
        },
        "no samples": {
            "kwargs": {"samples": 0},
            "raises": ConfigError,
        },
    },
    "load_config_file": {
        "typed values": {
            "args": [
                "[newformology]\nseed = 7\nuse-threads = off\nprimes = 2, 3\nlog_level = debug\ncache_dir = none\n"
            ],
            "returns": {"seed": 7, "use_threads": False, "primes": (2, 3), "log_level": "DEBUG", "cache_dir": None},
        },
        "no section": {
            "args": [""],
            "returns": {},
        },
        "unknown key": {
            "args": ["[newformology]\ncolour = blue\n"],
            "raises": ConfigError,
        },
        "extra section": {
            "args": ["[newformology]\nseed = 1\n[other]\nseed = 2\n"],
            "raises": ConfigError,
        },
        "bad integer": {
            "args": ["[newformology]\nworkers = many\n"],
            "raises": ConfigError,
        },
        "boolean spellings": {
            "args": ["[newformology]\nuse_threads = Yes\nupdate-locked = 1\n"],
            "returns": {"use_threads": True, "update_locked": True},
        },
        "bad boolean": {
            "args": ["[newformology]\nupdate_locked = maybe\n"],
            "raises": ConfigError,
        },
        "not an ini file": {
            "args": ["seed = 1\n"],
            "raises": ConfigError,
        },
    },
    "resolve_config": {
        "overrides only": {
            "kwargs": {"overrides": {"seed": 3, "primes": [2, 7], "workers": None}},
            "attributes": {"seed": 3, "primes": (2, 7), "workers": 1},
        },
        "unknown override": {
            "kwargs": {"overrides": {"colour": "blue"}},
            "raises": ConfigError,
        },
        "invalid merge": {
            "kwargs": {"overrides": {"ring": "float"}},
            "raises": ConfigError,
        },
    },
}


@pytest.mark.parametrize_test_case("test", TEST_CASES["RunConfig init"])
def test_run_config_init(test: dict, function_tester: Callable) -> None:
    """Test defaults and validation of run settings."""
    function_tester(test, RunConfig)


@pytest.mark.parametrize_test_case("test", TEST_CASES["load_config_file"])
def test_load_config_file(test: dict, function_tester: Callable, tmp_path: Path) -> None:
    """Test reading and converting the configuration file."""

    def _load(text: str) -> dict:
        path = tmp_path / "newformology.ini"
        path.write_text(text, encoding="utf-8")
        return config.load_config_file(path)

    function_tester(test, _load)


@pytest.mark.parametrize_test_case("test", TEST_CASES["resolve_config"])
def test_resolve_config(test: dict, function_tester: Callable) -> None:
    """Test merging of overrides over the defaults."""
    function_tester(test, config.resolve_config)


def test_resolve_config_priority(tmp_path: Path) -> None:
    """Test that explicit overrides win over the file and unset flags fall through to it."""
    path = tmp_path / "run.ini"
    path.write_text("[newformology]\nseed = 5\nworkers = 2\n", encoding="utf-8")
    resolved = config.resolve_config({"seed": 9, "workers": None}, path)
    assert resolved.seed == 9
    assert resolved.workers == 2
    with pytest.raises(ConfigError):
        config.load_config_file(tmp_path / "missing.ini")


def test_run_config_helpers() -> None:
    """Test the per prime catalog bound, the locked constants path and the JSON form."""
    settings = RunConfig(output_dir="out")
    assert settings.n_max_for(3) == 4
    assert settings.n_max_for(5) == 3
    assert settings.locked_path == Path("out") / "locked_constants.json"
    assert RunConfig(locked_file="locked.json").locked_path == Path("locked.json")
    assert settings.to_json()["primes"] == (2, 3, 5)
