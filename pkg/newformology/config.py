"""Run configuration from defaults, an INI file, and command line flags."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Mapping

import sympy

from newformology.exceptions import ConfigError

SECTION = "newformology"
DEFAULT_LOCKED_NAME = "locked_constants.json"


def _to_optional_str(text: str) -> str | None:
    text = text.strip()
    return None if text.lower() in ("", "none") else text


def _to_int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every command.

    Attributes:
        seed: Seed of every random choice; logged at startup.
        ring: Value ring of Whittaker evaluations, "exact" or "complex".
        cache_dir: Directory of the character and epsilon cache; None disables it.
        workers: Worker count of the verification pool.
        use_threads: Use threads instead of processes for workers.
        output_dir: Directory receiving JSON reports and CSV tables.
        locked_file: Locked constants store; defaults to a file in the output directory.
        update_locked: Re-record every locked constant.
        primes: Primes of the representation catalog.
        n_max: Largest conductor exponent in the catalog at p < 5.
        n_max_large: Largest conductor exponent in the catalog at p >= 5.
        samples: Sampled points of the idempotency check.
        eigen_samples: Sampled Whittaker points of the eigenvector check.
        draws: Draws of the Hecke constraint sampler.
        recounts: Random configurations of the double box recount.
        l_max: Largest l of the counting sweep.
        tolerance: Relative slack when comparing locked constants.
        epsilon: The fixed eps of numeric bound evaluations.
        bessel_max_order: Largest order t accepted by the Bessel evaluator.
        bessel_max_argument: Largest argument y accepted by the Bessel evaluator.
        log_level: Name of the root log level.
        log_file: Optional log file next to the console handler.
    """

    seed: int = 0
    ring: str = "exact"
    cache_dir: str | None = None
    workers: int = 1
    use_threads: bool = True
    output_dir: str = "reports"
    locked_file: str | None = None
    update_locked: bool = False
    primes: tuple[int, ...] = (2, 3, 5)
    n_max: int = 4
    n_max_large: int = 3
    samples: int = 50
    eigen_samples: int = 10
    draws: int = 10_000
    recounts: int = 100
    l_max: int = 50
    tolerance: float = 1e-9
    epsilon: float = 0.01
    bessel_max_order: float = 100.0
    bessel_max_argument: float = 500.0
    log_level: str = "INFO"
    log_file: str | None = None

    def __post_init__(self) -> None:
        problems = []
        if self.ring not in ("exact", "complex"):
            problems.append(f"ring must be exact or complex: {self.ring}")
        if self.workers < 1:
            problems.append(f"workers must be at least 1: {self.workers}")
        if not self.primes or not all(sympy.isprime(p) for p in self.primes):
            problems.append(f"primes must be a non-empty list of primes: {self.primes}")
        if self.n_max < 0 or self.n_max_large < 0:
            problems.append(f"catalog bounds must be non-negative: {self.n_max}, {self.n_max_large}")
        if not 0 < self.epsilon < 1:
            problems.append(f"epsilon must lie in (0, 1): {self.epsilon}")
        if min(self.samples, self.eigen_samples, self.draws, self.recounts, self.l_max) < 1:
            problems.append("sample counts must be positive")
        if problems:
            raise ConfigError("; ".join(problems))

    def n_max_for(self, p: int) -> int:
        """Catalog bound at a prime."""
        return self.n_max if p < 5 else self.n_max_large

    @property
    def locked_path(self) -> Path:
        return Path(self.locked_file) if self.locked_file else Path(self.output_dir) / DEFAULT_LOCKED_NAME

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


# Read through ConfigParser.getboolean.
_BOOLEAN_KEYS = ("use_threads", "update_locked")

_CONVERTERS: dict[str, Callable[[str], Any]] = {
    "seed": int,
    "ring": str.strip,
    "cache_dir": _to_optional_str,
    "workers": int,
    "output_dir": str.strip,
    "locked_file": _to_optional_str,
    "primes": _to_int_tuple,
    "n_max": int,
    "n_max_large": int,
    "samples": int,
    "eigen_samples": int,
    "draws": int,
    "recounts": int,
    "l_max": int,
    "tolerance": float,
    "epsilon": float,
    "bessel_max_order": float,
    "bessel_max_argument": float,
    "log_level": lambda text: text.strip().upper(),
    "log_file": _to_optional_str,
}


def load_config_file(path: str | PathLike) -> dict[str, Any]:
    """Read the [newformology] section of an INI file into typed values.

    Raises:
        ConfigError: If the file is missing or unreadable, has other sections, or holds unknown keys or bad values.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as file:
            parser.read_file(file)
    except (OSError, configparser.Error) as error:
        raise ConfigError(f"Unreadable configuration {path}: {error}") from error
    extra = [section for section in parser.sections() if section != SECTION]
    if extra:
        raise ConfigError(f"Unknown sections in {path}: {extra}")
    if not parser.has_section(SECTION):
        return {}
    values = {}
    for key, text in parser.items(SECTION):
        name = key.replace("-", "_")
        if name not in _CONVERTERS and name not in _BOOLEAN_KEYS:
            raise ConfigError(f"Unknown configuration key in {path}: {key}")
        try:
            if name in _BOOLEAN_KEYS:
                values[name] = parser.getboolean(SECTION, key)
            else:
                values[name] = _CONVERTERS[name](text)
        except ValueError as error:
            raise ConfigError(f"Bad value for {key} in {path}: {text!r}") from error
    return values


def resolve_config(overrides: Mapping[str, Any] | None = None, path: str | PathLike | None = None) -> RunConfig:
    """Merge defaults, the configuration file and explicit overrides, in increasing priority.

    Overrides set to None are treated as absent, so unset command line flags fall through to the file.

    Raises:
        ConfigError: If an override names an unknown setting, or the merged values are invalid.
    """
    values = load_config_file(path) if path is not None else {}
    for name, value in (overrides or {}).items():
        if name not in _CONVERTERS and name not in _BOOLEAN_KEYS:
            raise ConfigError(f"Unknown setting: {name}")
        if value is not None:
            values[name] = tuple(value) if name == "primes" else value
    return RunConfig(**values)
