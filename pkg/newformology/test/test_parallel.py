"""Unit tests for parallel module."""

import time
from typing import Any
from typing import Callable

import pytest

from newformology import parallel


def _add(first: int, second: int, sleep: float = 0) -> int:
    """Return a sum after an optional delay."""
    if sleep:
        time.sleep(sleep)
    return first + second


def _constant() -> int:
    """Return a value without arguments."""
    return 123


def _fail(message: str) -> None:
    raise RuntimeError(message)


TEST_CASES = {
    "parallelize": {
        "unordered": {
            "args": [[_add] * 2],
            "kwargs": {
                "func_args": [(1, 2), (2, 3)],
                "func_kwargs": [{"sleep": 1}, {"sleep": 0.1}],
                "with_index": True,
            },
            "returns": [(1, 5), (0, 3)],
        },
        "ordered": {
            "args": [[_add] * 2],
            "kwargs": {
                "func_args": [(1, 2), (2, 3)],
                "func_kwargs": [{"sleep": 1}, {"sleep": 0.1}],
                "ordered": True,
                "with_index": True,
            },
            "returns": [(0, 3), (1, 5)],
        },
        "no index": {
            "args": [[_add] * 2],
            "kwargs": {
                "func_args": [(1, 2), (2, 3)],
                "ordered": True,
            },
            "returns": [3, 5],
        },
        "no arguments": {
            "args": [[_constant] * 2],
            "kwargs": {
                "ordered": True,
                "with_index": True,
            },
            "returns": [(0, 123), (1, 123)],
        },
        "processes": {
            "args": [[_constant] * 2],
            "kwargs": {
                "use_threads": False,
                "mp_context": "spawn",
                "ordered": True,
                "with_index": True,
            },
            "returns": [(0, 123), (1, 123)],
        },
        "error raised": {
            "args": [[_add] * 2],
            "kwargs": {
                "func_args": [(1, 2), ("2", 3)],
                "ordered": True,
            },
            "raises": TypeError,
        },
        "error returned": {
            "args": [[_add] * 2],
            "kwargs": {
                "func_args": [(1, 2), ("2", 3)],
                "ordered": True,
                "with_index": True,
                "exit_on_error": False,
            },
            "returns": [(0, 3), (1, 'TypeError(can only concatenate str (not "int") to str)')],
        },
        "positional sets too short": {
            "args": [[_add] * 2],
            "kwargs": {
                "func_args": [(1, 2)],
            },
            "raises": ValueError,
        },
        "keyword sets too short": {
            "args": [[_add] * 2],
            "kwargs": {
                "func_args": [(1, 2), (2, 3)],
                "func_kwargs": [{"sleep": 0.1}],
            },
            "raises": ValueError,
        },
    },
    "run_keyed_jobs": {
        "inline": {
            "args": [{"b": (_add, (1, 1)), "a": (_add, (2, 2))}],
            "returns": [("a", 4), ("b", 2)],
        },
        "pooled": {
            "args": [{"b": (_add, (1, 1)), "a": (_add, (2, 2)), "c": (_constant, ())}],
            "kwargs": {"max_workers": 3},
            "returns": [("a", 4), ("b", 2), ("c", 123)],
        },
        "mixed keys": {
            "args": [{2: (_constant, ()), "1": (_constant, ())}],
            "kwargs": {"max_workers": 2},
            "returns": [("1", 123), (2, 123)],
        },
    },
}


@pytest.mark.parametrize_test_case("test", TEST_CASES["parallelize"])
def test_parallelize(test: dict, function_tester: Callable) -> None:
    """Test parallelize over argument combinations, ordering and failures."""

    def _parallelize(*args: Any, **kwargs: Any) -> list:
        results = list(parallel.parallelize(*args, **kwargs))
        for index, result in enumerate(results):
            if isinstance(result, tuple) and isinstance(result[1], BaseException):
                results[index] = (result[0], f"{type(result[1]).__name__}({result[1]})")
        return results

    function_tester(test, _parallelize)


@pytest.mark.parametrize_test_case("test", TEST_CASES["run_keyed_jobs"])
def test_run_keyed_jobs(test: dict, function_tester: Callable) -> None:
    """Test keyed results in key order, inline and pooled."""
    function_tester(test, lambda *args, **kwargs: list(parallel.run_keyed_jobs(*args, **kwargs).items()))


def test_run_keyed_jobs_errors() -> None:
    """Test that failing jobs return their exception instead of stopping the others."""
    for workers in (1, 2):
        results = parallel.run_keyed_jobs({"ok": (_constant, ()), "bad": (_fail, ("broken",))}, max_workers=workers)
        assert results["ok"] == 123
        assert isinstance(results["bad"], RuntimeError)
        assert str(results["bad"]) == "broken"


def test_parallel_pool_executor_extras() -> None:
    """Test repeated submissions, single function submissions and consuming results twice."""
    results = []
    with parallel.ParallelPoolExecutor() as pool:
        pool.submit([_add] * 2, func_args=[(1, 2), (2, 3)], func_kwargs=[{"sleep": 0.5}, {"sleep": 0.2}])
        assert pool.submitted == 2
        pool.submit(_add, func_args=(3, 4), func_kwargs={"sleep": 0.1})
        assert pool.submitted == 3
        results.extend(pool.as_completed(ordered=True, with_index=True))
        assert pool.completed == 3
        results.extend(pool.as_completed())
    assert results == [(0, 3), (1, 5), (2, 7)]
