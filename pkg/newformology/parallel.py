"""Worker pools for verification jobs and data-parallel reductions."""

from __future__ import annotations

import logging
import multiprocessing
from concurrent import futures
from multiprocessing.context import BaseContext
from types import TracebackType
from typing import Any
from typing import Callable
from typing import Generator
from typing import Hashable

from newformology.logging import get_logger

Job = tuple[Callable, tuple, dict]


def _run_job(index: int, func: Callable, args: tuple, kwargs: dict) -> tuple[int, Any]:
    """Run one job, returning a raised exception as its result. Module level so process pools can pickle it."""
    try:
        return index, func(*args, **kwargs)
    except Exception as error:  # pylint: disable=broad-except
        return index, error


def _expand(
    funcs: Callable | list[Callable],
    func_args: tuple | list[tuple] | None,
    func_kwargs: dict | list[dict] | None,
) -> list[Job]:
    """Pair every function with its positional and keyword argument sets."""
    funcs = funcs if isinstance(funcs, list) else [funcs]
    if func_args is not None and not isinstance(func_args, list):
        func_args = [func_args]
    if func_kwargs is not None and not isinstance(func_kwargs, list):
        func_kwargs = [func_kwargs]
    func_args = func_args or [() for _ in funcs]
    func_kwargs = func_kwargs or [{} for _ in funcs]
    for name, sets in (("positional", func_args), ("keyword", func_kwargs)):
        if len(sets) != len(funcs):
            raise ValueError(f"{len(sets)} {name} argument sets given for {len(funcs)} functions")
    return list(zip(funcs, func_args, func_kwargs))


class ParallelPoolExecutor:
    """A thread or process pool whose jobs carry a running index.

    Results can be consumed as they complete or in submission order, optionally paired with their index. A job that
    raises yields its exception as the result, so one failing check does not stop the others.

    Example:
        with ParallelPoolExecutor(max_workers=4) as pool:
            pool.submit([verify_support] * len(catalog), [(pi,) for pi in catalog])
            for report in pool.as_completed(ordered=True):
                print(report.status)
    """

    def __init__(
        self,
        max_workers: int | None = None,
        use_threads: bool = True,
        mp_context: BaseContext | str | None = None,
    ) -> None:
        """Start the pool.

        Args:
            max_workers: Maximum number of workers; see `concurrent.futures` for defaults.
            use_threads: Use threads instead of processes. Exact arithmetic holds the GIL, so large sweeps need
                processes for a real speedup.
            mp_context: A multiprocessing context, or its name, used for process pools.
        """
        self._pending: dict[futures.Future, int] = {}
        self._ready: dict[int, Any] = {}
        self._submitted = 0
        self._completed = 0
        self._executor: futures.Executor
        if use_threads:
            self._executor = futures.ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="newformology")
        else:
            context = multiprocessing.get_context(mp_context) if isinstance(mp_context, str) else mp_context
            self._executor = futures.ProcessPoolExecutor(max_workers=max_workers, mp_context=context)

    def __enter__(self) -> ParallelPoolExecutor:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_value: BaseException | None,
        traceback: TracebackType | None,
    ) -> bool:
        self.shutdown()
        return False

    @property
    def completed(self) -> int:
        """Jobs whose results were yielded over the pool's lifetime."""
        return self._completed

    @property
    def submitted(self) -> int:
        """Jobs submitted over the pool's lifetime."""
        return self._submitted

    def submit(
        self,
        funcs: Callable | list[Callable],
        func_args: tuple | list[tuple] | None = None,
        func_kwargs: dict | list[dict] | None = None,
    ) -> list[futures.Future]:
        """Schedule func(*args, **kwargs) for every function, with one argument set per function.

        Raises:
            ValueError: If the argument sets do not match the functions in number.
        """
        submitted = []
        for func, args, kwargs in _expand(funcs, func_args, func_kwargs):
            future = self._executor.submit(_run_job, self._submitted, func, args, kwargs)
            self._pending[future] = self._submitted
            self._submitted += 1
            submitted.append(future)
        return submitted

    def _drain(self, ordered: bool) -> Generator[tuple[int, Any], None, None]:
        """Move ready results out, stopping at the first gap when order matters."""
        while self._ready:
            index = self._completed if ordered else next(iter(self._ready))
            if index not in self._ready:
                return
            self._completed += 1
            yield index, self._ready.pop(index)

    def as_completed(
        self,
        ordered: bool = False,
        with_index: bool = False,
        exit_on_error: bool = True,
    ) -> Generator[Any | tuple[int, Any], None, None]:
        """Yield results of the pending jobs.

        Args:
            ordered: Yield in submission order, holding early finishers until their turn.
            with_index: Yield (index, result) pairs.
            exit_on_error: Raise an exception returned by a job instead of yielding it.
        """
        for future in futures.as_completed(list(self._pending)):
            self._pending.pop(future)
            index, result = future.result()
            self._ready[index] = result
            for index, result in self._drain(ordered):
                if exit_on_error and isinstance(result, BaseException):
                    raise result
                yield (index, result) if with_index else result

    def shutdown(self, wait: bool = True) -> None:
        """Cancel jobs that have not started and release the workers; repeated calls are harmless."""
        self._executor.shutdown(wait=wait, cancel_futures=True)
        self._pending.clear()
        self._ready.clear()


def parallelize(
    funcs: list[Callable],
    func_args: list[tuple] | None = None,
    func_kwargs: list[dict] | None = None,
    max_workers: int | None = None,
    use_threads: bool = True,
    mp_context: BaseContext | str | None = "fork",
    with_index: bool = False,
    ordered: bool = False,
    exit_on_error: bool = True,
) -> Generator[Any | tuple[int, Any], None, None]:
    """Run functions in a temporary pool; see ParallelPoolExecutor.as_completed for the result options."""
    with ParallelPoolExecutor(max_workers=max_workers, use_threads=use_threads, mp_context=mp_context) as pool:
        pool.submit(funcs, func_args=func_args, func_kwargs=func_kwargs)
        yield from pool.as_completed(ordered=ordered, with_index=with_index, exit_on_error=exit_on_error)


def run_keyed_jobs(
    jobs: dict[Hashable, tuple[Callable, tuple]],
    max_workers: int | None = 1,
    use_threads: bool = True,
    logger: logging.Logger | None = None,
) -> dict[Hashable, Any]:
    """Run named jobs and collect their results keyed by name, independent of completion order.

    A single worker runs the jobs inline in key order, which keeps logs and exceptions in a stable sequence.

    Args:
        jobs: Mapping of job key to the function and its positional arguments.
        max_workers: Worker count; 1 or None with a single job runs inline.
        use_threads: Use threads instead of processes.
        logger: Optional logger for job progress.

    Returns:
        Results sorted by key. Exceptions raised by jobs are returned as results.
    """
    logger = get_logger(logger)
    keys = sorted(jobs, key=str)
    results: dict[Hashable, Any] = {}
    if (max_workers or 1) <= 1 or len(keys) <= 1:
        for key in keys:
            func, args = jobs[key]
            results[key] = _run_job(0, func, args, {})[1]
            logger.debug(f"Finished job {key}")
        return results
    funcs = [jobs[key][0] for key in keys]
    args = [jobs[key][1] for key in keys]
    for index, result in parallelize(
        funcs, args, max_workers=max_workers, use_threads=use_threads, with_index=True, exit_on_error=False
    ):
        results[keys[index]] = result
        logger.debug(f"Finished job {keys[index]}")
    return {key: results[key] for key in keys}
