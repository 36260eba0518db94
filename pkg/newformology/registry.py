"""Dispatch of command paths such as "verify/delta" or "whittaker/{action}" to handlers."""

from __future__ import annotations

import inspect
import logging
import re
from functools import total_ordering
from typing import Any
from typing import Callable

from newformology.exceptions import UnsupportedError
from newformology.logging import get_logger


@total_ordering
class Route:
    """A path template with static segments and {variable} segments.

    Routes sort by specificity: static routes first, then routes with more static segments, earlier static segments,
    and fewer variables. The first matching route in that order wins.
    """

    def __init__(self, path: str) -> None:
        """Parse a template.

        Args:
            path: Slash separated template, such as "verify/{check}".

        Raises:
            ValueError: If a variable is unterminated or repeated.
        """
        self.path = path.strip("/")
        self.variables: list[str] = []
        self.static_segments: list[tuple[int, int]] = []
        pattern = []
        for index, part in enumerate(self.path.split("/")):
            if part.startswith("{"):
                if not part.endswith("}"):
                    raise ValueError(f"Variable ({part}) missing closing }} in path: {path}")
                name = part[1:-1]
                if name in self.variables:
                    raise ValueError(f"Variable ({name}) duplicated in path: {path}")
                self.variables.append(name)
                pattern.append(rf"(?P<{name}>[^/]+)")
            else:
                self.static_segments.append((index, len(part)))
                pattern.append(re.escape(part))
        self.pattern = re.compile("^" + "/".join(pattern) + "$")
        # Templates differing only in variable names match the same paths.
        self.shape = "/".join("{}" if part.startswith("{") else part for part in self.path.split("/"))

    @property
    def static(self) -> bool:
        return not self.variables

    def _rank(self) -> tuple:
        if self.static:
            return (0, -len(self.path))
        positions = tuple((index, -length) for index, length in self.static_segments)
        return (1, -len(self.static_segments), positions, len(self.variables))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Route) and self._rank() == other._rank()

    def __lt__(self, other: Route) -> bool:
        return self._rank() < other._rank()

    def __hash__(self) -> int:
        return hash(self.path)

    def __repr__(self) -> str:
        return f"Route({self.path!r})"

    def match(self, path: str) -> dict[str, str] | None:
        """Variables of a matching path, or None when the path does not match."""
        found = self.pattern.match(path.strip("/"))
        return found.groupdict() if found else None


class CheckRegistry:
    """Handlers registered by path template, resolved by static lookup and then by route specificity.

    Example:
        registry = CheckRegistry()

        @registry.route("verify/{check}")
        def run_check(check: str, config: RunConfig) -> list[CheckReport]:
            ...

        registry.dispatch("verify/delta", config=config)
    """

    def __init__(self, logger: logging.Logger | None = None) -> None:
        """Create an empty registry.

        Args:
            logger: Optional logger for registrations and dispatches.
        """
        self.logger = get_logger(logger)
        self.static_handlers: dict[str, Callable] = {}
        self.dynamic_handlers: list[tuple[Route, Callable]] = []

    def add(self, path: str, handler: Callable) -> Route:
        """Register a handler for a path template.

        Raises:
            ValueError: If the template is already registered.
        """
        route = Route(path)
        if route.static:
            if route.path in self.static_handlers:
                raise ValueError(f"Path already registered: {path}")
            self.static_handlers[route.path] = handler
        else:
            if any(existing.shape == route.shape for existing, _ in self.dynamic_handlers):
                raise ValueError(f"Path already registered: {path}")
            self.dynamic_handlers.append((route, handler))
            self.dynamic_handlers.sort(key=lambda item: item[0])
        self.logger.debug(f"Registered {path}")
        return route

    def route(self, path: str) -> Callable[[Callable], Callable]:
        """Decorator form of add."""

        def _decorator(func: Callable) -> Callable:
            self.add(path, func)
            return func

        return _decorator

    def resolve(self, path: str) -> tuple[Callable, dict[str, str]]:
        """Find the handler of a path and the variables it binds.

        Raises:
            UnsupportedError: If no route matches.
        """
        path = path.strip("/")
        handler = self.static_handlers.get(path)
        if handler is not None:
            return handler, {}
        for route, candidate in self.dynamic_handlers:
            variables = route.match(path)
            if variables is not None:
                return candidate, variables
        raise UnsupportedError(f"No command registered for {path}")

    def dispatch(self, path: str, **kwargs: Any) -> Any:
        """Call the handler of a path with its route variables and whichever extra arguments it accepts."""
        handler, variables = self.resolve(path)
        accepted = inspect.signature(handler).parameters
        arguments = {name: value for name, value in kwargs.items() if name in accepted}
        arguments.update(variables)
        self.logger.debug(f"Dispatching {path}")
        return handler(**arguments)

    @property
    def paths(self) -> list[str]:
        """Registered templates, static first and then by specificity."""
        return sorted(self.static_handlers) + [route.path for route, _ in self.dynamic_handlers]
