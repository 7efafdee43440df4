"""Route enumeration, switch distances and fault-aware rerouting."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import InvalidSwitchError, InvalidTerminalError
from .topology import MinTopology

__all__ = [
    "Route",
    "RoutingTable",
    "enumerate_routes",
    "shortest_path_length",
    "reachable_set",
    "route_with_faults",
]


@dataclass(frozen=True)
class Route:
    switches: tuple[int, ...]

    @property
    def path_length(self) -> int:
        """Number of links traversed."""
        return len(self.switches) - 1

    def to_dict(self) -> dict:
        return {"switches": list(self.switches), "path_length": self.path_length}

    def __str__(self) -> str:
        return " - ".join(f"SE {s}" for s in self.switches)


@dataclass(frozen=True)
class RoutingTable:
    source: int
    destination: int
    routes: tuple[Route, ...]

    @property
    def primary(self) -> Route | None:
        return self.routes[0] if self.routes else None

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "destination": self.destination,
            "routes": [r.to_dict() for r in self.routes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        """Aligned table with one row per route."""
        rows = [("Source", "Destination", "Path", "Path-length")]
        for r in self.routes:
            rows.append((str(self.source), str(self.destination), str(r), str(r.path_length)))
        widths = [max(len(row[i]) for row in rows) for i in range(4)]
        return "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows
        ) + "\n"


def _check_terminal(topo: MinTopology, t: int, role: str) -> None:
    if not isinstance(t, int) or isinstance(t, bool) or not 0 <= t < topo.num_terminals:
        raise InvalidTerminalError(f"{role} terminal {t!r} outside 0..{topo.num_terminals - 1}")


def reachable_set(topo: MinTopology, a: int) -> frozenset[int]:
    """All switches reachable from ``a`` by a non-empty directed path."""
    topo.switch(a)
    seen: set[int] = set()
    stack = list(topo.successors(a))
    while stack:
        s = stack.pop()
        if s not in seen:
            seen.add(s)
            stack.extend(topo.successors(s))
    return frozenset(seen)


def shortest_path_length(topo: MinTopology, a: int, b: int) -> int | None:
    """Minimum link count from ``a`` to ``b``; ``None`` when unreachable."""
    topo.switch(a)
    topo.switch(b)
    dist = {a: 0}
    queue = deque([a])
    while queue:
        s = queue.popleft()
        if s == b:
            return dist[s]
        for t in topo.successors(s):
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    return None


def enumerate_routes(topo: MinTopology, source: int, destination: int) -> RoutingTable:
    """Every directed path from the source's entry switch to the destination's exit switch.

    Paths are discovered depth-first in port_rank order, then stably sorted
    by length, so the first route of each length is the earliest discovered.
    """
    _check_terminal(topo, source, "source")
    _check_terminal(topo, destination, "destination")
    start = topo.ingress[source].switch
    goal = topo.egress[destination].switch

    can_reach: dict[int, bool] = {}

    def reaches(s: int) -> bool:
        if s not in can_reach:
            can_reach[s] = s == goal or any(reaches(t) for t in topo.successors(s))
        return can_reach[s]

    found: list[tuple[int, ...]] = []

    def walk(path: list[int]) -> None:
        s = path[-1]
        if s == goal:
            found.append(tuple(path))
            return
        for t in topo.successors(s):
            if reaches(t):
                path.append(t)
                walk(path)
                path.pop()

    if reaches(start):
        walk([start])
    found.sort(key=len)
    return RoutingTable(source, destination, tuple(Route(p) for p in found))


def route_with_faults(
    topo: MinTopology, source: int, destination: int, failed: Iterable[int] = ()
) -> Route | None:
    """First route in discovery order that avoids every failed switch, else ``None``."""
    failed = set(failed)
    for sid in failed:
        if sid not in topo:
            raise InvalidSwitchError(f"unknown failed switch {sid!r} in {topo.name}")
    for route in enumerate_routes(topo, source, destination).routes:
        if failed.isdisjoint(route.switches):
            return route
    return None
