"""Bundled reference fixtures for the 16-port Omega and 3DON networks.

The printed fixtures are stored verbatim.  Curated views apply the entries
of an errata file, each of which records the printed original, the
correction and the reason, so a correction never happens silently.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConflictError, InconsistentInputError
from .paths import Route, RoutingTable
from .topology import MinTopology, NetworkKind

__all__ = [
    "Erratum",
    "fixture_name",
    "parse_preference_text",
    "parse_pairs",
    "printed_preferences",
    "printed_pairs",
    "load_errata",
    "curated_preferences",
    "curated_pairs",
    "pair_errata",
    "reference_routes",
    "reference_table_rows",
]

FIXTURES = ("omega16", "3don16")


def _read(name: str) -> str:
    return resources.files("minstab").joinpath("data").joinpath(name).read_text()


def fixture_name(topo: MinTopology) -> str | None:
    """Fixture key for the bundled 16-port networks, else ``None``."""
    if topo.num_terminals != 16:
        return None
    return {NetworkKind.OMEGA: "omega16", NetworkKind.THREE_DISJOINT_OMEGA: "3don16"}.get(topo.kind)


def _check_fixture(name: str) -> None:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; expected one of {FIXTURES}")


def parse_preference_text(text: str) -> dict[int, list[int]]:
    """Parse ``SE k c1 c2 ...`` lines; blank lines are skipped."""
    lists: dict[int, list[int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] != "SE" or len(tokens) < 2 or not all(t.isdigit() for t in tokens[1:]):
            raise InconsistentInputError(f"line {lineno}: expected 'SE <id> <candidates...>'")
        sid = int(tokens[1])
        if sid in lists:
            raise InconsistentInputError(f"line {lineno}: switch {sid} listed twice")
        lists[sid] = [int(t) for t in tokens[2:]]
    return lists


_PAIR = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def parse_pairs(text: str) -> list[tuple[int, int]]:
    return [(int(a), int(b)) for a, b in _PAIR.findall(text)]


def printed_preferences(name: str) -> dict[int, list[int]]:
    _check_fixture(name)
    return parse_preference_text(_read(f"{name}_preferences.txt"))


def printed_pairs(name: str) -> list[tuple[int, int]]:
    _check_fixture(name)
    return parse_pairs(_read(f"{name}_pairs.txt"))


@dataclass(frozen=True)
class Erratum:
    fixture: str
    switch: int
    printed: tuple[int, ...]
    curated: tuple[int, ...]
    reason: str


def load_errata(path: str | Path | None = None) -> tuple[Erratum, ...]:
    """Read an errata file; the bundled one when ``path`` is ``None``."""
    text = _read("errata.json") if path is None else Path(path).read_text()
    try:
        data = json.loads(text)
        return tuple(
            Erratum(e["fixture"], int(e["switch"]), tuple(e["printed"]), tuple(e["curated"]), e["reason"])
            for e in data["entries"]
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InconsistentInputError(f"malformed errata file {path or '<bundled>'}: {exc}") from None


def _entries(errata, key: str) -> dict[int, Erratum]:
    if errata is None:
        errata = load_errata()
    return {e.switch: e for e in errata if e.fixture == key}


def curated_preferences(name: str, errata: tuple[Erratum, ...] | None = None) -> dict[int, tuple[int, ...]]:
    """Printed preference lists with every logged correction applied.

    Raises :class:`ConflictError` when an entry's printed form no longer
    matches the fixture, or when a list still repeats a candidate.
    """
    printed = printed_preferences(name)
    fixes = _entries(errata, f"{name}_preferences")
    out = {}
    for sid, cands in printed.items():
        fix = fixes.pop(sid, None)
        if fix is not None:
            if list(fix.printed) != cands:
                raise ConflictError(f"erratum for SE {sid} does not match the printed list")
            cands = list(fix.curated)
        if len(set(cands)) != len(cands):
            raise ConflictError(f"SE {sid} repeats a candidate and has no erratum")
        out[sid] = tuple(cands)
    if fixes:
        raise ConflictError(f"errata name switches absent from {name}: {sorted(fixes)}")
    return out


def curated_pairs(name: str, errata: tuple[Erratum, ...] | None = None) -> list[tuple[int, int]]:
    pairs = printed_pairs(name)
    for fix in _entries(errata, f"{name}_pairs").values():
        old, new = tuple(fix.printed), tuple(fix.curated)
        if old not in pairs:
            raise ConflictError(f"erratum pair {old} is not in the printed pairs")
        pairs[pairs.index(old)] = new
    return pairs


def pair_errata(name: str, errata: tuple[Erratum, ...] | None = None) -> list[Erratum]:
    return list(_entries(errata, f"{name}_pairs").values())


def reference_routes(name: str) -> RoutingTable:
    _check_fixture(name)
    data = json.loads(_read("routes.json"))[name]
    routes = []
    for r in data["routes"]:
        route = Route(tuple(r["switches"]))
        if route.path_length != r["path_length"]:
            raise ConflictError(f"reference route {route} has inconsistent length")
        routes.append(route)
    return RoutingTable(data["source"], data["destination"], tuple(routes))


def reference_table_rows() -> list[dict]:
    """Rows of the bundled stability comparison table, as typed dicts."""
    rows = []
    for row in csv.DictReader(io.StringIO(_read("stability_table.csv"))):
        rows.append(
            {
                "network": row["network"],
                "ties": int(row["ties"]),
                "optimal_pairs": int(row["optimal_pairs"]),
                "total_switches": int(row["total_switches"]),
                "max_pl": int(row["max_pl"]),
                "neglected": int(row["neglected"]),
                "status": row["status"],
            }
        )
    return rows
