"""Staged switch-fabric topologies.

A :class:`MinTopology` is an immutable layered DAG of switching elements
(SEs).  Switch ids are 1-based and stage-major: stage 0 holds ``1..m``,
stage 1 holds ``m+1..2m`` and so on.  Links only join adjacent stages.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import jsonschema

from .errors import (
    InvalidSizeError,
    InvalidSwitchError,
    TopologyInvariantError,
    TopologyParseError,
)

__all__ = [
    "NetworkKind",
    "Switch",
    "Link",
    "Port",
    "MinTopology",
    "perfect_shuffle",
    "build_omega",
    "build_3don",
    "build_custom",
    "validate_topology",
    "topology_to_dict",
    "topology_from_dict",
    "dump_topology",
    "save_topology",
    "load_topology",
    "export_dot",
]


class NetworkKind(str, Enum):
    OMEGA = "omega"
    THREE_DISJOINT_OMEGA = "3don"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Switch:
    id: int
    stage: int
    in_arity: int
    out_arity: int


@dataclass(frozen=True, order=True)
class Link:
    source: int
    target: int
    # Order of this link among the source's outgoing links.
    port_rank: int = 0


@dataclass(frozen=True)
class Port:
    switch: int
    port: int


@dataclass(frozen=True)
class MinTopology:
    name: str
    kind: NetworkKind
    num_terminals: int
    arity: int
    switches: tuple[Switch, ...]
    links: tuple[Link, ...]
    ingress: Mapping[int, Port]
    egress: Mapping[int, Port]

    @cached_property
    def _by_id(self) -> dict[int, Switch]:
        return {sw.id: sw for sw in self.switches}

    @cached_property
    def _out(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[Link]] = {sw.id: [] for sw in self.switches}
        for link in self.links:
            out.setdefault(link.source, []).append(link)
        return {
            sid: tuple(l.target for l in sorted(ls, key=lambda l: (l.port_rank, l.target)))
            for sid, ls in out.items()
        }

    @cached_property
    def _in(self) -> dict[int, tuple[int, ...]]:
        inc: dict[int, list[int]] = {sw.id: [] for sw in self.switches}
        for link in self.links:
            inc.setdefault(link.target, []).append(link.source)
        return {sid: tuple(sorted(v)) for sid, v in inc.items()}

    @cached_property
    def stages(self) -> tuple[tuple[int, ...], ...]:
        """Switch ids grouped by stage, each group in ascending id order."""
        if not self.switches:
            return ()
        groups: list[list[int]] = [[] for _ in range(max(sw.stage for sw in self.switches) + 1)]
        for sw in self.switches:
            groups[sw.stage].append(sw.id)
        return tuple(tuple(sorted(g)) for g in groups)

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    def switch(self, sid: int) -> Switch:
        try:
            return self._by_id[sid]
        except KeyError:
            raise InvalidSwitchError(f"unknown switch id {sid!r} in {self.name}") from None

    def __contains__(self, sid: object) -> bool:
        return sid in self._by_id

    def stage_of(self, sid: int) -> int:
        return self.switch(sid).stage

    def row(self, sid: int) -> int:
        """Position of a switch within its stage, counted from 0."""
        sw = self.switch(sid)
        return self.stages[sw.stage].index(sid)

    def successors(self, sid: int) -> tuple[int, ...]:
        """Direct successors in port_rank order."""
        self.switch(sid)
        return self._out.get(sid, ())

    def predecessors(self, sid: int) -> tuple[int, ...]:
        self.switch(sid)
        return self._in.get(sid, ())


def _log2(n: int) -> int:
    return n.bit_length() - 1


def _require_power_of_two(n: int, minimum: int = 2) -> int:
    if not isinstance(n, int) or isinstance(n, bool) or n < minimum or n & (n - 1):
        raise InvalidSizeError(f"network size must be a power of 2 and at least {minimum}, got {n!r}")
    return _log2(n)


def perfect_shuffle(i: int, n: int) -> int:
    """Rotate the log2(n)-bit representation of ``i`` left by one bit."""
    bits = _require_power_of_two(n, minimum=1)
    if not 0 <= i < n:
        raise ValueError(f"terminal index {i} out of range for size {n}")
    if bits == 0:
        return i
    return ((i << 1) & (n - 1)) | (i >> (bits - 1))


# Reference wiring of the 16-port networks.  The bottom switch of each stage
# lists its straight link first; all other switches rank links by target id.
OMEGA16_PORT_ORDER: Mapping[int, tuple[int, ...]] = {
    8: (16, 15),
    16: (24, 23),
    24: (32, 31),
}
THREE_DON16_PORT_ORDER: Mapping[int, tuple[int, ...]] = {
    8: (16, 14, 15),
    16: (24, 23),
    24: (32, 31),
    32: (40, 38, 39),
}
# The reference 16-port adjacency has no link 29->35 or 31->37 although the
# generic receive rule would produce them.
THREE_DON16_ABSENT_LINKS: frozenset[tuple[int, int]] = frozenset({(29, 35), (31, 37)})


def _shuffle_gap(n: int, per_stage: int) -> list[list[int]]:
    """Successor rows for one shuffle-wired stage gap (2x2 switches)."""
    rows = []
    for j in range(per_stage):
        rows.append(sorted({perfect_shuffle(2 * j + p, n) // 2 for p in range(2)}))
    return rows


def _fan(i: int, count: int) -> list[int]:
    if i == 0:
        cand: Iterable[int] = (0, 1, 2)
    elif i == count - 1:
        cand = (i, i - 1, i - 2)
    else:
        cand = (i - 2, i - 1, i + 1, i + 2)
    return sorted({j for j in cand if 0 <= j < count})


def _assemble(
    name: str,
    kind: NetworkKind,
    num_terminals: int,
    arity: int,
    stage_sizes: Sequence[int],
    gaps: Sequence[Sequence[Sequence[int]]],
    port_order: Mapping[int, Sequence[int]] | None = None,
    absent: Iterable[tuple[int, int]] = (),
    ingress: Mapping[int, Port] | None = None,
    egress: Mapping[int, Port] | None = None,
) -> MinTopology:
    """Turn row-indexed gap wiring into a numbered topology.

    ``gaps[s][j]`` lists the rows of stage ``s+1`` fed by row ``j`` of stage ``s``.
    """
    offsets = [0]
    for size in stage_sizes:
        offsets.append(offsets[-1] + size)
    ids = [[offsets[s] + j + 1 for j in range(size)] for s, size in enumerate(stage_sizes)]

    absent = set(absent)
    port_order = port_order or {}
    succ: dict[int, list[int]] = {}
    for s, gap in enumerate(gaps):
        for j, rows in enumerate(gap):
            src = ids[s][j]
            targets = sorted(ids[s + 1][r] for r in rows if (src, ids[s + 1][r]) not in absent)
            succ[src] = targets

    links = []
    for src, targets in succ.items():
        order = list(targets)
        if src in port_order:
            wanted = list(port_order[src])
            if sorted(wanted) != targets:
                raise TopologyInvariantError(
                    "port-rank", f"port order {wanted} for switch {src} does not match its links {targets}"
                )
            order = wanted
        links.extend(Link(src, t, rank) for rank, t in enumerate(order))
    links.sort(key=lambda l: (l.source, l.port_rank))

    first, last = ids[0], ids[-1]
    if ingress is None:
        per = num_terminals // len(first)
        ingress = {t: Port(first[t // per], t % per) for t in range(num_terminals)}
    if egress is None:
        per = num_terminals // len(last)
        egress = {t: Port(last[t // per], t % per) for t in range(num_terminals)}

    in_deg = {sid: 0 for row in ids for sid in row}
    out_deg = dict(in_deg)
    for link in links:
        out_deg[link.source] += 1
        in_deg[link.target] += 1
    ingress_ports = {sid: 0 for sid in first}
    for port in ingress.values():
        ingress_ports[port.switch] = ingress_ports.get(port.switch, 0) + 1
    egress_ports = {sid: 0 for sid in last}
    for port in egress.values():
        egress_ports[port.switch] = egress_ports.get(port.switch, 0) + 1

    switches = []
    last_stage = len(stage_sizes) - 1
    for s, row in enumerate(ids):
        for sid in row:
            in_arity = max(ingress_ports[sid], 1) if s == 0 else in_deg[sid]
            out_arity = max(egress_ports[sid], 1) if s == last_stage else out_deg[sid]
            switches.append(Switch(sid, s, in_arity, out_arity))

    topo = MinTopology(
        name=name,
        kind=kind,
        num_terminals=num_terminals,
        arity=arity,
        switches=tuple(switches),
        links=tuple(links),
        ingress=dict(sorted(ingress.items())),
        egress=dict(sorted(egress.items())),
    )
    validate_topology(topo)
    return topo


def build_omega(n: int, port_order: Mapping[int, Sequence[int]] | None = None) -> MinTopology:
    """Build an ``n x n`` Omega network of 2x2 switches.

    Stage ``s`` row ``j`` port ``p`` drives line ``2j+p``; the perfect
    shuffle of that line selects the next-stage row.  For ``n == 16`` the
    reference port ordering is applied unless ``port_order`` is given.
    """
    stages = _require_power_of_two(n, minimum=4)
    per = n // 2
    if port_order is None:
        port_order = OMEGA16_PORT_ORDER if n == 16 else {}
    gaps = [_shuffle_gap(n, per) for _ in range(stages - 1)]
    name = "OMIN" if n == 16 else f"OMIN-{n}"
    return _assemble(name, NetworkKind.OMEGA, n, 2, [per] * stages, gaps, port_order)


def build_3don(
    n: int,
    port_order: Mapping[int, Sequence[int]] | None = None,
    absent_links: Iterable[tuple[int, int]] | None = None,
) -> MinTopology:
    """Build an ``n x n`` 3-disjoint-paths Omega network.

    One stage longer than Omega.  First-stage switch ``i`` feeds next-stage
    rows ``i-2, i-1, i+1, i+2`` (``0, 1, 2`` for the top switch and
    ``i, i-1, i-2`` for the bottom one), dropping rows outside the stage.
    Last-stage switches receive from the mirrored row set; the stages in
    between are shuffle-wired.  For ``n == 16`` the reference adjacency and
    port ordering are used unless overridden.
    """
    bits = _require_power_of_two(n, minimum=8)
    per = n // 2
    stages = bits + 1
    if port_order is None:
        port_order = THREE_DON16_PORT_ORDER if n == 16 else {}
    if absent_links is None:
        absent_links = THREE_DON16_ABSENT_LINKS if n == 16 else ()

    gaps: list[list[list[int]]] = [[_fan(i, per) for i in range(per)]]
    for _ in range(stages - 3):
        gaps.append(_shuffle_gap(n, per))
    receive: list[list[int]] = [[] for _ in range(per)]
    for dst in range(per):
        for src in _fan(dst, per):
            receive[src].append(dst)
    gaps.append([sorted(r) for r in receive])

    name = "3DON" if n == 16 else f"3DON-{n}"
    return _assemble(
        name, NetworkKind.THREE_DISJOINT_OMEGA, n, 2, [per] * stages, gaps, port_order, absent_links
    )


def build_custom(
    name: str,
    stage_sizes: Sequence[int],
    links: Iterable[tuple[int, int]],
    num_terminals: int | None = None,
    port_order: Mapping[int, Sequence[int]] | None = None,
    arity: int = 2,
) -> MinTopology:
    """Build a custom layered network from explicit ``(source, target)`` id pairs.

    Terminals default to two per first-stage switch; ``num_terminals`` must
    divide evenly over both the first and the last stage.
    """
    if not stage_sizes or any(s < 1 for s in stage_sizes):
        raise TopologyInvariantError("nonempty-stage", f"bad stage sizes {list(stage_sizes)}")
    offsets = [0]
    for size in stage_sizes:
        offsets.append(offsets[-1] + size)
    stage_of = {}
    for s, size in enumerate(stage_sizes):
        for j in range(size):
            stage_of[offsets[s] + j + 1] = (s, j)

    gaps: list[list[list[int]]] = [[[] for _ in range(size)] for size in stage_sizes[:-1]]
    for src, dst in links:
        if src not in stage_of or dst not in stage_of:
            raise TopologyInvariantError("link-endpoints", f"link {src}->{dst} names an unknown switch")
        (s1, j1), (s2, j2) = stage_of[src], stage_of[dst]
        if s2 != s1 + 1:
            raise TopologyInvariantError("adjacent-stage-links", f"link {src}->{dst} spans stages {s1}->{s2}")
        if j2 in gaps[s1][j1]:
            raise TopologyInvariantError("duplicate-link", f"link {src}->{dst} repeated")
        gaps[s1][j1].append(j2)

    if num_terminals is None:
        num_terminals = 2 * stage_sizes[0]
    if num_terminals % stage_sizes[0] or num_terminals % stage_sizes[-1]:
        raise TopologyInvariantError(
            "terminal-map", f"{num_terminals} terminals cannot be spread over the end stages"
        )
    return _assemble(name, NetworkKind.CUSTOM, num_terminals, arity, stage_sizes, gaps, port_order)


def validate_topology(topo: MinTopology) -> MinTopology:
    """Check every structural invariant, raising :class:`TopologyInvariantError`."""

    def fail(invariant: str, detail: str):
        raise TopologyInvariantError(invariant, detail)

    if not topo.switches:
        fail("nonempty-stage", "topology has no switches")
    ids = [sw.id for sw in topo.switches]
    if len(set(ids)) != len(ids):
        fail("unique-ids", "duplicate switch ids")
    stages = sorted({sw.stage for sw in topo.switches})
    if stages != list(range(len(stages))):
        fail("nonempty-stage", f"stages must be 0..n-1 without gaps, got {stages}")
    expected = 1
    for group in topo.stages:
        if list(group) != list(range(expected, expected + len(group))):
            fail("stage-major-numbering", f"ids {list(group)} do not continue from {expected}")
        expected += len(group)
    last = len(topo.stages) - 1

    seen = set()
    ranks: dict[int, list[int]] = {}
    for link in topo.links:
        if link.source not in topo or link.target not in topo:
            fail("link-endpoints", f"link {link.source}->{link.target} names an unknown switch")
        if topo.stage_of(link.target) != topo.stage_of(link.source) + 1:
            fail(
                "adjacent-stage-links",
                f"link {link.source}->{link.target} joins stages "
                f"{topo.stage_of(link.source)} and {topo.stage_of(link.target)}",
            )
        if (link.source, link.target) in seen:
            fail("duplicate-link", f"link {link.source}->{link.target} repeated")
        seen.add((link.source, link.target))
        ranks.setdefault(link.source, []).append(link.port_rank)
    for src, rs in ranks.items():
        if sorted(rs) != list(range(len(rs))):
            fail("port-rank", f"switch {src} has port ranks {sorted(rs)}")

    for sw in topo.switches:
        if sw.in_arity < 1 or sw.out_arity < 1:
            fail("arity", f"switch {sw.id} has non-positive arity")
        if sw.stage != last and len(topo.successors(sw.id)) != sw.out_arity:
            fail("out-degree", f"switch {sw.id} has {len(topo.successors(sw.id))} links, out_arity {sw.out_arity}")
        if sw.stage != 0 and len(topo.predecessors(sw.id)) != sw.in_arity:
            fail("in-degree", f"switch {sw.id} has {len(topo.predecessors(sw.id))} links, in_arity {sw.in_arity}")

    for side, mapping, stage, arity_of in (
        ("ingress", topo.ingress, 0, lambda sw: sw.in_arity),
        ("egress", topo.egress, last, lambda sw: sw.out_arity),
    ):
        if sorted(mapping) != list(range(topo.num_terminals)):
            fail("terminal-map", f"{side} map must cover terminals 0..{topo.num_terminals - 1}")
        used = set()
        for t, port in mapping.items():
            if port.switch not in topo or topo.stage_of(port.switch) != stage:
                fail("terminal-map", f"{side} terminal {t} attaches to switch {port.switch} outside stage {stage}")
            if not 0 <= port.port < arity_of(topo.switch(port.switch)):
                fail("terminal-map", f"{side} terminal {t} uses port {port.port} of switch {port.switch}")
            if (port.switch, port.port) in used:
                fail("terminal-map", f"{side} port {port.switch}:{port.port} used twice")
            used.add((port.switch, port.port))

    k, n = topo.arity, topo.num_terminals
    if topo.kind in (NetworkKind.OMEGA, NetworkKind.THREE_DISJOINT_OMEGA):
        log = round(math.log(n, k)) if k > 1 else 0
        if k < 2 or k**log != n:
            fail("size", f"{n} terminals is not a power of arity {k}")
        want = log if topo.kind is NetworkKind.OMEGA else log + 1
        if topo.num_stages != want:
            fail(f"{topo.kind.value}-shape", f"expected {want} stages, found {topo.num_stages}")
        for s, group in enumerate(topo.stages):
            if len(group) != n // k:
                fail(f"{topo.kind.value}-shape", f"stage {s} has {len(group)} switches, expected {n // k}")
    return topo


# -- serialization ----------------------------------------------------------

_INT = {"type": "integer"}
_POS = {"type": "integer", "minimum": 1}
_NONNEG = {"type": "integer", "minimum": 0}

TOPOLOGY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "kind", "num_terminals", "arity", "stages", "links", "terminal_map"],
    "properties": {
        "name": {"type": "string"},
        "kind": {"enum": [k.value for k in NetworkKind]},
        "num_terminals": _POS,
        "arity": _POS,
        "stages": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["id", "in_arity", "out_arity"],
                    "properties": {"id": _POS, "in_arity": _POS, "out_arity": _POS},
                },
            },
        },
        "links": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["from", "to", "port_rank"],
                "properties": {"from": _INT, "to": _INT, "port_rank": _NONNEG},
            },
        },
        "terminal_map": {
            "type": "object",
            "propertyNames": {"pattern": "^(0|[1-9][0-9]*)$"},
            "additionalProperties": {
                "type": "object",
                "additionalProperties": False,
                "required": ["switch", "port"],
                "properties": {"switch": _POS, "port": _NONNEG, "exit_switch": _POS, "exit_port": _NONNEG},
            },
        },
    },
}


def topology_to_dict(topo: MinTopology) -> dict:
    return {
        "name": topo.name,
        "kind": topo.kind.value,
        "num_terminals": topo.num_terminals,
        "arity": topo.arity,
        "stages": [
            [
                {"id": sid, "in_arity": topo.switch(sid).in_arity, "out_arity": topo.switch(sid).out_arity}
                for sid in group
            ]
            for group in topo.stages
        ],
        "links": [{"from": l.source, "to": l.target, "port_rank": l.port_rank} for l in topo.links],
        "terminal_map": {
            str(t): {
                "switch": topo.ingress[t].switch,
                "port": topo.ingress[t].port,
                "exit_switch": topo.egress[t].switch,
                "exit_port": topo.egress[t].port,
            }
            for t in sorted(topo.ingress)
        },
    }


def _field_path(error: jsonschema.ValidationError) -> str:
    path = ""
    for part in error.absolute_path:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path or "<root>"


def topology_from_dict(data: object, source: str = "<data>") -> MinTopology:
    """Build a validated topology from its JSON object form."""
    validator = jsonschema.Draft202012Validator(TOPOLOGY_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise TopologyParseError(f"{source}: field '{_field_path(err)}': {err.message}")
    assert isinstance(data, dict)

    switches = []
    for s, group in enumerate(data["stages"]):
        for entry in group:
            switches.append(Switch(entry["id"], s, entry["in_arity"], entry["out_arity"]))
    switches.sort(key=lambda sw: sw.id)
    links = sorted(
        (Link(l["from"], l["to"], l["port_rank"]) for l in data["links"]),
        key=lambda l: (l.source, l.port_rank, l.target),
    )

    last_group = data["stages"][-1]
    ingress, egress = {}, {}
    for key, entry in data["terminal_map"].items():
        t = int(key)
        ingress[t] = Port(entry["switch"], entry["port"])
        if "exit_switch" in entry:
            egress[t] = Port(entry["exit_switch"], entry.get("exit_port", entry["port"]))
        else:
            # Symmetric convention: same row and port on the last stage.
            first_ids = [e["id"] for e in data["stages"][0]]
            row = first_ids.index(entry["switch"]) if entry["switch"] in first_ids else -1
            if not 0 <= row < len(last_group):
                raise TopologyParseError(
                    f"{source}: field 'terminal_map.{key}': cannot derive exit switch, give exit_switch"
                )
            egress[t] = Port(last_group[row]["id"], entry.get("exit_port", entry["port"]))

    topo = MinTopology(
        name=data["name"],
        kind=NetworkKind(data["kind"]),
        num_terminals=data["num_terminals"],
        arity=data["arity"],
        switches=tuple(switches),
        links=tuple(links),
        ingress=dict(sorted(ingress.items())),
        egress=dict(sorted(egress.items())),
    )
    return validate_topology(topo)


def dump_topology(topo: MinTopology) -> str:
    return json.dumps(topology_to_dict(topo), indent=2) + "\n"


def save_topology(topo: MinTopology, path: str | Path) -> None:
    Path(path).write_text(dump_topology(topo))


def load_topology(path: str | Path) -> MinTopology:
    """Read, parse and validate a topology JSON file."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return topology_from_dict(data, source=str(path))


def export_dot(topo: MinTopology) -> str:
    """Render a Graphviz digraph with one rank per stage and one edge per link."""
    name = topo.name.replace("\\", "\\\\").replace('"', '\\"')
    lines = [f'digraph "{name}" {{', "  rankdir=LR;", "  node [shape=box];"]
    for s, group in enumerate(topo.stages):
        lines.append(f"  subgraph stage_{s} {{")
        lines.append("    rank=same;")
        for sid in group:
            lines.append(f'    n{sid} [label="SE {sid}"];')
        lines.append("  }")
    for link in topo.links:
        lines.append(f"  n{link.source} -> n{link.target};")
    lines.append("}")
    return "\n".join(lines) + "\n"
