"""Command-line interface.

Exit codes: 0 success, 1 no surviving route, 2 usage or invalid input,
3 file I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import jsonschema

from .analysis import NEGLECT_POLICIES, compare, run_pipeline, stability_metrics, validate_thresholds
from .errors import MinStabError
from .paths import enumerate_routes, route_with_faults
from .reference import curated_pairs, fixture_name, load_errata, pair_errata, printed_pairs
from .topology import build_3don, build_omega, dump_topology, export_dot, load_topology

EXIT_OK, EXIT_NO_ROUTE, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
FORMATS = ("json", "csv", "text", "dot")
CONFIG_ENV = "MIN_STAB_CONFIG"

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "neglect_policy": {"enum": sorted(NEGLECT_POLICIES)},
        "status_thresholds": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
            "minItems": 2,
            "maxItems": 2,
        },
        "output_format": {"enum": list(FORMATS)},
        "errata_path": {"type": ["string", "null"]},
    },
}


@dataclass(frozen=True)
class Config:
    neglect_policy: str = "displaced"
    status_thresholds: tuple[int, int] = (0, 3)
    output_format: str | None = None
    errata_path: str | None = None

    def __post_init__(self):
        validate_thresholds(self.status_thresholds)


class UsageError(Exception):
    pass


def load_config(path: str | Path) -> Config:
    """Read a JSON config file.  OSError propagates; bad content is a UsageError."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
        jsonschema.validate(data, CONFIG_SCHEMA)
        if "status_thresholds" in data:
            data["status_thresholds"] = tuple(data["status_thresholds"])
        return Config(**data)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"{path}: field '{where}': {exc.message}") from None
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def resolve_config(args: argparse.Namespace) -> Config:
    """Flags override the config file, which overrides built-in defaults."""
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    config = load_config(path) if path else Config()
    overrides = {}
    if getattr(args, "format", None):
        overrides["output_format"] = args.format
    if getattr(args, "neglect_policy", None):
        overrides["neglect_policy"] = args.neglect_policy
    if getattr(args, "thresholds", None):
        overrides["status_thresholds"] = tuple(args.thresholds)
    if getattr(args, "errata", None):
        overrides["errata_path"] = args.errata
    try:
        return replace(config, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _format(config: Config, default: str, allowed: Sequence[str]) -> str:
    fmt = config.output_format or default
    if fmt not in allowed:
        raise UsageError(f"format {fmt!r} not supported here; use one of {', '.join(allowed)}")
    return fmt


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_build(args, config: Config) -> int:
    fmt = _format(config, "json", ("json", "dot"))
    builder = {"omega": build_omega, "3don": build_3don}[args.kind]
    topo = builder(args.size)
    _emit(export_dot(topo) if fmt == "dot" else dump_topology(topo), args.out)
    return EXIT_OK


def cmd_prefs(args, config: Config) -> int:
    fmt = _format(config, "text", ("text", "json"))
    result = run_pipeline(load_topology(args.topology))
    prefs = {"raw": result.prefs, "resolved": result.resolved, "shortlist": result.shortlists}[args.view]
    _emit(prefs.to_json() if fmt == "json" else prefs.to_text(), None)
    return EXIT_OK


def _pair_comparison(topo, matching, config: Config) -> dict | None:
    key = fixture_name(topo)
    if key is None:
        return None
    errata = load_errata(config.errata_path)
    curated = curated_pairs(key, errata)
    computed = list(matching.pairs)
    return {
        "fixture": key,
        "printed_pairs": [list(p) for p in printed_pairs(key)],
        "curated_pairs": [list(p) for p in curated],
        "errata": [
            {"printed": list(e.printed), "curated": list(e.curated), "reason": e.reason}
            for e in pair_errata(key, errata)
        ],
        "missing": [list(p) for p in curated if p not in computed],
        "extra": [list(p) for p in computed if p not in curated],
    }


def cmd_match(args, config: Config) -> int:
    fmt = _format(config, "text", ("text", "json"))
    topo = load_topology(args.topology)
    result = run_pipeline(topo)
    m = result.matching
    cmp = _pair_comparison(topo, m, config)
    if fmt == "json":
        out = {
            "network": topo.name,
            "pairs": [list(p) for p in m.pairs],
            "ties": [t.to_dict() for t in result.ties],
            "unmatched": sorted(m.unmatched),
            "reference": cmp,
        }
        _emit(json.dumps(out, indent=2) + "\n", None)
        return EXIT_OK
    lines = [f"network: {topo.name}", f"pairs ({len(m)}): " + m.to_text().strip()]
    lines.append(f"ties ({len(result.ties)}):")
    for t in result.ties:
        who = ", ".join(f"SE {s}" for s in t.contenders)
        lines.append(f"  stage {t.stage}: {who} -> SE {t.contested} (kept by SE {t.winner})")
    lines.append("unmatched: " + (" ".join(f"SE {s}" for s in sorted(m.unmatched)) or "none"))
    if cmp is not None:
        lines.append(f"reference {cmp['fixture']}: {len(cmp['curated_pairs'])} pairs after errata")
        for e in cmp["errata"]:
            p, c = e["printed"], e["curated"]
            lines.append(f"  erratum: printed ({p[0]},{p[1]}) -> ({c[0]},{c[1]}): {e['reason']}")
        if cmp["missing"] or cmp["extra"]:
            lines.append("  missing: " + " ".join(f"({a},{b})" for a, b in cmp["missing"]))
            lines.append("  extra: " + " ".join(f"({a},{b})" for a, b in cmp["extra"]))
        else:
            lines.append("  computed pairs agree with the reference")
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_route(args, config: Config) -> int:
    fmt = _format(config, "text", ("text", "json"))
    topo = load_topology(args.topology)
    if args.fail:
        route = route_with_faults(topo, args.source, args.destination, args.fail)
        if route is None:
            _emit("NO-ROUTE\n", None)
            return EXIT_NO_ROUTE
        if fmt == "json":
            _emit(json.dumps(route.to_dict(), indent=2) + "\n", None)
        else:
            _emit(f"{route}  (path length {route.path_length})\n", None)
        return EXIT_OK
    table = enumerate_routes(topo, args.source, args.destination)
    if not table.routes:
        _emit("NO-ROUTE\n", None)
        return EXIT_NO_ROUTE
    _emit(table.to_json() if fmt == "json" else table.to_text(), None)
    return EXIT_OK


def cmd_report(args, config: Config) -> int:
    fmt = _format(config, "text", ("text", "json", "csv"))
    reports = [
        stability_metrics(load_topology(p), config.neglect_policy, config.status_thresholds)
        for p in args.topologies
    ]
    table = compare(reports, include_reference=args.include_reference)
    _emit({"json": table.to_json, "csv": table.to_csv, "text": table.to_text}[fmt](), None)
    return EXIT_OK


def cmd_export_dot(args, config: Config) -> int:
    _format(config, "dot", ("dot",))
    _emit(export_dot(load_topology(args.topology)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS, help="output format")
    common.add_argument("--config", default=argparse.SUPPRESS, help=f"JSON config file (fallback: ${CONFIG_ENV})")

    parser = argparse.ArgumentParser(prog="minstab", parents=[common], description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="write a generated topology")
    p.add_argument("--kind", choices=("omega", "3don"), required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("prefs", parents=[common], help="print preference lists")
    p.add_argument("topology")
    p.add_argument("--view", choices=("raw", "resolved", "shortlist"), default="raw")
    p.set_defaults(func=cmd_prefs)

    p = sub.add_parser("match", parents=[common], help="print stable pairs, ties and unmatched switches")
    p.add_argument("topology")
    p.add_argument("--errata", help="errata file used for the reference comparison")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("route", parents=[common], help="print routes between two terminals")
    p.add_argument("topology")
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--destination", type=int, required=True)
    p.add_argument("--fail", type=int, action="append", metavar="SWITCH", help="failed switch id (repeatable)")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("report", parents=[common], help="print the stability comparison table")
    p.add_argument("topologies", nargs="+")
    p.add_argument("--include-reference", action="store_true", help="append published rows of other networks")
    p.add_argument("--neglect-policy", choices=sorted(NEGLECT_POLICIES))
    p.add_argument("--thresholds", type=int, nargs=2, metavar=("HIGHLY_MAX", "INTERMEDIATE_MAX"))
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-dot", parents=[common], help="render a topology as Graphviz DOT")
    p.add_argument("topology")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = resolve_config(args)
        return args.func(args, config)
    except UsageError as exc:
        print(f"minstab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"minstab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MinStabError, ValueError) as exc:
        print(f"minstab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
