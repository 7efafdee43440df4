"""Stability metrics, status classification and comparison tables."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Iterable, Sequence

from .errors import ConflictError, InconsistentInputError
from .matching import (
    Matching,
    PreferenceLists,
    TieRecord,
    derive_preference_lists,
    detect_ties,
    resolve_ties,
    select_stable_pairs,
    shortlist_reduce,
)
from .reference import fixture_name, reference_table_rows
from .topology import MinTopology

__all__ = [
    "Status",
    "Provenance",
    "StabilityReport",
    "ComparisonTable",
    "PipelineResult",
    "NEGLECT_POLICIES",
    "DEFAULT_THRESHOLDS",
    "run_pipeline",
    "max_path_length",
    "count_neglected",
    "classify_status",
    "validate_thresholds",
    "stability_metrics",
    "reference_reports",
    "compare",
    "CSV_HEADER",
]


class Status(str, Enum):
    HIGHLY_STABLE = "HighlyStable"
    INTERMEDIATE_STABLE = "IntermediateStable"
    LOW_STABLE = "LowStable"


class Provenance(str, Enum):
    COMPUTED = "Computed"
    PAPER_REFERENCE = "PaperReference"


DEFAULT_THRESHOLDS = (0, 3)

CSV_HEADER = ("network", "ties", "optimal_pairs", "total_switches", "max_pl", "neglected", "status", "provenance")


@dataclass(frozen=True)
class StabilityReport:
    network: str
    ties: int
    optimal_pairs: int
    total_switches: int
    max_path_length: int
    neglected_pairs: int
    status: Status
    provenance: Provenance
    neglect_policy: str | None = None
    # Published values for the same network, printed next to computed ones.
    reference: "StabilityReport | None" = None

    def __post_init__(self):
        if self.optimal_pairs > self.total_switches:
            raise InconsistentInputError(
                f"{self.network}: {self.optimal_pairs} pairs exceed {self.total_switches} switches"
            )

    def row(self) -> tuple:
        return (
            self.network,
            self.ties,
            self.optimal_pairs,
            self.total_switches,
            self.max_path_length,
            self.neglected_pairs,
            self.status.value,
            self.provenance.value,
        )

    def to_dict(self) -> dict:
        out = dict(zip(CSV_HEADER, self.row()))
        if self.neglect_policy is not None:
            out["neglect_policy"] = self.neglect_policy
        if self.reference is not None:
            out["reference"] = self.reference.to_dict()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass(frozen=True)
class PipelineResult:
    prefs: PreferenceLists
    ties: tuple[TieRecord, ...]
    resolved: PreferenceLists
    shortlists: PreferenceLists
    matching: Matching


def run_pipeline(topo: MinTopology) -> PipelineResult:
    """Derive lists, settle ties, shortlist and pair.

    Tie losers that run out of candidates are kept with empty lists so they
    surface as unmatched rather than aborting the run.
    """
    prefs = derive_preference_lists(topo)
    ties = tuple(detect_ties(prefs, topo))
    resolved = resolve_ties(prefs, ties, strict=False)
    shortlists = shortlist_reduce(resolved)
    matching = select_stable_pairs(shortlists)
    return PipelineResult(prefs, ties, resolved, shortlists, matching)


def max_path_length(topo: MinTopology) -> int:
    """Longest route, in links, over all terminal pairs that are connected."""
    best = 0
    exits = {p.switch for p in topo.egress.values()}
    for start in {p.switch for p in topo.ingress.values()}:
        longest = {start: 0}
        for group in topo.stages[topo.stage_of(start):]:
            for s in group:
                if s in longest:
                    for t in topo.successors(s):
                        longest[t] = max(longest.get(t, 0), longest[s] + 1)
        best = max([best] + [d for s, d in longest.items() if s in exits])
    return best


def _displaced(topo: MinTopology, result: PipelineResult) -> int:
    partner = result.matching.partner
    return sum(
        1 for p, cands in result.prefs.lists.items() if cands and partner.get(p) != cands[0]
    )


def _unmatched(topo: MinTopology, result: PipelineResult) -> int:
    return len(result.matching.unmatched)


def _unmatched_acceptors(topo: MinTopology, result: PipelineResult) -> int:
    held = result.matching.holder
    return sum(1 for s in topo.stages[-1] if s not in held)


NEGLECT_POLICIES: dict[str, Callable[[MinTopology, PipelineResult], int]] = {
    # Proposers that end up away from their first choice, or with nothing.
    "displaced": _displaced,
    # Proposers left without any partner.
    "unmatched": _unmatched,
    # Last-stage switches that no proposer is paired with.
    "unmatched_acceptors": _unmatched_acceptors,
}


def count_neglected(topo: MinTopology, result: PipelineResult, policy: str = "displaced") -> int:
    try:
        return NEGLECT_POLICIES[policy](topo, result)
    except KeyError:
        raise ValueError(f"unknown neglect policy {policy!r}; choose from {sorted(NEGLECT_POLICIES)}") from None


def validate_thresholds(thresholds: Sequence[int]) -> tuple[int, int]:
    if len(thresholds) != 2:
        raise ValueError("status thresholds must be a pair (highly_max, intermediate_max)")
    lo, hi = int(thresholds[0]), int(thresholds[1])
    if not 0 <= lo < hi:
        raise ValueError(f"status thresholds need 0 <= highly_max < intermediate_max, got {lo}, {hi}")
    return lo, hi


def classify_status(neglected_pairs: int, thresholds: Sequence[int] = DEFAULT_THRESHOLDS) -> Status:
    """Map a neglected count onto a status band (``<= lo``, ``<= hi``, above)."""
    if neglected_pairs < 0:
        raise ValueError(f"neglected pair count must be non-negative, got {neglected_pairs}")
    lo, hi = validate_thresholds(thresholds)
    if neglected_pairs <= lo:
        return Status.HIGHLY_STABLE
    if neglected_pairs <= hi:
        return Status.INTERMEDIATE_STABLE
    return Status.LOW_STABLE


def _from_table(row: dict) -> StabilityReport:
    return StabilityReport(
        network=row["network"],
        ties=row["ties"],
        optimal_pairs=row["optimal_pairs"],
        total_switches=row["total_switches"],
        max_path_length=row["max_pl"],
        neglected_pairs=row["neglected"],
        status=Status(row["status"]),
        provenance=Provenance.PAPER_REFERENCE,
    )


_TABLE_NAMES = {"omega16": "OMIN", "3don16": "3DON"}


def reference_reports(include_builtin: bool = False) -> list[StabilityReport]:
    """Published comparison rows.

    By default only the networks this package cannot build are returned;
    ``include_builtin`` adds the Omega and 3DON rows too.
    """
    skip = set() if include_builtin else set(_TABLE_NAMES.values())
    return [_from_table(r) for r in reference_table_rows() if r["network"] not in skip]


def _reference_for(topo: MinTopology) -> StabilityReport | None:
    key = fixture_name(topo)
    if key is None:
        return None
    for row in reference_table_rows():
        if row["network"] == _TABLE_NAMES[key]:
            return _from_table(row)
    return None


def stability_metrics(
    topo: MinTopology,
    policy: str = "displaced",
    thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
    result: PipelineResult | None = None,
) -> StabilityReport:
    """Run the full pipeline and summarize it as a computed report."""
    if result is None:
        result = run_pipeline(topo)
    neglected = count_neglected(topo, result, policy)
    return StabilityReport(
        network=topo.name,
        ties=len(result.ties),
        optimal_pairs=len(result.matching),
        total_switches=len(topo.switches),
        max_path_length=max_path_length(topo),
        neglected_pairs=neglected,
        status=classify_status(neglected, thresholds),
        provenance=Provenance.COMPUTED,
        neglect_policy=policy,
        reference=_reference_for(topo),
    )


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[StabilityReport, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def names(self) -> list[str]:
        return [r.network for r in self.rows]

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow(r.row())
        return buf.getvalue()

    def to_text(self) -> str:
        """Aligned table; computed rows with a published counterpart show ``value [ref x]``."""
        header = ("Network", "Ties", "OPs/SEs", "Max PL", "Neglected", "Status", "Provenance")
        lines = [header]
        for r in self.rows:
            ref = r.reference

            def cell(value, ref_value):
                return str(value) if ref is None else f"{value} [ref {ref_value}]"

            lines.append(
                (
                    r.network,
                    cell(r.ties, ref and ref.ties),
                    cell(
                        f"{r.optimal_pairs}/{r.total_switches}",
                        ref and f"{ref.optimal_pairs}/{ref.total_switches}",
                    ),
                    cell(r.max_path_length, ref and ref.max_path_length),
                    cell(r.neglected_pairs, ref and ref.neglected_pairs),
                    cell(r.status.value, ref and ref.status.value),
                    r.provenance.value,
                )
            )
        widths = [max(len(str(line[i])) for line in lines) for i in range(len(header))]
        return "".join(
            "  ".join(str(c).ljust(w) for c, w in zip(line, widths)).rstrip() + "\n" for line in lines
        )


def compare(reports: Iterable[StabilityReport], include_reference: bool = False) -> ComparisonTable:
    """Merge reports into a table with unique network names.

    Identical duplicates collapse; differing rows under one name raise
    :class:`ConflictError`, as does a computed row sharing a name with a
    published one.  ``include_reference`` appends the published rows of the
    networks this package does not build.
    """
    reports = list(reports)
    if not reports:
        raise InconsistentInputError("compare needs at least one report")
    rows: list[StabilityReport] = []
    by_name: dict[str, StabilityReport] = {}
    extra = reference_reports() if include_reference else []
    for r in reports + extra:
        seen = by_name.get(r.network)
        if seen is None:
            by_name[r.network] = r
            rows.append(r)
        elif seen.provenance is not r.provenance:
            raise ConflictError(f"{r.network}: computed and published rows share a name")
        elif replace(seen, reference=None) != replace(r, reference=None):
            raise ConflictError(f"{r.network}: conflicting rows for the same network")
    return ComparisonTable(tuple(rows))
