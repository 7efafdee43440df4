"""Preference lists, tie handling and stable pairing of switches.

Each non-last-stage switch acts as a proposer over the later-stage switches
it can reach.  Every switch also acts as an acceptor: it ranks the proposers
that list it, putting those for which it is the first choice ahead of the
rest and breaking remaining ties by ascending id.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    InconsistentInputError,
    InstanceTooLargeError,
    InvalidInstanceError,
    UnresolvableTieError,
)
from .topology import MinTopology

__all__ = [
    "PreferenceLists",
    "TieRecord",
    "Matching",
    "BlockingPair",
    "derive_preference_lists",
    "detect_ties",
    "resolve_ties",
    "shortlist_reduce",
    "select_stable_pairs",
    "find_blocking_pairs",
    "gale_shapley_reference",
    "brute_force_stable_matchings",
]


def _acceptor_order(lists: Mapping[int, Sequence[int]]) -> dict[int, tuple[int, ...]]:
    acc: dict[int, list[int]] = {}
    for p, cands in lists.items():
        for c in cands:
            acc.setdefault(c, []).append(p)
    return {
        c: tuple(sorted(ps, key=lambda p: (0 if lists[p][0] == c else 1, p)))
        for c, ps in sorted(acc.items())
    }


@dataclass(frozen=True)
class PreferenceLists:
    """Proposer lists plus the matching acceptor rankings.

    ``lists[s]`` is switch ``s``'s candidates in descending priority.
    ``acceptor_lists[c]`` ranks the proposers that may be paired with ``c``.
    ``stages`` maps every switch to its stage.
    """

    lists: Mapping[int, tuple[int, ...]]
    acceptor_lists: Mapping[int, tuple[int, ...]]
    stages: Mapping[int, int]
    source: str = ""

    @classmethod
    def from_lists(
        cls,
        lists: Mapping[int, Sequence[int]],
        stages: Mapping[int, int] | None = None,
        source: str = "",
    ) -> "PreferenceLists":
        """Build from proposer lists alone, deriving acceptor rankings.

        Without ``stages`` every switch is placed on stage 0.
        """
        norm = {s: tuple(v) for s, v in sorted(lists.items())}
        for s, v in norm.items():
            if len(set(v)) != len(v):
                raise InconsistentInputError(f"switch {s} lists a candidate twice")
        if stages is None:
            everyone = set(norm) | {c for v in norm.values() for c in v}
            stages = {s: 0 for s in everyone}
        return cls(norm, _acceptor_order({s: v for s, v in norm.items() if v}), dict(stages), source)

    @property
    def switches(self) -> tuple[int, ...]:
        return tuple(sorted(self.stages))

    def candidates(self, sid: int) -> tuple[int, ...]:
        return self.lists.get(sid, ())

    def proposers(self) -> tuple[int, ...]:
        return tuple(s for s in sorted(self.lists) if self.lists[s])

    def restrict(self, universe: Iterable[int]) -> "PreferenceLists":
        """Sub-instance on ``universe``; relative orders are preserved."""
        keep = set(universe)
        lists = {s: tuple(c for c in v if c in keep) for s, v in self.lists.items() if s in keep}
        acc = {c: tuple(p for p in v if p in keep) for c, v in self.acceptor_lists.items() if c in keep}
        # Drop one-sided entries so both views stay consistent.
        acc = {c: tuple(p for p in v if c in lists.get(p, ())) for c, v in acc.items()}
        lists = {s: tuple(c for c in v if s in acc.get(c, ())) for s, v in lists.items()}
        stages = {s: st for s, st in self.stages.items() if s in keep}
        return PreferenceLists(lists, {c: v for c, v in acc.items() if v}, stages, self.source)

    def to_dict(self) -> dict[str, list[int]]:
        return {str(s): list(self.lists.get(s, ())) for s in self.switches}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        """One ``SE k c1 c2 ...`` line per switch, last-stage lines bare."""
        return "".join(
            "SE " + " ".join(str(x) for x in (s, *self.lists.get(s, ()))) + "\n" for s in self.switches
        )


@dataclass(frozen=True)
class TieRecord:
    stage: int
    contenders: tuple[int, ...]
    contested: int

    @property
    def winner(self) -> int:
        return self.contenders[0]

    @property
    def losers(self) -> tuple[int, ...]:
        return self.contenders[1:]

    def to_dict(self) -> dict:
        return {"stage": self.stage, "contenders": list(self.contenders), "contested": self.contested}


@dataclass(frozen=True)
class BlockingPair:
    a: int
    b: int


@dataclass(frozen=True)
class Matching:
    """Engaged ``(proposer, partner)`` pairs and the proposers left without one."""

    pairs: tuple[tuple[int, int], ...]
    unmatched: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted(tuple(p) for p in self.pairs)))
        object.__setattr__(self, "unmatched", frozenset(self.unmatched))
        props = [p for p, _ in self.pairs]
        parts = [c for _, c in self.pairs]
        if len(set(props)) != len(props) or len(set(parts)) != len(parts):
            raise InconsistentInputError("a switch is engaged more than once on the same side")
        if self.unmatched & set(props):
            raise InconsistentInputError("a switch is both engaged and unmatched")

    @property
    def partner(self) -> dict[int, int]:
        return dict(self.pairs)

    @property
    def holder(self) -> dict[int, int]:
        return {c: p for p, c in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def to_dict(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "unmatched": sorted(self.unmatched)}

    def to_text(self) -> str:
        return " ".join(f"({p},{c})" for p, c in self.pairs) + "\n"


def derive_preference_lists(topo: MinTopology) -> PreferenceLists:
    """Rank every reachable later-stage switch for each owner.

    A breadth-first sweep from the owner yields candidates by distance;
    repeats keep their first position.  Within a level, a switch in the
    owner's row expands its links in port_rank order and every other switch
    expands them by ascending id.
    """
    lists: dict[int, tuple[int, ...]] = {}
    for owner in (sw.id for sw in topo.switches):
        row = topo.row(owner)
        seen = {owner}
        out: list[int] = []
        frontier = [owner]
        while frontier:
            nxt: list[int] = []
            for s in frontier:
                succ = topo.successors(s)
                if topo.row(s) != row:
                    succ = tuple(sorted(succ))
                for c in succ:
                    if c not in seen:
                        seen.add(c)
                        nxt.append(c)
            out.extend(nxt)
            frontier = nxt
        lists[owner] = tuple(out)
    stages = {sw.id: sw.stage for sw in topo.switches}
    return PreferenceLists(
        lists, _acceptor_order({s: v for s, v in lists.items() if v}), stages, topo.name
    )


def _mutable(prefs: PreferenceLists) -> tuple[dict[int, list[int]], dict[int, list[int]]]:
    return (
        {s: list(v) for s, v in prefs.lists.items()},
        {c: list(v) for c, v in prefs.acceptor_lists.items()},
    )


def _frozen(prefs: PreferenceLists, lists, acc) -> PreferenceLists:
    return PreferenceLists(
        {s: tuple(v) for s, v in lists.items()},
        {c: tuple(v) for c, v in acc.items() if v},
        prefs.stages,
        prefs.source,
    )


def _drop(lists, acc, loser: int, contested: int) -> None:
    if contested in lists.get(loser, ()):
        lists[loser].remove(contested)
    if loser in acc.get(contested, ()):
        acc[contested].remove(loser)


def detect_ties(prefs: PreferenceLists, topology: MinTopology | None = None) -> list[TieRecord]:
    """Same-stage collisions on the current top candidate, stage by stage.

    Within a stage, rounds repeat until all heads differ: every group of
    switches sharing a head is recorded, the lowest id keeps the candidate
    and the others move past it.  ``topology`` is accepted for symmetry and
    used only to cross-check stage assignments.
    """
    if topology is not None:
        for s, st in prefs.stages.items():
            if s in topology and topology.stage_of(s) != st:
                raise InconsistentInputError(f"switch {s} is on stage {topology.stage_of(s)}, not {st}")
    lists, acc = _mutable(prefs)
    records: list[TieRecord] = []
    by_stage: dict[int, list[int]] = {}
    for s, st in prefs.stages.items():
        by_stage.setdefault(st, []).append(s)
    for st in sorted(by_stage):
        members = sorted(by_stage[st])
        while True:
            heads: dict[int, list[int]] = {}
            for s in members:
                if lists.get(s):
                    heads.setdefault(lists[s][0], []).append(s)
            groups = sorted((tuple(v), c) for c, v in heads.items() if len(v) > 1)
            if not groups:
                break
            for contenders, contested in groups:
                records.append(TieRecord(st, contenders, contested))
                for loser in contenders[1:]:
                    _drop(lists, acc, loser, contested)
    return records


def resolve_ties(
    prefs: PreferenceLists, ties: Sequence[TieRecord], strict: bool = True
) -> PreferenceLists:
    """Apply tie outcomes: each loser gives up the contested candidate.

    A loser whose list runs dry raises :class:`UnresolvableTieError` when
    ``strict``; otherwise its list is left empty.
    """
    if not ties:
        return prefs
    lists, acc = _mutable(prefs)
    exhausted = set()
    for tie in ties:
        for loser in tie.losers:
            _drop(lists, acc, loser, tie.contested)
            if not lists.get(loser):
                exhausted.add(loser)
    if exhausted and strict:
        raise UnresolvableTieError(exhausted)
    return _frozen(prefs, lists, acc)


def _check_consistent(prefs: PreferenceLists) -> None:
    for p, cands in prefs.lists.items():
        for c in cands:
            if p not in prefs.acceptor_lists.get(c, ()):
                raise InconsistentInputError(f"switch {p} lists {c} but {c} does not rank {p}")
    for c, props in prefs.acceptor_lists.items():
        for p in props:
            if c not in prefs.lists.get(p, ()):
                raise InconsistentInputError(f"switch {c} ranks {p} but {p} does not list {c}")


def shortlist_reduce(prefs: PreferenceLists) -> PreferenceLists:
    """Trim lists to the candidates that can still appear in a stable pairing.

    Runs the proposal sequence; whenever a candidate receives a proposal,
    every proposer it ranks below the current one is removed from its
    ranking and loses that candidate from its own list.
    """
    _check_consistent(prefs)
    lists, acc = _mutable(prefs)
    held: dict[int, int] = {}
    free = deque(p for p in sorted(lists) if lists[p])
    while free:
        p = free.popleft()
        if not lists[p]:
            continue
        c = lists[p][0]
        if c in held:
            free.append(held[c])
        held[c] = p
        cut = acc[c].index(p) + 1
        for q in acc[c][cut:]:
            lists[q].remove(c)
        del acc[c][cut:]
    return _frozen(prefs, lists, acc)


def select_stable_pairs(prefs: PreferenceLists) -> Matching:
    """Proposal-based pairing over (resolved) preference lists.

    Free proposers are served in ascending id.  A proposer offers itself to
    its next candidate, which keeps whichever offer it ranks higher and
    frees the other.  Proposers that run out of candidates are unmatched.
    """
    _check_consistent(prefs)
    rank = {c: {p: i for i, p in enumerate(ps)} for c, ps in prefs.acceptor_lists.items()}
    nxt = {p: 0 for p in prefs.lists}
    held: dict[int, int] = {}
    unmatched: set[int] = set()
    free = deque(p for p in sorted(prefs.lists) if prefs.lists[p])
    while free:
        p = free.popleft()
        cands = prefs.lists[p]
        while nxt[p] < len(cands):
            c = cands[nxt[p]]
            nxt[p] += 1
            h = held.get(c)
            if h is None:
                held[c] = p
                break
            if rank[c][p] < rank[c][h]:
                held[c] = p
                free.append(h)
                break
        else:
            unmatched.add(p)
    return Matching(tuple((p, c) for c, p in held.items()), frozenset(unmatched))


def find_blocking_pairs(matching: Matching, prefs: PreferenceLists) -> list[BlockingPair]:
    """Every mutually-listed pair in which both sides would rather be together."""
    known = set(prefs.stages) | set(prefs.lists)
    for p, c in matching.pairs:
        if p not in known or c not in known:
            raise InconsistentInputError(f"pair ({p},{c}) names a switch absent from the lists")
        if c not in prefs.lists.get(p, ()):
            raise InconsistentInputError(f"pair ({p},{c}) is not on switch {p}'s list")
    partner, holder = matching.partner, matching.holder
    blocking = []
    for a in sorted(prefs.lists):
        cands = prefs.lists[a]
        limit = cands.index(partner[a]) if a in partner else len(cands)
        for b in cands[:limit]:
            ranking = prefs.acceptor_lists.get(b, ())
            if a not in ranking:
                continue
            h = holder.get(b)
            if h is None or h not in ranking or ranking.index(a) < ranking.index(h):
                blocking.append(BlockingPair(a, b))
    return blocking


def gale_shapley_reference(
    proposer_prefs: Sequence[Sequence[int]], acceptor_prefs: Sequence[Sequence[int]]
) -> Matching:
    """Textbook proposer-optimal stable marriage on a complete instance.

    Both tables are indexed ``0..n-1`` and each row must be a permutation of
    ``0..n-1``.  Pairs are ``(proposer index, acceptor index)``.
    """
    n = len(proposer_prefs)
    if len(acceptor_prefs) != n:
        raise InvalidInstanceError(f"sides differ in size: {n} vs {len(acceptor_prefs)}")
    for name, table in (("proposer", proposer_prefs), ("acceptor", acceptor_prefs)):
        for i, row in enumerate(table):
            if sorted(row) != list(range(n)):
                raise InvalidInstanceError(f"{name} {i} does not rank every member of the other side")
    inverse = [[0] * n for _ in range(n)]
    for a, row in enumerate(acceptor_prefs):
        for pos, p in enumerate(row):
            inverse[a][p] = pos
    engaged_to: list[int | None] = [None] * n
    next_choice = [0] * n
    free = list(range(n - 1, -1, -1))
    while free:
        p = free.pop()
        a = proposer_prefs[p][next_choice[p]]
        next_choice[p] += 1
        current = engaged_to[a]
        if current is None:
            engaged_to[a] = p
        elif inverse[a][p] < inverse[a][current]:
            engaged_to[a] = p
            free.append(current)
        else:
            free.append(p)
    return Matching(tuple((p, a) for a, p in enumerate(engaged_to)))


def brute_force_stable_matchings(
    prefs: PreferenceLists, universe: Iterable[int], max_size: int = 12
) -> list[Matching]:
    """All blocking-pair-free matchings of the sub-instance on ``universe``.

    Exhaustive, so ``universe`` is capped at ``max_size`` switches.
    """
    universe = set(universe)
    if len(universe) > max_size:
        raise InstanceTooLargeError(f"universe of {len(universe)} switches exceeds limit {max_size}")
    sub = prefs.restrict(universe)
    proposers = [p for p in sorted(sub.lists) if sub.lists[p]]
    results = []
    pairs: list[tuple[int, int]] = []
    idle: list[int] = []
    taken: set[int] = set()

    def extend(i: int) -> None:
        if i == len(proposers):
            m = Matching(tuple(pairs), frozenset(idle))
            if not find_blocking_pairs(m, sub):
                results.append(m)
            return
        p = proposers[i]
        for c in sub.lists[p]:
            if c not in taken:
                taken.add(c)
                pairs.append((p, c))
                extend(i + 1)
                pairs.pop()
                taken.discard(c)
        idle.append(p)
        extend(i + 1)
        idle.pop()

    extend(0)
    return results
