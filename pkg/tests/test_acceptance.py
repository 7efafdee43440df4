"""One test per acceptance criterion; each records a PASS/FAIL line before asserting."""

import itertools
import random
import time

import pytest
from hypothesis import HealthCheck, given, settings

from acceptance_log import record
from minstab import (
    build_3don,
    build_omega,
    compare,
    derive_preference_lists,
    detect_ties,
    enumerate_routes,
    find_blocking_pairs,
    resolve_ties,
    route_with_faults,
    save_topology,
    select_stable_pairs,
    shortlist_reduce,
    stability_metrics,
)
from minstab.cli import main
from minstab.matching import brute_force_stable_matchings, gale_shapley_reference
from minstab.reference import (
    curated_pairs,
    curated_preferences,
    pair_errata,
    printed_pairs,
    printed_preferences,
    reference_routes,
)
from strategies import layered_networks
from test_matching import check_reference

SUB_INSTANCE_MAX = 12
RUNTIME_LIMIT_S = 1.0


def resolved(t):
    prefs = derive_preference_lists(t)
    return resolve_ties(prefs, detect_ties(prefs, t), strict=False)


def test_criterion_1_topology_fixtures():
    start = time.perf_counter()
    omin, tdon = build_omega(16), build_3don(16)
    elapsed = time.perf_counter() - start
    shapes = (len(omin.switches), omin.num_stages, len(tdon.switches), tdon.num_stages)
    mismatches = []
    for topo, key in ((omin, "omega16"), (tdon, "3don16")):
        lists = curated_preferences(key)
        for sid in topo.stages[0]:
            succ = topo.successors(sid)
            if tuple(lists[sid][: len(succ)]) != succ:
                mismatches.append((key, sid))
    ok = shapes == (32, 4, 40, 5) and not mismatches and elapsed < RUNTIME_LIMIT_S
    record("1", ok, f"switches/stages {shapes}, prefix mismatches {mismatches}, build {elapsed * 1000:.1f} ms")
    assert ok


def test_criterion_2_routing_tables(omin, tdon):
    o = enumerate_routes(omin, 0, 0)
    d = enumerate_routes(tdon, 0, 0)
    want_o = reference_routes("omega16").routes
    want_d = reference_routes("3don16").routes
    ok_o = o.routes == want_o and [r.path_length for r in o.routes] == [3]
    ok_d = d.routes[: len(want_d)] == want_d and all(r.path_length == 4 for r in d.routes)
    extra = [str(r) for r in d.routes[len(want_d) :]]
    record("2", ok_o and ok_d, f"OMIN {[str(r) for r in o.routes]}; 3DON lists {len(want_d)} published routes first, extra {extra}")
    assert ok_o and ok_d


def test_criterion_3_preference_lists(omin, tdon):
    o = derive_preference_lists(omin).lists
    d = derive_preference_lists(tdon).lists
    printed = {k: tuple(v) for k, v in printed_preferences("omega16").items()}
    ok_o = {k: v for k, v in o.items() if v} == printed
    ok_d = {k: v for k, v in d.items() if v} == curated_preferences("3don16")
    record("3", ok_o and ok_d, f"OMIN {len(printed)} lines exact: {ok_o}; 3DON 32 curated lines exact: {ok_d}")
    assert ok_o and ok_d


def test_criterion_4_optimal_pairs(omin, tdon):
    o = select_stable_pairs(resolved(omin)).pairs
    d = select_stable_pairs(resolved(tdon)).pairs
    ok_o = list(o) == printed_pairs("omega16")
    ok_d = list(d) == curated_pairs("3don16")
    diff = sorted(set(printed_pairs("3don16")) ^ set(d))
    logged = {tuple(e.printed) for e in pair_errata("3don16")} | {tuple(e.curated) for e in pair_errata("3don16")}
    ok = ok_o and ok_d and set(diff) == logged
    record("4", ok, f"OMIN {len(o)} pairs exact: {ok_o}; 3DON {len(d)} pairs, differs from print at {diff} (logged erratum)")
    assert ok


def test_criterion_5_shortlists(omin, tdon):
    a = shortlist_reduce(resolved(omin)).lists[4]
    b = shortlist_reduce(resolved(tdon)).lists[20]
    ok = a == (15, 22, 26, 28, 30) and b == (31, 39)
    record("5", ok, f"SE 4 {' '.join(map(str, a))}; SE 20 {' '.join(map(str, b))}")
    assert ok


def test_criterion_6_metrics(omin, tdon):
    o, d = stability_metrics(omin), stability_metrics(tdon)
    text = compare([o, d]).to_text()
    cols = lambda r: (r.optimal_pairs, r.total_switches, r.max_path_length, r.status.value)
    ok_o = o.ties == 9 and cols(o) == (24, 32, 3, "LowStable") and cols(o.reference) == cols(o)
    ok_d = cols(d) == (32, 40, 4, "LowStable") and cols(d.reference) == cols(d)
    rows = {l.split()[0]: l for l in text.splitlines()[1:] if l.strip()}
    side = all(f"[ref {r.reference.neglected_pairs}]" in rows[r.network] for r in (o, d))
    side = side and f"{d.ties} [ref {d.reference.ties}]" in rows["3DON"]
    ok = ok_o and ok_d and side
    record(
        "6",
        ok,
        f"OMIN ties {o.ties}, neglected {o.neglected_pairs} vs ref {o.reference.neglected_pairs}; "
        f"3DON ties {d.ties} vs ref {d.reference.ties}, neglected {d.neglected_pairs} vs ref {d.reference.neglected_pairs}; "
        f"side-by-side shown: {side}",
    )
    assert ok


_random_blocking: list[int] = []


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(layered_networks(max_switches=16))
def _random_dag_blocking(t):
    r = resolved(t)
    _random_blocking.append(len(find_blocking_pairs(select_stable_pairs(r), r)))


def test_criterion_7a_no_blocking_pairs(omin, tdon):
    builtin = [len(find_blocking_pairs(select_stable_pairs(r), r)) for r in (resolved(omin), resolved(tdon))]
    _random_blocking.clear()
    _random_dag_blocking()
    ok = builtin == [0, 0] and len(_random_blocking) == 50 and not any(_random_blocking)
    record("7a", ok, f"blocking pairs OMIN/3DON {builtin}; {len(_random_blocking)} random DAGs, total {sum(_random_blocking)}")
    assert ok


def test_criterion_7b_brute_force_agreement(omin, tdon):
    checked = failures = 0
    rng = random.Random(7)
    for topo in (omin, tdon):
        r = resolved(topo)
        ids = [sw.id for sw in topo.switches]
        windows = [ids[i : i + SUB_INSTANCE_MAX] for i in range(len(ids) - SUB_INSTANCE_MAX + 1)]
        samples = [rng.sample(ids, rng.randint(1, SUB_INSTANCE_MAX)) for _ in range(25)]
        for universe in windows + samples:
            sub = r.restrict(universe)
            checked += 1
            failures += select_stable_pairs(sub) not in brute_force_stable_matchings(sub, universe)
    ok = failures == 0
    record("7b", ok, f"{checked} sub-instances (every contiguous {SUB_INSTANCE_MAX}-switch window plus 25 random subsets per network), {failures} disagreements")
    assert ok


def test_criterion_7c_constant_path_length(omin, tdon):
    seen = {}
    for name, topo in (("OMIN", omin), ("3DON", tdon)):
        seen[name] = {r.path_length for s in range(16) for d in range(16) for r in enumerate_routes(topo, s, d).routes}
    ok = seen == {"OMIN": {3}, "3DON": {4}}
    record("7c", ok, f"path lengths over 256 terminal pairs: {seen}")
    assert ok


def test_criterion_7d_reference_gale_shapley():
    exhaustive = 0
    for n in (1, 2, 3):
        perms = list(itertools.permutations(range(n)))
        for pp in itertools.product(perms, repeat=n):
            for ap in itertools.product(perms, repeat=n):
                check_reference(pp, ap)
                exhaustive += 1
    rng = random.Random(4)
    for _ in range(3000):
        check_reference(*([rng.sample(range(4), 4) for _ in range(4)] for _ in range(2)))
    rng = random.Random(6)
    for _ in range(100):
        check_reference(*([rng.sample(range(6), 6) for _ in range(6)] for _ in range(2)))
    assert gale_shapley_reference([[0]], [[0]]).pairs == ((0, 0),)
    n4_total = 24**8
    record(
        "7d",
        False,
        f"stable and proposer-optimal on all {exhaustive} instances with n <= 3 and on 100 random n = 6; "
        f"n = 4 covers 3000 samples only, exhaustive would need {n4_total:.2e} instances",
    )
    pytest.xfail("exhaustive enumeration at n = 4 does not fit the runtime budget; sampled instead")


def test_criterion_8_fault_routing(tmp_path, capsys, omin, tdon):
    third = reference_routes("3don16").routes[2]
    r = route_with_faults(tdon, 0, 0, {17})
    none = route_with_faults(omin, 0, 0, {9})
    path = tmp_path / "omega16.json"
    save_topology(omin, path)
    code = main(["route", str(path), "--source", "0", "--destination", "0", "--fail", "9"])
    out = capsys.readouterr().out
    ok = r == third and none is None and code == 1 and out.strip() == "NO-ROUTE"
    record("8", ok, f"3DON without SE 17: {r}; OMIN without SE 9: {out.strip()} (exit {code})")
    assert ok
