import json

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minstab import (
    Route,
    build_3don,
    build_custom,
    build_omega,
    enumerate_routes,
    reachable_set,
    route_with_faults,
    shortest_path_length,
)
from minstab.errors import InvalidSwitchError, InvalidTerminalError
from strategies import layered_networks


def as_digraph(t):
    g = nx.DiGraph()
    g.add_nodes_from(sw.id for sw in t.switches)
    g.add_edges_from((l.source, l.target) for l in t.links)
    return g


def oracle_paths(t, source, destination):
    a, b = t.ingress[source].switch, t.egress[destination].switch
    if a == b:
        return {(a,)}
    return {tuple(p) for p in nx.all_simple_paths(as_digraph(t), a, b)}


def test_omin_table_route(omin):
    table = enumerate_routes(omin, 0, 0)
    assert [r.switches for r in table.routes] == [(1, 9, 17, 25)]
    assert table.routes[0].path_length == 3


def test_3don_routes_from_terminal_0_to_0(tdon):
    table = enumerate_routes(tdon, 0, 0)
    assert [r.switches for r in table.routes] == [
        (1, 9, 17, 25, 33),
        (1, 9, 17, 26, 33),
        (1, 9, 18, 27, 33),
        (1, 11, 21, 25, 33),
        (1, 11, 21, 26, 33),
        (1, 11, 22, 27, 33),
    ]
    assert {r.path_length for r in table.routes} == {4}


@pytest.mark.parametrize("which", ["omin", "tdon"])
def test_enumeration_is_complete_for_every_pair(which, request):
    t = request.getfixturevalue(which)
    for s in range(16):
        for d in range(16):
            routes = enumerate_routes(t, s, d).routes
            assert {r.switches for r in routes} == oracle_paths(t, s, d)
            assert len({r.switches for r in routes}) == len(routes)
            lengths = [r.path_length for r in routes]
            assert lengths == sorted(lengths)


def test_omin_has_unique_route_per_pair(omin):
    assert all(len(enumerate_routes(omin, s, d).routes) == 1 for s in range(16) for d in range(16))


@settings(max_examples=50, deadline=None)
@given(layered_networks())
def test_random_networks_match_path_oracle(t):
    for s in range(t.num_terminals):
        for d in range(t.num_terminals):
            table = enumerate_routes(t, s, d)
            assert {r.switches for r in table.routes} == oracle_paths(t, s, d)
            for r in table.routes:
                assert all(b in t.successors(a) for a, b in zip(r.switches, r.switches[1:]))


def test_route_order_follows_port_rank():
    t = build_custom("fan", [1, 2, 1], [(1, 2), (1, 3), (2, 4), (3, 4)], port_order={1: (3, 2)})
    assert [r.switches for r in enumerate_routes(t, 0, 0).routes] == [(1, 3, 4), (1, 2, 4)]


@pytest.mark.parametrize("s, d", [(-1, 0), (16, 0), (0, 16), (0, -3)])
def test_enumerate_rejects_bad_terminal(omin, s, d):
    with pytest.raises(InvalidTerminalError):
        enumerate_routes(omin, s, d)


def test_shortest_path_length_examples(omin, tdon):
    assert shortest_path_length(omin, 1, 1) == 0
    assert shortest_path_length(omin, 1, 25) == 3
    assert shortest_path_length(tdon, 1, 33) == 4
    assert shortest_path_length(omin, 25, 1) is None
    assert shortest_path_length(omin, 9, 19) is None
    with pytest.raises(InvalidSwitchError):
        shortest_path_length(omin, 1, 40)


@pytest.mark.parametrize("which", ["omin", "tdon"])
def test_shortest_path_length_matches_networkx(which, request):
    t = request.getfixturevalue(which)
    g = as_digraph(t)
    for a in g:
        dist = nx.single_source_shortest_path_length(g, a)
        for b in g:
            assert shortest_path_length(t, a, b) == dist.get(b)


@settings(max_examples=50, deadline=None)
@given(layered_networks(), st.data())
def test_shortest_path_triangle_inequality(t, data):
    ids = [sw.id for sw in t.switches]
    a, b, c = (data.draw(st.sampled_from(ids)) for _ in range(3))
    ab, bc, ac = shortest_path_length(t, a, b), shortest_path_length(t, b, c), shortest_path_length(t, a, c)
    if ab is not None and bc is not None:
        assert ac is not None and ac <= ab + bc


def test_reachable_set_examples(omin):
    assert reachable_set(omin, 17) == {25, 26}
    assert reachable_set(omin, 1) == {9, 10, 17, 18, 19, 20, 25, 26, 27, 28, 29, 30, 31, 32}
    assert all(reachable_set(omin, s) == set() for s in range(25, 33))
    with pytest.raises(InvalidSwitchError):
        reachable_set(omin, 0)


@pytest.mark.parametrize("which", ["omin", "tdon"])
def test_reachable_set_matches_descendants(which, request):
    t = request.getfixturevalue(which)
    g = as_digraph(t)
    assert all(reachable_set(t, s) == nx.descendants(g, s) for s in g)


def test_route_with_faults_examples(omin, tdon):
    r = route_with_faults(tdon, 0, 0, {17})
    assert r.switches == (1, 9, 18, 27, 33) and r.path_length == 4
    assert route_with_faults(omin, 0, 0, {9}) is None
    assert route_with_faults(omin, 0, 0, set()) == enumerate_routes(omin, 0, 0).routes[0]


def test_route_with_faults_errors(omin):
    with pytest.raises(InvalidSwitchError):
        route_with_faults(omin, 0, 0, {99})
    with pytest.raises(InvalidTerminalError):
        route_with_faults(omin, 0, 17, set())


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(1, 40), max_size=6), st.integers(0, 15), st.integers(0, 15))
def test_route_with_faults_avoids_failed_switches(failed, s, d):
    t = build_3don(16)
    route = route_with_faults(t, s, d, failed)
    survivors = [r for r in enumerate_routes(t, s, d).routes if failed.isdisjoint(r.switches)]
    if route is None:
        assert survivors == []
    else:
        assert failed.isdisjoint(route.switches)
        assert route == survivors[0]


def test_routing_table_serialization(tdon):
    table = enumerate_routes(tdon, 0, 0)
    data = json.loads(table.to_json())
    assert data["source"] == 0 and data["destination"] == 0
    assert data["routes"][0] == {"switches": [1, 9, 17, 25, 33], "path_length": 4}
    text = table.to_text().splitlines()
    assert text[0].split() == ["Source", "Destination", "Path", "Path-length"]
    assert "SE 1 - SE 9 - SE 18 - SE 27 - SE 33" in text[3]
    assert text[3].endswith("4")


def test_route_str_and_length():
    r = Route((1, 9, 17, 25))
    assert str(r) == "SE 1 - SE 9 - SE 17 - SE 25"
    assert r.path_length == 3


def test_disconnected_pair_has_no_routes():
    t = build_custom("split", [2, 2], [(1, 3), (2, 4)])
    assert enumerate_routes(t, 0, 3).routes == ()
    assert route_with_faults(t, 0, 3) is None


def test_omega_8_routes_all_length_two():
    t = build_omega(8)
    assert {r.path_length for s in range(8) for d in range(8) for r in enumerate_routes(t, s, d).routes} == {2}
