from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st

from margame import (
    ModelError,
    best_path_by_exploitability,
    enumerate_attack_paths,
    export_dot,
    parse_graph,
    path_from_distance_oracle,
    shortest_attack_path,
)
from margame.graph import AttackPath, path_score

from .conftest import make_graph
from .oracles import oracle_all_simple_paths, oracle_bfs_distance


# ---------------------------------------------------------------------------
# parsing and validation
# ---------------------------------------------------------------------------

def test_cloud10_counts(graph):
    assert graph.node_count == 10
    assert len(graph.hosts) == 5
    assert graph.edge_count == 18
    assert graph.entry == "A"
    assert graph.target == "DB"


def test_cloud10_table_values(graph):
    host, vuln = graph.nodes["vm1"]
    assert (host, vuln.count, vuln.exploitability, vuln.impact) == ("h1", 4, 0.53, 10)
    host, vuln = graph.nodes["DB"]
    assert (host, vuln.count, vuln.exploitability, vuln.impact) == ("h5", 1, 0.43, 10)


def test_minimal_graph(tiny_graph):
    assert tiny_graph.node_count == 1
    assert tiny_graph.edge_count == 1
    assert tiny_graph.exploitability("T") == 0.5


def test_edge_to_unknown_node():
    with pytest.raises(ModelError, match="edge to unknown node"):
        make_graph(
            {"T": ("h1", 0.5, 5)},
            [("A", "T"), ("A", "vmX")],
            target="T",
        )


def test_duplicate_node_id():
    doc = {
        "hosts": ["h1"],
        "entry": "A",
        "target": "T",
        "nodes": [
            {"id": "T", "host": "h1", "vuln_count": 1, "exploitability": 0.5, "impact": 5},
            {"id": "T", "host": "h1", "vuln_count": 1, "exploitability": 0.6, "impact": 5},
        ],
        "edges": [["A", "T"]],
    }
    with pytest.raises(ModelError, match="duplicate node id"):
        parse_graph(doc)


def test_exploitability_out_of_range():
    with pytest.raises(ModelError, match="exploitability out of range"):
        make_graph({"T": ("h1", 1.5, 5)}, [("A", "T")], target="T")


def test_unreachable_target():
    with pytest.raises(ModelError, match="unreachable"):
        make_graph(
            {"T": ("h1", 0.5, 5), "x": ("h1", 0.5, 5)},
            [("A", "x")],
            target="T",
        )


def test_entry_must_not_have_incoming_edges():
    with pytest.raises(ModelError, match="no incoming edges"):
        make_graph(
            {"T": ("h1", 0.5, 5)},
            [("A", "T"), ("T", "A")],
            target="T",
        )


def test_malformed_document():
    with pytest.raises(ModelError, match="malformed"):
        parse_graph("{not json")
    with pytest.raises(ModelError, match="missing key"):
        parse_graph(json.dumps({"hosts": []}))


def test_unknown_host_rejected():
    doc = {
        "hosts": ["h1"],
        "entry": "A",
        "target": "T",
        "nodes": [{"id": "T", "host": "h9", "vuln_count": 1, "exploitability": 0.5, "impact": 5}],
        "edges": [["A", "T"]],
    }
    with pytest.raises(ModelError, match="unknown host"):
        parse_graph(doc)


# ---------------------------------------------------------------------------
# shortest path
# ---------------------------------------------------------------------------

def test_cloud10_sap(graph):
    sap = shortest_attack_path(graph)
    assert sap.nodes == ("A", "vm2", "vm5", "vm9", "DB")
    assert sap.hop_count == 4


def test_cloud10_sap_unique_at_four_hops(graph):
    paths = enumerate_attack_paths(graph, max_hops=4)
    assert [p.nodes for p in paths] == [("A", "vm2", "vm5", "vm9", "DB")]


def test_tiny_sap(tiny_graph):
    sap = shortest_attack_path(tiny_graph)
    assert sap.nodes == ("A", "T")
    assert sap.hop_count == 1


def test_sap_lexicographic_tie_break():
    g = make_graph(
        {"x": ("h1", 0.5, 5), "y": ("h1", 0.5, 5), "T": ("h1", 0.5, 5)},
        [("A", "x"), ("A", "y"), ("x", "T"), ("y", "T")],
        target="T",
    )
    assert shortest_attack_path(g).nodes == ("A", "x", "T")


def test_sap_deterministic(graph):
    first = shortest_attack_path(graph)
    assert all(shortest_attack_path(graph) == first for _ in range(5))


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def test_enumerate_matches_oracle(graph):
    for bound in (4, 6, 10):
        ours = [p.nodes for p in enumerate_attack_paths(graph, bound)]
        expected = oracle_all_simple_paths(graph.edges, "A", "DB", bound)
        assert sorted(ours) == expected


def test_enumerate_sorted_and_first_is_sap(graph):
    paths = enumerate_attack_paths(graph, 10)
    sap = shortest_attack_path(graph)
    assert paths[0].nodes == sap.nodes
    keys = [(p.hop_count, p.nodes) for p in paths]
    assert keys == sorted(keys)


def test_enumerate_tiny(tiny_graph):
    assert [p.nodes for p in enumerate_attack_paths(tiny_graph, 1)] == [("A", "T")]


def test_enumerate_bad_bound(graph):
    with pytest.raises(ModelError, match="max_hops"):
        enumerate_attack_paths(graph, 0)


# ---------------------------------------------------------------------------
# exploitability objectives
# ---------------------------------------------------------------------------

def test_hops_min_delegates_to_sap(graph):
    assert best_path_by_exploitability(graph, "hops_min").nodes == (
        "A", "vm2", "vm5", "vm9", "DB",
    )


def test_tiny_all_objectives(tiny_graph):
    for objective in ("sum_max", "product_max", "hops_min"):
        assert best_path_by_exploitability(tiny_graph, objective).nodes == ("A", "T")


@pytest.mark.parametrize("objective", ["sum_max", "product_max"])
def test_best_path_matches_bruteforce(graph, objective):
    best = best_path_by_exploitability(graph, objective)
    candidates = oracle_all_simple_paths(graph.edges, "A", "DB", graph.node_count + 1)

    def score(nodes):
        values = [graph.exploitability(n) for n in nodes if n != "A"]
        if objective == "sum_max":
            return sum(values)
        out = 1.0
        for v in values:
            out *= v
        return out

    best_score = max(score(c) for c in candidates)
    assert score(best.nodes) == pytest.approx(best_score, abs=1e-12)
    winners = sorted(c for c in candidates if abs(score(c) - best_score) <= 1e-12)
    assert best.nodes == winners[0]


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------

def test_dot_highlights_sap(graph):
    sap = shortest_attack_path(graph)
    dot = export_dot(graph, sap)
    assert '"A" -> "vm2" [label="e=0.55", style=dashed' in dot
    assert '"A" -> "vm1" [label="e=0.53"]' in dot


def test_dot_no_highlight(graph):
    assert "dashed" not in export_dot(graph)


def test_dot_rejects_non_path(graph):
    fake = AttackPath(nodes=("A", "vm9", "DB"))
    with pytest.raises(ModelError, match="not an edge"):
        export_dot(graph, fake)


# ---------------------------------------------------------------------------
# distance-oracle guided walk
# ---------------------------------------------------------------------------

def _bfs_table(graph):
    return {
        (node, graph.target): oracle_bfs_distance(graph.edges, node, graph.target)
        for node in list(graph.nodes) + [graph.entry]
        if oracle_bfs_distance(graph.edges, node, graph.target) is not None
    }


def test_distance_walk_recovers_sap(graph):
    path = path_from_distance_oracle(graph, _bfs_table(graph))
    assert path.nodes == shortest_attack_path(graph).nodes


def test_distance_walk_tolerates_noise(graph):
    table = {pair: float(d) for pair, d in _bfs_table(graph).items()}
    table[("vm2", "DB")] = 9.0  # mislead the walk away from the true SAP
    path = path_from_distance_oracle(graph, table)
    path.validate(graph)
    assert path.nodes[1] == "vm1"


def test_distance_walk_requires_predictions(graph):
    with pytest.raises(ModelError, match="no finite distance prediction"):
        path_from_distance_oracle(graph, {})


# ---------------------------------------------------------------------------
# property tests on random DAGs
# ---------------------------------------------------------------------------

@st.composite
def random_dags(draw):
    n = draw(st.integers(min_value=2, max_value=50))
    ids = [f"v{idx:03d}" for idx in range(n)]
    target = ids[-1]
    spine_len = draw(st.integers(min_value=1, max_value=min(6, n)))
    spine_nodes = sorted(draw(st.sets(st.sampled_from(ids[:-1]), min_size=spine_len - 1, max_size=spine_len - 1))) if spine_len > 1 else []
    spine = ["A"] + spine_nodes + [target]
    edges = set(zip(spine, spine[1:]))
    extra = draw(st.integers(min_value=0, max_value=n))
    for _ in range(extra):
        i = draw(st.integers(min_value=0, max_value=n - 2))
        j = draw(st.integers(min_value=i + 1, max_value=n - 1))
        edges.add((ids[i], ids[j]))
    entry_fanout = draw(st.integers(min_value=0, max_value=3))
    for _ in range(entry_fanout):
        edges.add(("A", ids[draw(st.integers(min_value=0, max_value=n - 1))]))
    nodes = {
        node: ("h1", draw(st.floats(min_value=0.05, max_value=1.0)), 5.0)
        for node in ids
        if node == target or any(node in pair for pair in edges)
    }
    return make_graph(nodes, edges, target=target)


@settings(max_examples=100, deadline=None)
@given(random_dags())
def test_bfs_is_minimal_over_enumeration(g):
    sap = shortest_attack_path(g)
    bound = min(g.node_count + 1, sap.hop_count + 2)
    paths = enumerate_attack_paths(g, bound)
    assert paths, "the generated graph always has at least one path"
    assert all(sap.hop_count <= p.hop_count for p in paths)
    assert sap.hop_count == oracle_bfs_distance(g.edges, g.entry, g.target)


@settings(max_examples=50, deadline=None)
@given(random_dags())
def test_paths_satisfy_invariants(g):
    sap = shortest_attack_path(g)
    sap.validate(g)
    assert shortest_attack_path(g) == sap
    for path in enumerate_attack_paths(g, min(g.node_count + 1, sap.hop_count + 2)):
        path.validate(g)
