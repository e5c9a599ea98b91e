from __future__ import annotations

import json

import pytest

from margame import build_markov_game, cloud10, parse_graph


@pytest.fixture(scope="session")
def graph():
    return cloud10()


@pytest.fixture(scope="session")
def game(graph):
    return build_markov_game(graph, c_def=2.0, discount=0.9)


@pytest.fixture(scope="session")
def tiny_graph():
    """Minimal one-edge graph A -> T with e(T) = 0.5."""
    return parse_graph(
        json.dumps(
            {
                "hosts": ["h1"],
                "entry": "A",
                "target": "T",
                "nodes": [
                    {
                        "id": "T",
                        "host": "h1",
                        "vuln_count": 1,
                        "exploitability": 0.5,
                        "impact": 6,
                    }
                ],
                "edges": [["A", "T"]],
            }
        )
    )


@pytest.fixture(scope="session")
def tiny_game(tiny_graph):
    return build_markov_game(tiny_graph, c_def=2.0, discount=0.9)


def make_graph(nodes, edges, entry="A", target=None, hosts=None):
    """Shorthand graph builder for tests.

    ``nodes`` maps id -> (host, exploitability, impact).
    """
    if target is None:
        target = sorted(nodes)[-1]
    if hosts is None:
        hosts = sorted({host for host, _, _ in nodes.values()})
    return parse_graph(
        {
            "hosts": list(hosts),
            "entry": entry,
            "target": target,
            "nodes": [
                {
                    "id": node_id,
                    "host": host,
                    "vuln_count": 1,
                    "exploitability": e,
                    "impact": impact,
                }
                for node_id, (host, e, impact) in nodes.items()
            ],
            "edges": [list(pair) for pair in edges],
        }
    )
