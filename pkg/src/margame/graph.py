"""Cloud attack-graph model: parsing, validation, and path queries.

A graph is a set of VM nodes (each pinned to a physical host and carrying
CVSS-derived exploitability/impact scores), a distinguished attacker entry
node, and directed exploit edges.  The weight of an edge is the
exploitability of its *target* node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Iterable, Mapping

from .errors import ModelError

__all__ = [
    "Vulnerability",
    "AttackGraph",
    "AttackPath",
    "PathObjective",
    "parse_graph",
    "load_graph",
    "cloud10",
    "shortest_attack_path",
    "enumerate_attack_paths",
    "best_path_by_exploitability",
    "path_from_distance_oracle",
    "export_dot",
]


@dataclass(frozen=True, slots=True)
class Vulnerability:
    """Aggregate vulnerability record of one VM.

    ``exploitability`` is the maximum CVSS exploitability over the VM's CVEs,
    scaled to [0, 1]; ``impact`` is the CVSS impact awarded to a successful
    exploit; ``count`` is the number of known CVEs.
    """

    count: int
    exploitability: float
    impact: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.exploitability <= 1.0:
            raise ModelError(
                f"exploitability out of range [0,1]: {self.exploitability}"
            )
        if self.impact < 0:
            raise ModelError(f"impact must be non-negative: {self.impact}")
        if self.count < 0:
            raise ModelError(f"vuln_count must be non-negative: {self.count}")
        if self.exploitability > 0 and self.count < 1:
            raise ModelError("exploitability > 0 requires vuln_count >= 1")


@dataclass(frozen=True)
class AttackGraph:
    """Validated directed attack graph.

    Immutable after construction; all mappings are private copies.  The entry
    node carries no vulnerability record and must have no incoming edges.
    """

    nodes: Mapping[str, tuple[str, Vulnerability]]
    hosts: frozenset[str]
    edges: frozenset[tuple[str, str]]
    entry: str
    target: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", dict(self.nodes))
        object.__setattr__(self, "hosts", frozenset(self.hosts))
        object.__setattr__(self, "edges", frozenset(self.edges))
        self._validate()
        succ: dict[str, tuple[str, ...]] = {}
        for src, dst in self.edges:
            succ.setdefault(src, ())
        for src, dst in sorted(self.edges):
            succ[src] = succ[src] + (dst,)
        object.__setattr__(self, "_successors", succ)

    def _validate(self) -> None:
        if not self.entry:
            raise ModelError("entry node id must be non-empty")
        if not self.target:
            raise ModelError("target node id must be non-empty")
        if self.entry in self.nodes:
            raise ModelError(f"entry node {self.entry!r} must not carry a vulnerability record")
        if self.target not in self.nodes:
            raise ModelError(f"target {self.target!r} is not a declared node")
        known = set(self.nodes) | {self.entry}
        for src, dst in self.edges:
            if src not in known:
                raise ModelError(f"edge to unknown node: {src!r} is not declared")
            if dst not in known:
                raise ModelError(f"edge to unknown node: {dst!r} is not declared")
            if dst == self.entry:
                raise ModelError(f"entry node {self.entry!r} must have no incoming edges")
        for node_id, (host, _vuln) in self.nodes.items():
            if not node_id:
                raise ModelError("node id must be non-empty")
            if host not in self.hosts:
                raise ModelError(f"node {node_id!r} references unknown host {host!r}")
        if not self._reaches_target():
            raise ModelError(
                f"target {self.target!r} unreachable from entry {self.entry!r}"
            )

    def _reaches_target(self) -> bool:
        succ: dict[str, list[str]] = {}
        for src, dst in self.edges:
            succ.setdefault(src, []).append(dst)
        seen = {self.entry}
        frontier = [self.entry]
        while frontier:
            node = frontier.pop()
            if node == self.target:
                return True
            for nxt in succ.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return False

    def successors(self, node: str) -> tuple[str, ...]:
        """Successor node ids of ``node``, sorted by id."""
        return self._successors.get(node, ())  # type: ignore[attr-defined]

    def host_of(self, node: str) -> str:
        return self.nodes[node][0]

    def exploitability(self, node: str) -> float:
        return self.nodes[node][1].exploitability

    def impact(self, node: str) -> float:
        return self.nodes[node][1].impact

    @property
    def node_count(self) -> int:
        """Number of vulnerable nodes (the entry is not counted)."""
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


@dataclass(frozen=True, slots=True)
class AttackPath:
    """Simple entry-to-target path; ``hop_count`` is ``len(nodes) - 1``."""

    nodes: tuple[str, ...]

    @property
    def hop_count(self) -> int:
        return len(self.nodes) - 1

    def validate(self, graph: AttackGraph) -> None:
        """Check edge membership, endpoints, and the no-repeat invariant."""
        if len(self.nodes) < 2:
            raise ModelError("attack path needs at least two nodes")
        if self.nodes[0] != graph.entry:
            raise ModelError(f"path must start at entry {graph.entry!r}")
        if self.nodes[-1] != graph.target:
            raise ModelError(f"path must end at target {graph.target!r}")
        if len(set(self.nodes)) != len(self.nodes):
            raise ModelError("path repeats a node")
        for src, dst in zip(self.nodes, self.nodes[1:]):
            if (src, dst) not in graph.edges:
                raise ModelError(f"({src!r}, {dst!r}) is not an edge of the graph")


class PathObjective(str, Enum):
    """Objective for picking the attacker's preferred path."""

    SUM_MAX = "sum_max"
    PRODUCT_MAX = "product_max"
    HOPS_MIN = "hops_min"


def parse_graph(document: str | bytes | Mapping) -> AttackGraph:
    """Parse a JSON graph document and return a validated :class:`AttackGraph`.

    The document shape is::

        {"hosts": [...], "entry": "A", "target": "DB",
         "nodes": [{"id", "host", "vuln_count", "exploitability", "impact"}, ...],
         "edges": [["A", "vm1"], ...]}
    """
    if isinstance(document, Mapping):
        data = document
    else:
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelError(f"malformed graph document: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ModelError("malformed graph document: top level must be an object")

    try:
        hosts = list(data["hosts"])
        entry = data["entry"]
        target = data["target"]
        raw_nodes = list(data["nodes"])
        raw_edges = list(data["edges"])
    except KeyError as exc:
        raise ModelError(f"malformed graph document: missing key {exc}") from exc

    nodes: dict[str, tuple[str, Vulnerability]] = {}
    for item in raw_nodes:
        try:
            node_id = item["id"]
            vuln = Vulnerability(
                count=int(item["vuln_count"]),
                exploitability=float(item["exploitability"]),
                impact=float(item["impact"]),
            )
            host = item["host"]
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed node record: {item!r}") from exc
        if node_id in nodes:
            raise ModelError(f"duplicate node id: {node_id!r}")
        nodes[node_id] = (host, vuln)

    edges = set()
    for pair in raw_edges:
        if len(pair) != 2:
            raise ModelError(f"malformed edge: {pair!r}")
        edges.add((pair[0], pair[1]))

    return AttackGraph(
        nodes=nodes,
        hosts=frozenset(hosts),
        edges=frozenset(edges),
        entry=entry,
        target=target,
    )


def load_graph(path: str) -> AttackGraph:
    """Read and parse a graph document from ``path``."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_graph(handle.read())


def cloud10() -> AttackGraph:
    """The bundled 10-VM / 5-host example graph."""
    text = resources.files("margame.data").joinpath("cloud10.json").read_text("utf-8")
    return parse_graph(text)


def cloud10_path() -> str:
    """Filesystem path of the bundled example document."""
    return str(resources.files("margame.data").joinpath("cloud10.json"))


def shortest_attack_path(graph: AttackGraph) -> AttackPath:
    """Minimum-hop entry-to-target path (edge weights ignored).

    Among equal-hop paths, returns the lexicographically smallest node-id
    sequence, so repeated calls are deterministic.
    """
    dist_to_target = _reverse_distances(graph)
    if graph.entry not in dist_to_target:
        raise ModelError(
            f"target {graph.target!r} unreachable from entry {graph.entry!r}"
        )
    nodes = [graph.entry]
    remaining = dist_to_target[graph.entry]
    current = graph.entry
    while current != graph.target:
        # successors() is id-sorted, so the first admissible hop is lex-smallest
        for nxt in graph.successors(current):
            if dist_to_target.get(nxt, -1) == remaining - 1:
                nodes.append(nxt)
                current = nxt
                remaining -= 1
                break
        else:  # pragma: no cover - reachability was checked above
            raise ModelError("shortest-path reconstruction failed")
    return AttackPath(nodes=tuple(nodes))


def _reverse_distances(graph: AttackGraph) -> dict[str, int]:
    """BFS hop distances *to* the target, over reversed edges."""
    preds: dict[str, list[str]] = {}
    for src, dst in graph.edges:
        preds.setdefault(dst, []).append(src)
    dist = {graph.target: 0}
    frontier = [graph.target]
    while frontier:
        nxt_frontier: list[str] = []
        for node in frontier:
            for pred in preds.get(node, ()):
                if pred not in dist:
                    dist[pred] = dist[node] + 1
                    nxt_frontier.append(pred)
        frontier = nxt_frontier
    return dist


def enumerate_attack_paths(
    graph: AttackGraph, max_hops: int | None = None
) -> list[AttackPath]:
    """All simple entry-to-target paths with at most ``max_hops`` hops.

    ``max_hops`` defaults to the node count (i.e. all simple paths).  The
    result is sorted by (hop count, node sequence).
    """
    if max_hops is None:
        max_hops = graph.node_count + 1
    if max_hops < 1:
        raise ModelError(f"max_hops must be >= 1, got {max_hops}")

    found: list[tuple[str, ...]] = []
    stack = [graph.entry]
    on_path = {graph.entry}

    def walk(node: str) -> None:
        if node == graph.target:
            found.append(tuple(stack))
            return
        if len(stack) > max_hops:
            return
        for nxt in graph.successors(node):
            if nxt in on_path:
                continue
            stack.append(nxt)
            on_path.add(nxt)
            walk(nxt)
            on_path.discard(nxt)
            stack.pop()

    walk(graph.entry)
    found.sort(key=lambda seq: (len(seq), seq))
    return [AttackPath(nodes=seq) for seq in found]


def best_path_by_exploitability(
    graph: AttackGraph, objective: PathObjective | str
) -> AttackPath:
    """Attacker-preferred path under an exploitability aggregate.

    ``sum_max`` maximizes the sum of node exploitabilities along the path,
    ``product_max`` the product (joint success probability of every hop),
    and ``hops_min`` falls back to the plain shortest path.  The entry node
    carries no score.  Ties break toward the lexicographically smallest path.
    """
    objective = PathObjective(objective)
    if objective is PathObjective.HOPS_MIN:
        return shortest_attack_path(graph)

    paths = enumerate_attack_paths(graph)
    if not paths:
        raise ModelError(
            f"target {graph.target!r} unreachable from entry {graph.entry!r}"
        )

    def score(path: AttackPath) -> float:
        values = [graph.exploitability(n) for n in path.nodes if n != graph.entry]
        if objective is PathObjective.SUM_MAX:
            return sum(values)
        result = 1.0
        for v in values:
            result *= v
        return result

    best = paths[0]
    best_score = score(best)
    for path in paths[1:]:
        s = score(path)
        if s > best_score + 1e-12:
            best, best_score = path, s
        elif abs(s - best_score) <= 1e-12 and path.nodes < best.nodes:
            best = path
    return best


def path_score(graph: AttackGraph, path: AttackPath, objective: PathObjective | str) -> float:
    """Score of ``path`` under ``objective`` (hop count for ``hops_min``)."""
    objective = PathObjective(objective)
    values = [graph.exploitability(n) for n in path.nodes if n != graph.entry]
    if objective is PathObjective.HOPS_MIN:
        return float(path.hop_count)
    if objective is PathObjective.SUM_MAX:
        return sum(values)
    result = 1.0
    for v in values:
        result *= v
    return result


def path_from_distance_oracle(
    graph: AttackGraph, predicted: Mapping[tuple[str, str], float]
) -> AttackPath:
    """Entry-to-target walk guided by an external distance predictor.

    ``predicted`` maps (source, destination) pairs to estimated hop
    distances, e.g. the interchange output of a learned estimator.  From
    each node the walk steps to the successor with the smallest predicted
    distance to the target (the target itself wins when adjacent),
    breaking ties by node id.  Missing predictions count as infinite.
    """
    nodes = [graph.entry]
    visited = {graph.entry}
    current = graph.entry
    limit = graph.node_count + 1
    while current != graph.target:
        if len(nodes) > limit:
            raise ModelError("distance-oracle walk exceeded the node count without reaching the target")
        candidates = [n for n in graph.successors(current) if n not in visited]
        if not candidates:
            raise ModelError(f"distance-oracle walk stuck at {current!r}")
        if graph.target in candidates:
            nxt = graph.target
        else:
            def rank(node: str) -> tuple[float, str]:
                value = predicted.get((node, graph.target))
                if value is None or value < 0:
                    value = float("inf")
                return (value, node)

            nxt = min(candidates, key=rank)
            if rank(nxt)[0] == float("inf"):
                raise ModelError(
                    f"no finite distance prediction out of {current!r}"
                )
        nodes.append(nxt)
        visited.add(nxt)
        current = nxt
    path = AttackPath(nodes=tuple(nodes))
    path.validate(graph)
    return path


def export_dot(graph: AttackGraph, highlight: AttackPath | None = None) -> str:
    """Render the graph as DOT; ``highlight`` edges are drawn dashed.

    Edge labels carry the exploitability of the edge's target node.
    """
    dashed: set[tuple[str, str]] = set()
    if highlight is not None and highlight.nodes:
        highlight.validate(graph)
        dashed = set(zip(highlight.nodes, highlight.nodes[1:]))

    lines = ["digraph attack_graph {", "  rankdir=LR;"]
    lines.append(f'  "{graph.entry}" [shape=circle];')
    for node in sorted(graph.nodes):
        shape = "doublecircle" if node == graph.target else "circle"
        lines.append(f'  "{node}" [shape={shape}];')
    for src, dst in sorted(graph.edges):
        label = f"e={graph.exploitability(dst):g}"
        style = ', style=dashed, color="red"' if (src, dst) in dashed else ""
        lines.append(f'  "{src}" -> "{dst}" [label="{label}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
