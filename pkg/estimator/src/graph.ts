/**
 * Directed graph loaded from the engine's attack-graph JSON documents.
 * Only ids and edges matter here; CVSS scores ride along untouched.
 */
import { readFileSync } from "node:fs";

export interface GraphDocument {
  hosts: string[];
  entry: string;
  target: string;
  nodes: { id: string }[];
  edges: [string, string][];
}

export class Digraph {
  readonly ids: string[];
  readonly entry: string;
  readonly target: string;
  private readonly outEdges: Map<string, string[]>;
  private readonly inEdges: Map<string, string[]>;

  constructor(ids: Iterable<string>, edges: Iterable<readonly [string, string]>, entry = "", target = "") {
    this.ids = [...new Set(ids)].sort();
    this.entry = entry;
    this.target = target;
    this.outEdges = new Map(this.ids.map((id) => [id, []]));
    this.inEdges = new Map(this.ids.map((id) => [id, []]));
    for (const [src, dst] of edges) {
      if (!this.outEdges.has(src) || !this.outEdges.has(dst)) {
        throw new Error(`edge (${src}, ${dst}) references an undeclared node`);
      }
      this.outEdges.get(src)!.push(dst);
      this.inEdges.get(dst)!.push(src);
    }
    for (const id of this.ids) {
      this.outEdges.get(id)!.sort();
      this.inEdges.get(id)!.sort();
    }
  }

  get size(): number {
    return this.ids.length;
  }

  successors(id: string): readonly string[] {
    const out = this.outEdges.get(id);
    if (out === undefined) throw new Error(`unknown node id: ${id}`);
    return out;
  }

  predecessors(id: string): readonly string[] {
    const incoming = this.inEdges.get(id);
    if (incoming === undefined) throw new Error(`unknown node id: ${id}`);
    return incoming;
  }

  has(id: string): boolean {
    return this.outEdges.has(id);
  }

  /** Hop distances from `source` along directed edges (BFS). */
  bfsDistances(source: string): Map<string, number> {
    if (!this.has(source)) throw new Error(`unknown node id: ${source}`);
    const dist = new Map<string, number>([[source, 0]]);
    const queue: string[] = [source];
    let head = 0;
    while (head < queue.length) {
      const node = queue[head++];
      const d = dist.get(node)!;
      for (const next of this.successors(node)) {
        if (!dist.has(next)) {
          dist.set(next, d + 1);
          queue.push(next);
        }
      }
    }
    return dist;
  }

  /** Nodes with no edges at all (would never appear in a random walk). */
  isolatedNodes(): string[] {
    return this.ids.filter(
      (id) => this.successors(id).length === 0 && this.predecessors(id).length === 0,
    );
  }
}

export function parseGraphDocument(text: string): Digraph {
  const doc = JSON.parse(text) as GraphDocument;
  const ids = doc.nodes.map((n) => n.id);
  ids.push(doc.entry);
  return new Digraph(ids, doc.edges, doc.entry, doc.target);
}

export function loadGraph(path: string): Digraph {
  return parseGraphDocument(readFileSync(path, "utf-8"));
}
