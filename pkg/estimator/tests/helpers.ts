/** Shared test utilities: graph generators, an independent BFS oracle, and
 * rank correlation.  The oracle deliberately avoids the Digraph BFS. */
import { Digraph } from "../src/graph.js";
import { Rng } from "../src/rng.js";

/** Unit-weight relaxation over the raw edge list (no adjacency structure),
 * so label checks do not reuse the production BFS. */
export function oracleDistance(
  edges: readonly (readonly [string, string])[],
  ids: readonly string[],
  source: string,
  destination: string,
): number {
  const dist = new Map<string, number>(ids.map((id) => [id, Infinity]));
  dist.set(source, 0);
  for (let round = 0; round < ids.length; round++) {
    let changed = false;
    for (const [a, b] of edges) {
      const candidate = dist.get(a)! + 1;
      if (candidate < dist.get(b)!) {
        dist.set(b, candidate);
        changed = true;
      }
    }
    if (!changed) break;
  }
  const d = dist.get(destination)!;
  return Number.isFinite(d) ? d : -1;
}

/** Layered random DAG shaped like a cloud attack graph: tiers of machines,
 * forward exploit edges, occasional two-tier skips. */
export function layeredDigraph(n: number, layers: number, seed: number): Digraph {
  const rng = new Rng(seed);
  const ids = Array.from({ length: n }, (_, i) => `n${String(i).padStart(3, "0")}`);
  const tier = ids.map((_, i) => Math.min(layers - 1, Math.floor(i / (n / layers))));
  const byTier: string[][] = Array.from({ length: layers }, () => []);
  ids.forEach((id, i) => byTier[tier[i]].push(id));
  const edges: [string, string][] = [];
  ids.forEach((id, i) => {
    const t = tier[i];
    if (t + 1 < layers) {
      const next = byTier[t + 1];
      const fanout = 2 + rng.nextInt(2);
      for (const dst of new Rng(rng.nextUint64()).sample(next, Math.min(fanout, next.length))) {
        edges.push([id, dst]);
      }
    }
    if (t + 2 < layers && rng.next() < 0.15) {
      const skip = byTier[t + 2];
      edges.push([id, skip[rng.nextInt(skip.length)]]);
    }
  });
  const covered = new Set(edges.map(([, dst]) => dst));
  ids.forEach((id, i) => {
    const t = tier[i];
    if (t > 0 && !covered.has(id)) {
      const prev = byTier[t - 1];
      edges.push([prev[rng.nextInt(prev.length)], id]);
    }
  });
  return new Digraph(ids, edges);
}

/** Directed Erdos-Renyi graph (each ordered pair independently an edge). */
export function erdosRenyiDigraph(n: number, p: number, seed: number): Digraph {
  const rng = new Rng(seed);
  const ids = Array.from({ length: n }, (_, i) => `n${String(i).padStart(3, "0")}`);
  const edges: [string, string][] = [];
  for (const a of ids) {
    for (const b of ids) {
      if (a !== b && rng.next() < p) edges.push([a, b]);
    }
  }
  return new Digraph(ids, edges);
}

/** Spearman rank correlation with average ranks for ties. */
export function spearman(xs: readonly number[], ys: readonly number[]): number {
  const rank = (vals: readonly number[]): number[] => {
    const idx = [...vals.keys()].sort((a, b) => vals[a] - vals[b]);
    const out = new Array<number>(vals.length);
    let i = 0;
    while (i < idx.length) {
      let j = i;
      while (j + 1 < idx.length && vals[idx[j + 1]] === vals[idx[i]]) j++;
      const avg = (i + j) / 2 + 1;
      for (let k = i; k <= j; k++) out[idx[k]] = avg;
      i = j + 1;
    }
    return out;
  };
  const rx = rank(xs);
  const ry = rank(ys);
  const mean = (vals: number[]) => vals.reduce((s, v) => s + v, 0) / vals.length;
  const mx = mean(rx);
  const my = mean(ry);
  let num = 0;
  let dx = 0;
  let dy = 0;
  for (let i = 0; i < rx.length; i++) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) ** 2;
    dy += (ry[i] - my) ** 2;
  }
  return num / Math.sqrt(dx * dy);
}

export const CLOUD10 = new URL("../fixtures/cloud10.json", import.meta.url).pathname;
