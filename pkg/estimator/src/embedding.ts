/**
 * Neighborhood-preserving node embeddings: uniform random walks over the
 * directed graph feed a skip-gram model trained with negative sampling.
 */
import { Digraph } from "./graph.js";
import { Rng } from "./rng.js";

export interface EmbeddingTable {
  dimension: number;
  vectors: Map<string, Float64Array>;
}

export interface EmbeddingOptions {
  dimension?: number;
  walksPerNode?: number;
  walkLength?: number;
  window?: number;
  negatives?: number;
  epochs?: number;
  learningRate?: number;
}

const DEFAULTS: Required<EmbeddingOptions> = {
  dimension: 16,
  walksPerNode: 10,
  walkLength: 20,
  window: 5,
  negatives: 5,
  epochs: 5,
  learningRate: 0.05,
};

export function randomWalks(
  graph: Digraph,
  perNode: number,
  length: number,
  rng: Rng,
): string[][] {
  const walks: string[][] = [];
  for (let round = 0; round < perNode; round++) {
    for (const start of graph.ids) {
      const walk = [start];
      let current = start;
      for (let step = 1; step < length; step++) {
        const next = graph.successors(current);
        if (next.length === 0) break; // dead end: directed walks just stop
        current = next[rng.nextInt(next.length)];
        walk.push(current);
      }
      walks.push(walk);
    }
  }
  return walks;
}

function sigmoid(x: number): number {
  if (x > 30) return 1;
  if (x < -30) return 0;
  return 1 / (1 + Math.exp(-x));
}

/**
 * Skip-gram with negative sampling over the walk corpus.
 *
 * The window looks forward only, so a (center, context) hit means the
 * context node was reached *from* the center node; the trained center
 * vector therefore captures a node's forward (reaching) role and the
 * context vector its backward (reachable) role.  Each node's embedding is
 * the concatenation of the two halves, which keeps directed-distance
 * information that a symmetric window would wash out.  Everything is
 * driven by the caller's seed.
 */
export function embedGraph(
  graph: Digraph,
  options: EmbeddingOptions = {},
  seed = 0,
): EmbeddingTable {
  const opts = { ...DEFAULTS, ...options };
  if (opts.dimension < 2) {
    throw new Error(`embedding dimension must be >= 2, got ${opts.dimension}`);
  }
  const isolated = graph.isolatedNodes();
  if (isolated.length > 0) {
    throw new Error(`isolated node(s) cannot be embedded: ${isolated.join(", ")}`);
  }

  const rng = new Rng(seed);
  const ids = graph.ids;
  const index = new Map(ids.map((id, i) => [id, i]));
  const n = ids.length;
  const dim = opts.dimension;
  const d = Math.ceil(dim / 2); // internal skip-gram width per half

  const center = new Float64Array(n * d);
  const context = new Float64Array(n * d);
  for (let i = 0; i < center.length; i++) {
    center[i] = (rng.next() - 0.5) / d;
  }
  for (let i = 0; i < context.length; i++) {
    context[i] = (rng.next() - 0.5) / d;
  }

  const walks = randomWalks(graph, opts.walksPerNode, opts.walkLength, rng);

  // unigram^(3/4) negative-sampling table over walk occurrences
  const counts = new Float64Array(n);
  for (const walk of walks) for (const node of walk) counts[index.get(node)!]++;
  const weights = counts.map((c) => Math.pow(c, 0.75));
  const cumulative = new Float64Array(n);
  let total = 0;
  for (let i = 0; i < n; i++) {
    total += weights[i];
    cumulative[i] = total;
  }
  const drawNegative = (): number => {
    const u = rng.next() * total;
    let lo = 0;
    let hi = n - 1;
    while (lo < hi) {
      const mid = (lo + hi) >> 1;
      if (cumulative[mid] < u) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  };

  const grad = new Float64Array(d);
  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    const lr = opts.learningRate * (1 - epoch / opts.epochs) + 1e-4;
    for (const walk of walks) {
      for (let pos = 0; pos < walk.length; pos++) {
        const c = index.get(walk[pos])! * d;
        const span = 1 + rng.nextInt(opts.window);
        const last = Math.min(walk.length - 1, pos + span);
        for (let other = pos + 1; other <= last; other++) {
          grad.fill(0);
          // one positive plus `negatives` sampled non-neighbors
          for (let k = 0; k <= opts.negatives; k++) {
            const targetIdx = k === 0 ? index.get(walk[other])! : drawNegative();
            const label = k === 0 ? 1 : 0;
            const t = targetIdx * d;
            let dot = 0;
            for (let j = 0; j < d; j++) dot += center[c + j] * context[t + j];
            const g = lr * (label - sigmoid(dot));
            for (let j = 0; j < d; j++) {
              grad[j] += g * context[t + j];
              context[t + j] += g * center[c + j];
            }
          }
          for (let j = 0; j < d; j++) center[c + j] += grad[j];
        }
      }
    }
  }

  const vectors = new Map<string, Float64Array>();
  const backWidth = dim - d;
  for (const id of ids) {
    const at = index.get(id)! * d;
    const vector = new Float64Array(dim);
    vector.set(center.slice(at, at + d), 0);
    vector.set(context.slice(at, at + backWidth), d);
    vectors.set(id, vector);
  }
  return { dimension: dim, vectors };
}
