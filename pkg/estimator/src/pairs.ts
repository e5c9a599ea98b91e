/**
 * Landmark-based training data: exact BFS distances from a sampled set of
 * landmark nodes to every other node.
 */
import { Digraph } from "./graph.js";
import { Rng } from "./rng.js";

/** A (landmark, destination) pair; distance -1 flags an unreachable pair. */
export interface TrainingPair {
  source: string;
  destination: string;
  trueDistance: number;
}

export function sampleLandmarks(graph: Digraph, count: number, rng: Rng): string[] {
  if (count < 1 || count >= graph.size) {
    throw new RangeError(
      `landmark count must be in [1, ${graph.size - 1}], got ${count}`,
    );
  }
  return rng.sample(graph.ids, count).sort();
}

/**
 * Exactly landmarks x (n - landmarks) pairs: every landmark to every
 * non-landmark node.  Unreachable destinations carry the -1 sentinel and
 * are skipped by training.
 */
export function collectTrainingPairs(
  graph: Digraph,
  landmarks: readonly string[],
): TrainingPair[] {
  const landmarkSet = new Set(landmarks);
  const pairs: TrainingPair[] = [];
  for (const source of landmarks) {
    const dist = graph.bfsDistances(source);
    for (const destination of graph.ids) {
      if (landmarkSet.has(destination)) continue;
      pairs.push({
        source,
        destination,
        trueDistance: dist.has(destination) ? dist.get(destination)! : -1,
      });
    }
  }
  return pairs;
}

/**
 * Train/test pair collection with disjoint landmark sets, so every test
 * pair's source is unseen during training.
 */
export function collectSplitPairs(
  graph: Digraph,
  trainLandmarkCount: number,
  testLandmarkCount: number,
  seed: number,
): { train: TrainingPair[]; test: TrainingPair[] } {
  if (trainLandmarkCount + testLandmarkCount >= graph.size) {
    throw new RangeError("landmark sets exhaust the graph");
  }
  const rng = new Rng(seed);
  const both = rng.sample(graph.ids, trainLandmarkCount + testLandmarkCount);
  const trainLandmarks = both.slice(0, trainLandmarkCount).sort();
  const testLandmarks = both.slice(trainLandmarkCount).sort();
  return {
    train: collectTrainingPairs(graph, trainLandmarks),
    test: collectTrainingPairs(graph, testLandmarks),
  };
}

export function reachable(pairs: readonly TrainingPair[]): TrainingPair[] {
  return pairs.filter((p) => p.trueDistance >= 0);
}
