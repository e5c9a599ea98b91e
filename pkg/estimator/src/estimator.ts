/**
 * End-to-end distance-estimation pipeline: embed the graph, collect
 * landmark-BFS training pairs, train the pair regressor, and score node
 * pairs into the interchange format the game engine consumes.
 */
import { writeFileSync } from "node:fs";

import { embedGraph, EmbeddingOptions, EmbeddingTable } from "./embedding.js";
import { CombineOp, combineEmbeddings } from "./features.js";
import { Digraph } from "./graph.js";
import { collectTrainingPairs, reachable, TrainingPair } from "./pairs.js";
import { Regressor, trainRegressor, TrainOptions } from "./model.js";
import { Rng } from "./rng.js";

export interface DistanceEstimate {
  source: string;
  destination: string;
  predicted: number;
}

export interface PipelineOptions {
  landmarks?: number;
  op?: CombineOp;
  seed?: number;
  embedding?: EmbeddingOptions;
  training?: TrainOptions;
  /** Augment training with zero-distance (landmark, landmark) pairs. */
  selfPairs?: boolean;
}

export interface TrainedEstimator {
  graph: Digraph;
  table: EmbeddingTable;
  model: Regressor;
  op: CombineOp;
  landmarks: string[];
  trainingPairs: TrainingPair[];
  finalTrainingLoss: number;
}

export function pairFeatures(
  table: EmbeddingTable,
  op: CombineOp,
  source: string,
  destination: string,
): Float64Array {
  const a = table.vectors.get(source);
  const b = table.vectors.get(destination);
  if (a === undefined) throw new Error(`unknown node id: ${source}`);
  if (b === undefined) throw new Error(`unknown node id: ${destination}`);
  return combineEmbeddings(a, b, op);
}

export function trainEstimator(
  graph: Digraph,
  options: PipelineOptions = {},
): TrainedEstimator {
  const op = options.op ?? "concatenate";
  const seed = options.seed ?? 0;
  const landmarkCount = options.landmarks ?? Math.max(1, Math.floor(graph.size / 5));

  if (landmarkCount < 1 || landmarkCount >= graph.size) {
    throw new RangeError(
      `landmark count must be in [1, ${graph.size - 1}], got ${landmarkCount}`,
    );
  }
  const table = embedGraph(graph, options.embedding ?? {}, seed);
  // landmarks are BFS sources; keep the declared target out of the pool so
  // every landmark contributes a training pair INTO the target
  const pool = graph.target ? graph.ids.filter((id) => id !== graph.target) : graph.ids;
  const landmarks = new Rng(seed + 1)
    .sample(pool, Math.min(landmarkCount, pool.length))
    .sort();
  const trainingPairs = collectTrainingPairs(graph, landmarks);

  const usable = reachable(trainingPairs);
  const selfSources =
    graph.target && graph.has(graph.target) ? [...landmarks, graph.target] : landmarks;
  const extras: TrainingPair[] =
    options.selfPairs === false
      ? []
      : selfSources.map((l) => ({ source: l, destination: l, trueDistance: 0 }));
  const dataset = [...usable, ...extras];
  if (dataset.length < 10) {
    throw new Error(`too few training pairs (${dataset.length}); need at least 10`);
  }

  const xs = dataset.map((p) => pairFeatures(table, op, p.source, p.destination));
  const ys = dataset.map((p) => p.trueDistance);
  const model = trainRegressor(xs, ys, options.training ?? {}, seed + 2);

  return {
    graph,
    table,
    model,
    op,
    landmarks,
    trainingPairs,
    finalTrainingLoss: model.lossHistory[model.lossHistory.length - 1],
  };
}

export function predictDistance(
  estimator: TrainedEstimator,
  source: string,
  destination: string,
): number {
  const raw = estimator.model.predictOne(
    pairFeatures(estimator.table, estimator.op, source, destination),
  );
  return Math.max(0, raw); // distances are never negative
}

export function predictDistances(
  estimator: TrainedEstimator,
  pairs: readonly (readonly [string, string])[],
): DistanceEstimate[] {
  return pairs.map(([source, destination]) => ({
    source,
    destination,
    predicted: predictDistance(estimator, source, destination),
  }));
}

/**
 * Score every node against the graph's attack target; unreachable pairs
 * get the -1 sentinel so consumers can skip them.
 */
export function targetDistanceEstimates(estimator: TrainedEstimator): DistanceEstimate[] {
  const graph = estimator.graph;
  if (!graph.target) throw new Error("graph document declares no target");
  const reach = new Set<string>();
  for (const id of graph.ids) {
    if (graph.bfsDistances(id).has(graph.target)) reach.add(id);
  }
  return graph.ids.map((id) => ({
    source: id,
    destination: graph.target,
    predicted: reach.has(id) ? predictDistance(estimator, id, graph.target) : -1,
  }));
}

export function interchangeCsv(estimates: readonly DistanceEstimate[]): string {
  const lines = ["source,destination,predicted_distance"];
  for (const e of estimates) {
    const value = e.predicted < 0 ? "-1" : e.predicted.toFixed(6);
    lines.push(`${e.source},${e.destination},${value}`);
  }
  return lines.join("\n") + "\n";
}

export function writeInterchange(
  estimates: readonly DistanceEstimate[],
  path: string,
): void {
  writeFileSync(path, interchangeCsv(estimates), "utf-8");
}
