#!/usr/bin/env node
/**
 * estimate --graph FILE --landmarks L --dim D --op OP --seed S --out FILE
 *
 * Trains the distance estimator on the given attack-graph document and
 * writes node-to-target predictions as interchange CSV (consumed by the
 * game engine's `paths --estimator-distances`).
 */
import { parseArgs } from "node:util";

import { loadGraph } from "./graph.js";
import { COMBINE_OPS, CombineOp } from "./features.js";
import {
  interchangeCsv,
  targetDistanceEstimates,
  trainEstimator,
  writeInterchange,
} from "./estimator.js";

function usage(): never {
  console.error(
    "usage: estimate --graph FILE [--landmarks L] [--dim D] [--op OP] " +
      "[--seed S] [--out FILE] [--walks W] [--walk-length N] [--epochs E] [--hidden H]",
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        graph: { type: "string" },
        landmarks: { type: "string", default: "" },
        dim: { type: "string", default: "16" },
        op: { type: "string", default: "concatenate" },
        seed: { type: "string", default: "0" },
        out: { type: "string", default: "" },
        walks: { type: "string", default: "10" },
        "walk-length": { type: "string", default: "20" },
        epochs: { type: "string", default: "200" },
        hidden: { type: "string", default: "64" },
      },
    });
  } catch {
    usage();
  }
  const values = parsed.values;
  if (!values.graph) usage();
  const op = values.op as CombineOp;
  if (!COMBINE_OPS.includes(op)) {
    console.error(`unknown --op ${values.op}; choose from ${COMBINE_OPS.join(", ")}`);
    return 2;
  }

  let graph;
  try {
    graph = loadGraph(values.graph);
  } catch (error) {
    console.error(`cannot read graph: ${(error as Error).message}`);
    return 2;
  }

  try {
    const estimator = trainEstimator(graph, {
      landmarks: values.landmarks ? Number(values.landmarks) : undefined,
      op,
      seed: Number(values.seed),
      embedding: {
        dimension: Number(values.dim),
        walksPerNode: Number(values.walks),
        walkLength: Number(values["walk-length"]),
      },
      training: {
        epochs: Number(values.epochs),
        hiddenWidth: Number(values.hidden),
      },
    });
    const estimates = targetDistanceEstimates(estimator);
    if (values.out) {
      writeInterchange(estimates, values.out);
      console.error(
        `trained on ${estimator.trainingPairs.length} pairs ` +
          `(final loss ${estimator.finalTrainingLoss.toFixed(4)}); ` +
          `wrote ${estimates.length} predictions to ${values.out}`,
      );
    } else {
      process.stdout.write(interchangeCsv(estimates));
    }
    return 0;
  } catch (error) {
    console.error((error as Error).message);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
