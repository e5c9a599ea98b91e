/** Binary operations that join two node embeddings into one input vector. */

export type CombineOp = "concatenate" | "subtract" | "multiply" | "average";

export const COMBINE_OPS: readonly CombineOp[] = [
  "concatenate",
  "subtract",
  "multiply",
  "average",
];

export function combineEmbeddings(
  a: Float64Array,
  b: Float64Array,
  op: CombineOp,
): Float64Array {
  if (a.length !== b.length) {
    throw new Error(`dimension mismatch: ${a.length} vs ${b.length}`);
  }
  const d = a.length;
  switch (op) {
    case "concatenate": {
      const out = new Float64Array(2 * d);
      out.set(a, 0);
      out.set(b, d);
      return out;
    }
    case "subtract":
      return a.map((x, i) => x - b[i]);
    case "multiply":
      return a.map((x, i) => x * b[i]);
    case "average":
      return a.map((x, i) => (x + b[i]) / 2);
    default: {
      const never: never = op;
      throw new Error(`unknown combine op: ${never}`);
    }
  }
}

export function inputWidth(dimension: number, op: CombineOp): number {
  return op === "concatenate" ? 2 * dimension : dimension;
}
