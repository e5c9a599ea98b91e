import { describe, expect, test } from "vitest";

import { Digraph, loadGraph } from "../src/graph.js";
import { CLOUD10, oracleDistance } from "./helpers.js";

describe("graph loading", () => {
  test("cloud10 document", () => {
    const g = loadGraph(CLOUD10);
    expect(g.size).toBe(11); // 10 machines plus the entry
    expect(g.entry).toBe("A");
    expect(g.target).toBe("DB");
    expect(g.successors("A")).toEqual(["vm1", "vm2"]);
    expect(g.successors("vm9")).toEqual(["DB", "vm6"]);
  });

  test("edge to undeclared node is rejected", () => {
    expect(() => new Digraph(["a", "b"], [["a", "ghost"]])).toThrow(/undeclared/);
  });

  test("unknown id queries are rejected", () => {
    const g = new Digraph(["a", "b"], [["a", "b"]]);
    expect(() => g.successors("zzz")).toThrow(/unknown node/);
    expect(() => g.bfsDistances("zzz")).toThrow(/unknown node/);
  });
});

describe("BFS distances", () => {
  test("cloud10 distances match the relaxation oracle", () => {
    const g = loadGraph(CLOUD10);
    const edges = g.ids.flatMap((id) =>
      g.successors(id).map((next) => [id, next] as const),
    );
    for (const source of g.ids) {
      const dist = g.bfsDistances(source);
      for (const destination of g.ids) {
        const expected = oracleDistance(edges, g.ids, source, destination);
        if (expected < 0) {
          expect(dist.has(destination)).toBe(false);
        } else {
          expect(dist.get(destination)).toBe(expected);
        }
      }
    }
  });

  test("entry to target is four hops", () => {
    const g = loadGraph(CLOUD10);
    expect(g.bfsDistances("A").get("DB")).toBe(4);
  });

  test("isolated node detection", () => {
    const g = new Digraph(["a", "b", "lone"], [["a", "b"]]);
    expect(g.isolatedNodes()).toEqual(["lone"]);
  });
});
