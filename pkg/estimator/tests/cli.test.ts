import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, describe, expect, test } from "vitest";

import { main } from "../src/cli.js";
import { CLOUD10 } from "./helpers.js";

const scratch = mkdtempSync(join(tmpdir(), "estimator-cli-"));
afterAll(() => rmSync(scratch, { recursive: true, force: true }));

describe("estimate CLI", () => {
  test("writes the interchange file", () => {
    const out = join(scratch, "distances.csv");
    const code = main([
      "--graph", CLOUD10,
      "--landmarks", "6",
      "--dim", "16",
      "--op", "concatenate",
      "--seed", "1",
      "--walks", "40",
      "--walk-length", "40",
      "--out", out,
    ]);
    expect(code).toBe(0);
    const text = readFileSync(out, "utf-8");
    expect(text.startsWith("source,destination,predicted_distance\n")).toBe(true);
    expect(text.trimEnd().split("\n")).toHaveLength(12);
    const entry = text.split("\n").find((line) => line.startsWith("A,DB,"))!;
    const predicted = Number(entry.split(",")[2]);
    expect(Math.abs(predicted - 4)).toBeLessThanOrEqual(1.0);
  }, 60_000);

  test("same seed reproduces the same file", () => {
    const a = join(scratch, "a.csv");
    const b = join(scratch, "b.csv");
    const args = ["--graph", CLOUD10, "--landmarks", "5", "--seed", "9", "--epochs", "50"];
    expect(main([...args, "--out", a])).toBe(0);
    expect(main([...args, "--out", b])).toBe(0);
    expect(readFileSync(a, "utf-8")).toBe(readFileSync(b, "utf-8"));
  }, 60_000);

  test("unknown op exits 2", () => {
    expect(main(["--graph", CLOUD10, "--op", "hadamard"])).toBe(2);
  });

  test("unreadable graph exits 2", () => {
    expect(main(["--graph", "/nonexistent.json"])).toBe(2);
  });

  test("out-of-range landmark count exits 1", () => {
    expect(main(["--graph", CLOUD10, "--landmarks", "50"])).toBe(1);
  });
});
