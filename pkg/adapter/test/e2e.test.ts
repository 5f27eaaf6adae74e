/**
 * End-to-end against the installed `forge` toolkit: adapter outputs must be
 * consumed byte-for-byte by the primary CLI (set FORGE_BIN to override the
 * binary under test).
 */

import { execFile } from "node:child_process";
import { mkdtemp, readFile, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import { beforeAll, describe, expect, it } from "vitest";

import { exportHiddenStates } from "../src/export.js";
import { loadDataset, iterQas } from "../src/squad.js";
import { IdentityService, NoiseService, translateTriples } from "../src/translate.js";
import { formatTriples } from "../src/triples.js";

const run = promisify(execFile);
const FORGE = process.env.FORGE_BIN ?? "forge";

let dir: string;
let datasetPath: string;

const DATASET = {
  version: "v1.1",
  data: [
    {
      title: "fixture",
      paragraphs: [
        {
          context: "the cat sat on the mat near the door",
          qas: [
            { id: "q1", question: "who sat?", answers: [{ text: "cat", answer_start: 4 }] },
            { id: "q2", question: "where?", answers: [{ text: "near the door", answer_start: 23 }] },
          ],
        },
        {
          context: "thermodynamics has laws about energy",
          qas: [
            { id: "q3", question: "what has laws?", answers: [{ text: "thermodynamics", answer_start: 0 }] },
          ],
        },
      ],
    },
  ],
};

beforeAll(async () => {
  dir = await mkdtemp(join(tmpdir(), "adapter-e2e-"));
  datasetPath = join(dir, "dataset.json");
  await writeFile(datasetPath, JSON.stringify(DATASET), "utf-8");
});

describe("identity-mock translation pipeline", () => {
  it("recovers 100% of examples at distance zero end to end", async () => {
    const dataset = await loadDataset(datasetPath);
    const triples = await translateTriples(dataset, "en", "en", new IdentityService());
    const triplesPath = join(dir, "identity.tsv");
    await writeFile(triplesPath, formatTriples(triples), "utf-8");
    const outPath = join(dir, "recovered.json");
    const { stdout } = await run(FORGE, [
      "recover",
      "--dataset", datasetPath,
      "--triples", triplesPath,
      "--mode", "train",
      "--cap", "10",
      "--out", outPath,
    ]);
    const report = JSON.parse(stdout);
    expect(report.total).toBe(3);
    expect(report.recovered).toBe(3);
    expect(report.exact).toBe(3);
    expect(report.dropped).toBe(0);
    const recovered = JSON.parse(await readFile(outPath, "utf-8"));
    expect(recovered.data[0].paragraphs).toHaveLength(3);
  });

  it("stays within threshold under a 2-edit noise mock", async () => {
    const dataset = await loadDataset(datasetPath);
    const triples = await translateTriples(dataset, "en", "en", new NoiseService(2, 7));
    const triplesPath = join(dir, "noisy.tsv");
    await writeFile(triplesPath, formatTriples(triples), "utf-8");
    const { stdout } = await run(FORGE, [
      "recover",
      "--dataset", datasetPath,
      "--triples", triplesPath,
      "--mode", "train",
      "--out", join(dir, "noisy.json"),
    ]);
    const report = JSON.parse(stdout);
    expect(report.recovered).toBe(3);
    expect(report.dropped).toBe(0);
  });
});

describe("hidden-state export", () => {
  it("produces REPM files the primary loads with matching n, d and metadata", async () => {
    const outPath = join(dir, "hidden.repm");
    const metaPath = join(dir, "hidden.tsv");
    const summary = await exportHiddenStates({
      model: "mock:dim=12,layers=12",
      layer: 12,
      datasetPath,
      outPath,
      metaPath,
      language: "en",
    });
    const info = JSON.parse(
      (await run(FORGE, ["analyze", "info", "--x", outPath, "--x-meta", metaPath])).stdout,
    );
    expect(info.n).toBe(summary.rows);
    expect(info.d).toBe(summary.dim);
    expect(info.examples).toBe(3);
    expect(info.answer_rows).toBeGreaterThan(0);
    expect(info.languages).toEqual({ en: summary.rows });
    // self-comparison through the primary's analysis path
    const cosine = JSON.parse(
      (
        await run(FORGE, [
          "analyze", "cosine",
          "--x", outPath, "--x-meta", metaPath,
          "--y", outPath, "--y-meta", metaPath,
        ])
      ).stdout,
    );
    expect(cosine.pairs).toBe(3);
    expect(cosine.mean).toBeCloseTo(1.0, 9);
  });
});
