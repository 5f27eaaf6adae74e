#!/usr/bin/env node
/** `forge-adapter` CLI: hidden-state export and triple translation. */

import { writeFile } from "node:fs/promises";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { exportHiddenStates } from "./export.js";
import { loadDataset } from "./squad.js";
import { serviceFromSpec, translateTriples } from "./translate.js";
import { formatTriples } from "./triples.js";

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .scriptName("forge-adapter")
    .command(
      "export",
      "export per-token hidden states to REPM + metadata TSV",
      (y) =>
        y
          .option("model", { type: "string", default: "mock:dim=16,layers=12" })
          .option("layer", { type: "number", default: 12 })
          .option("dataset", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("meta-out", { type: "string", demandOption: true })
          .option("language", { type: "string", default: "" })
          .option("max-tokens", { type: "number", default: 512 }),
      async (argv) => {
        const summary = await exportHiddenStates({
          model: argv.model,
          layer: argv.layer,
          datasetPath: argv.dataset,
          outPath: argv.out,
          metaPath: argv["meta-out"],
          language: argv.language,
          maxTokens: argv["max-tokens"],
        });
        console.log(JSON.stringify(summary));
      },
    )
    .command(
      "translate",
      "translate (context, question, answer) triples for span recovery",
      (y) =>
        y
          .option("dataset", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("source", { type: "string", default: "en" })
          .option("target", { type: "string", demandOption: true })
          .option("mock", {
            type: "string",
            describe: "identity | noise:k | drop (omit to use the http service)",
          })
          .option("endpoint", { type: "string" })
          .option("batch-size", { type: "number", default: 16 })
          .option("concurrency", { type: "number", default: 4 }),
      async (argv) => {
        const service = serviceFromSpec(argv.mock ?? "http", { endpoint: argv.endpoint });
        const dataset = await loadDataset(argv.dataset);
        const triples = await translateTriples(dataset, argv.source, argv.target, service, {
          batchSize: argv["batch-size"],
          concurrency: argv.concurrency,
        });
        await writeFile(argv.out, formatTriples(triples), "utf-8");
        const failed = triples.filter((t) => t.answer === "").length;
        console.log(JSON.stringify({ triples: triples.length, failed, service: service.name }));
      },
    )
    .demandCommand(1)
    .strict()
    .fail((message, error) => {
      console.error(JSON.stringify({ error: message ?? String(error) }));
      process.exit(1);
    })
    .parseAsync();
}

main().catch((error) => {
  console.error(JSON.stringify({ error: String(error) }));
  process.exit(1);
});
