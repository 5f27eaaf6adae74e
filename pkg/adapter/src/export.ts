/**
 * Hidden-state export: one matrix row per context sub-token, per example,
 * with answer-span flags derived from the gold offsets. The row stream is
 * exactly what the analysis side pairs on (example id, token index).
 */

import { writeFile } from "node:fs/promises";

import { EncoderProvider, resolveEncoder } from "./encoder.js";
import { formatMeta, packMatrix, RowMeta } from "./repm.js";
import { iterQas, loadDataset } from "./squad.js";
import { tokenize } from "./tokenizer.js";

export interface ExportRequest {
  model: string;
  layer?: number; // defaults to the usual probing layer, 12
  datasetPath: string;
  outPath: string;
  metaPath: string;
  language?: string;
  maxTokens?: number;
}

export interface ExportSummary {
  rows: number;
  dim: number;
  examples: number;
  skipped: string[];
}

export async function exportHiddenStates(
  req: ExportRequest,
  encoder?: EncoderProvider,
  log: (message: string) => void = (m) => console.error(m),
): Promise<ExportSummary> {
  const provider = encoder ?? resolveEncoder(req.model);
  const layer = req.layer ?? 12;
  const maxTokens = req.maxTokens ?? 512;
  if (layer < 1 || layer > provider.depth) {
    throw new Error(`layer ${layer} outside the model depth 1..${provider.depth}`);
  }
  const dataset = await loadDataset(req.datasetPath);
  const rows: Float32Array[] = [];
  const meta: RowMeta[] = [];
  const skipped: string[] = [];
  let examples = 0;
  for (const { paragraph, qa } of iterQas(dataset)) {
    const pieces = tokenize(paragraph.context);
    if (pieces.length > maxTokens) {
      skipped.push(qa.id);
      log(`skipping ${qa.id}: ${pieces.length} sub-tokens exceed the ${maxTokens} limit`);
      continue;
    }
    examples += 1;
    const gold = qa.answers[0];
    const answerStart = gold ? gold.answer_start : -1;
    const answerEnd = gold ? gold.answer_start + Array.from(gold.text).length : -1;
    const vectors = provider.encode(pieces.map((p) => p.text), layer);
    pieces.forEach((piece, index) => {
      rows.push(vectors[index]);
      meta.push({
        exampleId: qa.id,
        tokenIndex: index,
        tokenText: piece.text,
        inAnswerSpan: gold !== undefined && piece.start < answerEnd && piece.end > answerStart,
        language: req.language ?? "",
      });
    });
  }
  await writeFile(req.outPath, packMatrix(rows, provider.dim));
  await writeFile(req.metaPath, formatMeta(meta), "utf-8");
  return { rows: rows.length, dim: provider.dim, examples, skipped };
}
