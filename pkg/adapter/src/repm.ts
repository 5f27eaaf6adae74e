/**
 * Writer for the representation container the analysis toolkit loads:
 * magic "REPM", u32 version 1, u64 n, u64 d, then n*d little-endian f32
 * row-major, plus the sidecar metadata TSV.
 */

import { formatRow } from "./tsv.js";

export interface RowMeta {
  exampleId: string;
  tokenIndex: number;
  tokenText: string;
  inAnswerSpan: boolean;
  language: string;
}

const MAGIC = "REPM";
const VERSION = 1;
const HEADER_BYTES = 4 + 4 + 8 + 8;

export function packMatrix(rows: Float32Array[], dim: number): Buffer {
  const n = rows.length;
  const buffer = Buffer.alloc(HEADER_BYTES + n * dim * 4);
  buffer.write(MAGIC, 0, "ascii");
  buffer.writeUInt32LE(VERSION, 4);
  buffer.writeBigUInt64LE(BigInt(n), 8);
  buffer.writeBigUInt64LE(BigInt(dim), 16);
  let offset = HEADER_BYTES;
  for (const row of rows) {
    if (row.length !== dim) throw new Error(`row has ${row.length} values, expected ${dim}`);
    for (const value of row) {
      buffer.writeFloatLE(value, offset);
      offset += 4;
    }
  }
  return buffer;
}

export function unpackMatrix(data: Buffer): { n: number; d: number; values: Float32Array } {
  if (data.length < HEADER_BYTES) throw new Error("payload shorter than header");
  if (data.toString("ascii", 0, 4) !== MAGIC) throw new Error("bad magic");
  if (data.readUInt32LE(4) !== VERSION) throw new Error("unsupported version");
  const n = Number(data.readBigUInt64LE(8));
  const d = Number(data.readBigUInt64LE(16));
  if (data.length !== HEADER_BYTES + n * d * 4) throw new Error("length mismatch");
  const values = new Float32Array(n * d);
  for (let i = 0; i < values.length; i += 1) {
    values[i] = data.readFloatLE(HEADER_BYTES + i * 4);
  }
  return { n, d, values };
}

const META_HEADER = ["row_index", "example_id", "token_index", "token_text", "in_answer_span", "language"];

export function formatMeta(meta: readonly RowMeta[]): string {
  const lines = [META_HEADER.join("\t")];
  meta.forEach((m, i) => {
    lines.push(
      formatRow([
        String(i),
        m.exampleId,
        String(m.tokenIndex),
        m.tokenText,
        m.inAnswerSpan ? "1" : "0",
        m.language,
      ]),
    );
  });
  return lines.join("\n") + "\n";
}
