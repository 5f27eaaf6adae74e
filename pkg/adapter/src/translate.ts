/**
 * Translation client for building recovery-pipeline inputs.
 *
 * The pipeline translates context, question and answer as separate strings
 * per example (spans are re-located downstream, never preserved here) and
 * emits the triples TSV consumed by `forge recover`. A failed item leaves
 * its answer empty, which the recovery step treats as a failed triple.
 *
 * Mock services cover offline testing: `identity`, `noise:k` (up to k
 * seeded character edits injected into answers), and `drop` (answers
 * removed entirely).
 */

import { createHash } from "node:crypto";

import { iterQas, Dataset } from "./squad.js";

export interface TranslateItem {
  text: string;
  field: "context" | "question" | "answer";
  qaId: string;
}

export interface TranslationService {
  readonly name: string;
  translateBatch(items: TranslateItem[], source: string, target: string): Promise<string[]>;
}

export class IdentityService implements TranslationService {
  readonly name = "mock:identity";

  async translateBatch(items: TranslateItem[]): Promise<string[]> {
    return items.map((item) => item.text);
  }
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function seedFrom(key: string): number {
  return createHash("sha256").update(key).digest().readUInt32LE(0);
}

/** Injects up to k character edits into answers only; deterministic per qa. */
export class NoiseService implements TranslationService {
  readonly name: string;

  constructor(private readonly maxEdits: number, private readonly seed = 0) {
    this.name = `mock:noise:${maxEdits}`;
  }

  async translateBatch(items: TranslateItem[]): Promise<string[]> {
    return items.map((item) => {
      if (item.field !== "answer" || !item.text) return item.text;
      const rng = mulberry32(seedFrom(`${this.seed}:${item.qaId}`));
      const chars = Array.from(item.text);
      const edits = Math.floor(rng() * (this.maxEdits + 1));
      const alphabet = "abcdefghijklmnopqrstuvwxyz";
      for (let e = 0; e < edits; e += 1) {
        const op = chars.length > 1 ? Math.floor(rng() * 3) : 1;
        const pos = Math.floor(rng() * chars.length);
        const letter = alphabet[Math.floor(rng() * alphabet.length)];
        if (op === 0) chars[pos] = letter;
        else if (op === 1) chars.splice(pos, 0, letter);
        else chars.splice(pos, 1);
      }
      return chars.join("");
    });
  }
}

export class DropAnswerService implements TranslationService {
  readonly name = "mock:drop";

  async translateBatch(items: TranslateItem[]): Promise<string[]> {
    return items.map((item) => (item.field === "answer" ? "" : item.text));
  }
}

export interface HttpServiceOptions {
  endpoint: string;
  token?: string;
  retries?: number; // attempts beyond the first
  backoffMs?: number; // doubled per retry
}

/** POSTs {texts, source, target}, expects {translations}; retries with backoff. */
export class HttpTranslationService implements TranslationService {
  readonly name: string;
  private readonly retries: number;
  private readonly backoffMs: number;

  constructor(private readonly options: HttpServiceOptions) {
    this.name = `http:${options.endpoint}`;
    this.retries = options.retries ?? 3;
    this.backoffMs = options.backoffMs ?? 250;
  }

  async translateBatch(items: TranslateItem[], source: string, target: string): Promise<string[]> {
    const body = JSON.stringify({ texts: items.map((i) => i.text), source, target });
    let lastError: unknown = null;
    for (let attempt = 0; attempt <= this.retries; attempt += 1) {
      if (attempt > 0) {
        await new Promise((resolve) => setTimeout(resolve, this.backoffMs * 2 ** (attempt - 1)));
      }
      try {
        const response = await fetch(this.options.endpoint, {
          method: "POST",
          headers: {
            "content-type": "application/json",
            ...(this.options.token ? { authorization: `Bearer ${this.options.token}` } : {}),
          },
          body,
        });
        if (!response.ok) {
          throw new Error(`translation service returned ${response.status}`);
        }
        const payload: any = await response.json();
        if (!Array.isArray(payload?.translations) || payload.translations.length !== items.length) {
          throw new Error("translation service returned a malformed payload");
        }
        return payload.translations.map(String);
      } catch (error) {
        lastError = error;
      }
    }
    throw lastError instanceof Error ? lastError : new Error(String(lastError));
  }
}

export function serviceFromSpec(spec: string, options?: Partial<HttpServiceOptions>): TranslationService {
  if (spec === "identity") return new IdentityService();
  if (spec === "drop") return new DropAnswerService();
  const noise = spec.match(/^noise:(\d+)$/);
  if (noise) return new NoiseService(Number(noise[1]));
  if (spec === "http") {
    const endpoint = options?.endpoint ?? process.env.FORGE_MT_ENDPOINT;
    if (!endpoint) throw new Error("http service needs FORGE_MT_ENDPOINT or --endpoint");
    return new HttpTranslationService({
      endpoint,
      token: options?.token ?? process.env.FORGE_MT_TOKEN,
      retries: options?.retries,
      backoffMs: options?.backoffMs,
    });
  }
  throw new Error(`unknown service spec '${spec}' (identity | noise:k | drop | http)`);
}

export interface Triple {
  qaId: string;
  context: string;
  question: string;
  answer: string;
  srcLang: string;
  tgtLang: string;
}

export interface TranslateOptions {
  batchSize?: number;
  concurrency?: number;
  log?: (message: string) => void;
}

/**
 * Translate every example; output order always matches input order and qa
 * ids are never altered. Batches run with bounded concurrency; a batch that
 * keeps failing marks its triples failed (empty answer) and the run goes on.
 */
export async function translateTriples(
  dataset: Dataset,
  source: string,
  target: string,
  service: TranslationService,
  options: TranslateOptions = {},
): Promise<Triple[]> {
  const log = options.log ?? ((m: string) => console.error(m));
  const batchSize = options.batchSize ?? 16;
  const concurrency = options.concurrency ?? 4;
  const items: TranslateItem[] = [];
  const examples: { qaId: string }[] = [];
  for (const { paragraph, qa } of iterQas(dataset)) {
    examples.push({ qaId: qa.id });
    items.push({ text: paragraph.context, field: "context", qaId: qa.id });
    items.push({ text: qa.question, field: "question", qaId: qa.id });
    items.push({ text: qa.answers[0]?.text ?? "", field: "answer", qaId: qa.id });
  }
  const results = new Array<string | null>(items.length).fill(null);
  const batches: Array<{ start: number; slice: TranslateItem[] }> = [];
  for (let start = 0; start < items.length; start += batchSize) {
    batches.push({ start, slice: items.slice(start, start + batchSize) });
  }
  let cursor = 0;
  const worker = async () => {
    while (cursor < batches.length) {
      const mine = batches[cursor];
      cursor += 1;
      try {
        const translated = await service.translateBatch(mine.slice, source, target);
        translated.forEach((text, i) => {
          results[mine.start + i] = text;
        });
      } catch (error) {
        log(`batch at ${mine.start} failed after retries: ${String(error)}`);
        // leave results null; the affected triples are marked failed below
      }
    }
  };
  await Promise.all(Array.from({ length: Math.min(concurrency, batches.length) }, worker));
  return examples.map((example, i) => {
    const context = results[3 * i];
    const question = results[3 * i + 1];
    const answer = results[3 * i + 2];
    const failed = context === null || question === null || answer === null;
    return {
      qaId: example.qaId,
      context: context ?? "",
      question: question ?? "",
      answer: failed ? "" : (answer as string),
      srcLang: source,
      tgtLang: target,
    };
  });
}
