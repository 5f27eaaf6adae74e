/** Minimal reader for SQuAD v1.1 shaped datasets. Offsets are code points. */

import { readFile } from "node:fs/promises";

export interface Answer {
  text: string;
  answer_start: number;
}

export interface QaEntry {
  id: string;
  question: string;
  answers: Answer[];
}

export interface Paragraph {
  context: string;
  qas: QaEntry[];
}

export interface Article {
  title: string;
  paragraphs: Paragraph[];
}

export interface Dataset {
  version: string;
  articles: Article[];
}

function fail(path: string, message: string): never {
  throw new Error(`${path}: ${message}`);
}

export function parseDataset(text: string): Dataset {
  const doc = JSON.parse(text);
  if (typeof doc !== "object" || doc === null || !Array.isArray(doc.data)) {
    fail("$", "expected an object with a data array");
  }
  const articles: Article[] = doc.data.map((art: any, i: number) => {
    const apath = `$.data[${i}]`;
    if (!Array.isArray(art?.paragraphs)) fail(apath, "missing paragraphs");
    const paragraphs: Paragraph[] = art.paragraphs.map((para: any, j: number) => {
      const ppath = `${apath}.paragraphs[${j}]`;
      if (typeof para?.context !== "string") fail(ppath, "missing context");
      if (!Array.isArray(para.qas)) fail(ppath, "missing qas");
      const qas: QaEntry[] = para.qas.map((qa: any, k: number) => {
        const qpath = `${ppath}.qas[${k}]`;
        if (typeof qa?.id !== "string") fail(qpath, "missing id");
        if (typeof qa.question !== "string") fail(qpath, "missing question");
        if (!Array.isArray(qa.answers)) fail(qpath, "missing answers");
        const answers: Answer[] = qa.answers.map((ans: any, l: number) => {
          if (typeof ans?.text !== "string" || typeof ans.answer_start !== "number") {
            fail(`${qpath}.answers[${l}]`, "bad answer");
          }
          return { text: ans.text, answer_start: ans.answer_start };
        });
        return { id: qa.id, question: qa.question, answers };
      });
      return { context: para.context, qas };
    });
    return { title: String(art.title ?? ""), paragraphs };
  });
  return { version: String(doc.version ?? ""), articles };
}

export async function loadDataset(path: string): Promise<Dataset> {
  return parseDataset(await readFile(path, "utf-8"));
}

export function* iterQas(d: Dataset): Generator<{ paragraph: Paragraph; qa: QaEntry }> {
  for (const article of d.articles) {
    for (const paragraph of article.paragraphs) {
      for (const qa of paragraph.qas) {
        yield { paragraph, qa };
      }
    }
  }
}
