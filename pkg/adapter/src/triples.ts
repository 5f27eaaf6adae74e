/** Translated-triples TSV: id, context, question, answer, src_lang, tgt_lang. */

import { formatRow } from "./tsv.js";
import { Triple } from "./translate.js";

export function formatTriples(triples: readonly Triple[]): string {
  const lines = triples.map((t) =>
    formatRow([t.qaId, t.context, t.question, t.answer, t.srcLang, t.tgtLang]),
  );
  return lines.length ? lines.join("\n") + "\n" : "";
}
