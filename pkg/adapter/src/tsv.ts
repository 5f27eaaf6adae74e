/**
 * Escaped TSV fields, matching the toolkit's interchange convention:
 * backslash, tab, LF and CR are escaped so multi-line contexts survive.
 */

export function escapeField(value: string): string {
  return value
    .replace(/\\/g, "\\\\")
    .replace(/\t/g, "\\t")
    .replace(/\n/g, "\\n")
    .replace(/\r/g, "\\r");
}

export function unescapeField(value: string): string {
  let out = "";
  let i = 0;
  while (i < value.length) {
    const ch = value[i];
    if (ch === "\\" && i + 1 < value.length) {
      const next = value[i + 1];
      const mapped = next === "t" ? "\t" : next === "n" ? "\n" : next === "r" ? "\r" : next === "\\" ? "\\" : null;
      if (mapped !== null) {
        out += mapped;
        i += 2;
        continue;
      }
    }
    out += ch;
    i += 1;
  }
  return out;
}

export function formatRow(fields: readonly string[]): string {
  return fields.map(escapeField).join("\t");
}

export function parseRow(line: string): string[] {
  return line.split("\t").map(unescapeField);
}
