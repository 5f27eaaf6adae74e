/**
 * Sub-token tokenizer producing wordpiece-style pieces with code-point
 * offsets into the source text. Words are whitespace runs with edge
 * punctuation peeled off and CJK code points isolated (the convention the
 * analysis toolkit scores with); long words split into fixed-size pieces
 * marked with the usual "##" continuation prefix.
 */

export interface SubToken {
  text: string; // "##"-prefixed for continuations
  start: number; // code-point offsets into the source
  end: number;
}

const CJK_RANGES: Array<[number, number]> = [
  [0x3040, 0x30ff],
  [0x31f0, 0x31ff],
  [0x3400, 0x4dbf],
  [0x4e00, 0x9fff],
  [0xf900, 0xfaff],
  [0x20000, 0x2fa1f],
];

export function isCjk(cp: number): boolean {
  return CJK_RANGES.some(([lo, hi]) => cp >= lo && cp <= hi);
}

function isSpace(ch: string): boolean {
  return /\s/u.test(ch);
}

function isPunct(ch: string): boolean {
  return /\p{P}/u.test(ch);
}

const PIECE_LEN = 4;

function pushWord(chars: string[], start: number, out: SubToken[]): void {
  for (let off = 0; off < chars.length; off += PIECE_LEN) {
    const piece = chars.slice(off, off + PIECE_LEN).join("");
    out.push({
      text: off === 0 ? piece : `##${piece}`,
      start: start + off,
      end: start + Math.min(off + PIECE_LEN, chars.length),
    });
  }
}

function pushSegment(chars: string[], start: number, out: SubToken[]): void {
  let a = 0;
  let b = chars.length;
  const trailing: SubToken[] = [];
  while (a < b && isPunct(chars[a])) {
    out.push({ text: chars[a], start: start + a, end: start + a + 1 });
    a += 1;
  }
  while (b > a && isPunct(chars[b - 1])) {
    trailing.unshift({ text: chars[b - 1], start: start + b - 1, end: start + b });
    b -= 1;
  }
  if (a < b) pushWord(chars.slice(a, b), start + a, out);
  out.push(...trailing);
}

export function tokenize(text: string): SubToken[] {
  const chars = Array.from(text); // code points, not UTF-16 units
  const out: SubToken[] = [];
  let seg: string[] = [];
  let segStart = 0;
  const flush = () => {
    if (seg.length) pushSegment(seg, segStart, out);
    seg = [];
  };
  for (let i = 0; i < chars.length; i += 1) {
    const ch = chars[i];
    if (isSpace(ch)) {
      flush();
    } else if (isCjk(ch.codePointAt(0)!)) {
      flush();
      out.push({ text: ch, start: i, end: i + 1 });
    } else {
      if (!seg.length) segStart = i;
      seg.push(ch);
    }
  }
  flush();
  return out;
}
