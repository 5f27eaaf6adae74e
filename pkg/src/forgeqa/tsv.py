"""Escaped TSV rows used by every tabular interchange file.

Fields may contain tabs and newlines (contexts, token texts), so all TSV
emitted or consumed by the toolkit escapes \\ , tab, LF and CR with
backslash sequences. Plain TSV without backslashes reads unchanged.
"""

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_field(value: str) -> str:
    if not any(ch in value for ch in _ESCAPES):
        return value
    return "".join(_ESCAPES.get(ch, ch) for ch in value)


def unescape_field(value: str) -> str:
    if "\\" not in value:
        return value
    out = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\" and i + 1 < len(value) and value[i + 1] in _UNESCAPES:
            out.append(_UNESCAPES[value[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def format_row(fields: list[str] | tuple[str, ...]) -> str:
    return "\t".join(escape_field(f) for f in fields)


def parse_row(line: str) -> list[str]:
    return [unescape_field(f) for f in line.split("\t")]
