"""Exception hierarchy shared by all forgeqa modules."""


class ForgeError(Exception):
    """Base class for all toolkit errors."""


class DatasetParseError(ForgeError):
    """Malformed dataset document; carries the JSON path of the offending node."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class DatasetIntegrityError(ForgeError):
    """Structurally valid dataset violating an invariant (offsets, id uniqueness)."""

    def __init__(self, message: str, qa_id: str | None = None):
        super().__init__(message if qa_id is None else f"qa '{qa_id}': {message}")
        self.qa_id = qa_id


class NoMatchError(ForgeError):
    """Span search against an empty context."""


class CoverageError(ForgeError):
    """Token outside the permutation vocabulary."""

    def __init__(self, token: str):
        super().__init__(f"token not covered by permutation table: {token!r}")
        self.token = token


class DictionaryParseError(ForgeError):
    """Malformed bilingual dictionary line."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConlluError(ForgeError):
    """Malformed or non-tree dependency annotation."""

    def __init__(self, message: str, sentence_index: int):
        super().__init__(f"sentence {sentence_index}: {message}")
        self.sentence_index = sentence_index


class AlignmentError(ForgeError):
    """Parse forms do not concatenate to the dataset text."""


class TriplesParseError(ForgeError):
    """Malformed translated-triples row."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ReprFormatError(ForgeError):
    """Bad representation file: magic, version, lengths, or metadata mismatch."""


class ManifestError(ForgeError):
    """Manifest failed schema or pre-execution validation."""
