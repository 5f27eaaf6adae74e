"""Numerical analysis of exported token representations.

Covers answer-span cosine similarity, PCA plot-data export, SVCCA, and a
supervised orthogonal alignment baseline. Matrices travel in a small binary
container (magic ``REPM``) with a sidecar TSV carrying per-row metadata.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ReprFormatError
from . import tsv

_MAGIC = b"REPM"
_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


@dataclass(frozen=True)
class RowMeta:
    example_id: str
    token_index: int
    token_text: str
    in_answer_span: bool
    language: str


@dataclass(frozen=True)
class ReprMatrix:
    values: np.ndarray  # (n, d) float32, finite
    meta: tuple[RowMeta, ...]

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ReprFormatError("values must be a 2-d matrix")
        if self.values.shape[1] <= 0:
            raise ReprFormatError("column count must be positive")
        if len(self.meta) != self.values.shape[0]:
            raise ReprFormatError(
                f"metadata rows ({len(self.meta)}) != matrix rows ({self.values.shape[0]})"
            )
        if self.values.size and not np.isfinite(self.values).all():
            raise ReprFormatError("matrix contains non-finite values")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_array(cls, values, language: str = "", example_prefix: str = "row") -> "ReprMatrix":
        """Wrap a bare array with synthetic one-row-per-example metadata.

        In-memory matrices keep the caller's precision; only the file format
        quantizes to 32-bit floats.
        """
        arr = np.asarray(values, dtype=np.float64)
        meta = tuple(
            RowMeta(f"{example_prefix}{i}", 0, "", False, language) for i in range(arr.shape[0])
        )
        return cls(arr, meta)


def pack_values(values: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(values, dtype="<f4")
    header = _HEADER.pack(_MAGIC, _VERSION, arr.shape[0], arr.shape[1])
    return header + arr.tobytes()


def unpack_values(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise ReprFormatError("payload shorter than header")
    magic, version, n, d = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise ReprFormatError(f"bad magic {magic!r}")
    if version != _VERSION:
        raise ReprFormatError(f"unsupported version {version}")
    expected = _HEADER.size + n * d * 4
    if len(data) != expected:
        raise ReprFormatError(f"payload length {len(data)} != expected {expected}")
    flat = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    return flat.reshape(n, d).copy()


_META_COLUMNS = ("row_index", "example_id", "token_index", "token_text",
                 "in_answer_span", "language")


def format_meta(meta: tuple[RowMeta, ...] | list[RowMeta]) -> str:
    lines = ["\t".join(_META_COLUMNS)]
    for i, m in enumerate(meta):
        lines.append(
            tsv.format_row(
                (str(i), m.example_id, str(m.token_index), m.token_text,
                 "1" if m.in_answer_span else "0", m.language)
            )
        )
    return "\n".join(lines) + "\n"


def parse_meta(text: str) -> tuple[RowMeta, ...]:
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0].split("\t") != list(_META_COLUMNS):
        raise ReprFormatError("metadata TSV missing expected header")
    meta = []
    for i, line in enumerate(lines[1:]):
        fields = tsv.parse_row(line)
        if len(fields) != 6:
            raise ReprFormatError(f"metadata row {i}: expected 6 columns, got {len(fields)}")
        if fields[0] != str(i):
            raise ReprFormatError(f"metadata row {i}: row_index says {fields[0]}")
        meta.append(RowMeta(fields[1], int(fields[2]), fields[3], fields[4] == "1", fields[5]))
    return tuple(meta)


def load_representations(data: bytes, meta_text: str | None = None) -> ReprMatrix:
    values = unpack_values(data)
    if meta_text is None:
        return ReprMatrix.from_array(values)
    meta = parse_meta(meta_text)
    return ReprMatrix(values, meta)


def store_representations(m: ReprMatrix) -> tuple[bytes, str]:
    return pack_values(m.values), format_meta(m.meta)


@dataclass(frozen=True)
class CosinePair:
    x_id: str
    y_id: str
    value: float


@dataclass(frozen=True)
class CosineReport:
    pairs: tuple[CosinePair, ...]
    mean: float
    skipped: tuple[str, ...]  # pair keys lacking answer-span rows


def _pooled_answer_rows(m: ReprMatrix) -> dict[str, np.ndarray]:
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for row, meta in zip(m.values, m.meta):
        if meta.in_answer_span:
            if meta.example_id in sums:
                sums[meta.example_id] = sums[meta.example_id] + row.astype(np.float64)
                counts[meta.example_id] += 1
            else:
                sums[meta.example_id] = row.astype(np.float64)
                counts[meta.example_id] = 1
    return {k: v / counts[k] for k, v in sums.items()}


def answer_span_cosine(
    x: ReprMatrix, y: ReprMatrix, pairing: dict[str, str] | None = None
) -> CosineReport:
    """Cosine of mean-pooled answer-span vectors for each paired example.

    Without an explicit pairing, example ids present on both sides pair with
    themselves, in x's order of first appearance. Pairs lacking answer rows
    on either side are skipped and reported.
    """
    if x.d != y.d:
        raise ValueError(f"column mismatch: {x.d} != {y.d}")
    x_pool = _pooled_answer_rows(x)
    y_pool = _pooled_answer_rows(y)
    if pairing is None:
        seen = []
        for meta in x.meta:
            if meta.example_id in x_pool and meta.example_id not in seen:
                seen.append(meta.example_id)
        pairing = {ex: ex for ex in seen}
    pairs = []
    skipped = []
    for x_id, y_id in pairing.items():
        xv = x_pool.get(x_id)
        yv = y_pool.get(y_id)
        if xv is None or yv is None:
            skipped.append(f"{x_id}->{y_id}")
            continue
        denom = np.linalg.norm(xv) * np.linalg.norm(yv)
        value = float(xv @ yv / denom) if denom > 0 else 0.0
        pairs.append(CosinePair(x_id, y_id, value))
    mean = float(np.mean([p.value for p in pairs])) if pairs else 0.0
    return CosineReport(tuple(pairs), mean, tuple(skipped))


@dataclass(frozen=True)
class PcaResult:
    coordinates: np.ndarray  # (n, k)
    loadings: np.ndarray  # (k, d) principal directions, rows unit-norm
    explained_variance_ratio: np.ndarray  # (k,)
    components: int


def pca_project(x: ReprMatrix, components: int = 2) -> PcaResult:
    """Column-center, thin SVD, project onto the leading components.

    The sign of each component is pinned so its largest-magnitude loading is
    positive, making coordinates reproducible across platforms. Requesting
    more components than the matrix rank reduces with a warning.
    """
    if x.n < 2:
        raise ValueError("need at least 2 rows")
    if components < 1:
        raise ValueError("need at least 1 component")
    centered = x.values.astype(np.float64) - x.values.astype(np.float64).mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    tol = max(centered.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    rank = int((s > tol).sum())
    if components > rank:
        warnings.warn(
            f"requested {components} components but rank is {rank}; reducing",
            stacklevel=2,
        )
        components = max(rank, 1)
    # sign convention: largest-|loading| entry of each component is positive
    for j in range(components):
        pivot = int(np.argmax(np.abs(vt[j])))
        if vt[j, pivot] < 0:
            vt[j] = -vt[j]
            u[:, j] = -u[:, j]
    coords = u[:, :components] * s[:components]
    total = float((s**2).sum())
    ratio = (s[:components] ** 2 / total) if total > 0 else np.zeros(components)
    return PcaResult(coords, vt[:components], ratio, components)


@dataclass(frozen=True)
class SvccaConfig:
    variance_fraction: float = 0.99
    epsilon: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.variance_fraction <= 1.0:
            raise ValueError("variance_fraction must be in (0, 1]")


@dataclass(frozen=True)
class SvccaResult:
    correlations: tuple[float, ...]
    mean_correlation: float
    kept_dims: tuple[int, int]


def _reduce_side(values: np.ndarray, tau: float) -> np.ndarray:
    centered = values.astype(np.float64) - values.astype(np.float64).mean(axis=0)
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    total = float((s**2).sum())
    if total == 0.0:
        return centered[:, :0]
    cum = np.cumsum(s**2) / total
    keep = int(np.searchsorted(cum, tau - 1e-15) + 1)
    keep = min(keep, int((s > 0).sum()))
    return u[:, :keep] * s[:keep]


def svcca(x: ReprMatrix, y: ReprMatrix, cfg: SvccaConfig = SvccaConfig()) -> SvccaResult:
    """SVD-reduce each side to the top variance directions, then run CCA.

    Rows are paired by position; when both sides carry real metadata the
    (example_id, token_index) sequences must agree. Canonical correlations
    come from the SVD of the whitened cross-covariance and are clipped to
    [0, 1] to absorb roundoff.
    """
    if x.n != y.n:
        raise ValueError(f"row mismatch: {x.n} != {y.n}")
    if x.n == 0:
        return SvccaResult((), 0.0, (0, 0))
    for i, (mx, my) in enumerate(zip(x.meta, y.meta)):
        if (mx.example_id, mx.token_index) != (my.example_id, my.token_index):
            raise ValueError(
                f"row {i} pairing mismatch: ({mx.example_id}, {mx.token_index}) vs "
                f"({my.example_id}, {my.token_index})"
            )
    if x.n <= max(x.d, y.d):
        warnings.warn(
            f"only {x.n} paired rows for dimensions {x.d}/{y.d}; "
            "correlations may be inflated",
            stacklevel=2,
        )
    xr = _reduce_side(x.values, cfg.variance_fraction)
    yr = _reduce_side(y.values, cfg.variance_fraction)
    kx, ky = xr.shape[1], yr.shape[1]
    if kx == 0 or ky == 0:
        return SvccaResult((0.0,), 0.0, (kx, ky))
    n = x.n
    sxx = xr.T @ xr / (n - 1) + cfg.epsilon * np.eye(kx)
    syy = yr.T @ yr / (n - 1) + cfg.epsilon * np.eye(ky)
    sxy = xr.T @ yr / (n - 1)

    def inv_sqrt(mat):
        vals, vecs = np.linalg.eigh(mat)
        vals = np.clip(vals, cfg.epsilon, None)
        return vecs @ np.diag(vals**-0.5) @ vecs.T

    t = inv_sqrt(sxx) @ sxy @ inv_sqrt(syy)
    rho = np.linalg.svd(t, compute_uv=False)
    rho = np.clip(rho, 0.0, 1.0)
    return SvccaResult(tuple(float(r) for r in rho), float(rho.mean()), (kx, ky))


@dataclass(frozen=True)
class LinearMap:
    matrix: np.ndarray  # (d, d)
    orthogonal: bool


@dataclass(frozen=True)
class ProcrustesResult:
    map: LinearMap
    residual: float  # Frobenius norm of x @ W - y


def procrustes_align(x: np.ndarray, y: np.ndarray) -> ProcrustesResult:
    """Orthogonal W minimizing ||xW - y||_F, via SVD of x^T y."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim != 2:
        raise ValueError("inputs must be 2-d")
    product = x.T @ y
    u, s, vt = np.linalg.svd(product)
    tol = max(product.shape) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    if s.size and int((s > tol).sum()) < s.size:
        warnings.warn("rank-deficient anchor matrices; map is not unique", stacklevel=2)
    w = u @ vt
    residual = float(np.linalg.norm(x @ w - y))
    return ProcrustesResult(LinearMap(w, True), residual)
