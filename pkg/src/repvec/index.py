"""Flat, exact-search vector store with versioned binary persistence.

The on-disk layout, all little-endian:

    magic "RVSIDX" | version u32 | metric u8 | n u64 | d u64
    | vectors: n*d float64, row-major
    | chunk block length u64 | chunk block: JSON-lines, UTF-8
    | sha256 of everything above (32 bytes)

Round-trips are bit-exact; corruption is caught by magic or checksum,
unsupported versions by the version field (checked before the checksum so
a version bump is reported as such, not as corruption).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    CorruptFile,
    DimensionMismatch,
    FormatVersionMismatch,
    LengthMismatch,
)
from .ingest import Chunk, chunks_from_jsonl, chunks_to_jsonl

MAGIC = b"RVSIDX"
FORMAT_VERSION = 1


class Metric(str, Enum):
    COSINE = "cosine"
    EUCLIDEAN = "euclidean"


_METRIC_TAG = {Metric.COSINE: 0, Metric.EUCLIDEAN: 1}
_TAG_METRIC = {v: k for k, v in _METRIC_TAG.items()}


@dataclass(frozen=True)
class SearchResult:
    chunk_id: int
    score: float


@dataclass
class VectorIndex:
    vectors: np.ndarray
    chunks: list[Chunk]
    metric: Metric = Metric.COSINE

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]


def build_index(
    chunks: list[Chunk],
    vectors: np.ndarray | list[np.ndarray],
    metric: Metric = Metric.COSINE,
) -> VectorIndex:
    """Validate alignment and shape, then freeze an index."""
    if isinstance(vectors, list):
        if not vectors:
            raise LengthMismatch("no vectors")
        dims = {np.asarray(v).shape for v in vectors}
        if len(dims) > 1 or any(len(s) != 1 for s in dims):
            raise DimensionMismatch(f"inconsistent vector shapes: {sorted(dims)}")
        vectors = np.stack([np.asarray(v, dtype=np.float64) for v in vectors])
    else:
        vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise DimensionMismatch(f"expected an n x d matrix, got shape {vectors.shape}")
    if len(chunks) != vectors.shape[0]:
        raise LengthMismatch(f"{len(chunks)} chunks vs {vectors.shape[0]} vectors")
    if len(chunks) == 0:
        raise LengthMismatch("index must be non-empty")
    if not np.all(np.isfinite(vectors)):
        raise DimensionMismatch("vectors contain non-finite values")
    return VectorIndex(np.ascontiguousarray(vectors), list(chunks), Metric(metric))


def search_top_k(index: VectorIndex, query: np.ndarray, k: int) -> list[SearchResult]:
    """Exact top-k by full scan; ties break toward the smaller chunk id.

    Cosine results are similarities (best = highest), euclidean results are
    distances (best = lowest). Returns min(k, n) results.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != index.d:
        raise DimensionMismatch(f"query dimension {q.shape[0]} != index d {index.d}")

    if index.metric is Metric.COSINE:
        norms = np.linalg.norm(index.vectors, axis=1)
        qnorm = float(np.linalg.norm(q))
        denom = np.where(norms == 0.0, 1.0, norms) * (qnorm if qnorm != 0.0 else 1.0)
        scores = (index.vectors @ q) / denom
        keys = -scores
    else:
        diffs = index.vectors - q
        scores = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
        keys = scores

    ids = np.arange(index.n)
    order = np.lexsort((ids, keys))[: min(k, index.n)]
    return [
        SearchResult(chunk_id=index.chunks[i].chunk_id, score=float(scores[i]))
        for i in order
    ]


def save_index(index: VectorIndex, path: str | Path) -> None:
    chunk_block = chunks_to_jsonl(index.chunks).encode("utf-8")
    header = MAGIC + struct.pack(
        "<IBQQ",
        FORMAT_VERSION,
        _METRIC_TAG[index.metric],
        index.n,
        index.d,
    )
    vec_block = np.ascontiguousarray(index.vectors, dtype="<f8").tobytes()
    body = header + vec_block + struct.pack("<Q", len(chunk_block)) + chunk_block
    digest = hashlib.sha256(body).digest()
    Path(path).write_bytes(body + digest)


def load_index(path: str | Path) -> VectorIndex:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 21 + 32 or not data.startswith(MAGIC):
        raise CorruptFile(f"{path}: bad magic bytes")
    version = struct.unpack_from("<I", data, len(MAGIC))[0]
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"{path}: format version {version}, expected {FORMAT_VERSION}"
        )
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptFile(f"{path}: checksum mismatch")

    offset = len(MAGIC) + 4
    metric_tag, n, d = struct.unpack_from("<BQQ", data, offset)
    offset += 17
    if metric_tag not in _TAG_METRIC:
        raise CorruptFile(f"{path}: unknown metric tag {metric_tag}")
    vec_bytes = n * d * 8
    if offset + vec_bytes + 8 > len(body):
        raise CorruptFile(f"{path}: truncated vector block")
    vectors = np.frombuffer(data, dtype="<f8", count=n * d, offset=offset).reshape(n, d)
    offset += vec_bytes
    (chunk_len,) = struct.unpack_from("<Q", data, offset)
    offset += 8
    if offset + chunk_len != len(body):
        raise CorruptFile(f"{path}: chunk block length mismatch")
    chunks = chunks_from_jsonl(data[offset : offset + chunk_len].decode("utf-8"))
    if len(chunks) != n:
        raise CorruptFile(f"{path}: {len(chunks)} chunks for n={n}")
    return VectorIndex(
        vectors=np.ascontiguousarray(vectors.astype(np.float64)),
        chunks=chunks,
        metric=_TAG_METRIC[metric_tag],
    )
