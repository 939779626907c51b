"""Plain-text loading and recursive chunking with deterministic token accounting.

Documents are split by trying a ladder of separators in order (paragraph
break, newline, space, then single characters); pieces that still exceed the
chunk size recurse into the next separator. Fitting pieces are then merged
back into chunks up to ``chunk_size`` tokens, carrying up to ``overlap``
tokens of trailing context into the next chunk. Every chunk records the
character span it occupies in the parent document, so chunk text is always a
verbatim slice of the source.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import EmptyCorpus, EmptyDocument

TokenCounter = Callable[[str], int]

DEFAULT_SEPARATORS = ("\n\n", "\n", " ", "")
DEFAULT_CHUNK_SIZE = 800
DEFAULT_OVERLAP = 80


@dataclass(frozen=True)
class SourceDocument:
    """One input document: an id, its full text, and free-form metadata."""

    doc_id: str
    text: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Chunk:
    """A contiguous span of a document, the unit of embedding and retrieval."""

    chunk_id: int
    doc_id: str
    text: str
    token_count: int
    char_span: tuple[int, int]


@dataclass(frozen=True)
class ChunkingConfig:
    chunk_size: int = DEFAULT_CHUNK_SIZE
    overlap: int = DEFAULT_OVERLAP
    separators: tuple[str, ...] = DEFAULT_SEPARATORS

    def __post_init__(self) -> None:
        if self.chunk_size <= 0:
            raise ValueError("chunk_size must be positive")
        if not 0 <= self.overlap < self.chunk_size:
            raise ValueError("overlap must satisfy 0 <= overlap < chunk_size")
        if not self.separators or self.separators[-1] != "":
            raise ValueError("separators must be non-empty and end with ''")


def count_tokens(text: str) -> int:
    """Default tokenizer: whitespace-delimited word count.

    Deterministic, monotone under concatenation, and zero on the empty
    string. Provider-faithful tokenizers can be injected wherever a token
    counter is accepted.
    """
    return len(text.split())


def load_document(path: str | Path, doc_id: str | None = None) -> SourceDocument:
    """Read a UTF-8 text file into a SourceDocument."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    return SourceDocument(
        doc_id=doc_id or p.stem,
        text=text,
        metadata={"origin": str(p)},
    )


def _largest_fitting_prefix(
    text: str, lo: int, hi: int, limit: int, count: TokenCounter
) -> int:
    """Largest j in (lo, hi] with count(text[lo:j]) <= limit.

    Relies on the counter being monotone under concatenation; always
    advances by at least one character.
    """
    if count(text[lo:hi]) <= limit:
        return hi
    good, bad = lo + 1, hi  # text[lo:lo+1] assumed fitting; limit >= 1 token
    while bad - good > 1:
        mid = (good + bad) // 2
        if count(text[lo:mid]) <= limit:
            good = mid
        else:
            bad = mid
    return good


def _split_pieces(
    text: str,
    lo: int,
    hi: int,
    separators: tuple[str, ...],
    chunk_size: int,
    count: TokenCounter,
) -> list[tuple[int, int]]:
    """Decompose text[lo:hi] into spans that each fit chunk_size.

    Pure-whitespace pieces are discarded (the only permitted coverage gaps,
    besides the separators themselves). A piece that exceeds chunk_size
    after every separator has been tried is kept whole with a warning.
    """
    segment = text[lo:hi]
    if count(segment) <= chunk_size:
        return [] if not segment.strip() else [(lo, hi)]
    if not separators:
        warnings.warn(
            f"unsplittable atom of {count(segment)} tokens exceeds "
            f"chunk_size={chunk_size}; emitting oversized chunk",
            stacklevel=2,
        )
        return [(lo, hi)]

    sep = separators[0]
    if sep == "":
        # Character-level fallback: greedy maximal windows.
        out = []
        i = lo
        while i < hi:
            j = _largest_fitting_prefix(text, i, hi, chunk_size, count)
            j = max(j, i + 1)
            out.append((i, j))
            i = j
        return out

    # Whitespace separators are dropped (allowed gaps); any other separator
    # stays attached to the piece before it so coverage has no gaps.
    drop_sep = sep.isspace()
    pieces: list[tuple[int, int]] = []
    start = lo
    while start < hi:
        found = text.find(sep, start, hi)
        if found == -1:
            pieces.append((start, hi))
            break
        end = found if drop_sep else found + len(sep)
        if end > start:
            pieces.append((start, end))
        start = found + len(sep)

    out = []
    for a, b in pieces:
        piece = text[a:b]
        if not piece.strip():
            continue
        if count(piece) <= chunk_size:
            out.append((a, b))
        else:
            out.extend(_split_pieces(text, a, b, separators[1:], chunk_size, count))
    return out


def _merge_pieces(
    text: str,
    pieces: list[tuple[int, int]],
    chunk_size: int,
    overlap: int,
    count: TokenCounter,
) -> list[tuple[int, int]]:
    """Greedily combine adjacent pieces into chunk spans with overlap carry.

    A chunk's span runs from its first piece to its last, so any separator
    characters interior to the chunk are included in its text and counted.
    """
    chunks: list[tuple[int, int]] = []
    cur: list[tuple[int, int]] = []
    for piece in pieces:
        if cur and count(text[cur[0][0] : piece[1]]) > chunk_size:
            chunks.append((cur[0][0], cur[-1][1]))
            # Carry the longest trailing run of pieces within the overlap
            # budget into the next chunk.
            tail_end = cur[-1][1]
            carry: list[tuple[int, int]] = []
            for q in reversed(cur):
                if count(text[q[0] : tail_end]) <= overlap:
                    carry.insert(0, q)
                else:
                    break
            cur = carry
            # Guarantee progress: shed carried pieces until the new piece fits
            # (or stands alone, possibly oversized).
            while cur and count(text[cur[0][0] : piece[1]]) > chunk_size:
                cur.pop(0)
        cur.append(piece)
    if cur:
        chunks.append((cur[0][0], cur[-1][1]))
    return chunks


def split_recursive(
    doc: SourceDocument,
    cfg: ChunkingConfig | None = None,
    token_counter: TokenCounter = count_tokens,
) -> list[Chunk]:
    """Split a document into overlapping chunks of at most chunk_size tokens.

    Raises EmptyDocument on empty or all-whitespace input. Oversized
    unsplittable atoms become single chunks with a warning.
    """
    cfg = cfg or ChunkingConfig()
    if not doc.text or not doc.text.strip():
        raise EmptyDocument(f"document {doc.doc_id!r} has no content")
    pieces = _split_pieces(
        doc.text, 0, len(doc.text), cfg.separators, cfg.chunk_size, token_counter
    )
    spans = _merge_pieces(doc.text, pieces, cfg.chunk_size, cfg.overlap, token_counter)
    return [
        Chunk(
            chunk_id=i,
            doc_id=doc.doc_id,
            text=doc.text[a:b],
            token_count=token_counter(doc.text[a:b]),
            char_span=(a, b),
        )
        for i, (a, b) in enumerate(spans)
    ]


def split_corpus(
    docs: Iterable[SourceDocument],
    cfg: ChunkingConfig | None = None,
    token_counter: TokenCounter = count_tokens,
) -> list[Chunk]:
    """Split several documents, renumbering chunk ids densely in corpus order."""
    chunks: list[Chunk] = []
    for doc in docs:
        for c in split_recursive(doc, cfg, token_counter):
            chunks.append(
                Chunk(len(chunks), c.doc_id, c.text, c.token_count, c.char_span)
            )
    return chunks


def corpus_stats(chunks: list[Chunk]) -> tuple[int, float]:
    """Return (n, s): chunk count and real-valued mean token size."""
    if not chunks:
        raise EmptyCorpus("no chunks")
    n = len(chunks)
    s = sum(c.token_count for c in chunks) / n
    return n, s


def chunk_to_dict(chunk: Chunk) -> dict:
    return {
        "chunk_id": chunk.chunk_id,
        "doc_id": chunk.doc_id,
        "text": chunk.text,
        "token_count": chunk.token_count,
        "span_start": chunk.char_span[0],
        "span_end": chunk.char_span[1],
    }


def chunk_from_dict(d: dict) -> Chunk:
    return Chunk(
        chunk_id=d["chunk_id"],
        doc_id=d["doc_id"],
        text=d["text"],
        token_count=d["token_count"],
        char_span=(d["span_start"], d["span_end"]),
    )


def chunks_to_jsonl(chunks: list[Chunk]) -> str:
    """Serialize chunks to JSON-lines, one object per line."""
    return "".join(json.dumps(chunk_to_dict(c), ensure_ascii=False) + "\n" for c in chunks)


def chunks_from_jsonl(text: str) -> list[Chunk]:
    return [chunk_from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def save_chunks(chunks: list[Chunk], path: str | Path) -> None:
    Path(path).write_text(chunks_to_jsonl(chunks), encoding="utf-8")


def load_chunks(path: str | Path) -> list[Chunk]:
    return chunks_from_jsonl(Path(path).read_text(encoding="utf-8"))
