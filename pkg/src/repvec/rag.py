"""Retrieve-and-stuff question answering over a built index.

The query is embedded, the top-k chunks are retrieved, and results are
stuffed best-first into the QA prompt until the next one would exceed the
context budget. Citations record exactly what was stuffed, in order. With
no chat provider configured, the answer is extractive: the stuffed chunk
texts themselves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import NoContext
from .index import VectorIndex, search_top_k
from .providers import ChatRequest
from .summarize import load_prompt

DEFAULT_TOP_K = 4
DEFAULT_CONTEXT_TOKENS = 3000


@dataclass(frozen=True)
class QaRequest:
    query: str
    top_k: int = DEFAULT_TOP_K
    max_context_tokens: int = DEFAULT_CONTEXT_TOKENS

    def __post_init__(self) -> None:
        if not self.query:
            raise ValueError("query must be non-empty")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class Citation:
    chunk_id: int
    score: float
    char_span: tuple[int, int]


@dataclass
class QaAnswer:
    answer: str
    citations: list[Citation]


def build_qa_prompt(context_texts: list[str], query: str) -> str:
    blocks = "\n\n".join(context_texts)
    return f"Context:\n\n{blocks}\n\nQuestion: {query}"


def answer(
    index: VectorIndex,
    req: QaRequest,
    embed_provider,
    chat_provider=None,
) -> QaAnswer:
    """Embed, retrieve, stuff greedily, and ask the provider.

    Stuffing walks the ranking best-first and stops at the first chunk that
    would push the cumulative token count over the budget. Raises NoContext
    when even the best-ranked chunk does not fit.
    """
    query_vec = embed_provider.embed_batch([req.query])[0]
    results = search_top_k(index, query_vec, req.top_k)

    by_id = {c.chunk_id: c for c in index.chunks}
    stuffed: list[Citation] = []
    texts: list[str] = []
    used = 0
    for res in results:
        chunk = by_id[res.chunk_id]
        if used + chunk.token_count > req.max_context_tokens:
            break
        stuffed.append(Citation(res.chunk_id, res.score, chunk.char_span))
        texts.append(chunk.text)
        used += chunk.token_count
    if not stuffed:
        raise NoContext(
            f"best chunk ({results[0].chunk_id}) exceeds the "
            f"{req.max_context_tokens}-token context budget"
        )

    user_prompt = build_qa_prompt(texts, req.query)
    if chat_provider is None:
        # Offline extractive answer: return the stuffed context verbatim.
        return QaAnswer(answer="\n\n".join(texts), citations=stuffed)
    response = chat_provider.chat(
        ChatRequest(system_prompt=load_prompt("qa"), user_prompt=user_prompt)
    )
    return QaAnswer(answer=response.text, citations=stuffed)


def answer_to_json(qa: QaAnswer) -> str:
    payload = {
        "answer": qa.answer,
        "citations": [{"chunk_id": c.chunk_id, "score": c.score} for c in qa.citations],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
