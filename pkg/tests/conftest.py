"""Shared fixtures: the synthetic four-topic corpus and provider stubs."""

from __future__ import annotations

import numpy as np
import pytest

from repvec.index import Metric, build_index
from repvec.ingest import Chunk, ChunkingConfig, SourceDocument, split_recursive
from repvec.providers import DeterministicEmbeddingProvider

TOPIC_WORDS = {
    "cardio": ["heart", "artery", "valve", "rhythm", "pressure", "pump", "atrium", "aorta"],
    "neuro": ["brain", "neuron", "cortex", "synapse", "axon", "myelin", "ganglion", "dendrite"],
    "renal": ["kidney", "nephron", "filtrate", "urea", "sodium", "tubule", "glomerulus", "ureter"],
    "pulmo": ["lung", "alveoli", "oxygen", "airway", "pleura", "bronchus", "trachea", "larynx"],
}
# Planted cluster sizes; unequal so the word-cloud ratio check is non-trivial.
TOPIC_SIZES = {"cardio": 14, "neuro": 11, "renal": 9, "pulmo": 6}
FIXTURE_TOKENS_PER_CHUNK = 10
FIXTURE_DIMENSION = 256


def four_topic_paragraphs() -> list[str]:
    """40 ten-token paragraphs: 8 shared topic words + 2 chunk-unique words."""
    paragraphs = []
    i = 0
    for topic, size in TOPIC_SIZES.items():
        for _ in range(size):
            unique = f"case{i:02d} note{i:02d}"
            paragraphs.append(" ".join(TOPIC_WORDS[topic]) + " " + unique)
            i += 1
    return paragraphs


@pytest.fixture(scope="session")
def fixture_text() -> str:
    return "\n\n".join(four_topic_paragraphs())


@pytest.fixture(scope="session")
def fixture_chunks(fixture_text) -> list[Chunk]:
    doc = SourceDocument(doc_id="fixture", text=fixture_text)
    cfg = ChunkingConfig(chunk_size=FIXTURE_TOKENS_PER_CHUNK, overlap=0)
    chunks = split_recursive(doc, cfg)
    assert len(chunks) == 40
    return chunks


@pytest.fixture(scope="session")
def fixture_index(fixture_chunks):
    embedder = DeterministicEmbeddingProvider(FIXTURE_DIMENSION)
    vectors = embedder.embed_batch([c.text for c in fixture_chunks])
    return build_index(fixture_chunks, vectors, Metric.COSINE)


def make_chunks(token_counts: list[int], doc_id: str = "doc") -> list[Chunk]:
    """Synthetic chunks with prescribed token counts (texts of repeated words)."""
    chunks = []
    pos = 0
    for i, tc in enumerate(token_counts):
        text = " ".join(f"w{i}x{j}" for j in range(tc))
        chunks.append(Chunk(i, doc_id, text, tc, (pos, pos + len(text))))
        pos += len(text) + 1
    return chunks


def random_index(rng: np.random.Generator, n: int, d: int, metric=Metric.COSINE):
    vectors = rng.normal(size=(n, d))
    return build_index(make_chunks([3] * n), vectors, metric)
