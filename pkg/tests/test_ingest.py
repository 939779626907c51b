"""Chunker, tokenizer and corpus-stat contracts."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repvec.errors import EmptyCorpus, EmptyDocument
from repvec.ingest import (
    Chunk,
    ChunkingConfig,
    SourceDocument,
    chunks_from_jsonl,
    chunks_to_jsonl,
    corpus_stats,
    count_tokens,
    split_corpus,
    split_recursive,
)

from conftest import make_chunks


def _doc(text: str) -> SourceDocument:
    return SourceDocument(doc_id="d", text=text)


class TestCountTokens:
    def test_empty_is_zero(self):
        assert count_tokens("") == 0

    def test_whitespace_rule(self):
        assert count_tokens("hello world") == 2

    def test_deterministic(self):
        text = "some  text\nwith \t varied   spacing"
        assert count_tokens(text) == count_tokens(text)

    @given(st.text(), st.text())
    def test_monotone_under_concatenation(self, a, b):
        joined = count_tokens(a + b)
        assert joined >= max(count_tokens(a), count_tokens(b))


class TestSplitRecursive:
    def test_whole_text_fits_single_chunk(self):
        text = " ".join(f"w{i}" for i in range(10))
        chunks = split_recursive(_doc(text), ChunkingConfig(chunk_size=100, overlap=0))
        assert len(chunks) == 1
        assert chunks[0].text == text
        assert chunks[0].char_span == (0, len(text))
        assert chunks[0].token_count == 10

    def test_paragraph_split_hand_trace(self):
        # "A\n\nB\n\nC", chunk_size=1: the paragraph separator splits into
        # three one-token chunks.
        chunks = split_recursive(
            _doc("A\n\nB\n\nC"),
            ChunkingConfig(chunk_size=1, overlap=0, separators=("\n\n", "\n", " ", "")),
        )
        assert [c.text for c in chunks] == ["A", "B", "C"]
        assert [c.char_span for c in chunks] == [(0, 1), (3, 4), (6, 7)]
        assert [c.chunk_id for c in chunks] == [0, 1, 2]

    def test_character_fallback_on_unsplittable_text(self):
        #

        # No separator occurs; a character-counting tokenizer forces the
        # empty-string fallback to cut the text in half.
        text = "x" * 40
        chunks = split_recursive(
            _doc(text),
            ChunkingConfig(chunk_size=20, overlap=0),
            token_counter=len,
        )
        assert len(chunks) == 2
        assert [c.char_span for c in chunks] == [(0, 20), (20, 40)]
        assert "".join(c.text for c in chunks) == text

    def test_empty_document_rejected(self):
        with pytest.raises(EmptyDocument):
            split_recursive(_doc(""))
        with pytest.raises(EmptyDocument):
            split_recursive(_doc("  \n\t  "))

    def test_oversized_atom_kept_whole_with_warning(self):
        text = "tiny " + "y" * 50 + " tail"
        cfg = ChunkingConfig(chunk_size=10, overlap=0)
        with pytest.warns(UserWarning, match="unsplittable atom"):
            chunks = split_recursive(_doc(text), cfg, token_counter=len)
        oversized = [c for c in chunks if c.token_count > 10]
        assert len(oversized) == 1
        assert oversized[0].text == "y" * 50

    def test_size_bound_respected(self):
        text = "\n\n".join(" ".join(f"w{i}x{j}" for j in range(7)) for i in range(30))
        chunks = split_recursive(_doc(text), ChunkingConfig(chunk_size=16, overlap=4))
        assert all(c.token_count <= 16 for c in chunks)

    def test_overlap_carries_trailing_context(self):
        text = "\n\n".join(f"para{i} word{i}" for i in range(6))
        chunks = split_recursive(_doc(text), ChunkingConfig(chunk_size=4, overlap=2))
        assert len(chunks) > 1
        for prev, cur in zip(chunks, chunks[1:]):
            assert cur.char_span[0] < prev.char_span[1]  # spans overlap

    def test_determinism(self):
        text = "\n\n".join(f"some paragraph number {i} with words" for i in range(12))
        cfg = ChunkingConfig(chunk_size=10, overlap=3)
        first = split_recursive(_doc(text), cfg)
        second = split_recursive(_doc(text), cfg)
        assert first == second

    def test_spans_match_text(self):
        text = "\n\n".join(f"alpha beta gamma delta {i}" for i in range(9))
        chunks = split_recursive(_doc(text), ChunkingConfig(chunk_size=8, overlap=2))
        for c in chunks:
            a, b = c.char_span
            assert text[a:b] == c.text
            assert c.token_count == count_tokens(c.text)

    @settings(max_examples=60, deadline=None)
    @given(
        text=st.text(
            alphabet=st.sampled_from(list("ab \n")), min_size=1, max_size=300
        ).filter(lambda t: t.strip()),
        chunk_size=st.integers(min_value=1, max_value=12),
    )
    def test_coverage_gaps_are_whitespace_only(self, text, chunk_size):
        cfg = ChunkingConfig(chunk_size=chunk_size, overlap=0)
        chunks = split_recursive(_doc(text), cfg)
        covered = [False] * len(text)
        for c in chunks:
            a, b = c.char_span
            for i in range(a, b):
                covered[i] = True
        uncovered = "".join(ch for ch, used in zip(text, covered) if not used)
        assert uncovered.strip() == ""

    @settings(max_examples=60, deadline=None)
    @given(
        text=st.text(
            alphabet=st.sampled_from(list("abcd \n")), min_size=1, max_size=300
        ).filter(lambda t: t.strip()),
        chunk_size=st.integers(min_value=2, max_value=10),
    )
    def test_size_bound_unless_atomic(self, text, chunk_size):
        cfg = ChunkingConfig(chunk_size=chunk_size, overlap=1)
        import warnings as w

        with w.catch_warnings():
            w.simplefilter("ignore")
            chunks = split_recursive(_doc(text), cfg)
        for c in chunks:
            if c.token_count > chunk_size:
                # only permitted for single unsplittable atoms
                assert " " not in c.text.strip() and "\n" not in c.text.strip()


class TestSplitCorpus:
    def test_dense_ids_across_documents(self):
        docs = [
            SourceDocument("a", "one two three"),
            SourceDocument("b", "four five six"),
        ]
        chunks = split_corpus(docs, ChunkingConfig(chunk_size=2, overlap=0))
        assert [c.chunk_id for c in chunks] == list(range(len(chunks)))
        assert {c.doc_id for c in chunks} == {"a", "b"}


class TestCorpusStats:
    def test_mean_of_two(self):
        assert corpus_stats(make_chunks([4, 6])) == (2, 5.0)

    def test_first_reference_corpus_shape(self):
        n, s = corpus_stats(make_chunks([789] * 16))
        assert (n, s) == (16, 789.0)

    def test_second_reference_corpus_shape(self):
        n, s = corpus_stats(make_chunks([486] * 16))
        assert (n, s) == (16, 486.0)

    def test_mean_not_rounded(self):
        _, s = corpus_stats(make_chunks([1, 2]))
        assert s == 1.5

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            corpus_stats([])


class TestJsonl:
    def test_round_trip(self):
        chunks = [
            Chunk(0, "d", "hello world", 2, (0, 11)),
            Chunk(1, "d", "unicode éàü", 2, (12, 23)),
        ]
        assert chunks_from_jsonl(chunks_to_jsonl(chunks)) == chunks

    def test_line_fields(self):
        import json

        line = chunks_to_jsonl([Chunk(3, "doc9", "t x", 2, (5, 8))]).strip()
        assert json.loads(line) == {
            "chunk_id": 3,
            "doc_id": "doc9",
            "text": "t x",
            "token_count": 2,
            "span_start": 5,
            "span_end": 8,
        }
