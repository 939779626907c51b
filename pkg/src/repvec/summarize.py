"""Combined extractive+abstractive summarization over representative chunks.

Per representative: three keywords (chat provider, with a TF-IDF extractive
fallback) and a mapped summary (chat provider, with a sentence-extraction
fallback). Keywords are distributed to every member of the representative's
cluster, word-cloud weights are the max-normalized keyword frequencies over
the mapped corpus, and the mapped summaries are reduced (hierarchically in
pairs when they exceed the chat context budget) into a final summary plus
key points. Every stage works offline: a missing or failing provider
degrades to the documented extractive rules, never to an error.
"""

from __future__ import annotations

import csv
import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .cluster import BudgetParams, ClusterModel, RepresentativeSet, select_representatives
from .errors import MissingCluster, ProviderUnavailable
from .index import VectorIndex
from .ingest import Chunk, count_tokens
from .project import Layout2D, TsneConfig, tsne
from .providers import ChatRequest, first_sentence

KEYWORDS_PER_CLUSTER = 3
DEFAULT_CONTEXT_BUDGET = 3000
DEFAULT_SUMMARY_TOKEN_CAP = 120

_WORD_RE = re.compile(r"[a-z]+")
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")
_BULLET_RE = re.compile(r"^\s*(?:[-*•]+|\d+[.)])\s*")

KeywordMap = dict[int, list[str]]
WordCloudData = dict[str, float]


@dataclass(frozen=True)
class KeywordSet:
    cluster_id: int
    keywords: tuple[str, ...]


@dataclass
class SummaryReport:
    mapped_summaries: dict[int, str]
    final_summary: str
    key_points: list[str]
    keyword_map: KeywordMap
    word_cloud: WordCloudData


@dataclass
class SummaryOutcome:
    """Everything one summarization run produces, for reporting and export."""

    report: SummaryReport
    layout: Layout2D
    model: ClusterModel
    representatives: RepresentativeSet
    k: int


def load_prompt(name: str) -> str:
    """Load a versioned prompt template, dropping '#' header lines."""
    raw = resources.files("repvec.data.prompts").joinpath(f"{name}.txt").read_text("utf-8")
    lines = [ln for ln in raw.splitlines() if not ln.startswith("#")]
    return "\n".join(lines).strip()


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    raw = resources.files("repvec.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        ln.strip() for ln in raw.splitlines() if ln.strip() and not ln.startswith("#")
    )


def tokenize(text: str) -> list[str]:
    """Lowercase alphabetic tokens of length >= 2."""
    return [t for t in _WORD_RE.findall(text.lower()) if len(t) >= 2]


def split_sentences(text: str) -> list[str]:
    parts = _SENTENCE_RE.split(text.strip())
    return [p for p in parts if p.strip()]


class TfidfModel:
    """Corpus-level document frequencies for extractive fallbacks.

    Terms are ranked by tf * ln(n / df), ties broken alphabetically;
    stopwords never score.
    """

    def __init__(self, texts: list[str]):
        self.n = len(texts)
        stop = stopwords()
        self.df: Counter[str] = Counter()
        for text in texts:
            self.df.update({t for t in tokenize(text) if t not in stop})

    def rank_terms(self, text: str) -> list[tuple[str, float]]:
        stop = stopwords()
        tf = Counter(t for t in tokenize(text) if t not in stop)
        scored = [
            (term, count * math.log(self.n / self.df.get(term, 1)))
            for term, count in tf.items()
        ]
        scored.sort(key=lambda item: (-item[1], item[0]))
        return scored

    def top_terms(self, text: str, count: int, exclude: set[str] | None = None) -> list[str]:
        exclude = exclude or set()
        out = []
        for term, _ in self.rank_terms(text):
            if term not in exclude:
                out.append(term)
            if len(out) == count:
                break
        return out

    def sentence_score(self, sentence: str) -> float:
        """Sum of the tf-idf weights of the sentence's distinct terms."""
        stop = stopwords()
        terms = {t for t in tokenize(sentence) if t not in stop}
        return sum(math.log(self.n / self.df.get(t, 1)) for t in terms if self.df.get(t))


def _parse_keyword_reply(text: str) -> list[str]:
    parts = re.split(r"[;,\n]", text)
    seen: list[str] = []
    for part in parts:
        cleaned = _BULLET_RE.sub("", part).strip().lower()
        if cleaned and cleaned not in seen:
            seen.append(cleaned)
    return seen


def generate_keywords(rep: Chunk, chat_provider, tfidf: TfidfModel) -> list[str]:
    """Exactly three lowercase keywords for one representative chunk.

    Provider output is parsed and deduplicated; shortfalls are topped up
    from the chunk's top TF-IDF terms (repeat-free). A missing or failing
    provider falls through entirely to the extractive route.
    """
    keywords: list[str] = []
    if chat_provider is not None:
        try:
            reply = chat_provider.chat(
                ChatRequest(system_prompt=load_prompt("keywords"), user_prompt=rep.text)
            )
            keywords = _parse_keyword_reply(reply.text)[:KEYWORDS_PER_CLUSTER]
        except ProviderUnavailable:
            keywords = []
    if len(keywords) < KEYWORDS_PER_CLUSTER:
        keywords += tfidf.top_terms(
            rep.text, KEYWORDS_PER_CLUSTER - len(keywords), exclude=set(keywords)
        )
    if len(keywords) < KEYWORDS_PER_CLUSTER:
        # Vocabulary exhausted (tiny chunk): fall back to raw token counts,
        # then to synthetic placeholders, keeping the set repeat-free.
        counts = Counter(tokenize(rep.text))
        for term, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
            if term not in keywords:
                keywords.append(term)
            if len(keywords) == KEYWORDS_PER_CLUSTER:
                break
    i = 0
    while len(keywords) < KEYWORDS_PER_CLUSTER:
        candidate = f"term{i}"
        if candidate not in keywords:
            keywords.append(candidate)
        i += 1
    return keywords[:KEYWORDS_PER_CLUSTER]


def map_keywords(
    model: ClusterModel,
    sets: list[KeywordSet],
    chunk_ids: list[int] | None = None,
) -> KeywordMap:
    """Distribute each cluster's keywords to every member chunk."""
    by_cluster = {s.cluster_id: list(s.keywords) for s in sets}
    missing = [cid for cid in range(model.k) if cid not in by_cluster]
    if missing:
        raise MissingCluster(f"no keyword set for clusters {missing}")
    ids = chunk_ids if chunk_ids is not None else list(range(len(model.assignments)))
    return {
        ids[row]: list(by_cluster[int(cid)])
        for row, cid in enumerate(model.assignments)
    }


def word_cloud_frequencies(km: KeywordMap) -> WordCloudData:
    """Keyword weights: occurrence counts across chunks, max-normalized to 1.0."""
    if not km:
        raise ValueError("keyword map is empty")
    counts: Counter[str] = Counter()
    for keywords in km.values():
        counts.update(keywords)
    peak = max(counts.values())
    return {kw: counts[kw] / peak for kw in sorted(counts, key=lambda w: (-counts[w], w))}


def extractive_summary(
    text: str, tfidf: TfidfModel, max_tokens: int = DEFAULT_SUMMARY_TOKEN_CAP
) -> str:
    """Offline summary rule: first sentence, then top TF-IDF sentences.

    Remaining sentences are ranked by descending TF-IDF score (document
    order on ties) and appended while the whitespace token total stays
    within the cap, then emitted in document order.
    """
    sentences = split_sentences(text)
    if not sentences:
        return text.strip()
    chosen = {0}
    total = count_tokens(sentences[0])
    ranked = sorted(
        range(1, len(sentences)),
        key=lambda i: (-tfidf.sentence_score(sentences[i]), i),
    )
    for i in ranked:
        cost = count_tokens(sentences[i])
        if total + cost > max_tokens:
            break
        chosen.add(i)
        total += cost
    return " ".join(sentences[i] for i in sorted(chosen))


def map_summaries(
    reps: RepresentativeSet,
    chat_provider,
    tfidf: TfidfModel,
    max_tokens: int = DEFAULT_SUMMARY_TOKEN_CAP,
) -> dict[int, str]:
    """One summary per representative chunk, keyed by cluster id."""
    if not reps.chunks:
        raise ValueError("representative set has no chunks attached")
    system = load_prompt("map_summary") if chat_provider is not None else ""
    out: dict[int, str] = {}
    for cluster_id, chunk in enumerate(reps.chunks):
        summary = None
        if chat_provider is not None:
            try:
                summary = chat_provider.chat(
                    ChatRequest(system_prompt=system, user_prompt=chunk.text)
                ).text
            except ProviderUnavailable:
                summary = None
        if summary is None:
            summary = extractive_summary(chunk.text, tfidf, max_tokens)
        out[cluster_id] = summary
    return out


def parse_key_points(text: str) -> list[str]:
    """Parse a bulleted reply: split lines and inline bullet markers."""
    points: list[str] = []
    for line in text.splitlines():
        for part in line.split("•"):
            cleaned = _BULLET_RE.sub("", part).strip()
            if cleaned:
                points.append(cleaned)
    return points


def reduce_summary(
    mapped: dict[int, str],
    chat_provider,
    context_budget: int = DEFAULT_CONTEXT_BUDGET,
) -> tuple[str, list[str]]:
    """Reduce mapped summaries to (final_summary, key_points).

    While the concatenation exceeds the context budget, adjacent summaries
    are reduced in pairs (an odd tail carries over); the surviving text gets
    one final summary call and one key-point call. Offline or on provider
    failure: the final summary is the concatenation and each key point is
    the first sentence of a mapped summary, in cluster order.
    """
    if not mapped:
        raise ValueError("no mapped summaries to reduce")
    ordered = [mapped[cid] for cid in sorted(mapped)]

    def fallback() -> tuple[str, list[str]]:
        final = "\n\n".join(ordered)
        points = [first_sentence(t) for t in ordered if first_sentence(t)]
        return final, points or [final]

    if chat_provider is None:
        return fallback()

    reduce_system = load_prompt("reduce_summary")
    points_system = load_prompt("key_points")
    texts = list(ordered)
    try:
        while len(texts) > 1 and count_tokens("\n\n".join(texts)) > context_budget:
            next_round = []
            for i in range(0, len(texts) - 1, 2):
                merged = chat_provider.chat(
                    ChatRequest(
                        system_prompt=reduce_system,
                        user_prompt=texts[i] + "\n\n" + texts[i + 1],
                    )
                ).text
                next_round.append(merged)
            if len(texts) % 2:
                next_round.append(texts[-1])
            texts = next_round
        reduce_input = "\n\n".join(texts)
        final = chat_provider.chat(
            ChatRequest(system_prompt=reduce_system, user_prompt=reduce_input)
        ).text
        raw_points = chat_provider.chat(
            ChatRequest(system_prompt=points_system, user_prompt=reduce_input)
        ).text
    except ProviderUnavailable:
        return fallback()
    points = parse_key_points(raw_points)
    return final, points or [first_sentence(final) or final]


def summarize_document(
    index: VectorIndex,
    budget: BudgetParams,
    chat_provider=None,
    tsne_cfg: TsneConfig | None = None,
    seed: int = 0,
    context_budget: int = DEFAULT_CONTEXT_BUDGET,
) -> SummaryOutcome:
    """Full pipeline: representatives -> keywords -> word cloud -> map-reduce -> t-SNE.

    Deterministic given (index, budget, seed, stub providers); offline with
    chat_provider=None.
    """
    reps, model = select_representatives(index, budget, seed=seed)
    tfidf = TfidfModel([c.text for c in index.chunks])

    keyword_sets = [
        KeywordSet(cluster_id=cid, keywords=tuple(generate_keywords(chunk, chat_provider, tfidf)))
        for cid, chunk in enumerate(reps.chunks)
    ]
    keyword_map = map_keywords(
        model, keyword_sets, chunk_ids=[c.chunk_id for c in index.chunks]
    )
    word_cloud = word_cloud_frequencies(keyword_map)
    mapped = map_summaries(reps, chat_provider, tfidf)
    final_summary, key_points = reduce_summary(mapped, chat_provider, context_budget)
    layout = tsne(index.vectors, tsne_cfg or TsneConfig(seed=seed))

    report = SummaryReport(
        mapped_summaries=mapped,
        final_summary=final_summary,
        key_points=key_points,
        keyword_map=keyword_map,
        word_cloud=word_cloud,
    )
    return SummaryOutcome(
        report=report, layout=layout, model=model, representatives=reps, k=model.k
    )


def report_to_json(report: SummaryReport, k: int) -> str:
    payload = {
        "k": k,
        "final_summary": report.final_summary,
        "key_points": report.key_points,
        "mapped_summaries": {str(cid): report.mapped_summaries[cid] for cid in sorted(report.mapped_summaries)},
        "keyword_map": {str(cid): report.keyword_map[cid] for cid in sorted(report.keyword_map)},
        "word_cloud": report.word_cloud,
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def report_to_markdown(report: SummaryReport, k: int) -> str:
    lines = ["# Summary report", "", f"Representatives: {k}", "", "## Final summary", ""]
    lines.append(report.final_summary)
    lines += ["", "## Key points", ""]
    lines += [f"- {p}" for p in report.key_points]
    lines += ["", "## Top keywords", ""]
    for kw, weight in list(report.word_cloud.items())[:15]:
        lines.append(f"- {kw} ({weight:.3f})")
    lines += ["", "## Section summaries", ""]
    for cid in sorted(report.mapped_summaries):
        lines.append(f"### Cluster {cid}")
        lines.append("")
        lines.append(report.mapped_summaries[cid])
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def write_report(report: SummaryReport, k: int, json_path: str | Path, md_path: str | Path) -> None:
    Path(json_path).write_text(report_to_json(report, k), encoding="utf-8")
    Path(md_path).write_text(report_to_markdown(report, k), encoding="utf-8")


def write_wordcloud_csv(word_cloud: WordCloudData, path: str | Path) -> None:
    """Plot-ready CSV: keyword, weight; descending weight, alphabetical ties."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["keyword", "weight"])
        for kw, weight in word_cloud.items():
            writer.writerow([kw, repr(float(weight))])
